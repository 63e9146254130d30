// Copyright (c) 2026 The snoreid Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SNOREID_KERNELS_H_
#define SNOREID_KERNELS_H_

// Data-parallel inner loops. Every kernel has a straightforward serial
// reference in `serial` and an OpenMP version in `omp`; the library calls the
// `omp` versions. Element-wise kernels give bitwise-identical results in both
// variants. Reductions in `omp` sum fixed-size chunks and combine the partials
// in chunk order, so their results do not depend on the thread count, but
// they may differ from the serial reference in the last bits.

#include <cstddef>
#include <span>
#include <vector>

#include "snoreid/matrix.h"

namespace snoreid::kernels {

// Frames per partial sum in chunked reductions.
inline constexpr std::size_t kReductionChunk = 256;

// Zeroth and first order sufficient statistics of a mixture.
struct MixtureStats {
  std::vector<double> occupancy;  // sum_t gamma_k(t)
  Matrix first_order;             // K x D, sum_t gamma_k(t) * o_t
};

namespace serial {

// Hann-windowed frames -> T x (n_fft/2 + 1) power spectra.
Matrix FramePowerSpectra(std::span<const double> samples,
                         std::span<const double> window, int frame_shift,
                         int n_fft);
// Power spectra -> cepstra: log(max(fb * p, floor)) then dct.
Matrix MelCepstra(const Matrix& power, const Matrix& filterbank,
                  const Matrix& dct, double log_floor);

// log_consts[k] = log w_k - 0.5 * (D log 2pi + sum_d log var_kd).
// Writes posteriors (T x K) when non-null, returns per-frame log p(o_t).
std::vector<double> GmmPosteriors(const Matrix& frames, const Matrix& means,
                                  const Matrix& inv_vars,
                                  std::span<const double> log_consts,
                                  Matrix* posteriors);
MixtureStats AccumulateMixtureStats(const Matrix& frames,
                                    const Matrix& posteriors);
// K x D, sum_t gamma_k(t) * (o_t - mu_k)^2.
Matrix WeightedSquaredDeviation(const Matrix& frames, const Matrix& posteriors,
                                const Matrix& means);
double Sum(std::span<const double> values);

// y = x * w^T + b for x (B x I), w (O x I).
Matrix DenseForward(const Matrix& x, const Matrix& w, std::span<const double> b);
// delta^T * x, (O x I).
Matrix DenseWeightGrad(const Matrix& delta, const Matrix& x);
// delta * w, (B x I).
Matrix DenseInputGrad(const Matrix& delta, const Matrix& w);

// Row-by-row dot products, (A x S).
Matrix DotScores(const Matrix& tests, const Matrix& enrolled);

}  // namespace serial

namespace omp {

Matrix FramePowerSpectra(std::span<const double> samples,
                         std::span<const double> window, int frame_shift,
                         int n_fft);
Matrix MelCepstra(const Matrix& power, const Matrix& filterbank,
                  const Matrix& dct, double log_floor);
std::vector<double> GmmPosteriors(const Matrix& frames, const Matrix& means,
                                  const Matrix& inv_vars,
                                  std::span<const double> log_consts,
                                  Matrix* posteriors);
MixtureStats AccumulateMixtureStats(const Matrix& frames,
                                    const Matrix& posteriors);
Matrix WeightedSquaredDeviation(const Matrix& frames, const Matrix& posteriors,
                                const Matrix& means);
double Sum(std::span<const double> values);
Matrix DenseForward(const Matrix& x, const Matrix& w, std::span<const double> b);
Matrix DenseWeightGrad(const Matrix& delta, const Matrix& x);
Matrix DenseInputGrad(const Matrix& delta, const Matrix& w);
Matrix DotScores(const Matrix& tests, const Matrix& enrolled);

}  // namespace omp

// Caps the OpenMP team size for subsequent kernels; no-op without OpenMP.
void SetNumThreads(int n);
int MaxThreads();

}  // namespace snoreid::kernels

#endif  // SNOREID_KERNELS_H_
