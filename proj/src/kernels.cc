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

#include "snoreid/kernels.h"

#include <algorithm>
#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "fft.h"
#include "snoreid/error.h"

namespace snoreid::kernels {

namespace {

// Per-row bodies shared by both variants so element-wise kernels agree bitwise.

void PowerRow(std::span<const double> samples, std::span<const double> window,
              std::size_t start, int n_fft, std::span<double> out) {
  std::vector<double> frame(window.size());
  for (std::size_t n = 0; n < window.size(); ++n) {
    frame[n] = samples[start + n] * window[n];
  }
  internal::RealPowerSpectrum(frame, n_fft, out);
}

void CepstrumRow(std::span<const double> power, const Matrix& filterbank,
                 const Matrix& dct, double log_floor, std::span<double> out) {
  const std::size_t num_mel = filterbank.rows();
  std::vector<double> log_mel(num_mel);
  for (std::size_t m = 0; m < num_mel; ++m) {
    auto weights = filterbank.row(m);
    double energy = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k) energy += weights[k] * power[k];
    log_mel[m] = std::log(std::max(energy, log_floor));
  }
  for (std::size_t c = 0; c < dct.rows(); ++c) {
    auto basis = dct.row(c);
    double acc = 0.0;
    for (std::size_t m = 0; m < num_mel; ++m) acc += basis[m] * log_mel[m];
    out[c] = acc;
  }
}

double PosteriorRow(std::span<const double> frame, const Matrix& means,
                    const Matrix& inv_vars, std::span<const double> log_consts,
                    std::span<double> post) {
  const std::size_t num_comp = means.rows();
  const std::size_t dim = means.cols();
  double max_log = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < num_comp; ++k) {
    auto mu = means.row(k);
    auto iv = inv_vars.row(k);
    double quad = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      const double diff = frame[d] - mu[d];
      quad += diff * diff * iv[d];
    }
    post[k] = log_consts[k] - 0.5 * quad;
    max_log = std::max(max_log, post[k]);
  }
  double total = 0.0;
  for (std::size_t k = 0; k < num_comp; ++k) {
    post[k] = std::exp(post[k] - max_log);
    total += post[k];
  }
  for (std::size_t k = 0; k < num_comp; ++k) post[k] /= total;
  return max_log + std::log(total);
}

// Accumulates frames [begin, end) into occupancy / first-order sums.
void AccumulateRange(const Matrix& frames, const Matrix& posteriors,
                     std::size_t begin, std::size_t end, MixtureStats* stats) {
  const std::size_t num_comp = posteriors.cols();
  const std::size_t dim = frames.cols();
  for (std::size_t t = begin; t < end; ++t) {
    auto o = frames.row(t);
    auto g = posteriors.row(t);
    for (std::size_t k = 0; k < num_comp; ++k) {
      stats->occupancy[k] += g[k];
      auto acc = stats->first_order.row(k);
      for (std::size_t d = 0; d < dim; ++d) acc[d] += g[k] * o[d];
    }
  }
}

void DeviationRange(const Matrix& frames, const Matrix& posteriors,
                    const Matrix& means, std::size_t begin, std::size_t end,
                    Matrix* out) {
  const std::size_t num_comp = posteriors.cols();
  const std::size_t dim = frames.cols();
  for (std::size_t t = begin; t < end; ++t) {
    auto o = frames.row(t);
    auto g = posteriors.row(t);
    for (std::size_t k = 0; k < num_comp; ++k) {
      auto mu = means.row(k);
      auto acc = out->row(k);
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = o[d] - mu[d];
        acc[d] += g[k] * diff * diff;
      }
    }
  }
}

MixtureStats EmptyStats(std::size_t num_comp, std::size_t dim) {
  return {std::vector<double>(num_comp, 0.0), Matrix(num_comp, dim)};
}

std::size_t NumChunks(std::size_t n) {
  return (n + kReductionChunk - 1) / kReductionChunk;
}

// out[b] = bias + sum_i x[b][i] * w[o][i], accumulated in i order.
void DenseForwardRow(std::span<const double> x, const Matrix& wt,
                     std::span<const double> b, std::span<double> y) {
  std::copy(b.begin(), b.end(), y.begin());
  const std::size_t outputs = y.size();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    auto wrow = wt.row(i);
    for (std::size_t o = 0; o < outputs; ++o) y[o] += xi * wrow[o];
  }
}

Matrix Transpose(const Matrix& m) {
  Matrix t(m.cols(), m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) t(c, r) = m(r, c);
  }
  return t;
}

void WeightGradRow(const Matrix& delta, const Matrix& x, std::size_t o,
                   std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t b = 0; b < delta.rows(); ++b) {
    const double g = delta(b, o);
    if (g == 0.0) continue;
    auto xrow = x.row(b);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += g * xrow[i];
  }
}

void InputGradRow(std::span<const double> delta, const Matrix& w,
                  std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t o = 0; o < delta.size(); ++o) {
    const double g = delta[o];
    if (g == 0.0) continue;
    auto wrow = w.row(o);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += g * wrow[i];
  }
}

double Dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

void CheckDense(const Matrix& x, const Matrix& w, std::span<const double> b) {
  if (x.cols() != w.cols() || b.size() != w.rows()) {
    throw Error(ErrorCode::kInvalidArgument, "dense layer shape mismatch");
  }
}

}  // namespace

namespace serial {

Matrix FramePowerSpectra(std::span<const double> samples,
                         std::span<const double> window, int frame_shift,
                         int n_fft) {
  const std::size_t len = window.size();
  const std::size_t num_frames =
      samples.size() < len ? 0 : (samples.size() - len) / frame_shift + 1;
  Matrix out(num_frames, n_fft / 2 + 1);
  for (std::size_t t = 0; t < num_frames; ++t) {
    PowerRow(samples, window, t * frame_shift, n_fft, out.row(t));
  }
  return out;
}

Matrix MelCepstra(const Matrix& power, const Matrix& filterbank,
                  const Matrix& dct, double log_floor) {
  Matrix out(power.rows(), dct.rows());
  for (std::size_t t = 0; t < power.rows(); ++t) {
    CepstrumRow(power.row(t), filterbank, dct, log_floor, out.row(t));
  }
  return out;
}

std::vector<double> GmmPosteriors(const Matrix& frames, const Matrix& means,
                                  const Matrix& inv_vars,
                                  std::span<const double> log_consts,
                                  Matrix* posteriors) {
  std::vector<double> ll(frames.rows());
  std::vector<double> scratch(means.rows());
  if (posteriors) *posteriors = Matrix(frames.rows(), means.rows());
  for (std::size_t t = 0; t < frames.rows(); ++t) {
    std::span<double> post = posteriors ? posteriors->row(t) : std::span<double>(scratch);
    ll[t] = PosteriorRow(frames.row(t), means, inv_vars, log_consts, post);
  }
  return ll;
}

MixtureStats AccumulateMixtureStats(const Matrix& frames,
                                    const Matrix& posteriors) {
  MixtureStats stats = EmptyStats(posteriors.cols(), frames.cols());
  AccumulateRange(frames, posteriors, 0, frames.rows(), &stats);
  return stats;
}

Matrix WeightedSquaredDeviation(const Matrix& frames, const Matrix& posteriors,
                                const Matrix& means) {
  Matrix out(means.rows(), means.cols());
  DeviationRange(frames, posteriors, means, 0, frames.rows(), &out);
  return out;
}

double Sum(std::span<const double> values) {
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc;
}

Matrix DenseForward(const Matrix& x, const Matrix& w, std::span<const double> b) {
  CheckDense(x, w, b);
  const Matrix wt = Transpose(w);
  Matrix y(x.rows(), w.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) DenseForwardRow(x.row(r), wt, b, y.row(r));
  return y;
}

Matrix DenseWeightGrad(const Matrix& delta, const Matrix& x) {
  Matrix out(delta.cols(), x.cols());
  for (std::size_t o = 0; o < delta.cols(); ++o) WeightGradRow(delta, x, o, out.row(o));
  return out;
}

Matrix DenseInputGrad(const Matrix& delta, const Matrix& w) {
  Matrix out(delta.rows(), w.cols());
  for (std::size_t b = 0; b < delta.rows(); ++b) InputGradRow(delta.row(b), w, out.row(b));
  return out;
}

Matrix DotScores(const Matrix& tests, const Matrix& enrolled) {
  Matrix out(tests.rows(), enrolled.rows());
  for (std::size_t a = 0; a < tests.rows(); ++a) {
    for (std::size_t s = 0; s < enrolled.rows(); ++s) {
      out(a, s) = Dot(tests.row(a), enrolled.row(s));
    }
  }
  return out;
}

}  // namespace serial

namespace omp {

Matrix FramePowerSpectra(std::span<const double> samples,
                         std::span<const double> window, int frame_shift,
                         int n_fft) {
  const std::size_t len = window.size();
  const std::size_t num_frames =
      samples.size() < len ? 0 : (samples.size() - len) / frame_shift + 1;
  Matrix out(num_frames, n_fft / 2 + 1);
  const auto n = static_cast<long>(num_frames);
#pragma omp parallel for schedule(static)
  for (long t = 0; t < n; ++t) {
    PowerRow(samples, window, static_cast<std::size_t>(t) * frame_shift, n_fft,
             out.row(t));
  }
  return out;
}

Matrix MelCepstra(const Matrix& power, const Matrix& filterbank,
                  const Matrix& dct, double log_floor) {
  Matrix out(power.rows(), dct.rows());
  const auto n = static_cast<long>(power.rows());
#pragma omp parallel for schedule(static)
  for (long t = 0; t < n; ++t) {
    CepstrumRow(power.row(t), filterbank, dct, log_floor, out.row(t));
  }
  return out;
}

std::vector<double> GmmPosteriors(const Matrix& frames, const Matrix& means,
                                  const Matrix& inv_vars,
                                  std::span<const double> log_consts,
                                  Matrix* posteriors) {
  std::vector<double> ll(frames.rows());
  if (posteriors) *posteriors = Matrix(frames.rows(), means.rows());
  const auto n = static_cast<long>(frames.rows());
#pragma omp parallel
  {
    std::vector<double> scratch(means.rows());
#pragma omp for schedule(static)
    for (long t = 0; t < n; ++t) {
      std::span<double> post =
          posteriors ? posteriors->row(t) : std::span<double>(scratch);
      ll[t] = PosteriorRow(frames.row(t), means, inv_vars, log_consts, post);
    }
  }
  return ll;
}

MixtureStats AccumulateMixtureStats(const Matrix& frames,
                                    const Matrix& posteriors) {
  const std::size_t num_comp = posteriors.cols();
  const std::size_t dim = frames.cols();
  const std::size_t chunks = NumChunks(frames.rows());
  std::vector<MixtureStats> partial(chunks, EmptyStats(num_comp, dim));
  const auto n = static_cast<long>(chunks);
#pragma omp parallel for schedule(static)
  for (long c = 0; c < n; ++c) {
    const std::size_t begin = static_cast<std::size_t>(c) * kReductionChunk;
    const std::size_t end = std::min(frames.rows(), begin + kReductionChunk);
    AccumulateRange(frames, posteriors, begin, end, &partial[c]);
  }
  MixtureStats total = EmptyStats(num_comp, dim);
  for (const MixtureStats& p : partial) {
    for (std::size_t k = 0; k < num_comp; ++k) total.occupancy[k] += p.occupancy[k];
    for (std::size_t i = 0; i < total.first_order.data().size(); ++i) {
      total.first_order.data()[i] += p.first_order.data()[i];
    }
  }
  return total;
}

Matrix WeightedSquaredDeviation(const Matrix& frames, const Matrix& posteriors,
                                const Matrix& means) {
  const std::size_t chunks = NumChunks(frames.rows());
  std::vector<Matrix> partial(chunks, Matrix(means.rows(), means.cols()));
  const auto n = static_cast<long>(chunks);
#pragma omp parallel for schedule(static)
  for (long c = 0; c < n; ++c) {
    const std::size_t begin = static_cast<std::size_t>(c) * kReductionChunk;
    const std::size_t end = std::min(frames.rows(), begin + kReductionChunk);
    DeviationRange(frames, posteriors, means, begin, end, &partial[c]);
  }
  Matrix total(means.rows(), means.cols());
  for (const Matrix& p : partial) {
    for (std::size_t i = 0; i < total.data().size(); ++i) total.data()[i] += p.data()[i];
  }
  return total;
}

double Sum(std::span<const double> values) {
  const std::size_t chunks = NumChunks(values.size());
  std::vector<double> partial(chunks, 0.0);
  const auto n = static_cast<long>(chunks);
#pragma omp parallel for schedule(static)
  for (long c = 0; c < n; ++c) {
    const std::size_t begin = static_cast<std::size_t>(c) * kReductionChunk;
    const std::size_t end = std::min(values.size(), begin + kReductionChunk);
    double acc = 0.0;
    for (std::size_t i = begin; i < end; ++i) acc += values[i];
    partial[c] = acc;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

Matrix DenseForward(const Matrix& x, const Matrix& w, std::span<const double> b) {
  CheckDense(x, w, b);
  const Matrix wt = Transpose(w);
  Matrix y(x.rows(), w.rows());
  const auto n = static_cast<long>(x.rows());
#pragma omp parallel for schedule(static)
  for (long r = 0; r < n; ++r) DenseForwardRow(x.row(r), wt, b, y.row(r));
  return y;
}

Matrix DenseWeightGrad(const Matrix& delta, const Matrix& x) {
  Matrix out(delta.cols(), x.cols());
  const auto n = static_cast<long>(delta.cols());
#pragma omp parallel for schedule(static)
  for (long o = 0; o < n; ++o) WeightGradRow(delta, x, o, out.row(o));
  return out;
}

Matrix DenseInputGrad(const Matrix& delta, const Matrix& w) {
  Matrix out(delta.rows(), w.cols());
  const auto n = static_cast<long>(delta.rows());
#pragma omp parallel for schedule(static)
  for (long b = 0; b < n; ++b) InputGradRow(delta.row(b), w, out.row(b));
  return out;
}

Matrix DotScores(const Matrix& tests, const Matrix& enrolled) {
  Matrix out(tests.rows(), enrolled.rows());
  const auto n = static_cast<long>(tests.rows() * enrolled.rows());
  const std::size_t cols = enrolled.rows();
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    const std::size_t a = static_cast<std::size_t>(i) / cols;
    const std::size_t s = static_cast<std::size_t>(i) % cols;
    out(a, s) = Dot(tests.row(a), enrolled.row(s));
  }
  return out;
}

}  // namespace omp

void SetNumThreads(int n) {
#ifdef _OPENMP
  omp_set_num_threads(std::max(1, n));
#else
  (void)n;
#endif
}

int MaxThreads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace snoreid::kernels
