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

#include "fft.h"

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <map>
#include <mutex>
#include <vector>

#include "snoreid/error.h"

namespace snoreid::internal {

namespace {

// The planner is not thread-safe; execution of an existing plan on new arrays
// is. Plans are never destroyed.
fftw_plan PlanFor(int n_fft) {
  static std::mutex mu;
  static std::map<int, fftw_plan> plans;
  std::lock_guard<std::mutex> lock(mu);
  auto it = plans.find(n_fft);
  if (it != plans.end()) return it->second;
  std::vector<double> in(n_fft);
  std::vector<std::complex<double>> out(n_fft / 2 + 1);
  fftw_plan plan = fftw_plan_dft_r2c_1d(
      n_fft, in.data(), reinterpret_cast<fftw_complex*>(out.data()),
      FFTW_ESTIMATE | FFTW_UNALIGNED);
  plans.emplace(n_fft, plan);
  return plan;
}

}  // namespace

void RealPowerSpectrum(std::span<const double> frame, int n_fft,
                       std::span<double> out) {
  if (n_fft <= 0 || frame.size() > static_cast<std::size_t>(n_fft) ||
      out.size() != static_cast<std::size_t>(n_fft / 2 + 1)) {
    throw Error(ErrorCode::kInvalidArgument, "power spectrum size mismatch");
  }
  fftw_plan plan = PlanFor(n_fft);
  std::vector<double> in(n_fft, 0.0);
  std::copy(frame.begin(), frame.end(), in.begin());
  std::vector<std::complex<double>> spec(n_fft / 2 + 1);
  fftw_execute_dft_r2c(plan, in.data(),
                       reinterpret_cast<fftw_complex*>(spec.data()));
  for (std::size_t k = 0; k < spec.size(); ++k) out[k] = std::norm(spec[k]);
}

}  // namespace snoreid::internal
