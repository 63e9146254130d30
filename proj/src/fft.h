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

#ifndef SNOREID_SRC_FFT_H_
#define SNOREID_SRC_FFT_H_

#include <span>

namespace snoreid::internal {

// Writes |X_k|^2, k = 0..n_fft/2, of the frame zero-padded to n_fft.
// Thread-safe; plans are created once per size and shared.
void RealPowerSpectrum(std::span<const double> frame, int n_fft,
                       std::span<double> out);

}  // namespace snoreid::internal

#endif  // SNOREID_SRC_FFT_H_
