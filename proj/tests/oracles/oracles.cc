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

#include "oracles/oracles.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

namespace snoreid::oracle {

namespace {

constexpr long double kPi = std::numbers::pi_v<long double>;

long double Mel(long double hz) { return 2595.0L * std::log10(1.0L + hz / 700.0L); }
long double MelToHz(long double mel) { return 700.0L * (std::pow(10.0L, mel / 2595.0L) - 1.0L); }

long double LogSumExp(const std::vector<long double>& v) {
  long double m = -std::numeric_limits<long double>::infinity();
  for (long double x : v) m = std::max(m, x);
  if (std::isinf(m)) return m;
  long double s = 0.0L;
  for (long double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

std::vector<long double> ComponentLogDensities(const GmmModel& model,
                                               const std::vector<double>& x) {
  std::vector<long double> out(model.num_components());
  for (std::size_t k = 0; k < model.num_components(); ++k) {
    long double q = 0.0L;
    for (std::size_t d = 0; d < x.size(); ++d) {
      const long double v = model.variances()(k, d);
      const long double diff = x[d] - static_cast<long double>(model.means()(k, d));
      q += diff * diff / v + std::log(2.0L * kPi * v);
    }
    out[k] = std::log(static_cast<long double>(model.weights()[k])) - 0.5L * q;
  }
  return out;
}

}  // namespace

Rows ToRows(const Matrix& m) {
  Rows out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) out[r].assign(m.row(r).begin(), m.row(r).end());
  return out;
}

std::vector<long double> DirectPowerSpectrum(const std::vector<long double>& frame, int n_fft) {
  // Twiddles indexed by the exactly reduced phase (k * n) mod n_fft.
  std::vector<long double> cos_table(n_fft), sin_table(n_fft);
  for (int j = 0; j < n_fft; ++j) {
    const long double angle = 2.0L * kPi * static_cast<long double>(j) / n_fft;
    cos_table[j] = std::cos(angle);
    sin_table[j] = std::sin(angle);
  }
  std::vector<long double> out(n_fft / 2 + 1);
  for (int k = 0; k <= n_fft / 2; ++k) {
    long double re = 0.0L, im = 0.0L;
    for (std::size_t n = 0; n < frame.size(); ++n) {
      const std::size_t j = (k * n) % n_fft;
      re += frame[n] * cos_table[j];
      im -= frame[n] * sin_table[j];
    }
    out[k] = re * re + im * im;
  }
  return out;
}

Rows Mfcc(const std::vector<double>& samples, const MfccConfig& c) {
  const int len = c.frame_length, hop = c.frame_shift, bins = c.n_fft / 2 + 1;
  const std::size_t frames = (samples.size() - len) / hop + 1;

  std::vector<long double> edges(c.num_mel_bins + 2);
  for (int i = 0; i < c.num_mel_bins + 2; ++i) {
    edges[i] = MelToHz(Mel(c.low_freq_hz) +
                       (Mel(c.high_freq_hz) - Mel(c.low_freq_hz)) * i / (c.num_mel_bins + 1));
  }

  Rows out;
  for (std::size_t t = 0; t < frames; ++t) {
    std::vector<long double> frame(len);
    for (int n = 0; n < len; ++n) {
      const long double w = 0.5L * (1.0L - std::cos(2.0L * kPi * n / (len - 1)));
      frame[n] = w * samples[t * hop + n];
    }
    const auto power = DirectPowerSpectrum(frame, c.n_fft);

    std::vector<long double> log_mel(c.num_mel_bins);
    for (int m = 0; m < c.num_mel_bins; ++m) {
      long double e = 0.0L;
      for (int k = 0; k < bins; ++k) {
        const long double f = static_cast<long double>(k) * c.sample_rate_hz / c.n_fft;
        long double w = 0.0L;
        if (f > edges[m] && f < edges[m + 2]) {
          w = f <= edges[m + 1] ? (f - edges[m]) / (edges[m + 1] - edges[m])
                                : (edges[m + 2] - f) / (edges[m + 2] - edges[m + 1]);
        }
        e += w * power[k];
      }
      log_mel[m] = std::log(std::max<long double>(e, c.log_floor));
    }

    std::vector<double> ceps(c.num_ceps);
    for (int i = 0; i < c.num_ceps; ++i) {
      long double s = 0.0L;
      for (int m = 0; m < c.num_mel_bins; ++m) {
        s += log_mel[m] * std::cos(kPi * i * (m + 0.5L) / c.num_mel_bins);
      }
      const long double scale = std::sqrt((i == 0 ? 1.0L : 2.0L) / c.num_mel_bins);
      ceps[i] = static_cast<double>(scale * s);
    }
    out.push_back(std::move(ceps));
  }
  return out;
}

long double GmmFrameLogLik(const GmmModel& model, const std::vector<double>& x) {
  return LogSumExp(ComponentLogDensities(model, x));
}

long double GmmMeanLogLik(const GmmModel& model, const Rows& frames) {
  long double s = 0.0L;
  for (const auto& f : frames) s += GmmFrameLogLik(model, f);
  return s / frames.size();
}

std::vector<std::vector<long double>> Responsibilities(const GmmModel& model, const Rows& frames) {
  std::vector<std::vector<long double>> out;
  for (const auto& f : frames) {
    auto lp = ComponentLogDensities(model, f);
    const long double total = LogSumExp(lp);
    for (auto& v : lp) v = std::exp(v - total);
    out.push_back(std::move(lp));
  }
  return out;
}

Rows MapMeans(const GmmModel& ubm, const Rows& frames, double relevance) {
  const auto gamma = Responsibilities(ubm, frames);
  const std::size_t dim = ubm.dim();
  Rows out(ubm.num_components(), std::vector<double>(dim));
  for (std::size_t k = 0; k < ubm.num_components(); ++k) {
    long double n = 0.0L;
    std::vector<long double> first(dim, 0.0L);
    for (std::size_t t = 0; t < frames.size(); ++t) {
      n += gamma[t][k];
      for (std::size_t d = 0; d < dim; ++d) first[d] += gamma[t][k] * frames[t][d];
    }
    const long double alpha = n / (n + relevance);
    for (std::size_t d = 0; d < dim; ++d) {
      const long double mu = ubm.means()(k, d);
      const long double e = n < 1e-10L ? mu : first[d] / n;
      out[k][d] = static_cast<double>(alpha * e + (1.0L - alpha) * mu);
    }
  }
  return out;
}

EerResult ExhaustiveEer(const std::vector<double>& genuine, const std::vector<double>& impostor) {
  const double inf = std::numeric_limits<double>::infinity();
  std::set<double> candidates = {-inf, inf};
  candidates.insert(genuine.begin(), genuine.end());
  candidates.insert(impostor.begin(), impostor.end());

  EerResult r;
  std::vector<double> fnr;
  for (double theta : candidates) {
    std::size_t g_acc = 0, i_acc = 0;
    for (double s : genuine) g_acc += (s >= theta) ? 1 : 0;
    for (double s : impostor) i_acc += (s >= theta) ? 1 : 0;
    r.thresholds.push_back(theta);
    r.tpr.push_back(static_cast<double>(g_acc) / static_cast<double>(genuine.size()));
    r.fpr.push_back(static_cast<double>(i_acc) / static_cast<double>(impostor.size()));
    fnr.push_back(static_cast<double>(genuine.size() - g_acc) /
                  static_cast<double>(genuine.size()));
  }
  // FPR - FNR goes from +1 at -inf to -1 at +inf; take the first crossing.
  for (std::size_t j = 1; j < r.thresholds.size(); ++j) {
    const double d = r.fpr[j] - fnr[j];
    if (d > 0.0) continue;
    if (d == 0.0) {
      r.eer = r.fpr[j];
      r.eer_threshold = r.thresholds[j];
      return r;
    }
    const double d_prev = r.fpr[j - 1] - fnr[j - 1];
    const double t = d_prev / (d_prev - d);
    r.eer = r.fpr[j - 1] + t * (r.fpr[j] - r.fpr[j - 1]);
    const double lo = r.thresholds[j - 1], hi = r.thresholds[j];
    r.eer_threshold = std::isinf(lo) ? hi : std::isinf(hi) ? lo : lo + t * (hi - lo);
    return r;
  }
  return r;
}

std::vector<long double> EmbedObservation(const EmbeddingNetwork& net,
                                          const std::vector<double>& stacked) {
  std::vector<long double> a(stacked.size());
  for (std::size_t i = 0; i < stacked.size(); ++i) {
    a[i] = (static_cast<long double>(stacked[i]) - net.input_mean()[i]) * net.input_scale()[i];
  }
  const auto& layers = net.layers();
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    const DenseLayer& layer = layers[l];
    std::vector<long double> z(layer.weights.rows());
    for (std::size_t o = 0; o < z.size(); ++o) {
      long double s = layer.bias[o];
      for (std::size_t i = 0; i < a.size(); ++i) s += layer.weights(o, i) * a[i];
      z[o] = std::max(0.0L, s);
    }
    a = std::move(z);
  }
  return a;
}

std::vector<double> UtteranceEmbedding(const EmbeddingNetwork& net, const FeatureMatrix& features,
                                       int observations, int stride) {
  const long last = static_cast<long>(features.num_frames()) - 1;
  std::vector<long double> acc(net.embedding_dim(), 0.0L);
  for (int i = 0; i < observations; ++i) {
    const long center = std::min<long>(static_cast<long>(stride) * i, last);
    std::vector<double> stacked;
    for (long off = -24; off <= 25; ++off) {
      const long t = std::clamp(center + off, 0L, last);
      for (std::size_t d = 0; d < features.dim(); ++d) stacked.push_back(features.frames(t, d));
    }
    const auto h = EmbedObservation(net, stacked);
    long double norm = 0.0L;
    for (long double v : h) norm += v * v;
    norm = std::sqrt(norm);
    if (norm == 0.0L) continue;
    for (std::size_t j = 0; j < h.size(); ++j) acc[j] += h[j] / norm;
  }
  long double norm = 0.0L;
  for (long double v : acc) norm += v * v;
  norm = std::sqrt(norm);
  std::vector<double> out(acc.size());
  for (std::size_t j = 0; j < acc.size(); ++j) out[j] = static_cast<double>(acc[j] / norm);
  return out;
}

}  // namespace snoreid::oracle
