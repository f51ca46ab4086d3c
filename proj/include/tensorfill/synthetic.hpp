#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "tensorfill/types.hpp"

namespace tensorfill {

/// Seeded generator of NDVI-like scenes: per-pixel double-logistic seasonal
/// curves with spatially correlated amplitude/base/phase fields, a mild
/// inter-annual trend with per-year anomalies, negatively biased noise at
/// marginal samples, and a cloud pattern that clusters in space, in time, and
/// in the wet season.
struct SynthParams {
  Index width = 64;
  Index height = 64;
  Index ny = 18;
  Index nd = 23;
  std::uint64_t seed = 0;
  double missing_rate = 0.24;    // fraction of samples flagged cloudy
  double marginal_rate = 0.15;   // fraction flagged marginal
  double noise_sigma = 0.004;    // white observation noise on valid samples
  double marginal_bias_min = 0.02;  // multiplicative negative bias bounds
  double marginal_bias_max = 0.12;
  double fill_value = kDefaultFillValue;
};

namespace detail {

// Smooth random field in [0,1] from a low-frequency cosine mixture.
class CosineField {
 public:
  CosineField(std::mt19937_64& rng, int components, double max_cycles) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
    for (int c = 0; c < components; ++c) {
      const double freq = max_cycles * unit(rng);
      const double dir = angle(rng);
      u_.push_back(freq * std::cos(dir));
      v_.push_back(freq * std::sin(dir));
      phase_.push_back(angle(rng));
      amp_.push_back(0.5 + unit(rng));
    }
  }

  double raw(double x, double y) const {
    double s = 0.0;
    for (std::size_t c = 0; c < u_.size(); ++c) {
      s += amp_[c] * std::cos(2.0 * M_PI * (u_[c] * x + v_[c] * y) + phase_[c]);
    }
    return s;
  }

 private:
  std::vector<double> u_, v_, phase_, amp_;
};

inline void normalize_unit(std::vector<double>& f) {
  const auto [lo, hi] = std::minmax_element(f.begin(), f.end());
  const double span = *hi - *lo;
  for (double& v : f) v = span > 0.0 ? (v - *lo) / span : 0.5;
}

inline double quantile(std::vector<double> v, double q) {
  const auto k = static_cast<std::ptrdiff_t>(
      q * static_cast<double>(v.size() - 1));
  std::nth_element(v.begin(), v.begin() + k, v.end());
  return v[static_cast<std::size_t>(k)];
}

}  // namespace detail

inline Stack synthesize_stack(const SynthParams& params) {
  if (params.width <= 0 || params.height <= 0 || params.ny <= 0 ||
      params.nd <= 0) {
    throw ParamError("synthesize_stack: dimensions must be positive");
  }
  if (params.missing_rate < 0.0 || params.marginal_rate < 0.0 ||
      params.missing_rate + params.marginal_rate >= 0.95) {
    throw ParamError("synthesize_stack: invalid contamination rates");
  }

  std::mt19937_64 rng(params.seed);
  const Index H = params.height, W = params.width;
  const Index nd = params.nd, ny = params.ny;
  const Index T = nd * ny;
  const double fw = static_cast<double>(W);
  const double fh = static_cast<double>(H);

  // spatial parameter fields
  const detail::CosineField f_amp(rng, 6, 2.0);
  const detail::CosineField f_base(rng, 6, 2.0);
  const detail::CosineField f_phase(rng, 6, 1.5);
  const detail::CosineField f_trend(rng, 4, 1.0);
  std::vector<double> amp, base, phase, trend;
  for (Index i = 0; i < H; ++i) {
    for (Index j = 0; j < W; ++j) {
      const double x = static_cast<double>(j) / fw;
      const double y = static_cast<double>(i) / fh;
      amp.push_back(f_amp.raw(x, y));
      base.push_back(f_base.raw(x, y));
      phase.push_back(f_phase.raw(x, y));
      trend.push_back(f_trend.raw(x, y));
    }
  }
  detail::normalize_unit(amp);
  detail::normalize_unit(base);
  detail::normalize_unit(phase);
  detail::normalize_unit(trend);

  // per-year anomalies
  std::normal_distribution<double> anomaly_dist(0.0, 0.012);
  std::vector<double> year_anomaly(static_cast<std::size_t>(ny));
  for (auto& a : year_anomaly) a = anomaly_dist(rng);

  // cloud score: seasonal wet-season bias plus a slowly moving spatial blob
  // field, thresholded at the requested quantiles
  const detail::CosineField f_cloud_a(rng, 8, 3.0);
  const detail::CosineField f_cloud_b(rng, 8, 3.0);
  std::vector<double> cloud(static_cast<std::size_t>(H * W * T));
  {
    std::size_t idx = 0;
    for (Index i = 0; i < H; ++i) {
      for (Index j = 0; j < W; ++j) {
        const double x = static_cast<double>(j) / fw;
        const double y = static_cast<double>(i) / fh;
        for (Index t = 0; t < T; ++t) {
          const double d = static_cast<double>(t % nd);
          const double tt = static_cast<double>(t) / static_cast<double>(nd);
          // wet season centered mid-year
          const double wet =
              0.5 * (1.0 + std::cos(2.0 * M_PI * (d - 11.5) /
                                    static_cast<double>(nd)));
          const double blob = f_cloud_a.raw(x + 0.13 * tt, y - 0.07 * tt) +
                              f_cloud_b.raw(x - 0.11 * tt, y + 0.05 * tt) +
                              1.6 * std::cos(2.0 * M_PI * tt * 3.7);
          cloud[idx++] = 1.3 * wet + 0.22 * blob;
        }
      }
    }
  }
  const double thr_cloudy = detail::quantile(cloud, 1.0 - params.missing_rate);
  const double thr_marginal = detail::quantile(
      cloud, 1.0 - params.missing_rate - params.marginal_rate);

  Stack stack;
  stack.height = H;
  stack.width = W;
  stack.nd = nd;
  stack.ny = ny;
  stack.fill_value = params.fill_value;
  stack.values = Tensor3(H, W, T);
  stack.reliability = Mask3(H, W, T);

  std::normal_distribution<double> noise(0.0, params.noise_sigma);
  std::uniform_real_distribution<double> bias(params.marginal_bias_min,
                                              params.marginal_bias_max);

  std::size_t idx = 0;
  for (Index i = 0; i < H; ++i) {
    for (Index j = 0; j < W; ++j) {
      const std::size_t pix = static_cast<std::size_t>(i * W + j);
      const double a = 0.25 + 0.30 * amp[pix];
      const double b = 0.10 + 0.15 * base[pix];
      const double ph = 4.0 * (phase[pix] - 0.5);
      const double tr = 0.004 * (trend[pix] - 0.5);
      const double d_on = 6.0 + ph;
      const double d_off = 16.0 + 0.6 * ph;
      for (Index t = 0; t < T; ++t) {
        const Index year = t / nd;
        const double d = static_cast<double>(t % nd);
        const double season = 1.0 / (1.0 + std::exp(-1.1 * (d - d_on))) /
                              (1.0 + std::exp(0.9 * (d - d_off)));
        const double year_scale =
            1.0 + tr * (static_cast<double>(year) -
                        0.5 * static_cast<double>(ny - 1)) +
            year_anomaly[static_cast<std::size_t>(year)];
        const double truth =
            std::clamp(b + a * season * year_scale, 0.02, 0.98);

        const double score = cloud[idx++];
        std::uint8_t code;
        if (score >= thr_cloudy) {
          code = kCloudy;
        } else if (score >= thr_marginal) {
          code = kMarginal;
        } else {
          code = kGood;
        }
        stack.reliability(i, j, t) = code;
        if (code == kCloudy) {
          stack.values(i, j, t) = params.fill_value;
        } else {
          double v = truth + noise(rng);
          if (code == kMarginal) v = truth * (1.0 - bias(rng)) + noise(rng);
          stack.values(i, j, t) = std::clamp(v, 0.0, 1.0);
        }
      }
    }
  }

  // every pixel keeps at least one usable observation: if clouds covered a
  // whole series, reopen its least cloudy step
  for (Index i = 0; i < H; ++i) {
    for (Index j = 0; j < W; ++j) {
      bool any_valid = false;
      Index best_t = 0;
      double best_score = std::numeric_limits<double>::max();
      for (Index t = 0; t < T; ++t) {
        if (is_valid_observation(stack.reliability(i, j, t))) {
          any_valid = true;
          break;
        }
        const double s =
            cloud[static_cast<std::size_t>((i * W + j) * T + t)];
        if (s < best_score) {
          best_score = s;
          best_t = t;
        }
      }
      if (!any_valid) {
        stack.reliability(i, j, best_t) = kGood;
        const double d = static_cast<double>(best_t % nd);
        const std::size_t pix = static_cast<std::size_t>(i * W + j);
        const double a = 0.25 + 0.30 * amp[pix];
        const double b = 0.10 + 0.15 * base[pix];
        const double ph = 4.0 * (phase[pix] - 0.5);
        const double season =
            1.0 / (1.0 + std::exp(-1.1 * (d - (6.0 + ph)))) /
            (1.0 + std::exp(0.9 * (d - (16.0 + 0.6 * ph))));
        stack.values(i, j, best_t) = std::clamp(b + a * season, 0.02, 0.98);
      }
    }
  }
  return stack;
}

}  // namespace tensorfill
