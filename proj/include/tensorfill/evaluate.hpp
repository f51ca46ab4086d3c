#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "tensorfill/pipeline.hpp"

namespace tensorfill {

enum class ScenarioKind { Random, Block };

struct BlockSpec {
  Index x = 0;        // column of the block's top-left corner
  Index y = 0;        // row of the block's top-left corner
  Index size = 0;     // square side length in pixels
  Index t_start = 0;  // first masked step
  Index gap_length = 0;
};

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::Random;
  double target_rate = 0.0;  // total missing fraction to reach (Random)
  BlockSpec block;           // masked region (Block)
  std::uint64_t seed = 0;
};

struct ScenarioResult {
  Stack stack;   // the contaminated scene
  Mask3 added;   // 1 at samples newly turned invalid
  Index added_count = 0;
};

namespace detail {

// Seeded bounded draw, independent of distribution library internals.
inline Index bounded_draw(std::mt19937_64& rng, Index n) {
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % static_cast<std::uint64_t>(n);
  std::uint64_t v = rng();
  while (v >= limit) v = rng();
  return static_cast<Index>(v % static_cast<std::uint64_t>(n));
}

}  // namespace detail

/// Mask additional samples: Random draws uniformly among currently valid
/// samples until the total missing fraction reaches target_rate; Block masks
/// a square region over a run of consecutive steps. New gaps get the Cloudy
/// code and fill_value so no estimator can peek at the removed data.
inline ScenarioResult apply_scenario(const Stack& stack,
                                     const ScenarioSpec& spec) {
  detail::check_stack(stack);
  const Index T = stack.steps();
  ScenarioResult res;
  res.stack = stack;
  res.added = Mask3(stack.height, stack.width, T, 0);

  const Mask3 omega = omega_from_reliability(stack.reliability);
  const Index total = omega.size();
  const Index valid = count_true(omega);
  const Index missing = total - valid;

  if (spec.kind == ScenarioKind::Random) {
    if (!(spec.target_rate > 0.0 && spec.target_rate < 1.0)) {
      throw ParamError("scenario: target rate must be in (0,1)");
    }
    const Index want_missing = static_cast<Index>(
        std::llround(spec.target_rate * static_cast<double>(total)));
    if (want_missing < missing) {
      throw ParamError(
          "scenario: target rate " + std::to_string(spec.target_rate) +
          " is below the current missing fraction " +
          std::to_string(static_cast<double>(missing) /
                         static_cast<double>(total)));
    }
    const Index n_new = want_missing - missing;
    if (n_new == 0) return res;

    std::vector<Index> candidates;
    candidates.reserve(static_cast<std::size_t>(valid));
    for (Index i = 0; i < total; ++i) {
      if (omega.data()[i]) candidates.push_back(i);
    }
    // partial Fisher-Yates over the valid samples
    std::mt19937_64 rng(spec.seed);
    for (Index k = 0; k < n_new; ++k) {
      const Index pick =
          k + detail::bounded_draw(rng, static_cast<Index>(candidates.size()) - k);
      std::swap(candidates[static_cast<std::size_t>(k)],
                candidates[static_cast<std::size_t>(pick)]);
      const Index flat = candidates[static_cast<std::size_t>(k)];
      res.added.data()[flat] = 1;
      res.stack.reliability.data()[flat] = kCloudy;
      res.stack.values.data()[flat] = stack.fill_value;
    }
    res.added_count = n_new;
    return res;
  }

  const BlockSpec& b = spec.block;
  if (b.size <= 0 || b.gap_length <= 0 || b.x < 0 || b.y < 0 ||
      b.t_start < 0 || b.x + b.size > stack.width ||
      b.y + b.size > stack.height || b.t_start + b.gap_length > T) {
    throw ParamError("scenario: block region falls outside the stack");
  }
  for (Index i = b.y; i < b.y + b.size; ++i) {
    for (Index j = b.x; j < b.x + b.size; ++j) {
      for (Index t = b.t_start; t < b.t_start + b.gap_length; ++t) {
        if (omega(i, j, t)) {
          res.added(i, j, t) = 1;
          ++res.added_count;
        }
        res.stack.reliability(i, j, t) = kCloudy;
        res.stack.values(i, j, t) = stack.fill_value;
      }
    }
  }
  return res;
}

/// One synthetic year per pixel: for every step-of-year with at least four
/// Good samples across years, the reference is their mean; the remaining
/// steps are filled by linear interpolation along the cyclically joined
/// one-year series. Pixels without a single qualifying step are excluded
/// (fill_value + NoData).
inline Stack build_reference(const Stack& stack, Index* excluded_pixels = nullptr) {
  detail::check_stack(stack);
  if (stack.ny < 4) {
    throw ParamError("build_reference: needs at least 4 years");
  }
  const Index nd = stack.nd, ny = stack.ny;

  Stack ref;
  ref.height = stack.height;
  ref.width = stack.width;
  ref.nd = nd;
  ref.ny = 1;
  ref.fill_value = stack.fill_value;
  ref.scale = stack.scale;
  ref.values = Tensor3(stack.height, stack.width, nd);
  ref.reliability = Mask3(stack.height, stack.width, nd, kGood);

  Index excluded = 0;
  std::vector<double> day_mean(static_cast<std::size_t>(nd));
  std::vector<std::uint8_t> defined(static_cast<std::size_t>(nd));
  for (Index i = 0; i < stack.height; ++i) {
    for (Index j = 0; j < stack.width; ++j) {
      Index defined_count = 0;
      for (Index d = 0; d < nd; ++d) {
        double sum = 0.0;
        Index n = 0;
        for (Index y = 0; y < ny; ++y) {
          if (stack.reliability(i, j, y * nd + d) == kGood) {
            sum += stack.values(i, j, y * nd + d);
            ++n;
          }
        }
        defined[static_cast<std::size_t>(d)] = n >= 4;
        day_mean[static_cast<std::size_t>(d)] =
            n >= 4 ? sum / static_cast<double>(n) : 0.0;
        defined_count += (n >= 4);
      }
      if (defined_count == 0) {
        ++excluded;
        for (Index d = 0; d < nd; ++d) {
          ref.values(i, j, d) = stack.fill_value;
          ref.reliability(i, j, d) = kNoData;
        }
        continue;
      }
      if (defined_count < nd) {
        // cyclic linear interpolation between defined steps
        for (Index d = 0; d < nd; ++d) {
          if (defined[static_cast<std::size_t>(d)]) continue;
          Index prev = d, next = d, dist_prev = 0, dist_next = 0;
          while (!defined[static_cast<std::size_t>(prev)]) {
            prev = (prev + nd - 1) % nd;
            ++dist_prev;
          }
          while (!defined[static_cast<std::size_t>(next)]) {
            next = (next + 1) % nd;
            ++dist_next;
          }
          const double lo = day_mean[static_cast<std::size_t>(prev)];
          const double hi = day_mean[static_cast<std::size_t>(next)];
          const double frac = static_cast<double>(dist_prev) /
                              static_cast<double>(dist_prev + dist_next);
          day_mean[static_cast<std::size_t>(d)] = lo + frac * (hi - lo);
        }
      }
      for (Index d = 0; d < nd; ++d) {
        ref.values(i, j, d) = day_mean[static_cast<std::size_t>(d)];
      }
    }
  }
  if (excluded_pixels != nullptr) *excluded_pixels = excluded;
  return ref;
}

/// Rebuild a full-length contaminated scene from a one-year reference and a
/// reliability grid: Good samples take the reference value, marginal samples
/// 95% of it, cloudy and missing samples stay missing. Pixels excluded from
/// the reference stay excluded.
inline Stack simulate_contamination(const Stack& reference,
                                    const Mask3& reliability) {
  if (reference.ny != 1 || reference.values.dim3() != reference.nd) {
    throw ShapeError("simulate_contamination: reference must hold one year");
  }
  if (reliability.dim1() != reference.height ||
      reliability.dim2() != reference.width ||
      reliability.dim3() % reference.nd != 0) {
    throw ShapeError(
        "simulate_contamination: reliability grid does not match the reference");
  }
  const Index nd = reference.nd;
  const Index T = reliability.dim3();

  Stack out;
  out.height = reference.height;
  out.width = reference.width;
  out.nd = nd;
  out.ny = T / nd;
  out.fill_value = reference.fill_value;
  out.scale = reference.scale;
  out.values = Tensor3(out.height, out.width, T);
  out.reliability = Mask3(out.height, out.width, T);

  for (Index i = 0; i < out.height; ++i) {
    for (Index j = 0; j < out.width; ++j) {
      const bool excluded = reference.reliability(i, j, 0) == kNoData;
      for (Index t = 0; t < T; ++t) {
        const std::uint8_t code = reliability(i, j, t);
        if (!is_known_code(code)) {
          throw ValidationError("simulate_contamination: unknown code " +
                                std::to_string(int(code)));
        }
        if (excluded) {
          out.values(i, j, t) = out.fill_value;
          out.reliability(i, j, t) = kNoData;
          continue;
        }
        out.reliability(i, j, t) = code;
        const double ref = reference.values(i, j, t % nd);
        if (code == kGood) {
          out.values(i, j, t) = ref;
        } else if (code == kMarginal) {
          out.values(i, j, t) = 0.95 * ref;
        } else {
          out.values(i, j, t) = out.fill_value;
        }
      }
    }
  }
  return out;
}

struct EvalReport {
  double mae_mean = 0.0;
  std::vector<double> mae_map;  // per pixel, NaN where nothing was evaluated
  std::array<Index, 5> histogram{};  // <0.01, -0.015, -0.02, -0.025, >=0.025
  Index evaluated_pixels = 0;
  Index evaluated_samples = 0;
};

/// Per-pixel mean absolute error over the masked samples, with the summary
/// histogram binned at 0.01 / 0.015 / 0.02 / 0.025.
inline EvalReport evaluate_mae(const Stack& truth, const Stack& estimate,
                               const Mask3& mask) {
  detail::check_stack(truth);
  const Index T = truth.steps();
  if (estimate.height != truth.height || estimate.width != truth.width ||
      estimate.steps() != T || mask.dim1() != truth.height ||
      mask.dim2() != truth.width || mask.dim3() != T) {
    throw ShapeError("evaluate_mae: shapes do not match");
  }
  if (count_true(mask) == 0) {
    throw ParamError("evaluate_mae: the evaluation mask is empty");
  }

  EvalReport rep;
  rep.mae_map.assign(static_cast<std::size_t>(truth.height * truth.width),
                     std::numeric_limits<double>::quiet_NaN());
  double total = 0.0;
  for (Index i = 0; i < truth.height; ++i) {
    for (Index j = 0; j < truth.width; ++j) {
      double sum = 0.0;
      Index n = 0;
      for (Index t = 0; t < T; ++t) {
        if (!mask(i, j, t)) continue;
        sum += std::abs(truth.values(i, j, t) - estimate.values(i, j, t));
        ++n;
      }
      if (n == 0) continue;
      const double mae = sum / static_cast<double>(n);
      rep.mae_map[static_cast<std::size_t>(i * truth.width + j)] = mae;
      total += mae;
      ++rep.evaluated_pixels;
      rep.evaluated_samples += n;
      if (mae < 0.01) {
        ++rep.histogram[0];
      } else if (mae < 0.015) {
        ++rep.histogram[1];
      } else if (mae < 0.02) {
        ++rep.histogram[2];
      } else if (mae < 0.025) {
        ++rep.histogram[3];
      } else {
        ++rep.histogram[4];
      }
    }
  }
  rep.mae_mean = total / static_cast<double>(rep.evaluated_pixels);
  return rep;
}

}  // namespace tensorfill
