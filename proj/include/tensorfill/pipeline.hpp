#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "tensorfill/completion.hpp"
#include "tensorfill/parallel.hpp"
#include "tensorfill/trend_filter.hpp"

namespace tensorfill {

struct PipelineParams {
  Index patch_size = 8;
  CompletionParams completion;
  FilterParams filter;
  int workers = 1;
};

inline void validate(const PipelineParams& p) {
  if (p.patch_size < 2) throw ParamError("patch_size must be at least 2");
  validate(p.completion);
  validate(p.filter);
}

/// Replace invalid samples by linear interpolation between the nearest valid
/// neighbors in time; leading and trailing runs take the nearest valid value.
inline std::vector<double> prefill_linear(const std::vector<double>& series,
                                          const std::vector<std::uint8_t>& valid) {
  contract(series.size() == valid.size(), "prefill_linear: sizes match");
  const std::size_t n = series.size();
  std::vector<double> out(series);
  std::ptrdiff_t prev = -1;
  bool any_valid = false;
  for (std::size_t t = 0; t < n; ++t) {
    if (!valid[t]) continue;
    any_valid = true;
    const auto tp = static_cast<std::ptrdiff_t>(t);
    if (prev < 0) {
      for (std::ptrdiff_t s = 0; s < tp; ++s) {
        out[static_cast<std::size_t>(s)] = series[t];
      }
    } else if (tp - prev > 1) {
      const double lo = series[static_cast<std::size_t>(prev)];
      const double hi = series[t];
      for (std::ptrdiff_t s = prev + 1; s < tp; ++s) {
        const double frac = static_cast<double>(s - prev) /
                            static_cast<double>(tp - prev);
        out[static_cast<std::size_t>(s)] = lo + frac * (hi - lo);
      }
    }
    prev = tp;
  }
  if (!any_valid) {
    throw EmptyInputError("prefill_linear: series has no valid sample");
  }
  for (std::size_t s = static_cast<std::size_t>(prev) + 1; s < n; ++s) {
    out[s] = series[static_cast<std::size_t>(prev)];
  }
  return out;
}

struct Tile {
  Index row0 = 0;
  Index col0 = 0;
  Index rows = 0;
  Index cols = 0;
};

/// Non-overlapping patch_size x patch_size tiling; edge tiles are smaller.
inline std::vector<Tile> make_tiles(Index height, Index width,
                                    Index patch_size) {
  std::vector<Tile> tiles;
  for (Index i = 0; i < height; i += patch_size) {
    for (Index j = 0; j < width; j += patch_size) {
      tiles.push_back({i, j, std::min(patch_size, height - i),
                       std::min(patch_size, width - j)});
    }
  }
  return tiles;
}

struct SceneReport {
  Index empty_patches = 0;   // tiles with no valid observation at all
  Index failed_patches = 0;  // tiles whose completion raised an error
  Index empty_pixels = 0;    // pixels without a single valid observation
  std::vector<std::string> warnings;
};

namespace detail {

inline void check_stack(const Stack& stack) {
  if (stack.height <= 0 || stack.width <= 0 || stack.nd <= 0 || stack.ny <= 0) {
    throw ShapeError("stack has non-positive dimensions");
  }
  const Index T = stack.steps();
  if (stack.values.dim1() != stack.height || stack.values.dim2() != stack.width ||
      stack.values.dim3() != T || stack.reliability.dim1() != stack.height ||
      stack.reliability.dim2() != stack.width ||
      stack.reliability.dim3() != T) {
    throw ShapeError("stack grids do not match the declared dimensions");
  }
}

}  // namespace detail

/// Fill and denoise a whole scene: tile, complete each patch, mosaic, then
/// run the three-pass trend filter on every pixel series. Output reliability
/// is Good everywhere except pixels that never held a valid observation,
/// which carry fill_value and NoData. Per-tile failures downgrade that tile
/// to fill_value + NoData with a warning instead of aborting the scene.
inline Stack reconstruct_scene(const Stack& stack, const PipelineParams& params,
                               SceneReport* report = nullptr) {
  validate(params);
  detail::check_stack(stack);
  const Index T = stack.steps();
  const Mask3 omega = omega_from_reliability(stack.reliability);

  Stack out = stack;
  Tensor3 completed = stack.values;

  const std::vector<Tile> tiles =
      make_tiles(stack.height, stack.width, params.patch_size);
  std::vector<std::string> tile_warnings(tiles.size());
  std::vector<std::uint8_t> tile_empty(tiles.size(), 0);
  std::vector<std::uint8_t> tile_failed(tiles.size(), 0);

  parallel_for(static_cast<Index>(tiles.size()), params.workers, [&](Index k) {
    const Tile& tile = tiles[static_cast<std::size_t>(k)];
    Patch patch;
    patch.rows = tile.rows;
    patch.cols = tile.cols;
    patch.data = Tensor3(tile.rows, tile.cols, T);
    patch.omega = Mask3(tile.rows, tile.cols, T);
    for (Index i = 0; i < tile.rows; ++i)
      for (Index j = 0; j < tile.cols; ++j)
        for (Index t = 0; t < T; ++t) {
          patch.data(i, j, t) = stack.values(tile.row0 + i, tile.col0 + j, t);
          patch.omega(i, j, t) = omega(tile.row0 + i, tile.col0 + j, t);
        }

    auto blank_tile = [&]() {
      for (Index i = 0; i < tile.rows; ++i)
        for (Index j = 0; j < tile.cols; ++j)
          for (Index t = 0; t < T; ++t) {
            completed(tile.row0 + i, tile.col0 + j, t) = stack.fill_value;
          }
    };

    try {
      const Patch done =
          complete_patch(patch, stack.nd, stack.ny, params.completion);
      for (Index i = 0; i < tile.rows; ++i)
        for (Index j = 0; j < tile.cols; ++j)
          for (Index t = 0; t < T; ++t) {
            completed(tile.row0 + i, tile.col0 + j, t) = done.data(i, j, t);
          }
    } catch (const EmptyInputError&) {
      tile_empty[static_cast<std::size_t>(k)] = 1;
      blank_tile();
    } catch (const Error& e) {
      tile_failed[static_cast<std::size_t>(k)] = 1;
      tile_warnings[static_cast<std::size_t>(k)] =
          "tile (" + std::to_string(tile.row0) + "," + std::to_string(tile.col0) +
          ") downgraded to fill_value: " + e.what();
      blank_tile();
    }
  });

  std::vector<std::uint8_t> pixel_empty(
      static_cast<std::size_t>(stack.height * stack.width), 0);
  std::vector<std::uint8_t> in_bad_tile(pixel_empty.size(), 0);
  for (std::size_t k = 0; k < tiles.size(); ++k) {
    if (!tile_empty[k] && !tile_failed[k]) continue;
    const Tile& tile = tiles[k];
    for (Index i = 0; i < tile.rows; ++i)
      for (Index j = 0; j < tile.cols; ++j) {
        in_bad_tile[static_cast<std::size_t>(
            (tile.row0 + i) * stack.width + tile.col0 + j)] = 1;
      }
  }

  std::vector<std::uint8_t> filter_failed(pixel_empty.size(), 0);
  parallel_for(stack.height * stack.width, params.workers, [&](Index pix) {
    const Index i = pix / stack.width;
    const Index j = pix % stack.width;
    bool has_valid = false;
    for (Index t = 0; t < T && !has_valid; ++t) {
      has_valid = omega(i, j, t) != 0;
    }
    if (!has_valid || in_bad_tile[static_cast<std::size_t>(pix)]) {
      if (!has_valid) pixel_empty[static_cast<std::size_t>(pix)] = 1;
      for (Index t = 0; t < T; ++t) {
        out.values(i, j, t) = stack.fill_value;
        out.reliability(i, j, t) = kNoData;
      }
      return;
    }
    Series series;
    series.values.resize(static_cast<std::size_t>(T));
    series.flags.resize(static_cast<std::size_t>(T));
    for (Index t = 0; t < T; ++t) {
      series.values[static_cast<std::size_t>(t)] = completed(i, j, t);
      series.flags[static_cast<std::size_t>(t)] =
          stack.reliability(i, j, t) == kGood ? SampleFlag::Good
                                              : SampleFlag::Noisy;
    }
    std::vector<double> filtered;
    try {
      filtered = iterative_filter(series, params.filter);
    } catch (const Error&) {
      // keep the gap-filled series unfiltered rather than aborting the scene
      filter_failed[static_cast<std::size_t>(pix)] = 1;
      filtered = std::move(series.values);
    }
    for (Index t = 0; t < T; ++t) {
      out.values(i, j, t) = filtered[static_cast<std::size_t>(t)];
      out.reliability(i, j, t) = kGood;
    }
  });

  if (report != nullptr) {
    for (std::size_t k = 0; k < tiles.size(); ++k) {
      report->empty_patches += tile_empty[k];
      report->failed_patches += tile_failed[k];
      if (!tile_warnings[k].empty()) {
        report->warnings.push_back(tile_warnings[k]);
      }
    }
    for (const auto e : pixel_empty) report->empty_pixels += e;
    Index unfiltered = 0;
    for (const auto f : filter_failed) unfiltered += f;
    if (unfiltered > 0) {
      report->warnings.push_back(
          std::to_string(unfiltered) +
          " pixel(s) kept their unfiltered series (trend solver failure)");
    }
  }
  return out;
}

/// The comparison baseline: per-pixel temporal linear interpolation of the
/// invalid samples, no completion and no filtering.
inline Stack reconstruct_linear(const Stack& stack) {
  detail::check_stack(stack);
  const Index T = stack.steps();
  const Mask3 omega = omega_from_reliability(stack.reliability);
  Stack out = stack;
  for (Index i = 0; i < stack.height; ++i) {
    for (Index j = 0; j < stack.width; ++j) {
      std::vector<double> series(static_cast<std::size_t>(T));
      std::vector<std::uint8_t> valid(static_cast<std::size_t>(T));
      bool any = false;
      for (Index t = 0; t < T; ++t) {
        series[static_cast<std::size_t>(t)] = stack.values(i, j, t);
        valid[static_cast<std::size_t>(t)] = omega(i, j, t);
        any = any || omega(i, j, t) != 0;
      }
      if (!any) {
        for (Index t = 0; t < T; ++t) {
          out.values(i, j, t) = stack.fill_value;
          out.reliability(i, j, t) = kNoData;
        }
        continue;
      }
      const std::vector<double> filled = prefill_linear(series, valid);
      for (Index t = 0; t < T; ++t) {
        out.values(i, j, t) = filled[static_cast<std::size_t>(t)];
        out.reliability(i, j, t) = kGood;
      }
    }
  }
  return out;
}

}  // namespace tensorfill
