#pragma once

#include <cstdint>
#include <vector>

#include "tensorfill/tensor.hpp"

namespace tensorfill {

// Per-sample reliability codes, MOD13A2-style. The product's "no data"
// index of -1 is stored as byte 255.
inline constexpr std::uint8_t kGood = 0;
inline constexpr std::uint8_t kMarginal = 1;
inline constexpr std::uint8_t kCloudy = 3;
inline constexpr std::uint8_t kNoData = 255;

inline bool is_known_code(std::uint8_t c) {
  return c == kGood || c == kMarginal || c == kCloudy || c == kNoData;
}

/// Good and marginal samples are usable observations; cloudy and missing
/// samples are the ones to reconstruct.
inline bool is_valid_observation(std::uint8_t c) {
  return c == kGood || c == kMarginal;
}

inline constexpr double kDefaultFillValue = -9999.0;

/// A gridded scene: an (H x W x T) value grid plus a parallel reliability
/// grid, with T = nd * ny once any tail padding has been applied.
struct Stack {
  Index height = 0;
  Index width = 0;
  Index nd = 23;  // observations per year
  Index ny = 0;   // number of years
  Index pad = 0;  // trailing NoData steps appended to complete the last year
  double fill_value = kDefaultFillValue;
  double scale = 1.0;  // storage-to-physical multiplier; I/O metadata only
  Tensor3 values;      // (height, width, T)
  Mask3 reliability;   // (height, width, T), codes {0,1,3,255}

  Index steps() const { return nd * ny; }
};

/// One spatial tile of a stack, the unit of completion. Tiles are square in
/// the interior and may be rectangular at scene edges.
struct Patch {
  Index rows = 0;
  Index cols = 0;
  Tensor3 data;  // (rows, cols, T)
  Mask3 omega;   // (rows, cols, T), 1 where the sample is a valid observation
};

/// The (rows*cols x nd x ny) reshaped form of a patch: spatial, intra-annual
/// and inter-annual variation each get their own axis.
struct RearrangedTensor {
  Tensor3 data;  // (rows*cols, nd, ny)
  Mask3 omega;
};

enum class SampleFlag : std::uint8_t { Good = 0, Noisy = 1 };

/// One pixel's time series with per-sample noisiness flags. Marginal and
/// reconstructed samples count as noisy; good observations do not.
struct Series {
  std::vector<double> values;
  std::vector<SampleFlag> flags;
};

}  // namespace tensorfill
