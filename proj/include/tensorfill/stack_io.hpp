#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tensorfill/types.hpp"

namespace tensorfill {

/// On-disk stack container: a directory holding header.json, values.bin
/// (raw little-endian float32 in (t, row, col) order, t slowest) and
/// mask.bin (one reliability byte per sample, same order). Physical value =
/// stored value * scale. A header may declare `pad` trailing steps of its T
/// as padding; on top of that, a T that does not complete the last year is
/// padded with NoData up to nd*ny at load time and stripped again on write.
struct StackHeader {
  Index width = 0;
  Index height = 0;
  Index T = 0;
  Index nd = 0;
  Index ny = 0;
  double scale = 1.0;
  double fill_value = kDefaultFillValue;
  std::string value_dtype = "f32le";
  std::string mask_dtype = "u8";
  Index pad = 0;
};

namespace detail {

inline StackHeader parse_header(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw CorruptionError("bad header.json: " + std::string(e.what()));
  }
  StackHeader h;
  try {
    h.width = j.at("width").get<Index>();
    h.height = j.at("height").get<Index>();
    h.T = j.at("T").get<Index>();
    h.nd = j.at("nd").get<Index>();
    h.ny = j.at("ny").get<Index>();
    h.scale = j.value("scale", 1.0);
    h.fill_value = j.at("fill_value").get<double>();
    h.value_dtype = j.value("value_dtype", std::string("f32le"));
    h.mask_dtype = j.value("mask_dtype", std::string("u8"));
    h.pad = j.value("pad", Index{0});
  } catch (const nlohmann::json::exception& e) {
    throw CorruptionError("header.json misses a required key: " +
                          std::string(e.what()));
  }
  if (h.width <= 0 || h.height <= 0 || h.T <= 0 || h.nd <= 0 || h.ny <= 0) {
    throw ValidationError("header.json: dimensions must be positive");
  }
  if (h.value_dtype != "f32le") {
    throw ValidationError("unsupported value_dtype: " + h.value_dtype);
  }
  if (h.mask_dtype != "u8") {
    throw ValidationError("unsupported mask_dtype: " + h.mask_dtype);
  }
  if (h.pad < 0 || h.pad >= h.T) {
    throw ValidationError("header.json: pad outside [0, T)");
  }
  if (h.T > h.nd * h.ny || h.nd * h.ny - h.T >= h.nd) {
    throw ValidationError("header.json: T=" + std::to_string(h.T) +
                          " inconsistent with nd*ny=" +
                          std::to_string(h.nd * h.ny));
  }
  return h;
}

inline std::vector<char> read_binary(const std::filesystem::path& path,
                                     std::uintmax_t expected) {
  std::error_code ec;
  const std::uintmax_t actual = std::filesystem::file_size(path, ec);
  if (ec) throw IoError("cannot stat " + path.string());
  if (actual != expected) {
    throw CorruptionError(path.string() + ": expected " +
                          std::to_string(expected) + " bytes, found " +
                          std::to_string(actual));
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<char> buf(expected);
  in.read(buf.data(), static_cast<std::streamsize>(expected));
  if (!in) throw IoError("short read on " + path.string());
  return buf;
}

}  // namespace detail

inline Stack read_stack(const std::filesystem::path& dir) {
  const StackHeader h = detail::parse_header(dir / "header.json");
  const std::uintmax_t samples = static_cast<std::uintmax_t>(h.width) *
                                 static_cast<std::uintmax_t>(h.height) *
                                 static_cast<std::uintmax_t>(h.T);
  const std::vector<char> raw_values =
      detail::read_binary(dir / "values.bin", samples * 4);
  const std::vector<char> raw_mask =
      detail::read_binary(dir / "mask.bin", samples);

  Stack stack;
  stack.height = h.height;
  stack.width = h.width;
  stack.nd = h.nd;
  stack.ny = h.ny;
  stack.fill_value = h.fill_value;
  stack.scale = h.scale;
  const Index T_full = h.nd * h.ny;
  stack.pad = h.pad + (T_full - h.T);
  stack.values = Tensor3(h.height, h.width, T_full, h.fill_value);
  stack.reliability = Mask3(h.height, h.width, T_full, kNoData);

  const float* vals = reinterpret_cast<const float*>(raw_values.data());
  std::size_t offset = 0;
  for (Index t = 0; t < h.T; ++t) {
    for (Index i = 0; i < h.height; ++i) {
      for (Index j = 0; j < h.width; ++j, ++offset) {
        const std::uint8_t code = static_cast<std::uint8_t>(raw_mask[offset]);
        if (!is_known_code(code)) {
          throw ValidationError("mask.bin: unknown reliability code " +
                                std::to_string(int(code)) + " at byte offset " +
                                std::to_string(offset));
        }
        stack.values(i, j, t) = static_cast<double>(vals[offset]) * h.scale;
        stack.reliability(i, j, t) = code;
      }
    }
  }
  return stack;
}

/// Writes the stack, stripping any trailing pad steps; round-trips through
/// read_stack bit-identically.
inline void write_stack(const Stack& stack, const std::filesystem::path& dir) {
  if (stack.pad < 0 || stack.pad >= stack.steps()) {
    throw ValidationError("write_stack: pad outside [0, T)");
  }
  const Index T_out = stack.steps() - stack.pad;
  std::filesystem::create_directories(dir);

  nlohmann::json j;
  j["width"] = stack.width;
  j["height"] = stack.height;
  j["T"] = T_out;
  j["nd"] = stack.nd;
  j["ny"] = stack.ny;
  j["scale"] = stack.scale;
  j["fill_value"] = stack.fill_value;
  j["value_dtype"] = "f32le";
  j["mask_dtype"] = "u8";
  j["pad"] = 0;
  {
    std::ofstream out(dir / "header.json");
    if (!out) throw IoError("cannot write " + (dir / "header.json").string());
    out << j.dump(2) << "\n";
  }

  const std::size_t plane =
      static_cast<std::size_t>(stack.width * stack.height);
  std::vector<float> vplane(plane);
  std::vector<std::uint8_t> mplane(plane);
  std::ofstream vout(dir / "values.bin", std::ios::binary);
  std::ofstream mout(dir / "mask.bin", std::ios::binary);
  if (!vout || !mout) throw IoError("cannot write binaries in " + dir.string());
  for (Index t = 0; t < T_out; ++t) {
    std::size_t offset = 0;
    for (Index i = 0; i < stack.height; ++i) {
      for (Index j = 0; j < stack.width; ++j, ++offset) {
        vplane[offset] =
            static_cast<float>(stack.values(i, j, t) / stack.scale);
        mplane[offset] = stack.reliability(i, j, t);
      }
    }
    vout.write(reinterpret_cast<const char*>(vplane.data()),
               static_cast<std::streamsize>(plane * sizeof(float)));
    mout.write(reinterpret_cast<const char*>(mplane.data()),
               static_cast<std::streamsize>(plane));
  }
  if (!vout || !mout) throw IoError("short write in " + dir.string());
}

}  // namespace tensorfill
