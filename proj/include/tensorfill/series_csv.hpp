#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "tensorfill/types.hpp"

namespace tensorfill {

/// A single-pixel series read from CSV: flags plus which samples held a
/// value at all. Missing samples carry NaN in `series.values`.
struct LoadedSeries {
  Series series;
  std::vector<std::uint8_t> valid;
};

/// CSV format `t,value,ri` with t counting 0..n-1. The value field may be
/// empty only for invalid samples (ri 3 or no-data). The no-data index may be
/// written as -1 or as its stored byte 255.
inline LoadedSeries read_series_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError(path.string() + ":1: missing header");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t,value,ri") {
    throw ParseError(path.string() + ":1: expected header 't,value,ri'");
  }

  LoadedSeries out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto where = path.string() + ":" + std::to_string(lineno);

    if (std::count(line.begin(), line.end(), ',') != 2) {
      throw ParseError(where + ": expected 3 fields");
    }
    const std::size_t c1 = line.find(',');
    const std::size_t c2 = line.find(',', c1 + 1);
    const std::string fields[3] = {line.substr(0, c1),
                                   line.substr(c1 + 1, c2 - c1 - 1),
                                   line.substr(c2 + 1)};

    long t = 0;
    try {
      t = std::stol(fields[0]);
    } catch (...) {
      throw ParseError(where + ": bad t value '" + fields[0] + "'");
    }
    if (t != static_cast<long>(out.series.values.size())) {
      throw ParseError(where + ": t must count 0..n-1, got " + fields[0]);
    }

    long ri = 0;
    try {
      ri = std::stol(fields[2]);
    } catch (...) {
      throw ParseError(where + ": bad ri value '" + fields[2] + "'");
    }
    if (ri == -1) ri = kNoData;
    if (!is_known_code(static_cast<std::uint8_t>(ri)) || ri > 255 || ri < 0) {
      throw ParseError(where + ": undefined reliability code " + fields[2]);
    }
    const auto code = static_cast<std::uint8_t>(ri);

    double value = std::numeric_limits<double>::quiet_NaN();
    const bool have_value = !fields[1].empty();
    if (have_value) {
      try {
        std::size_t used = 0;
        value = std::stod(fields[1], &used);
        if (used != fields[1].size()) throw std::invalid_argument("");
      } catch (...) {
        throw ParseError(where + ": bad value '" + fields[1] + "'");
      }
    } else if (is_valid_observation(code)) {
      throw ParseError(where + ": valid sample without a value");
    }

    out.series.values.push_back(value);
    out.series.flags.push_back(code == kGood ? SampleFlag::Good
                                             : SampleFlag::Noisy);
    out.valid.push_back(is_valid_observation(code) ? 1 : 0);
  }
  if (out.series.values.empty()) {
    throw ParseError(path.string() + ": no data rows");
  }
  return out;
}

}  // namespace tensorfill
