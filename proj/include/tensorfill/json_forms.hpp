#pragma once

#include <json.hpp>

#include "tensorfill/evaluate.hpp"

namespace tensorfill {

inline nlohmann::json to_json(const ScenarioSpec& spec) {
  nlohmann::json j;
  j["seed"] = spec.seed;
  if (spec.kind == ScenarioKind::Random) {
    j["kind"] = "random";
    j["target_rate"] = spec.target_rate;
  } else {
    j["kind"] = "block";
    j["block"] = {{"x", spec.block.x},
                  {"y", spec.block.y},
                  {"size", spec.block.size},
                  {"t_start", spec.block.t_start},
                  {"gap_length", spec.block.gap_length}};
  }
  return j;
}

inline ScenarioSpec scenario_from_json(const nlohmann::json& j) {
  ScenarioSpec spec;
  try {
    spec.seed = j.at("seed").get<std::uint64_t>();
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "random") {
      spec.kind = ScenarioKind::Random;
      spec.target_rate = j.at("target_rate").get<double>();
    } else if (kind == "block") {
      spec.kind = ScenarioKind::Block;
      const auto& b = j.at("block");
      spec.block.x = b.at("x").get<Index>();
      spec.block.y = b.at("y").get<Index>();
      spec.block.size = b.at("size").get<Index>();
      spec.block.t_start = b.at("t_start").get<Index>();
      spec.block.gap_length = b.at("gap_length").get<Index>();
    } else {
      throw ParseError("scenario json: unknown kind '" + kind + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("scenario json: " + std::string(e.what()));
  }
  return spec;
}

inline nlohmann::json to_json(const EvalReport& rep, Index height,
                              Index width) {
  nlohmann::json j;
  j["mae_mean"] = rep.mae_mean;
  j["evaluated_pixels"] = rep.evaluated_pixels;
  j["evaluated_samples"] = rep.evaluated_samples;
  const double total = static_cast<double>(rep.evaluated_pixels);
  static const char* kBins[] = {"lt_0.010", "0.010_0.015", "0.015_0.020",
                                "0.020_0.025", "ge_0.025"};
  nlohmann::json hist_counts, hist_fracs;
  for (int b = 0; b < 5; ++b) {
    hist_counts[kBins[b]] = rep.histogram[static_cast<std::size_t>(b)];
    hist_fracs[kBins[b]] =
        total > 0.0
            ? static_cast<double>(rep.histogram[static_cast<std::size_t>(b)]) /
                  total
            : 0.0;
  }
  j["histogram_counts"] = hist_counts;
  j["histogram_fractions"] = hist_fracs;
  j["height"] = height;
  j["width"] = width;
  nlohmann::json map = nlohmann::json::array();
  for (double v : rep.mae_map) {
    if (std::isnan(v)) {
      map.push_back(nullptr);
    } else {
      map.push_back(v);
    }
  }
  j["mae_map"] = std::move(map);
  return j;
}

}  // namespace tensorfill
