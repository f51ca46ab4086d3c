#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "tensorfill.hpp"

namespace fs = std::filesystem;
using namespace tensorfill;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// outputs created by the running command, removed again if it fails
std::vector<fs::path> g_outputs;

void track_output(const fs::path& p) { g_outputs.push_back(p); }

void remove_partial_outputs() {
  for (const fs::path& p : g_outputs) {
    std::error_code ec;
    fs::remove_all(p, ec);
  }
}

int default_workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

struct RangeSpec {
  double from = 0;
  double to = 0;
  double step = 1;
};

RangeSpec parse_range(const std::string& text, const char* what) {
  RangeSpec r;
  const auto c1 = text.find(':');
  if (c1 == std::string::npos) {
    throw UsageError(std::string(what) + ": expected from:to[:step], got '" +
                     text + "'");
  }
  const auto c2 = text.find(':', c1 + 1);
  try {
    r.from = std::stod(text.substr(0, c1));
    r.to = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
    r.step = c2 == std::string::npos ? 1.0 : std::stod(text.substr(c2 + 1));
  } catch (...) {
    throw UsageError(std::string(what) + ": bad range '" + text + "'");
  }
  if (r.step <= 0 || r.to < r.from) {
    throw UsageError(std::string(what) + ": bad range '" + text + "'");
  }
  return r;
}

std::vector<Index> parse_list(const std::string& text, const char* what) {
  std::vector<Index> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string item = text.substr(start, comma - start);
    try {
      out.push_back(static_cast<Index>(std::stol(item)));
    } catch (...) {
      throw UsageError(std::string(what) + ": bad list entry '" + item + "'");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw UsageError(std::string(what) + ": empty list");
  return out;
}

std::vector<Method> parse_methods(const std::string& text) {
  std::vector<Method> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string item = text.substr(start, comma - start);
    if (item == "tensor") {
      out.push_back(Method::Tensor);
    } else if (item == "tensor-original" || item == "tensor_original") {
      out.push_back(Method::TensorOriginalForm);
    } else if (item == "linear") {
      out.push_back(Method::Linear);
    } else {
      throw UsageError("--methods: unknown method '" + item +
                       "' (tensor, tensor-original, linear)");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw UsageError("--methods: empty list");
  return out;
}

void print_report(const SceneReport& report) {
  for (const std::string& w : report.warnings) {
    std::cerr << "warning: " << w << "\n";
  }
  if (report.empty_pixels > 0) {
    std::cerr << "note: " << report.empty_pixels
              << " pixel(s) had no valid observation and carry fill_value\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gap filling and denoising for gridded index time series via "
               "adaptive low-rank tensor completion and L1 trend filtering"};
  app.require_subcommand(1);

  // reconstruct
  std::string rc_in, rc_out;
  PipelineParams rc_params;
  rc_params.workers = default_workers();
  bool rc_original = false;
  auto* rc = app.add_subcommand("reconstruct",
                                "Fill gaps and filter a stack end to end");
  rc->add_option("in", rc_in, "input stack directory")->required();
  rc->add_option("out", rc_out, "output stack directory")->required();
  rc->add_option("--patch-size", rc_params.patch_size, "tile side length")
      ->capture_default_str()
      ->check(CLI::Range(Index{2}, Index{4096}));
  rc->add_option("--tau", rc_params.completion.tau,
                 "cumulative-spectrum threshold")
      ->capture_default_str()
      ->check(CLI::Range(1e-9, 1.0 - 1e-9));
  rc->add_option("--lambda", rc_params.filter.lambda,
                 "trend-filter smoothness weight")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  rc->add_option("--max-iters", rc_params.completion.max_iters,
                 "completion iteration cap")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  rc->add_option("--tol", rc_params.completion.tol,
                 "completion relative-change tolerance")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  rc->add_option("--workers", rc_params.workers, "worker threads")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  rc->add_flag("--original-form", rc_original,
               "solve on the raw patch tensor instead of the rearranged form");

  // synth
  std::string sy_out;
  SynthParams sy_params;
  auto* sy = app.add_subcommand("synth", "Generate a synthetic seasonal stack");
  sy->add_option("out", sy_out, "output stack directory")->required();
  sy->add_option("--width", sy_params.width)->required()
      ->check(CLI::PositiveNumber);
  sy->add_option("--height", sy_params.height)->required()
      ->check(CLI::PositiveNumber);
  sy->add_option("--years", sy_params.ny)->required()
      ->check(CLI::PositiveNumber);
  sy->add_option("--seed", sy_params.seed)->required();
  sy->add_option("--nd", sy_params.nd, "steps per year")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sy->add_option("--missing-rate", sy_params.missing_rate)
      ->capture_default_str()
      ->check(CLI::Range(0.0, 0.9));
  sy->add_option("--marginal-rate", sy_params.marginal_rate)
      ->capture_default_str()
      ->check(CLI::Range(0.0, 0.9));
  sy->add_option("--noise", sy_params.noise_sigma)
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  sy->add_option("--fill-value", sy_params.fill_value)->capture_default_str();

  // reference
  std::string rf_in, rf_out;
  auto* rf = app.add_subcommand(
      "reference", "Average good samples into a one-year reference stack");
  rf->add_option("in", rf_in)->required();
  rf->add_option("out", rf_out)->required();

  // contaminate
  std::string ct_ref, ct_mask, ct_out;
  auto* ct = app.add_subcommand(
      "contaminate",
      "Rebuild a contaminated stack from a reference and a reliability grid");
  ct->add_option("ref", ct_ref, "one-year reference stack")->required();
  ct->add_option("mask-src", ct_mask, "stack supplying the reliability grid")
      ->required();
  ct->add_option("out", ct_out)->required();

  // scenario
  std::string sc_in, sc_out;
  double sc_rate = -1.0;
  std::vector<Index> sc_block;
  std::uint64_t sc_seed = 0;
  auto* sc = app.add_subcommand("scenario",
                                "Mask additional samples for evaluation");
  sc->add_option("in", sc_in)->required();
  sc->add_option("out", sc_out)->required();
  auto* sc_rate_opt =
      sc->add_option("--random-rate", sc_rate,
                     "total missing fraction to reach, in (0,1)")
          ->check(CLI::Range(1e-9, 1.0 - 1e-9));
  auto* sc_block_opt =
      sc->add_option("--block", sc_block,
                     "X Y SIZE T_START GAP_LENGTH square block gap")
          ->expected(5);
  sc_rate_opt->excludes(sc_block_opt);
  sc_block_opt->excludes(sc_rate_opt);
  sc->add_option("--seed", sc_seed)->capture_default_str();

  // evaluate
  std::string ev_truth, ev_estimate, ev_gaps;
  auto* ev = app.add_subcommand(
      "evaluate", "Per-pixel MAE report (JSON on standard output)");
  ev->add_option("truth", ev_truth)->required();
  ev->add_option("estimate", ev_estimate)->required();
  ev->add_option("--gaps-only", ev_gaps,
                 "scenario JSON; score only the simulated gap positions");

  // sweep
  std::string sw_in, sw_out, sw_rates, sw_gaps, sw_sizes;
  std::string sw_methods = "tensor,linear";
  std::uint64_t sw_seed = 0;
  double sw_rate_for_sizes = 50.0;
  PipelineParams sw_params;
  sw_params.workers = default_workers();
  bool sw_no_timing = false;
  Index sw_block_x = -1, sw_block_y = -1, sw_block_size = 12, sw_t_start = -1;
  auto* sw = app.add_subcommand("sweep",
                                "Scenario sweeps with a CSV result table");
  sw->add_option("in", sw_in)->required();
  auto* sw_rates_opt = sw->add_option(
      "--rates", sw_rates, "random-gap rates in percent, from:to[:step]");
  auto* sw_gaps_opt = sw->add_option(
      "--gap-lengths", sw_gaps, "block gap lengths, from:to");
  auto* sw_sizes_opt = sw->add_option(
      "--patch-sizes", sw_sizes, "comma-separated patch sizes");
  sw_rates_opt->excludes(sw_gaps_opt)->excludes(sw_sizes_opt);
  sw_gaps_opt->excludes(sw_rates_opt)->excludes(sw_sizes_opt);
  sw_sizes_opt->excludes(sw_rates_opt)->excludes(sw_gaps_opt);
  sw->add_option("--methods", sw_methods, "tensor, tensor-original, linear")
      ->capture_default_str();
  sw->add_option("--out", sw_out, "output CSV path")->required();
  sw->add_option("--seed", sw_seed)->capture_default_str();
  sw->add_option("--rate", sw_rate_for_sizes,
                 "random-gap rate in percent for --patch-sizes")
      ->capture_default_str();
  sw->add_option("--patch-size", sw_params.patch_size)
      ->capture_default_str()
      ->check(CLI::Range(Index{2}, Index{4096}));
  sw->add_option("--tau", sw_params.completion.tau)
      ->capture_default_str()
      ->check(CLI::Range(1e-9, 1.0 - 1e-9));
  sw->add_option("--lambda", sw_params.filter.lambda)
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  sw->add_option("--workers", sw_params.workers)
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sw->add_option("--block-x", sw_block_x, "block column (default centered)");
  sw->add_option("--block-y", sw_block_y, "block row (default centered)");
  sw->add_option("--block-size", sw_block_size)->capture_default_str();
  sw->add_option("--t-start", sw_t_start,
                 "block start step (default mid-series growing season)");
  sw->add_flag("--no-timing", sw_no_timing,
               "write zero in the seconds column for reproducible files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (rc->parsed()) {
      rc_params.completion.use_rearranged_form = !rc_original;
      const Stack stack = read_stack(rc_in);
      track_output(rc_out);
      SceneReport report;
      const Stack out = reconstruct_scene(stack, rc_params, &report);
      write_stack(out, rc_out);
      print_report(report);
    } else if (sy->parsed()) {
      const Stack stack = synthesize_stack(sy_params);
      track_output(sy_out);
      write_stack(stack, sy_out);
    } else if (rf->parsed()) {
      const Stack stack = read_stack(rf_in);
      Index excluded = 0;
      const Stack ref = build_reference(stack, &excluded);
      track_output(rf_out);
      write_stack(ref, rf_out);
      if (excluded > 0) {
        std::cerr << "note: " << excluded
                  << " pixel(s) lack 4 good samples on every step and were "
                     "excluded\n";
      }
    } else if (ct->parsed()) {
      const Stack ref = read_stack(ct_ref);
      const Stack mask_src = read_stack(ct_mask);
      const Stack out = simulate_contamination(ref, mask_src.reliability);
      track_output(ct_out);
      write_stack(out, ct_out);
    } else if (sc->parsed()) {
      ScenarioSpec spec;
      spec.seed = sc_seed;
      if (sc_rate > 0.0) {
        spec.kind = ScenarioKind::Random;
        spec.target_rate = sc_rate;
      } else if (!sc_block.empty()) {
        spec.kind = ScenarioKind::Block;
        spec.block = {sc_block[0], sc_block[1], sc_block[2], sc_block[3],
                      sc_block[4]};
      } else {
        throw UsageError("scenario: give --random-rate or --block");
      }
      const Stack stack = read_stack(sc_in);
      const ScenarioResult res = apply_scenario(stack, spec);
      track_output(sc_out);
      write_stack(res.stack, sc_out);
      std::ofstream sidecar(fs::path(sc_out) / "scenario.json");
      sidecar << to_json(spec).dump(2) << "\n";
      std::cerr << "masked " << res.added_count << " samples\n";
    } else if (ev->parsed()) {
      Stack truth = read_stack(ev_truth);
      const Stack estimate = read_stack(ev_estimate);
      if (truth.ny == 1 && estimate.ny > 1 && truth.nd == estimate.nd &&
          truth.height == estimate.height && truth.width == estimate.width) {
        // one-year reference truth: tile it cyclically over the years
        Stack tiled = estimate;
        for (Index i = 0; i < tiled.height; ++i)
          for (Index j = 0; j < tiled.width; ++j)
            for (Index t = 0; t < tiled.steps(); ++t) {
              tiled.values(i, j, t) = truth.values(i, j, t % truth.nd);
              tiled.reliability(i, j, t) =
                  truth.reliability(i, j, t % truth.nd);
            }
        tiled.fill_value = truth.fill_value;
        truth = std::move(tiled);
      }
      Mask3 mask(truth.height, truth.width, truth.steps(), 0);
      if (!ev_gaps.empty()) {
        std::ifstream in(ev_gaps);
        if (!in) throw IoError("cannot open " + ev_gaps);
        nlohmann::json j;
        in >> j;
        const ScenarioSpec spec = scenario_from_json(j);
        mask = apply_scenario(truth, spec).added;
      } else {
        for (Index i = 0; i < truth.height; ++i)
          for (Index jx = 0; jx < truth.width; ++jx)
            for (Index t = 0; t < truth.steps(); ++t) {
              mask(i, jx, t) =
                  is_valid_observation(truth.reliability(i, jx, t)) ? 1 : 0;
            }
      }
      const EvalReport rep = evaluate_mae(truth, estimate, mask);
      std::cout << to_json(rep, truth.height, truth.width).dump(2) << "\n";
    } else if (sw->parsed()) {
      const Stack base = read_stack(sw_in);
      SweepConfig config;
      config.methods = parse_methods(sw_methods);
      config.seed = sw_seed;
      config.pipeline = sw_params;
      config.record_timing = !sw_no_timing;
      if (!sw_rates.empty()) {
        const RangeSpec r = parse_range(sw_rates, "--rates");
        config.settings = RateSweep{r.from, r.to, r.step};
      } else if (!sw_gaps.empty()) {
        const RangeSpec r = parse_range(sw_gaps, "--gap-lengths");
        GapLengthSweep g;
        g.from = static_cast<Index>(r.from);
        g.to = static_cast<Index>(r.to);
        g.block.size = sw_block_size;
        g.block.x = sw_block_x >= 0 ? sw_block_x
                                    : (base.width - sw_block_size) / 2;
        g.block.y = sw_block_y >= 0 ? sw_block_y
                                    : (base.height - sw_block_size) / 2;
        g.block.t_start = sw_t_start >= 0
                              ? sw_t_start
                              : base.nd * (base.ny / 2) + 5;
        config.settings = g;
      } else if (!sw_sizes.empty()) {
        PatchSizeSweep s;
        s.sizes = parse_list(sw_sizes, "--patch-sizes");
        s.rate_pct = sw_rate_for_sizes;
        config.settings = s;
      } else {
        throw UsageError(
            "sweep: give --rates, --gap-lengths or --patch-sizes");
      }
      const std::vector<SweepRow> rows = run_sweep(base, config);
      track_output(sw_out);
      std::ofstream out(sw_out);
      if (!out) throw IoError("cannot write " + sw_out);
      write_sweep_csv(rows, out);
      Index failed = 0;
      for (const SweepRow& row : rows) failed += row.failed;
      if (failed > 0) {
        std::cerr << "warning: " << failed << " sweep row(s) failed\n";
      }
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    remove_partial_outputs();
    return 2;
  } catch (const ParamError& e) {
    std::cerr << "error: " << e.what() << "\n";
    remove_partial_outputs();
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    remove_partial_outputs();
    return 1;
  }
  return 0;
}
