// Drives the installed binary through every subcommand and checks exit
// codes, output files, and determinism. Run as: cli_tests <path-to-binary>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "tensorfill/stack_io.hpp"

namespace fs = std::filesystem;
using namespace tensorfill;

namespace {

int g_failures = 0;
std::string g_bin;
fs::path g_dir;

void check(bool ok, const std::string& what) {
  std::printf("%s  %s\n", ok ? "ok  " : "FAIL", what.c_str());
  if (!ok) ++g_failures;
}

int run(const std::string& args, std::string* out = nullptr) {
  const fs::path out_file = g_dir / "cmd_output";
  const std::string cmd =
      g_bin + " " + args + " > " + out_file.string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  if (out != nullptr) {
    std::ifstream in(out_file);
    std::stringstream ss;
    ss << in.rdbuf();
    *out = ss.str();
  }
  if (status == -1) return -1;
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: cli_tests <tensorfill-binary>\n");
    return 2;
  }
  g_bin = argv[1];
  g_dir = fs::temp_directory_path() / "tensorfill_cli_test";
  fs::remove_all(g_dir);
  fs::create_directories(g_dir);
  const std::string d = g_dir.string() + "/";

  check(run("") == 2, "no subcommand exits 2");
  check(run("--help") == 0, "--help exits 0");

  check(run("synth " + d + "base --width 12 --height 10 --years 4 --seed 3") == 0,
        "synth runs");
  check(fs::exists(g_dir / "base/header.json"), "synth writes a stack");

  check(run("reconstruct " + d + "base " + d + "rec --patch-size 6") == 0,
        "reconstruct runs");
  {
    const Stack rec = read_stack(g_dir / "rec");
    bool gap_free = true;
    for (Index i = 0; i < rec.reliability.size(); ++i) {
      gap_free = gap_free && rec.reliability.data()[i] == kGood;
    }
    check(gap_free, "reconstructed stack is gap-free");
  }

  check(run("reconstruct " + d + "base " + d + "bad --tau 1.5") == 2,
        "out-of-range --tau exits 2");
  check(!fs::exists(g_dir / "bad"), "failed run leaves no output");
  check(run("evaluate " + d + "nodir " + d + "rec") == 1,
        "missing input exits 1");

  check(run("scenario " + d + "base " + d + "sc --random-rate 0.4 --seed 9") == 0,
        "scenario runs");
  check(fs::exists(g_dir / "sc/scenario.json"), "scenario writes its sidecar");
  check(run("scenario " + d + "base " + d + "sc2 --random-rate 0.01") == 2,
        "unreachable rate exits 2");

  check(run("reconstruct " + d + "sc " + d + "rec2 --patch-size 6") == 0,
        "reconstruct on the scenario runs");
  {
    std::string out;
    check(run("evaluate " + d + "base " + d + "rec2 --gaps-only " + d +
                  "sc/scenario.json",
              &out) == 0,
          "gaps-only evaluation runs");
    const auto j = nlohmann::json::parse(out, nullptr, false);
    check(!j.is_discarded() && j.contains("mae_mean") &&
              j["mae_mean"].get<double>() >= 0.0,
          "evaluation prints a JSON report");
    check(j["evaluated_samples"].get<long>() > 0, "gap mask is non-empty");
  }

  check(run("reference " + d + "base " + d + "ref") == 0, "reference runs");
  {
    const Stack ref = read_stack(g_dir / "ref");
    check(ref.ny == 1 && ref.values.dim3() == ref.nd,
          "reference holds one year");
  }
  check(run("contaminate " + d + "ref " + d + "base " + d + "sim") == 0,
        "contaminate runs");
  {
    std::string out;
    check(run("evaluate " + d + "ref " + d + "rec", &out) == 0,
          "whole-series evaluation against a one-year reference runs");
  }

  const std::string sweep_args = "sweep " + d +
                                 "base --rates 30:40:5 --methods tensor,linear "
                                 "--seed 5 --no-timing --out ";
  check(run(sweep_args + d + "a.csv") == 0, "sweep runs");
  {
    const std::string csv = slurp(g_dir / "a.csv");
    check(csv.rfind("setting,method,mae_mean,seconds\n", 0) == 0,
          "sweep CSV carries the fixed header");
    int lines = 0;
    for (char c : csv) lines += c == '\n';
    check(lines == 7, "sweep CSV has one row per setting and method");
  }
  check(run(sweep_args + d + "b.csv") == 0, "second sweep runs");
  check(slurp(g_dir / "a.csv") == slurp(g_dir / "b.csv"),
        "same-seed sweeps are byte-identical");

  {
    // the documented range syntax: 25:80:5 gives 12 settings per method
    check(run("sweep " + d + "base --rates 25:80:5 --methods tensor,linear "
              "--no-timing --out " + d + "full.csv") == 0,
          "12-rate sweep runs");
    const std::string csv = slurp(g_dir / "full.csv");
    int tensor_rows = 0, linear_rows = 0;
    std::istringstream lines(csv);
    std::string line;
    while (std::getline(lines, line)) {
      if (line.find(",tensor,") != std::string::npos) ++tensor_rows;
      if (line.find(",linear,") != std::string::npos) ++linear_rows;
    }
    check(tensor_rows == 12 && linear_rows == 12,
          "sweep produced 12 tensor and 12 linear rows");
  }

  check(run("sweep " + d + "base --gap-lengths 2:3 --block-size 4 "
            "--methods linear --no-timing --out " + d + "g.csv") == 0,
        "gap-length sweep runs");
  check(run("sweep " + d + "base --patch-sizes 4,6 --rate 40 "
            "--methods linear --no-timing --out " + d + "p.csv") == 0,
        "patch-size sweep runs");

  check(run("sweep " + d + "base --rates 30:20 --out " + d + "c.csv") == 2,
        "bad range exits 2");
  check(run("sweep " + d + "base --rates 30:40:5 --methods fancy --out " + d +
            "c.csv") == 2,
        "unknown method exits 2");

  fs::remove_all(g_dir);
  if (g_failures > 0) {
    std::printf("%d check(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all checks passed\n");
  return 0;
}
