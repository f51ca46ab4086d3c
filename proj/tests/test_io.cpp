#include <catch2/catch.hpp>

#include <filesystem>
#include <fstream>
#include <random>

#include "tensorfill/series_csv.hpp"
#include "tensorfill/stack_io.hpp"
#include "tensorfill/synthetic.hpp"

using namespace tensorfill;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("tensorfill_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

Stack random_stack(Index h, Index w, Index nd, Index ny, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  Stack s;
  s.height = h;
  s.width = w;
  s.nd = nd;
  s.ny = ny;
  s.values = Tensor3(h, w, nd * ny);
  s.reliability = Mask3(h, w, nd * ny);
  const std::uint8_t codes[4] = {kGood, kMarginal, kCloudy, kNoData};
  for (Index i = 0; i < s.values.size(); ++i) {
    // values representable as float32 round-trip bit-exactly
    s.values.data()[i] = static_cast<double>(dist(rng));
    s.reliability.data()[i] = codes[rng() % 4];
  }
  return s;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("stacks round-trip bit-identically", "[io]") {
  TempDir tmp;
  std::mt19937_64 rng(101);
  for (int rep = 0; rep < 10; ++rep) {
    const Index h = 1 + static_cast<Index>(rng() % 6);
    const Index w = 1 + static_cast<Index>(rng() % 6);
    const Index nd = 2 + static_cast<Index>(rng() % 8);
    const Index ny = 1 + static_cast<Index>(rng() % 4);
    const Stack stack = random_stack(h, w, nd, ny, rng());
    const fs::path dir = tmp.path / ("s" + std::to_string(rep));
    write_stack(stack, dir);
    const Stack back = read_stack(dir);
    REQUIRE(back.values == stack.values);
    REQUIRE(back.reliability == stack.reliability);
    REQUIRE(back.nd == stack.nd);
    REQUIRE(back.ny == stack.ny);
    REQUIRE(back.pad == 0);

    // file-level stability too
    const fs::path dir2 = tmp.path / ("s" + std::to_string(rep) + "b");
    write_stack(back, dir2);
    REQUIRE(slurp(dir / "values.bin") == slurp(dir2 / "values.bin"));
    REQUIRE(slurp(dir / "mask.bin") == slurp(dir2 / "mask.bin"));
    REQUIRE(slurp(dir / "header.json") == slurp(dir2 / "header.json"));
  }
}

TEST_CASE("scale converts between stored and physical values", "[io]") {
  TempDir tmp;
  Stack s = random_stack(2, 2, 3, 1, 7);
  s.scale = 1e-4;
  for (Index i = 0; i < s.values.size(); ++i) s.values.data()[i] *= 1e-4;
  write_stack(s, tmp.path / "scaled");
  const Stack back = read_stack(tmp.path / "scaled");
  REQUIRE(back.scale == 1e-4);
  REQUIRE(back.values == s.values);
}

TEST_CASE("short years are padded with NoData and stripped on write", "[io]") {
  TempDir tmp;
  // write a 5-step file by hand: nd=23, ny=1
  const fs::path dir = tmp.path / "padded";
  fs::create_directories(dir);
  {
    std::ofstream h(dir / "header.json");
    h << R"({"width":2,"height":1,"T":5,"nd":23,"ny":1,"scale":1.0,)"
      << R"("fill_value":-9999.0,"value_dtype":"f32le","mask_dtype":"u8","pad":0})";
  }
  {
    std::ofstream v(dir / "values.bin", std::ios::binary);
    const float vals[10] = {0.1f, 0.2f, 0.3f, 0.4f, 0.5f,
                            0.6f, 0.7f, 0.8f, 0.9f, 1.0f};
    v.write(reinterpret_cast<const char*>(vals), sizeof(vals));
    std::ofstream m(dir / "mask.bin", std::ios::binary);
    const std::uint8_t codes[10] = {0, 0, 1, 0, 3, 0, 0, 1, 0, 0};
    m.write(reinterpret_cast<const char*>(codes), 10);
  }

  const Stack stack = read_stack(dir);
  REQUIRE(stack.steps() == 23);
  REQUIRE(stack.pad == 18);
  REQUIRE(stack.values(0, 0, 0) == Approx(0.1f));
  REQUIRE(stack.values(0, 1, 4) == Approx(1.0f));
  REQUIRE(stack.reliability(0, 0, 2) == kCloudy);
  REQUIRE(stack.reliability(0, 0, 5) == kNoData);  // the padded tail
  REQUIRE(stack.reliability(0, 1, 22) == kNoData);
  REQUIRE(stack.values(0, 0, 22) == stack.fill_value);

  const fs::path out = tmp.path / "stripped";
  write_stack(stack, out);
  const StackHeader h2 = detail::parse_header(out / "header.json");
  REQUIRE(h2.T == 5);
  REQUIRE(h2.pad == 0);
  REQUIRE(slurp(dir / "values.bin") == slurp(out / "values.bin"));
}

TEST_CASE("a truncated values file names the expected byte count", "[io]") {
  TempDir tmp;
  const Stack stack = random_stack(2, 3, 4, 1, 11);
  const fs::path dir = tmp.path / "trunc";
  write_stack(stack, dir);
  fs::resize_file(dir / "values.bin", 17);
  try {
    read_stack(dir);
    FAIL("expected CorruptionError");
  } catch (const CorruptionError& e) {
    const std::string msg = e.what();
    REQUIRE(msg.find("96") != std::string::npos);  // 2*3*4 samples * 4 bytes
    REQUIRE(msg.find("17") != std::string::npos);
  }
}

TEST_CASE("an unknown mask byte names its offset", "[io]") {
  TempDir tmp;
  const Stack stack = random_stack(2, 2, 3, 1, 13);
  const fs::path dir = tmp.path / "badmask";
  write_stack(stack, dir);
  {
    std::fstream m(dir / "mask.bin",
                   std::ios::binary | std::ios::in | std::ios::out);
    m.seekp(5);
    const char snow = 2;
    m.write(&snow, 1);
  }
  REQUIRE_THROWS_WITH(read_stack(dir), Catch::Contains("2") &&
                                           Catch::Contains("offset 5"));
}

TEST_CASE("series csv parses values and flags", "[io]") {
  TempDir tmp;
  const fs::path file = tmp.path / "series.csv";
  {
    std::ofstream out(file);
    out << "t,value,ri\n";
    out << "0,0.8,0\n";
    out << "1,0.75,1\n";
    out << "2,0.5,3\n";
    out << "3,,3\n";
    out << "4,,-1\n";
    out << "5,0.81,0\n";
  }
  const LoadedSeries s = read_series_csv(file);
  REQUIRE(s.series.values.size() == 6);
  REQUIRE(s.series.values[0] == 0.8);
  REQUIRE(s.series.flags[0] == SampleFlag::Good);
  REQUIRE(s.series.flags[1] == SampleFlag::Noisy);
  REQUIRE(s.valid[1] == 1);
  REQUIRE(s.valid[2] == 0);
  REQUIRE(std::isnan(s.series.values[3]));
  REQUIRE(s.valid[4] == 0);
  REQUIRE(s.valid[5] == 1);
}

TEST_CASE("series csv rejects undefined codes with the line number", "[io]") {
  TempDir tmp;
  const fs::path file = tmp.path / "bad.csv";
  {
    std::ofstream out(file);
    out << "t,value,ri\n0,0.8,0\n1,0.7,2\n";
  }
  REQUIRE_THROWS_WITH(read_series_csv(file), Catch::Contains(":3"));
}

TEST_CASE("series csv rejects malformed rows", "[io]") {
  TempDir tmp;
  const fs::path file = tmp.path / "malformed.csv";
  {
    std::ofstream out(file);
    out << "t,value,ri\n0,0.8\n";
  }
  REQUIRE_THROWS_AS(read_series_csv(file), ParseError);

  const fs::path file2 = tmp.path / "novalue.csv";
  {
    std::ofstream out(file2);
    out << "t,value,ri\n0,,0\n";
  }
  REQUIRE_THROWS_AS(read_series_csv(file2), ParseError);
}

TEST_CASE("synthetic stacks survive the container round trip", "[io]") {
  TempDir tmp;
  SynthParams p;
  p.width = 6;
  p.height = 5;
  p.ny = 3;
  p.seed = 17;
  const Stack stack = synthesize_stack(p);
  write_stack(stack, tmp.path / "synth");
  const Stack back = read_stack(tmp.path / "synth");
  // storage is float32: compare after one float round trip
  for (Index i = 0; i < stack.values.size(); ++i) {
    REQUIRE(back.values.data()[i] ==
            static_cast<double>(static_cast<float>(stack.values.data()[i])));
  }
  REQUIRE(back.reliability == stack.reliability);
}
