#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "nlh/io.hpp"
#include "nlh/scenario.hpp"

using namespace nlh;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  fs::path d = fs::temp_directory_path() / "nlh_io_test";
  fs::create_directories(d);
  return d;
}

Field random_field(const GridSpec& g, unsigned seed, bool real) {
  Field f = Field::zeros(g);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  for (Complex& z : f.values) z = real ? Complex(dist(rng), 0.0) : Complex(dist(rng), dist(rng));
  f.realness_tag = real;
  return f;
}

}  // namespace

TEST_CASE("field dump round-trip is bit exact") {
  fs::path dir = temp_dir();
  GridSpec g{3, 4.0, 12};
  for (bool real : {false, true}) {
    Field f = random_field(g, real ? 1 : 2, real);
    fs::path side = dir / (real ? "real_field.json" : "complex_field.json");
    save_field(f, side);
    Field back = load_field(side);
    CHECK(back.grid == f.grid);
    CHECK(back.realness_tag == f.realness_tag);
    bool equal = true;
    for (std::size_t i = 0; i < f.size(); ++i)
      if (back.values[i] != f.values[i]) equal = false;
    CHECK(equal);
  }
  CHECK_THROWS_AS(load_field(dir / "missing.json"), IoError);
}

TEST_CASE("checkpoint round-trip and corruption detection") {
  fs::path dir = temp_dir();
  Checkpoint c;
  c.iteration = 41;
  c.J_value = 5.25;
  c.crit_residual = 3.5e-7;
  c.seed = 99;
  c.config_hash = 0xabcdef12345ull;
  c.v = random_field(GridSpec{3, 6.0, 10}, 7, true);
  fs::path path = dir / "ckpt.json";
  save_checkpoint(c, path);
  Checkpoint back = load_checkpoint(path);
  CHECK(back.iteration == c.iteration);
  CHECK(back.J_value == c.J_value);
  CHECK(back.crit_residual == c.crit_residual);
  CHECK(back.seed == c.seed);
  CHECK(back.config_hash == c.config_hash);
  bool equal = true;
  for (std::size_t i = 0; i < c.v.size(); ++i)
    if (back.v.values[i] != c.v.values[i]) equal = false;
  CHECK(equal);

  // truncated payload
  fs::path payload = path;
  payload.replace_extension(".raw");
  fs::resize_file(payload, fs::file_size(payload) - 8);
  CHECK_THROWS_AS(load_checkpoint(path), ChecksumMismatch);

  // flipped byte
  save_checkpoint(c, path);
  {
    std::fstream fh(payload, std::ios::binary | std::ios::in | std::ios::out);
    fh.seekp(40);
    char b = 0x5a;
    fh.write(&b, 1);
  }
  CHECK_THROWS_AS(load_checkpoint(path), ChecksumMismatch);
}

TEST_CASE("scenario parsing and validation") {
  nlohmann::json j{{"name", "t"},
                   {"grid", {{"half_width", 12.0}, {"points_per_axis", 48}}},
                   {"p", 5.0},
                   {"Q", {{"type", "gaussian"}, {"amplitude", 1.0}, {"sigma", 0.5}}},
                   {"schedule", {{"eps0", 0.6}, {"levels", 2}, {"order", 1}}},
                   {"seed", 3u}};
  Scenario sc = parse_scenario(j);
  CHECK(sc.p == 5.0);
  CHECK(sc.solver.seed == 3u);
  CHECK(sc.hash != 0);
  Field Q = build_q(sc);
  CHECK(max_abs_real(Q) == doctest::Approx(1.0));

  // determinism of the hash, sensitivity to any change
  CHECK(parse_scenario(j).hash == sc.hash);
  nlohmann::json j2 = j;
  j2["seed"] = 4u;
  CHECK(parse_scenario(j2).hash != sc.hash);

  // the wavenumber is fixed
  nlohmann::json jk = j;
  jk["k"] = 2.0;
  CHECK_THROWS_AS(parse_scenario(jk), InvalidScenario);

  // negative amplitude
  nlohmann::json jn = j;
  jn["Q"]["amplitude"] = -1.0;
  CHECK_THROWS_WITH_AS(parse_scenario(jn), "Q must be nonnegative", InvalidScenario);

  // missing required field
  nlohmann::json jm = j;
  jm.erase("p");
  CHECK_THROWS_AS(parse_scenario(jm), InvalidScenario);
}

TEST_CASE("periodic cosine scenarios") {
  nlohmann::json j{
      {"name", "per"},
      {"grid", {{"half_width", 4.0}, {"points_per_axis", 24}}},
      {"p", 5.0},
      {"scenario_class", "periodic"},
      {"Q",
       {{"type", "periodic_cosine"},
        {"base", 1.0},
        {"terms",
         {{{"amplitude", 0.5}, {"mode", {1, 1, 1}}, {"period", 4.0}}}}}}};
  Scenario sc = parse_scenario(j);
  CHECK(sc.solver.period_steps == std::vector<int>{12, 12, 12});
  Field Q = build_q(sc);
  double mn = 1e300, mx = -1e300;
  for (const Complex& z : Q.values) {
    mn = std::min(mn, z.real());
    mx = std::max(mx, z.real());
  }
  CHECK(mn >= 0.0);
  CHECK(mx == doctest::Approx(1.5));
  CHECK_NOTHROW(make_problem(sc));

  // base below the amplitude sum can go negative
  nlohmann::json jb = j;
  jb["Q"]["base"] = 0.25;
  CHECK_THROWS_AS(parse_scenario(jb), InvalidScenario);

  // period must divide the box
  nlohmann::json jp = j;
  jp["Q"]["terms"][0]["period"] = 3.0;
  CHECK_THROWS_AS(parse_scenario(jp), InvalidScenario);

  // periodic class needs p > 4 at N = 3
  nlohmann::json jx = j;
  jx["p"] = 4.0;
  Scenario sp = parse_scenario(jx);
  CHECK_THROWS_AS(make_problem(sp), InvalidScenario);
}

TEST_CASE("file-backed Q and indicator ball") {
  fs::path dir = temp_dir();
  GridSpec g{3, 4.0, 12};
  Field Q = random_field(g, 21, true);
  for (Complex& z : Q.values) z = std::abs(z.real());
  Q.realness_tag = true;
  fs::path qpath = dir / "q_field.json";
  save_field(Q, qpath);

  nlohmann::json j{{"name", "fileq"},
                   {"grid", {{"half_width", 4.0}, {"points_per_axis", 12}}},
                   {"p", 5.0},
                   {"Q", {{"type", "file"}, {"path", qpath.string()}}}};
  Scenario sc = parse_scenario(j);
  Field back = build_q(sc);
  bool equal = true;
  for (std::size_t i = 0; i < Q.size(); ++i)
    if (back.values[i] != Q.values[i]) equal = false;
  CHECK(equal);

  // grid mismatch between file and scenario
  nlohmann::json jg = j;
  jg["grid"]["points_per_axis"] = 16;
  CHECK_THROWS_AS(build_q(parse_scenario(jg)), InvalidScenario);

  nlohmann::json jb{{"name", "ball"},
                    {"grid", {{"half_width", 4.0}, {"points_per_axis", 16}}},
                    {"p", 5.0},
                    {"Q", {{"type", "indicator_ball"}, {"amplitude", 2.0}, {"radius", 1.5}}}};
  Field ball = build_q(parse_scenario(jb));
  double total = 0.0;
  for (const Complex& z : ball.values) total += z.real();
  total *= std::pow(0.5, 3);
  CHECK(total == doctest::Approx(2.0 * 4.0 / 3.0 * 3.14159265 * 1.5 * 1.5 * 1.5).epsilon(0.1));
}
