#include "aqae/app.hpp"

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace aqae;
using namespace aqae::app;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("aqae_test_app_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

json small_ho(const std::string& dir) {
  return {{"system", "ho"},
          {"mode", "spectrum"},
          {"seed", 5},
          {"output", {{"dir", dir}}},
          {"field", {{"n_s", 8}}},
          {"solver", {{"num_reads", 50}, {"runs", 2}, {"z_max", 6}, {"sweeps", 50}, {"threads", 1}}},
          {"multigrid", {{"chain", json::array()}, {"K", json::array()}}}};
}

} // namespace

TEST_CASE("defaults per system", "[app]") {
  const RunConfig ho = parse_config(json{{"system", "ho"}});
  CHECK(ho.mode == "spectrum");
  CHECK(ho.solver.K == 3);
  CHECK(ho.solver.z_max == 14);
  CHECK(ho.multigrid.chain == std::vector<std::size_t>{16, 32, 64});
  CHECK(!ho.solver.eta);

  const RunConfig su3 = parse_config(json{{"system", "su3"}});
  CHECK(su3.mode == "evolve");
  CHECK(su3.evolve.n_T == 3);
  CHECK(su3.solver.eta == 0.0);
  CHECK(su3.evolve.dts.size() == 6);

  const RunConfig nu = parse_config(json{{"system", "neutrino"}});
  CHECK(nu.evolve.refinements == 2);
  CHECK(nu.neutrino.initial_flavors == "eemm");
  CHECK(nu.effective["neutrino"]["theta_v"] == 0.195);
}

TEST_CASE("shipped sample configurations parse", "[app]") {
  std::size_t n = 0;
  for (const auto& entry : fs::directory_iterator(AQAE_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    INFO(entry.path().string());
    CHECK_NOTHROW(parse_config(load_config_file(entry.path().string())));
    ++n;
  }
  CHECK(n >= 6);
}

TEST_CASE("configuration errors", "[app]") {
  CHECK_THROWS_AS(parse_config(json{{"system", "ho"}, {"solver", {{"Kay", 3}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"bogus", 1}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"system", "xy"}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"mode", "sweep"}, {"sweep", {{"eta", {0.5}}, {"K", {2, 3}}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"mode", "sweep"}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"mode", "sweep"}, {"sweep", {{"beta", {1.0}}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"multigrid", {{"chain", {16, 48}}, {"K", {3, 3}}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"system", "su3"}, {"mode", "spectrum"}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"system", "ho"}, {"mode", "evolve"}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"solver", {{"z_init", 5}, {"z_max", 3}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"system", "neutrino"}, {"neutrino", {{"initial_flavors", "eex"}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"output", {{"format", "xml"}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"field", {{"n_s", 1}}}}), ConfigError);
  CHECK_THROWS_AS(load_config_file("/nonexistent/config.json"), ConfigError);

  const RunConfig sweep = parse_config(json{{"mode", "sweep"}, {"sweep", {{"reads", {10, 100}}}}});
  CHECK(sweep.sweep.param == "reads");
  CHECK(sweep.sweep.values == std::vector<double>{10.0, 100.0});
}

TEST_CASE("CSV output reads back without drift", "[app]") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  Table t{{"i", "x", "label", "missing"}, {}};
  std::vector<double> xs;
  for (long long i = 0; i < 50; ++i) {
    xs.push_back(u(rng) / 7.0);
    t.add({i, xs.back(), std::string("row"), std::monostate{}});
  }
  t.add({50LL, 1e-300, std::string("tiny"), std::monostate{}});
  xs.push_back(1e-300);
  CHECK_THROWS_AS(t.add({1LL}), std::logic_error);

  std::stringstream ss;
  t.write_csv(ss);
  const CsvData d = read_csv(ss);
  REQUIRE(d.rows.size() == xs.size());
  CHECK(d.columns == t.columns);
  for (std::size_t r = 0; r < xs.size(); ++r) {
    CHECK(d.number(r, "x") == xs[r]);
    CHECK(d.rows[r][d.column("missing")].empty());
  }
  CHECK_THROWS_AS(d.column("y"), std::out_of_range);

  const json j = t.to_json();
  CHECK(j["rows"][3]["x"].get<double>() == xs[3]);
  CHECK(j["rows"][0]["missing"].is_null());

  std::istringstream ragged("a,b\n1,2,3\n");
  CHECK_THROWS_AS(read_csv(ragged), std::runtime_error);
}

TEST_CASE("oracle spectrum writes a summary", "[app]") {
  const fs::path dir = scratch_dir("oracle");
  json cfg{{"system", "aho"}, {"mode", "oracle"}, {"output", {{"dir", dir.string()}}}, {"solver", {{"n_states", 6}}}};
  const RunConfig c = parse_config(cfg);
  std::ostringstream log;
  Output out(c.out_dir, c.format, log);
  CHECK(run(c, out) == exit_ok);
  const CsvData d = read_csv(dir / "summary.csv");
  REQUIRE(d.rows.size() == 6);
  CHECK(std::abs(d.number(0, "E_dig") - 0.8597427) <= 1e-6);
  CHECK(d.rows[0][d.column("E_exact")].empty());
  fs::remove_all(dir);
}

TEST_CASE("seeded workflows are byte-for-byte reproducible", "[app]") {
  const fs::path a = scratch_dir("repro_a"), b = scratch_dir("repro_b");
  for (const auto& dir : {a, b}) {
    const RunConfig c = parse_config(small_ho(dir.string()));
    std::ostringstream log;
    Output out(c.out_dir, c.format, log);
    CHECK(run(c, out) == exit_ok);
  }
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    ++files;
    CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
  }
  CHECK(files == 3); // summary, trace, stats
  const CsvData stats = read_csv(a / "state0_stats.csv");
  CHECK(stats.rows.size() == 7);
  CHECK(stats.number(6, "min_dev") >= -1e-12);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("evolve and sweep workflows produce their tables", "[app]") {
  const fs::path dir = scratch_dir("evolve");
  json cfg{{"system", "su3"},
           {"output", {{"dir", dir.string()}, {"format", "json"}}},
           {"solver", {{"num_reads", 50}, {"runs", 2}, {"z_max", 4}, {"sweeps", 20}, {"threads", 1}}},
           {"evolve", {{"dts", {0.2}}, {"n_T", 2}, {"oracle_t_max", 0.4}, {"oracle_dt", 0.2}}}};
  const RunConfig c = parse_config(cfg);
  std::ostringstream log;
  Output out(c.out_dir, c.format, log);
  CHECK(run(c, out) == exit_ok);
  CHECK(fs::exists(dir / "points.json"));
  CHECK(fs::exists(dir / "dt0.2_persistence.json"));
  CHECK(fs::exists(dir / "dt0.2_trace.json"));
  std::ifstream is(dir / "oracle_persistence.json");
  const json oracle = json::parse(is);
  REQUIRE(oracle["rows"].size() == 3);
  CHECK(oracle["rows"][0]["value"].get<double>() == 1.0);
  CHECK(log.str().find("logical qubits") != std::string::npos);
  fs::remove_all(dir);

  const fs::path sdir = scratch_dir("sweep");
  json scfg = small_ho(sdir.string());
  scfg["mode"] = "sweep";
  scfg["sweep"] = {{"K", {1, 2}}};
  const RunConfig sc = parse_config(scfg);
  Output sout(sc.out_dir, sc.format, log);
  CHECK(run(sc, sout) == exit_ok);
  const CsvData d = read_csv(sdir / "sweep_K.csv");
  CHECK(d.rows.size() == 14);
  fs::remove_all(sdir);
}
