// Command-line front end: spectrum / evolve / sweep / selftest.

#include "aqae/app.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace {

using aqae::app::json;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<std::size_t> reads;
  std::optional<std::size_t> runs;
  std::optional<int> sweeps;
  bool print_config = false;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_config) {
  if (with_config) {
    cmd->add_option("--config", f.config, "JSON run configuration (defaults apply to missing keys)");
    cmd->add_flag("--print-config", f.print_config, "Print the effective configuration and exit");
    cmd->add_option("--reads", f.reads, "Override solver.num_reads (anneals per zoom step)");
    cmd->add_option("--runs", f.runs, "Override solver.runs (independent runs for statistics)");
  }
  cmd->add_option("--seed", f.seed, "Master seed");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--format", f.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--sweeps", f.sweeps, "Metropolis sweeps per anneal")->check(CLI::PositiveNumber);
}

json user_document(const CommonFlags& f, const std::string& subcommand) {
  json doc = f.config.empty() ? json::object() : aqae::app::load_config_file(f.config);
  if (!doc.is_object()) throw aqae::app::ConfigError("config must be a JSON object");
  if (!doc.contains("mode")) {
    if (subcommand == "evolve" && !doc.contains("system")) doc["system"] = "su3";
    doc["mode"] = subcommand;
  } else {
    const std::string mode = doc["mode"].is_string() ? doc["mode"].get<std::string>() : "";
    if (mode != subcommand && mode != "oracle")
      throw aqae::app::ConfigError("config mode '" + mode + "' does not match subcommand '" + subcommand + "'");
  }
  if (f.seed) doc["seed"] = *f.seed;
  if (f.out) doc["output"]["dir"] = *f.out;
  if (f.format) doc["output"]["format"] = *f.format;
  if (f.reads) doc["solver"]["num_reads"] = *f.reads;
  if (f.runs) doc["solver"]["runs"] = *f.runs;
  if (f.sweeps) doc["solver"]["sweeps"] = *f.sweeps;
  return doc;
}

int run_workflow(const CommonFlags& f, const std::string& subcommand) {
  const aqae::app::RunConfig config = aqae::app::parse_config(user_document(f, subcommand));
  if (f.print_config) {
    std::cout << config.effective.dump(2) << '\n';
    return aqae::app::exit_ok;
  }
  aqae::app::Output out(config.out_dir, config.format, std::cout);
  return aqae::app::run(config, out);
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive annealer eigensolver: QUBO-encoded eigenproblems and Feynman-clock time evolution,\n"
               "sampled with a seeded simulated annealer. Reported qubit counts are logical variables;\n"
               "physical-qubit embedding is out of scope."};
  app.require_subcommand(1);

  CommonFlags spectrum_flags, evolve_flags, sweep_flags, selftest_flags;
  auto* spectrum = app.add_subcommand("spectrum", "Eigen-spectrum of ho / aho / doublewell (mode spectrum or oracle)");
  add_common(spectrum, spectrum_flags, true);
  auto* evolve = app.add_subcommand("evolve", "Clock time evolution of su3 / neutrino (mode evolve or oracle)");
  add_common(evolve, evolve_flags, true);
  auto* sweep = app.add_subcommand("sweep", "Ground-state solve over one swept parameter (eta, reads or K)");
  add_common(sweep, sweep_flags, true);
  auto* selftest = app.add_subcommand("selftest", "Oracle checks and small seeded solves; exit 4 on mismatch");
  add_common(selftest, selftest_flags, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : aqae::app::exit_config;
  }

  try {
    if (*spectrum) return run_workflow(spectrum_flags, "spectrum");
    if (*evolve) return run_workflow(evolve_flags, "evolve");
    if (*sweep) return run_workflow(sweep_flags, "sweep");
    const auto format = selftest_flags.format.value_or("csv") == "json" ? aqae::app::Format::json : aqae::app::Format::csv;
    aqae::app::Output out(selftest_flags.out.value_or("selftest_out"), format, std::cout);
    return aqae::app::cmd_selftest(selftest_flags.seed.value_or(1), selftest_flags.sweeps.value_or(100), out);
  } catch (const aqae::app::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return aqae::app::exit_config;
  } catch (const aqae::app::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return aqae::app::exit_validation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return aqae::app::exit_solver;
  }
}
