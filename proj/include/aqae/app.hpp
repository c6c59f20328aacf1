#pragma once

// Config-driven workflows behind the command-line tool: eigen-spectra of the
// scalar-field models, clock evolution of the plaquette and neutrino models,
// one-parameter sweeps and a deterministic self-test. All results are written
// as CSV (or JSON) tables into an output directory.

#include "aqae/aqae.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace aqae::app {

using json = nlohmann::json;

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_solver = 3, exit_validation = 4 };

// ---------------------------------------------------------------------------
// Tables

using Cell = std::variant<std::monostate, long long, double, std::string>;

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row) {
    if (row.size() != columns.size()) throw std::logic_error("Table: row width does not match the header");
    rows.push_back(std::move(row));
  }

  void write_csv(std::ostream& os) const {
    for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << columns[c];
    os << '\n';
    for (const auto& row : rows) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (c) os << ',';
        std::visit(
            [&](const auto& v) {
              using T = std::decay_t<decltype(v)>;
              if constexpr (std::is_same_v<T, long long>) os << v;
              else if constexpr (std::is_same_v<T, double>) os << format_double(v);
              else if constexpr (std::is_same_v<T, std::string>) os << v;
            },
            row[c]);
      }
      os << '\n';
    }
  }

  json to_json() const {
    json rows_json = json::array();
    for (const auto& row : rows) {
      json obj = json::object();
      for (std::size_t c = 0; c < row.size(); ++c)
        std::visit(
            [&](const auto& v) {
              using T = std::decay_t<decltype(v)>;
              if constexpr (std::is_same_v<T, std::monostate>) obj[columns[c]] = nullptr;
              else obj[columns[c]] = v;
            },
            row[c]);
      rows_json.push_back(std::move(obj));
    }
    return json{{"columns", columns}, {"rows", std::move(rows_json)}};
  }
};

/// A CSV file as read back: header plus raw string cells.
struct CsvData {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw std::out_of_range("CsvData: no column named " + name);
    return static_cast<std::size_t>(it - columns.begin());
  }
  double number(std::size_t row, const std::string& name) const { return std::stod(rows.at(row).at(column(name))); }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline CsvData read_csv(std::istream& is) {
  CsvData data;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("read_csv: missing header");
  data.columns = split_csv_line(line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != data.columns.size()) throw std::runtime_error("read_csv: ragged row");
    data.rows.push_back(std::move(cells));
  }
  return data;
}

inline CsvData read_csv(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_csv: cannot open " + path.string());
  return read_csv(is);
}

// ---------------------------------------------------------------------------
// Configuration

enum class Format { csv, json };

struct FieldConfig {
  double m0_sq = 1.0;
  double lambda = 0.0;
  double phi_max = 5.0;
  std::size_t n_s = 64;
};

struct Su3Config {
  double g = 1.0;
  std::size_t initial_state = 0;
};

struct NeutrinoConfig {
  NeutrinoSpec spec;
  std::string initial_flavors = "eemm";
};

struct SolverConfig {
  int K = 3;
  std::optional<double> eta;
  std::vector<double> etas;
  std::size_t num_reads = 1000;
  std::vector<std::size_t> reads_per_zoom;
  std::size_t runs = 20;
  int z_init = 0;
  int z_max = 14;
  double mu = 10.0;
  std::vector<double> mus;
  std::size_t n_states = 1;
  int sweeps = 1000;
  unsigned threads = 0;
};

struct MultigridConfig {
  std::vector<std::size_t> chain;
  std::vector<int> K;
  int z_init = 8;
};

struct EvolveConfig {
  std::vector<double> dts;
  std::size_t n_T = 2;
  int refinements = 0;
  int refine_z_init = 4;
  double oracle_t_max = 1.0;
  double oracle_dt = 0.05;
};

struct SweepConfig {
  std::string param; ///< eta | reads | K
  std::vector<double> values;
};

struct RunConfig {
  std::string system = "ho";
  std::string mode = "spectrum";
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  Format format = Format::csv;
  FieldConfig field;
  Su3Config su3;
  NeutrinoConfig neutrino;
  SolverConfig solver;
  MultigridConfig multigrid;
  EvolveConfig evolve;
  SweepConfig sweep;
  json effective; ///< the merged configuration document
};

/// Full configuration document for a system, with every default spelled out.
inline json default_config(const std::string& system) {
  json field = {{"m0_sq", 1.0}, {"lambda", 0.0}, {"phi_max", 5.0}, {"n_s", 64}};
  json solver = {{"K", 3},         {"eta", nullptr}, {"etas", json::array()}, {"num_reads", 1000},
                 {"reads_per_zoom", json::array()},  {"runs", 20},            {"z_init", 0},
                 {"z_max", 14},    {"mu", 10.0},     {"mus", json::array()},  {"n_states", 1},
                 {"sweeps", 1000}, {"threads", 0}};
  json multigrid = {{"chain", json::array()}, {"K", json::array()}, {"z_init", 8}};
  json evolve = {{"dts", json::array()}, {"n_T", 2},          {"refinements", 0},
                 {"refine_z_init", 4},   {"oracle_t_max", 1.0}, {"oracle_dt", 0.05}};
  std::string mode = "spectrum";
  if (system == "ho") {
    multigrid["chain"] = {16, 32, 64};
    multigrid["K"] = {3, 3, 2};
  } else if (system == "aho") {
    field = {{"m0_sq", 1.0}, {"lambda", 32.0}, {"phi_max", 2.6}, {"n_s", 64}};
  } else if (system == "doublewell") {
    field = {{"m0_sq", -4.0}, {"lambda", 1.0}, {"phi_max", 9.0}, {"n_s", 32}};
  } else if (system == "su3") {
    mode = "evolve";
    solver["K"] = 2;
    solver["eta"] = 0.0;
    evolve = {{"dts", {0.2, 0.5, 0.7, 0.9, 1.1, 1.3}}, {"n_T", 3}, {"refinements", 0}, {"refine_z_init", 4},
              {"oracle_t_max", 2.6}, {"oracle_dt", 0.02}};
  } else if (system == "neutrino") {
    mode = "evolve";
    solver["K"] = 2;
    solver["eta"] = 0.0;
    evolve = {{"dts", {1.1, 2.2, 3.3, 4.4, 5.5, 6.6, 7.7, 8.8, 9.9}},
              {"n_T", 2},
              {"refinements", 2},
              {"refine_z_init", 4},
              {"oracle_t_max", 9.9},
              {"oracle_dt", 0.05}};
  } else {
    throw ConfigError("unknown system '" + system + "' (expected ho, aho, doublewell, su3 or neutrino)");
  }
  return {{"system", system},
          {"mode", mode},
          {"seed", 1},
          {"output", {{"dir", "out"}, {"format", "csv"}}},
          {"field", field},
          {"su3", {{"g", 1.0}, {"initial_state", 0}}},
          {"neutrino",
           {{"n_sites", 4},
            {"theta_v", 0.195},
            {"zeta", 0.9},
            {"kappa", 1.0},
            {"delta", json::array()},
            {"initial_flavors", "eemm"}}},
          {"solver", solver},
          {"multigrid", multigrid},
          {"evolve", evolve},
          {"sweep", json::object()}};
}

namespace detail {

inline void reject_unknown_keys(const json& user, const json& schema, const std::string& where) {
  if (!user.is_object()) throw ConfigError(where.empty() ? "config must be a JSON object" : where + " must be an object");
  for (const auto& [key, value] : user.items()) {
    const std::string path = where.empty() ? key : where + "." + key;
    if (!schema.contains(key)) throw ConfigError("unknown config key '" + path + "'");
    if (key == "sweep") continue; // free-form, checked later
    if (schema[key].is_object() && !schema[key].empty()) reject_unknown_keys(value, schema[key], path);
  }
}

template <class T>
T get(const json& j, const char* key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config key '" + where + "." + key + "': " + e.what());
  }
}

} // namespace detail

/// Parses a configuration document: the system's defaults are merged with the
/// user's keys (unknown keys are rejected) and the result is validated.
inline RunConfig parse_config(const json& user) {
  using detail::get;
  if (!user.is_object()) throw ConfigError("config must be a JSON object");
  std::string system = "ho";
  if (user.contains("system")) {
    if (!user["system"].is_string()) throw ConfigError("config key 'system' must be a string");
    system = user["system"].get<std::string>();
  }
  json merged = default_config(system);
  detail::reject_unknown_keys(user, merged, "");
  merged.merge_patch(user);
  // merge_patch drops null members; restore nullable keys.
  if (!merged["solver"].contains("eta")) merged["solver"]["eta"] = nullptr;

  RunConfig c;
  c.effective = merged;
  c.system = system;
  c.mode = get<std::string>(merged, "mode", "");
  static const std::vector<std::string> modes = {"spectrum", "evolve", "oracle", "sweep"};
  if (std::find(modes.begin(), modes.end(), c.mode) == modes.end())
    throw ConfigError("unknown mode '" + c.mode + "' (expected spectrum, evolve, oracle or sweep)");
  c.seed = get<std::uint64_t>(merged, "seed", "");

  const json& out = merged["output"];
  c.out_dir = get<std::string>(out, "dir", "output");
  const auto fmt = get<std::string>(out, "format", "output");
  if (fmt == "csv") c.format = Format::csv;
  else if (fmt == "json") c.format = Format::json;
  else throw ConfigError("output.format must be csv or json");

  const json& f = merged["field"];
  c.field = {get<double>(f, "m0_sq", "field"), get<double>(f, "lambda", "field"), get<double>(f, "phi_max", "field"),
             get<std::size_t>(f, "n_s", "field")};

  const json& su = merged["su3"];
  c.su3 = {get<double>(su, "g", "su3"), get<std::size_t>(su, "initial_state", "su3")};
  if (c.su3.g == 0.0) throw ConfigError("su3.g must be non-zero");
  if (c.su3.initial_state > 3) throw ConfigError("su3.initial_state must be 0..3");

  const json& nu = merged["neutrino"];
  c.neutrino.spec.n_sites = get<std::size_t>(nu, "n_sites", "neutrino");
  c.neutrino.spec.theta_v = get<double>(nu, "theta_v", "neutrino");
  c.neutrino.spec.zeta = get<double>(nu, "zeta", "neutrino");
  c.neutrino.spec.kappa = get<double>(nu, "kappa", "neutrino");
  c.neutrino.spec.delta = get<std::vector<double>>(nu, "delta", "neutrino");
  c.neutrino.initial_flavors = get<std::string>(nu, "initial_flavors", "neutrino");
  if (c.neutrino.initial_flavors.size() != c.neutrino.spec.n_sites ||
      c.neutrino.initial_flavors.find_first_not_of("em") != std::string::npos)
    throw ConfigError("neutrino.initial_flavors needs one 'e' or 'm' per site");

  const json& s = merged["solver"];
  c.solver.K = get<int>(s, "K", "solver");
  if (!s["eta"].is_null()) c.solver.eta = get<double>(s, "eta", "solver");
  c.solver.etas = get<std::vector<double>>(s, "etas", "solver");
  c.solver.num_reads = get<std::size_t>(s, "num_reads", "solver");
  c.solver.reads_per_zoom = get<std::vector<std::size_t>>(s, "reads_per_zoom", "solver");
  c.solver.runs = get<std::size_t>(s, "runs", "solver");
  c.solver.z_init = get<int>(s, "z_init", "solver");
  c.solver.z_max = get<int>(s, "z_max", "solver");
  c.solver.mu = get<double>(s, "mu", "solver");
  c.solver.mus = get<std::vector<double>>(s, "mus", "solver");
  c.solver.n_states = get<std::size_t>(s, "n_states", "solver");
  c.solver.sweeps = get<int>(s, "sweeps", "solver");
  c.solver.threads = get<unsigned>(s, "threads", "solver");
  if (c.solver.K < 1) throw ConfigError("solver.K must be at least 1");
  if (c.solver.num_reads < 1 || c.solver.runs < 1 || c.solver.n_states < 1 || c.solver.sweeps < 1)
    throw ConfigError("solver.num_reads, runs, n_states and sweeps must be at least 1");
  if (c.solver.z_init < 0 || c.solver.z_init > c.solver.z_max) throw ConfigError("solver: need 0 <= z_init <= z_max");

  const json& mg = merged["multigrid"];
  c.multigrid.chain = get<std::vector<std::size_t>>(mg, "chain", "multigrid");
  c.multigrid.K = get<std::vector<int>>(mg, "K", "multigrid");
  c.multigrid.z_init = get<int>(mg, "z_init", "multigrid");
  if (!c.multigrid.K.empty() && c.multigrid.K.size() != c.multigrid.chain.size())
    throw ConfigError("multigrid.K needs one entry per chain stage");
  for (std::size_t k = 1; k < c.multigrid.chain.size(); ++k)
    if (c.multigrid.chain[k] != 2 * c.multigrid.chain[k - 1])
      throw ConfigError("multigrid.chain must double n_s at every stage");
  if (c.multigrid.z_init < 0) throw ConfigError("multigrid.z_init must be non-negative");

  const json& ev = merged["evolve"];
  c.evolve.dts = get<std::vector<double>>(ev, "dts", "evolve");
  c.evolve.n_T = get<std::size_t>(ev, "n_T", "evolve");
  c.evolve.refinements = get<int>(ev, "refinements", "evolve");
  c.evolve.refine_z_init = get<int>(ev, "refine_z_init", "evolve");
  c.evolve.oracle_t_max = get<double>(ev, "oracle_t_max", "evolve");
  c.evolve.oracle_dt = get<double>(ev, "oracle_dt", "evolve");
  if (c.evolve.n_T < 2) throw ConfigError("evolve.n_T must be at least 2");
  if (c.evolve.refinements < 0 || c.evolve.refine_z_init < 0)
    throw ConfigError("evolve.refinements and refine_z_init must be non-negative");
  if (!(c.evolve.oracle_dt > 0.0)) throw ConfigError("evolve.oracle_dt must be positive");

  const json& sw = merged["sweep"];
  if (!sw.is_object()) throw ConfigError("sweep must be an object");
  if (sw.size() > 1) throw ConfigError("sweep: exactly one swept parameter is allowed, got " + std::to_string(sw.size()));
  for (const auto& [key, value] : sw.items()) {
    if (key != "eta" && key != "reads" && key != "K")
      throw ConfigError("sweep: unknown parameter '" + key + "' (expected eta, reads or K)");
    c.sweep.param = key;
    try {
      c.sweep.values = value.get<std::vector<double>>();
    } catch (const json::exception&) {
      throw ConfigError("sweep." + key + " must be a list of numbers");
    }
    if (c.sweep.values.empty()) throw ConfigError("sweep." + key + " must not be empty");
  }

  const bool scalar = system == "ho" || system == "aho" || system == "doublewell";
  if (c.mode == "spectrum" && !scalar) throw ConfigError("mode spectrum needs system ho, aho or doublewell");
  if (c.mode == "sweep" && !scalar) throw ConfigError("mode sweep needs system ho, aho or doublewell");
  if (c.mode == "sweep" && c.sweep.param.empty()) throw ConfigError("mode sweep needs exactly one swept parameter");
  if (c.mode == "evolve" && scalar) throw ConfigError("mode evolve needs system su3 or neutrino");
  if (c.mode == "evolve" && c.evolve.dts.empty()) throw ConfigError("evolve.dts must not be empty");
  if (system == "doublewell" && c.multigrid.chain.size() > 1)
    throw ConfigError("doublewell uses parity blocks; a multigrid chain is not supported");
  if (scalar) {
    ScalarFieldSpec spec{c.field.m0_sq, c.field.lambda, c.field.phi_max, c.field.n_s};
    try {
      spec.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("field: ") + e.what());
    }
  }
  return c;
}

inline json load_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path);
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Output

/// Collects named tables and writes them to the output directory as .csv or
/// .json files.
class Output {
public:
  Output(std::filesystem::path dir, Format format, std::ostream& log) : dir_(std::move(dir)), format_(format), log_(log) {}

  void write(const std::string& name, const Table& table) {
    std::filesystem::create_directories(dir_);
    const auto path = dir_ / (name + (format_ == Format::csv ? ".csv" : ".json"));
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    if (format_ == Format::csv) table.write_csv(os);
    else os << table.to_json().dump(2) << '\n';
    written_.push_back(path);
    log_ << "wrote " << path.string() << '\n';
  }

  std::ostream& log() { return log_; }
  const std::vector<std::filesystem::path>& written() const { return written_; }

private:
  std::filesystem::path dir_;
  Format format_;
  std::ostream& log_;
  std::vector<std::filesystem::path> written_;
};

inline Table trace_table(const SolveTrace& trace, bool complex) {
  std::ostringstream os;
  write_trace_csv(os, trace, complex);
  std::istringstream is(os.str());
  const CsvData data = read_csv(is);
  Table t{data.columns, {}};
  for (const auto& row : data.rows) {
    std::vector<Cell> cells;
    cells.emplace_back(std::stoll(row[0]));
    cells.emplace_back(std::stoll(row[1]));
    for (std::size_t c = 2; c < row.size(); ++c) cells.emplace_back(std::stod(row[c]));
    t.add(std::move(cells));
  }
  return t;
}

inline Table stats_table(const std::vector<ZoomStats>& stats, double reference) {
  Table t{{"zoom", "min", "median", "lo68", "hi68", "min_dev", "median_dev"}, {}};
  for (const auto& s : stats)
    t.add({static_cast<long long>(s.zoom), s.min, s.median, s.p16, s.p84, s.min - reference, s.median - reference});
  return t;
}

// ---------------------------------------------------------------------------
// Workflows

inline ScalarFieldSpec field_spec(const RunConfig& c, std::size_t n_s) {
  return {c.field.m0_sq, c.field.lambda, c.field.phi_max, n_s};
}

/// Closed-form energy when the model is a harmonic oscillator.
inline std::optional<double> exact_level(const RunConfig& c, std::size_t n) {
  if (c.field.lambda == 0.0 && c.field.m0_sq > 0.0) return (static_cast<double>(n) + 0.5) * std::sqrt(c.field.m0_sq);
  return std::nullopt;
}

inline SolveParams solve_params(const RunConfig& c) {
  SolveParams p;
  p.K = c.solver.K;
  p.eta = c.solver.eta.value_or(0.0);
  p.num_reads = c.solver.num_reads;
  p.reads_per_zoom = c.solver.reads_per_zoom;
  p.z_init = c.solver.z_init;
  p.z_max = c.solver.z_max;
  p.seed = c.seed;
  p.runs = c.solver.runs;
  p.sweeps = c.solver.sweeps;
  p.threads = c.solver.threads;
  return p;
}

/// eta per state: explicit list, else a single eta, else E_dig + 0.01.
inline std::vector<double> state_etas(const RunConfig& c, const Eigen::VectorXd& levels, std::size_t n_states) {
  std::vector<double> etas;
  for (std::size_t k = 0; k < n_states; ++k) {
    if (k < c.solver.etas.size()) etas.push_back(c.solver.etas[k]);
    else if (c.solver.eta) etas.push_back(*c.solver.eta);
    else etas.push_back(levels(static_cast<Eigen::Index>(k)) + 0.01);
  }
  return etas;
}

inline std::vector<double> state_mus(const RunConfig& c, std::size_t n_states) {
  std::vector<double> mus;
  for (std::size_t k = 0; k < n_states; ++k) mus.push_back(k < c.solver.mus.size() ? c.solver.mus[k] : c.solver.mu);
  return mus;
}

inline Cell optional_cell(std::optional<double> v) { return v ? Cell(*v) : Cell(std::monostate{}); }

inline void add_summary_row(Table& t, std::size_t state, const std::string& parity, std::optional<double> exact,
                            double dig, const SolveTrace* trace) {
  std::vector<Cell> row{static_cast<long long>(state), parity, optional_cell(exact), dig};
  if (trace) {
    const auto& s = trace->stats.back();
    row.insert(row.end(), {s.min, s.median, s.p16, s.p84});
  } else {
    row.insert(row.end(), {std::monostate{}, std::monostate{}, std::monostate{}, std::monostate{}});
  }
  t.add(std::move(row));
}

inline Table summary_header() { return {{"state", "parity", "E_exact", "E_dig", "E_min", "E_median", "lo68", "hi68"}, {}}; }

inline void log_qubits(Output& out, const std::string& what, std::size_t logical) {
  out.log() << what << ": " << logical << " logical qubits\n";
}

/// Eigen-spectrum of a scalar-field model (optionally through a multigrid
/// chain, or per parity block for the double well).
inline int cmd_spectrum(const RunConfig& c, Output& out) {
  const std::size_t n_states = c.solver.n_states;
  const bool oracle_only = c.mode == "oracle";
  Table summary = summary_header();

  if (c.system == "doublewell") {
    const SymMatrix h = scalar_site_hamiltonian(field_spec(c, c.field.n_s));
    for (Parity parity : {Parity::even, Parity::odd}) {
      const std::string name = parity == Parity::even ? "even" : "odd";
      const SymMatrix block = parity_project(h, parity);
      const Eigen::VectorXd levels = eigenvalues(block);
      if (n_states > static_cast<std::size_t>(levels.size())) throw ConfigError("solver.n_states exceeds the block size");
      std::vector<SolveTrace> traces;
      if (!oracle_only) {
        log_qubits(out, "parity " + name, static_cast<std::size_t>(c.solver.K) * block.dim());
        SolveParams p = solve_params(c);
        p.seed = derive_seed(c.seed, parity == Parity::even ? 0 : 1);
        traces = solve_spectrum(block, n_states, state_etas(c, levels, n_states), state_mus(c, n_states), p);
      }
      for (std::size_t k = 0; k < n_states; ++k) {
        const double dig = levels(static_cast<Eigen::Index>(k));
        add_summary_row(summary, k, name, std::nullopt, dig, oracle_only ? nullptr : &traces[k]);
        if (!oracle_only) {
          out.write("state" + std::to_string(k) + "_" + name + "_trace", trace_table(traces[k], false));
          out.write("state" + std::to_string(k) + "_" + name + "_stats", stats_table(traces[k].stats, dig));
        }
      }
    }
    out.write("summary", summary);
    return exit_ok;
  }

  std::vector<std::size_t> chain = c.multigrid.chain;
  if (chain.empty() || oracle_only) chain = {c.field.n_s};
  std::vector<StateVector> previous;
  for (std::size_t stage = 0; stage < chain.size(); ++stage) {
    const ScalarFieldSpec spec = field_spec(c, chain[stage]);
    const SymMatrix h = scalar_site_hamiltonian(spec);
    const Eigen::VectorXd levels = eigenvalues(h);
    if (n_states > static_cast<std::size_t>(levels.size())) throw ConfigError("solver.n_states exceeds n_s");
    const bool last = stage + 1 == chain.size();
    if (oracle_only) {
      for (std::size_t k = 0; k < n_states; ++k)
        add_summary_row(summary, k, "", exact_level(c, k), levels(static_cast<Eigen::Index>(k)), nullptr);
      break;
    }
    SolveParams p = solve_params(c);
    if (stage < c.multigrid.K.size()) p.K = c.multigrid.K[stage];
    p.seed = derive_seed(c.seed, stage);
    std::vector<std::vector<double>> centers;
    if (stage > 0) {
      const int span = c.solver.z_max - c.solver.z_init;
      p.z_init = c.multigrid.z_init;
      p.z_max = c.multigrid.z_init + span;
      const ScalarFieldSpec coarse = field_spec(c, chain[stage - 1]);
      for (const auto& v : previous) centers.push_back(centers_from(multigrid_lift(v, coarse, spec), false));
    }
    log_qubits(out, "n_s=" + std::to_string(chain[stage]), static_cast<std::size_t>(p.K) * chain[stage]);
    const auto traces = solve_spectrum(h, n_states, state_etas(c, levels, n_states), state_mus(c, n_states), p, centers);
    previous.clear();
    for (const auto& t : traces) previous.push_back(t.best().wavefunction);
    const std::string prefix = chain.size() > 1 ? "ns" + std::to_string(chain[stage]) + "_" : "";
    for (std::size_t k = 0; k < n_states; ++k) {
      const double dig = levels(static_cast<Eigen::Index>(k));
      out.write(prefix + "state" + std::to_string(k) + "_trace", trace_table(traces[k], false));
      out.write(prefix + "state" + std::to_string(k) + "_stats", stats_table(traces[k].stats, dig));
      if (last) add_summary_row(summary, k, "", exact_level(c, k), dig, &traces[k]);
    }
  }
  out.write("summary", summary);
  return exit_ok;
}

/// Parameter scan of the ground-state solve; energies are reported as
/// deviations from the digitized eigenvalue.
inline int cmd_sweep(const RunConfig& c, Output& out) {
  const SymMatrix h = scalar_site_hamiltonian(field_spec(c, c.field.n_s));
  const double e0 = eigenvalues(h)(0);
  Table t{{"param", "zoom", "min", "median", "lo68", "hi68"}, {}};
  for (std::size_t k = 0; k < c.sweep.values.size(); ++k) {
    const double v = c.sweep.values[k];
    SolveParams p = solve_params(c);
    if (!c.solver.eta) p.eta = e0 + 0.01;
    if (c.sweep.param == "eta") p.eta = v;
    else if (c.sweep.param == "reads") {
      if (!(v >= 1.0) || v != std::floor(v)) throw ConfigError("sweep.reads values must be positive integers");
      p.num_reads = static_cast<std::size_t>(v);
    } else {
      if (!(v >= 1.0) || v != std::floor(v)) throw ConfigError("sweep.K values must be positive integers");
      p.K = static_cast<int>(v);
    }
    log_qubits(out, c.sweep.param + "=" + format_double(v), static_cast<std::size_t>(p.K) * h.dim());
    const SolveTrace trace = solve_state(h, p);
    for (const auto& s : trace.stats)
      t.add({v, static_cast<long long>(s.zoom), s.min - e0, s.median - e0, s.p16 - e0, s.p84 - e0});
  }
  out.write("sweep_" + c.sweep.param, t);
  return exit_ok;
}

/// Model for the clock workflows: physical Hamiltonian, input state and the
/// named observables evaluated on each time slice.
struct EvolutionModel {
  SymMatrix h;
  StateVector psi_in;
  std::vector<std::string> names;
  std::vector<bool> probability;
  std::function<std::vector<double>(const StateVector&)> evaluate;
};

inline EvolutionModel evolution_model(const RunConfig& c) {
  if (c.system == "su3") {
    const PlaquetteHamiltonian pl = su3_plaquette_hamiltonian(c.su3.g);
    StateVector in = StateVector::basis(4, c.su3.initial_state);
    SymMatrix electric = pl.electric;
    return {pl.full, in, {"persistence", "electric_energy"}, {true, false},
            [in, electric](const StateVector& psi) {
              return std::vector<double>{persistence(psi, in), electric_energy(psi, electric)};
            }};
  }
  const auto& spec = c.neutrino.spec;
  std::vector<bool> electron;
  for (char ch : c.neutrino.initial_flavors) electron.push_back(ch == 'e');
  const std::size_t n = spec.n_sites;
  std::vector<std::string> names;
  std::vector<bool> prob;
  for (std::size_t i = 0; i < n; ++i) names.push_back("P" + std::to_string(i + 1)), prob.push_back(true);
  for (std::size_t i = 0; i < n; ++i) names.push_back("S" + std::to_string(i + 1)), prob.push_back(false);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      names.push_back("N" + std::to_string(i + 1) + std::to_string(j + 1)), prob.push_back(false);
  return {neutrino_hamiltonian(spec), flavor_state(electron), names, prob, [electron, n](const StateVector& psi) {
            std::vector<double> v;
            for (std::size_t i = 0; i < n; ++i)
              v.push_back(flavor_probability(psi, i, electron[i] ? Flavor::electron : Flavor::muon));
            for (std::size_t i = 0; i < n; ++i) v.push_back(entanglement_entropy(psi, i));
            for (std::size_t i = 0; i < n; ++i)
              for (std::size_t j = i + 1; j < n; ++j) v.push_back(log_negativity(psi, i, j));
            return v;
          }};
}

inline std::string dt_tag(double dt) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", dt);
  return buf;
}

inline std::vector<double> exact_observables(const EvolutionModel& m, double t) {
  const Eigen::VectorXcd v = expm_unitary(m.h, t) * m.psi_in.complex();
  return m.evaluate(StateVector(v).normalized());
}

/// Dense exact time series of every observable.
inline std::vector<ObservableSeries> oracle_series(const EvolutionModel& m, double t_max, double dt) {
  std::vector<ObservableSeries> series(m.names.size());
  for (std::size_t k = 0; k < series.size(); ++k) series[k].label = m.names[k], series[k].probability = m.probability[k];
  const auto steps = static_cast<long long>(std::floor(t_max / dt + 1e-9));
  for (long long s = 0; s <= steps; ++s) {
    const double t = static_cast<double>(s) * dt;
    const auto v = exact_observables(m, t);
    for (std::size_t k = 0; k < series.size(); ++k) series[k].push(t, v[k]);
  }
  return series;
}

inline Table series_table(const ObservableSeries& s) {
  std::ostringstream os;
  s.write_csv(os);
  std::istringstream is(os.str());
  const CsvData d = read_csv(is);
  Table t{d.columns, {}};
  for (const auto& row : d.rows) {
    std::vector<Cell> cells;
    for (const auto& cell : row) cells.emplace_back(std::stod(cell));
    t.add(std::move(cells));
  }
  return t;
}

/// Clock evolution for each requested time step plus the exact oracle.
inline int cmd_evolve(const RunConfig& c, Output& out) {
  const EvolutionModel m = evolution_model(c);
  const std::size_t n_T = c.evolve.n_T, n_s = m.h.dim();
  Table points{{"dt", "t", "observable", "value", "lo68", "hi68", "exact"}, {}};
  if (c.mode == "evolve") {
    for (std::size_t d = 0; d < c.evolve.dts.size(); ++d) {
      const double dt = c.evolve.dts[d];
      SolveParams p = solve_params(c);
      p.seed = derive_seed(c.seed, d);
      log_qubits(out, "dt=" + dt_tag(dt), 2 * static_cast<std::size_t>(p.K) * n_T * n_s);
      const ClockSolution sol = evolve(m.h, dt, n_T, m.psi_in, p, c.evolve.refinements, c.evolve.refine_z_init);

      std::vector<ObservableSeries> series(m.names.size());
      for (std::size_t k = 0; k < series.size(); ++k)
        series[k].label = m.names[k], series[k].probability = m.probability[k];
      Table slices{{"t"}, {}};
      for (std::size_t a = 0; a < n_s; ++a) {
        slices.columns.push_back("re_" + std::to_string(a));
        slices.columns.push_back("im_" + std::to_string(a));
      }
      for (std::size_t t = 0; t < n_T; ++t) {
        const double time = static_cast<double>(t) * dt;
        const auto best = m.evaluate(sol.slices[t]);
        std::vector<std::vector<double>> per_run(m.names.size());
        for (const auto& run : sol.slices_per_run) {
          const auto v = m.evaluate(run[t]);
          for (std::size_t k = 0; k < v.size(); ++k) per_run[k].push_back(v[k]);
        }
        const auto exact = exact_observables(m, time);
        for (std::size_t k = 0; k < m.names.size(); ++k) {
          const double lo = nearest_rank(per_run[k], 0.16), hi = nearest_rank(per_run[k], 0.84);
          series[k].push(time, best[k], lo, hi);
          points.add({dt, time, m.names[k], best[k], lo, hi, exact[k]});
        }
        std::vector<Cell> row{time};
        for (std::size_t a = 0; a < n_s; ++a) {
          row.emplace_back(sol.slices[t].re()(static_cast<Eigen::Index>(a)));
          row.emplace_back(sol.slices[t].im()(static_cast<Eigen::Index>(a)));
        }
        slices.add(std::move(row));
      }
      const std::string tag = "dt" + dt_tag(dt);
      for (const auto& s : series) out.write(tag + "_" + s.label, series_table(s));
      out.write(tag + "_slices", slices);
      out.write(tag + "_trace", trace_table(sol.trace, true));
      out.write(tag + "_stats", stats_table(sol.trace.stats, 0.0));
    }
    out.write("points", points);
  }
  for (const auto& s : oracle_series(m, c.evolve.oracle_t_max, c.evolve.oracle_dt))
    out.write("oracle_" + s.label, series_table(s));
  return exit_ok;
}

// ---------------------------------------------------------------------------
// Self-test: fixed oracle checks plus small seeded annealing runs.

struct SelftestCheck {
  std::string name;
  double value;
  double expected;
  double tolerance;
  bool pass() const { return std::abs(value - expected) <= tolerance; }
};

inline std::vector<SelftestCheck> selftest_checks(std::uint64_t seed, int sweeps) {
  std::vector<SelftestCheck> checks;
  {
    const Eigen::VectorXd e = eigenvalues(scalar_site_hamiltonian({1.0, 0.0, 5.0, 64}));
    checks.push_back({"ho_dig_E0", e(0), 0.5, 3.5e-10});
    checks.push_back({"ho_dig_E5", e(5), 5.5, 6.0e-4});
  }
  {
    const Eigen::VectorXd e = eigenvalues(scalar_site_hamiltonian({1.0, 32.0, 2.6, 64}));
    checks.push_back({"aho_dig_E0", e(0), 0.8597427, 1e-6});
    checks.push_back({"aho_dig_E5", e(5), 15.476155, 1e-3});
  }
  {
    const auto pl = su3_plaquette_hamiltonian(1.0);
    const StateVector in = StateVector::basis(4, 0);
    auto at = [&](double t) { return StateVector(Eigen::VectorXcd(expm_unitary(pl.full, t) * in.complex())); };
    checks.push_back({"su3_persistence_t0.2", persistence(at(0.2), in), 0.9802, 0.01});
    checks.push_back({"su3_persistence_t0.4", persistence(at(0.4), in), 0.9271, 0.01});
    checks.push_back({"su3_electric_t0.4", electric_energy(at(0.4), pl.electric), 0.2018, 0.02});
  }
  {
    const SymMatrix h = neutrino_hamiltonian(NeutrinoSpec{});
    const StateVector in = flavor_state({true, true, false, false});
    const StateVector psi(Eigen::VectorXcd(expm_unitary(h, 1.1) * in.complex()));
    checks.push_back({"nu_P1_t1.1", flavor_probability(psi, 0, Flavor::electron), 0.1553, 0.01});
    checks.push_back({"nu_S1_t1.1", entanglement_entropy(psi, 0), 0.3154, 0.02});
    checks.push_back({"nu_N14_t1.1", log_negativity(psi, 0, 3), 0.4851, 0.02});
  }
  {
    const SymMatrix h = scalar_site_hamiltonian({1.0, 0.0, 5.0, 16});
    SolveParams p;
    p.K = 3;
    p.eta = 0.51;
    p.num_reads = 200;
    p.z_max = 12;
    p.runs = 4;
    p.sweeps = sweeps;
    p.seed = seed;
    const SolveTrace t = solve_state(h, p);
    checks.push_back({"aqae_ho16_E0", t.stats.back().min, eigenvalues(h)(0), 1e-4});
  }
  {
    const auto pl = su3_plaquette_hamiltonian(1.0);
    const StateVector in = StateVector::basis(4, 0);
    SolveParams p;
    p.K = 2;
    p.num_reads = 200;
    p.z_max = 14;
    p.runs = 2;
    p.sweeps = sweeps;
    p.seed = derive_seed(seed, 1);
    const ClockSolution sol = evolve(pl.full, 0.2, 3, in, p);
    checks.push_back({"clock_su3_persistence_t0.4", persistence(sol.slices[2], in), 0.9271, 0.02});
  }
  return checks;
}

inline int cmd_selftest(std::uint64_t seed, int sweeps, Output& out) {
  const auto checks = selftest_checks(seed, sweeps);
  Table t{{"check", "value", "expected", "tolerance", "status"}, {}};
  bool ok = true;
  for (const auto& c : checks) {
    t.add({c.name, c.value, c.expected, c.tolerance, std::string(c.pass() ? "PASS" : "FAIL")});
    out.log() << (c.pass() ? "PASS " : "FAIL ") << c.name << " = " << format_double(c.value) << '\n';
    ok = ok && c.pass();
  }
  out.write("selftest", t);
  return ok ? exit_ok : exit_validation;
}

inline int run(const RunConfig& c, Output& out) {
  if (c.mode == "spectrum" || (c.mode == "oracle" && c.system != "su3" && c.system != "neutrino"))
    return cmd_spectrum(c, out);
  if (c.mode == "sweep") return cmd_sweep(c, out);
  return cmd_evolve(c, out);
}

} // namespace aqae::app
