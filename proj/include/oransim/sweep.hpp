#pragma once

// Parameter sweeps: config file parsing with command-line overrides, stable
// per-cell seed derivation and a share-nothing worker pool.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "oransim/engine.hpp"
#include "oransim/error.hpp"
#include "oransim/report.hpp"

namespace oransim {

struct SweepSpec {
  std::vector<Mechanism> mechanisms{Mechanism::static_only, Mechanism::marketplace, Mechanism::auction};
  std::vector<std::uint32_t> operators{2, 4, 8};
  std::vector<double> lambdas{1.0, 5.0, 10.0};
  std::vector<std::uint64_t> block_bits{3000, 6000, 12000, 30000};
  std::uint32_t replications = 20;
  std::uint32_t jobs = 1;
  std::uint64_t seed = 1;
  ScenarioConfig base;
  std::string output_path = "results.csv";

  void validate() const {
    if (mechanisms.empty()) throw ConfigError("mechanisms: must not be empty");
    if (operators.empty()) throw ConfigError("operators: must not be empty");
    if (lambdas.empty()) throw ConfigError("lambda: must not be empty");
    if (block_bits.empty()) throw ConfigError("block_bits: must not be empty");
    if (replications < 1) throw ConfigError("replications: must be >= 1");
    if (jobs < 1) throw ConfigError("jobs: must be >= 1");
    if (output_path.empty()) throw ConfigError("output: must not be empty");
    for (auto m : mechanisms)
      for (auto ops : operators)
        for (auto l : lambdas)
          for (auto b : block_bits) scenario(m, ops, l, b, 0).validate();
  }

  ScenarioConfig scenario(Mechanism m, std::uint32_t ops, double lambda, std::uint64_t bits, std::uint32_t rep) const {
    ScenarioConfig c = base;
    c.mechanism = m;
    c.num_operators = ops;
    c.arrival_rate = lambda;
    c.chain.max_block_bits = bits;
    c.seed = derive_seed(seed, ops, lambda, bits, rep);
    return c;
  }

  /// base + FNV-1a(M, round(1000 lambda), block bits) + replication. The
  /// mechanism is deliberately left out so that mechanisms compared within
  /// one replication share deployment, prices, arrivals and mining draws.
  static std::uint64_t derive_seed(std::uint64_t base_seed, std::uint32_t ops, double lambda, std::uint64_t bits,
                                   std::uint32_t rep) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint64_t v) {
      for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xffU;
        h *= 0x100000001b3ULL;
      }
    };
    mix(ops);
    mix(static_cast<std::uint64_t>(std::llround(lambda * 1000.0)));
    mix(bits);
    return base_seed + h + rep;
  }
};

// Command-line values; set fields win over the config file.
struct SweepOverrides {
  std::optional<std::string> output_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::vector<Mechanism>> mechanisms;
  std::optional<std::vector<std::uint32_t>> operators;
  std::optional<std::vector<double>> lambdas;
  std::optional<std::vector<std::uint64_t>> block_bits;
  std::optional<std::uint32_t> replications;
  std::optional<std::uint32_t> jobs;
  std::optional<double> horizon_s;
};

namespace detail {

using nlohmann::json;

inline std::string type_name(const json& j) { return j.type_name(); }

template <class T>
T get_field(const json& obj, const std::string& key, const char* expected) {
  const json& v = obj.at(key);
  try {
    if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) throw std::invalid_argument("");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
        throw std::invalid_argument("");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw std::invalid_argument("");
    }
    return v.get<T>();
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected " + expected + ", got " + type_name(v));
  }
}

template <class T>
std::vector<T> get_list(const json& obj, const std::string& key, const char* expected) {
  const json& v = obj.at(key);
  if (!v.is_array()) throw ConfigError("config key '" + key + "': expected array of " + expected);
  std::vector<T> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    json wrap = {{key, v[i]}};
    out.push_back(get_field<T>(wrap, key, expected));
  }
  return out;
}

inline std::vector<Mechanism> get_mechanisms(const json& obj, const std::string& key) {
  std::vector<Mechanism> out;
  for (const auto& name : get_list<std::string>(obj, key, "mechanism names")) {
    const auto m = parse_mechanism(name);
    if (!m) throw ConfigError("config key '" + key + "': unknown mechanism '" + name + "'");
    out.push_back(*m);
  }
  return out;
}

inline void apply_scenario(const json& j, ScenarioConfig& c) {
  if (!j.is_object()) throw ConfigError("config key 'scenario': expected object");
  for (const auto& [key, _] : j.items()) {
    if (key == "num_cells") c.num_cells = get_field<std::uint32_t>(j, key, "unsigned integer");
    else if (key == "num_ues") c.num_ues = get_field<std::uint32_t>(j, key, "unsigned integer");
    else if (key == "horizon_s") c.horizon_s = get_field<double>(j, key, "number");
    else if (key == "mean_service_duration_s") c.mean_service_duration_s = get_field<double>(j, key, "number");
    else if (key == "processing_delay_s") c.processing_delay_s = get_field<double>(j, key, "number");
    else if (key == "auction_max_wait_s") c.auction_max_wait_s = get_field<double>(j, key, "number");
    else if (key == "tolerance") c.tolerance = get_field<double>(j, key, "number");
    else if (key == "unit_price_min") c.unit_price_min = get_field<double>(j, key, "number");
    else if (key == "unit_price_max") c.unit_price_max = get_field<double>(j, key, "number");
    else if (key == "budget_per_prb") c.budget_per_prb = get_field<double>(j, key, "number");
    else if (key == "header_bits") c.chain.header_bits = get_field<std::uint64_t>(j, key, "unsigned integer");
    else if (key == "mean_mining_time_s") c.chain.mean_mining_time_s = get_field<double>(j, key, "number");
    else if (key == "fill_timeout_s") c.chain.fill_timeout_s = get_field<double>(j, key, "number");
    else if (key == "p2p_link_capacity_bps") c.chain.p2p_link_capacity_bps = get_field<double>(j, key, "number");
    else if (key == "inter_site_distance_m") c.radio.inter_site_distance_m = get_field<double>(j, key, "number");
    else if (key == "bundle_sizes") c.broker.bundle_sizes = get_list<std::uint32_t>(j, key, "unsigned integer");
    else throw ConfigError("unknown config key 'scenario." + key + "'");
  }
}

}  // namespace detail

/// Builds a sweep from a JSON document. Every key is optional; unknown keys
/// are rejected. Precedence, lowest first: built-in defaults, `env_seed`,
/// the document, `overrides`.
inline SweepSpec parse_config(const nlohmann::json& doc, const SweepOverrides& overrides = {},
                              std::optional<std::uint64_t> env_seed = std::nullopt) {
  using detail::get_field;
  using detail::get_list;
  SweepSpec spec;
  if (env_seed) spec.seed = *env_seed;
  if (!doc.is_null() && !doc.is_object()) throw ConfigError("config: expected a JSON object at top level");
  if (doc.is_object())
    for (const auto& [key, val] : doc.items()) {
      if (key == "seed") spec.seed = get_field<std::uint64_t>(doc, key, "unsigned integer");
      else if (key == "mechanisms") spec.mechanisms = detail::get_mechanisms(doc, key);
      else if (key == "operators") spec.operators = get_list<std::uint32_t>(doc, key, "unsigned integer");
      else if (key == "lambda") spec.lambdas = get_list<double>(doc, key, "number");
      else if (key == "block_bits") spec.block_bits = get_list<std::uint64_t>(doc, key, "unsigned integer");
      else if (key == "replications") spec.replications = get_field<std::uint32_t>(doc, key, "unsigned integer");
      else if (key == "jobs") spec.jobs = get_field<std::uint32_t>(doc, key, "unsigned integer");
      else if (key == "output") spec.output_path = get_field<std::string>(doc, key, "string");
      else if (key == "scenario") detail::apply_scenario(val, spec.base);
      else throw ConfigError("unknown config key '" + key + "'");
    }
  if (overrides.output_path) spec.output_path = *overrides.output_path;
  if (overrides.seed) spec.seed = *overrides.seed;
  if (overrides.mechanisms) spec.mechanisms = *overrides.mechanisms;
  if (overrides.operators) spec.operators = *overrides.operators;
  if (overrides.lambdas) spec.lambdas = *overrides.lambdas;
  if (overrides.block_bits) spec.block_bits = *overrides.block_bits;
  if (overrides.replications) spec.replications = *overrides.replications;
  if (overrides.jobs) spec.jobs = *overrides.jobs;
  if (overrides.horizon_s) spec.base.horizon_s = *overrides.horizon_s;
  spec.validate();
  return spec;
}

inline SweepSpec parse_config_file(const std::string& path, const SweepOverrides& overrides = {},
                                   std::optional<std::uint64_t> env_seed = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config file " + path + ": " + e.what());
  }
  return parse_config(doc, overrides, env_seed);
}

struct GridCell {
  Mechanism mechanism;
  std::uint32_t operators;
  double lambda;
  std::uint64_t block_bits;

  auto key() const { return std::tie(mechanism, operators, lambda, block_bits); }
};

struct SweepOutcome {
  std::vector<MetricsReport> reports;  // sorted by grid coordinates, then seed
  std::vector<std::string> errors;     // one per failed replication

  bool ok() const { return errors.empty(); }
};

/// Runs every grid cell x replication on `spec.jobs` workers. Reports come
/// back in canonical order whatever the scheduling.
inline SweepOutcome run_sweep_reports(const SweepSpec& spec, std::ostream* progress = nullptr) {
  std::vector<GridCell> cells;
  for (auto m : spec.mechanisms)
    for (auto ops : spec.operators)
      for (auto l : spec.lambdas)
        for (auto b : spec.block_bits) cells.push_back({m, ops, l, b});

  std::vector<std::vector<MetricsReport>> per_cell(cells.size());
  std::vector<std::string> errors;
  std::mutex mu;
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const auto& gc = cells[i];
      std::vector<MetricsReport> out;
      out.reserve(spec.replications);
      for (std::uint32_t rep = 0; rep < spec.replications; ++rep) {
        const ScenarioConfig cfg = spec.scenario(gc.mechanism, gc.operators, gc.lambda, gc.block_bits, rep);
        try {
          out.push_back(aggregate(run_scenario(cfg)));
        } catch (const std::exception& e) {
          std::lock_guard lock(mu);
          errors.push_back(std::string(to_string(gc.mechanism)) + " M=" + std::to_string(gc.operators) +
                           " lambda=" + detail::format_number(gc.lambda) + " block_bits=" +
                           std::to_string(gc.block_bits) + " seed=" + std::to_string(cfg.seed) + ": " + e.what());
        }
      }
      per_cell[i] = std::move(out);
      if (progress) {
        std::lock_guard lock(mu);
        *progress << "[" << to_string(gc.mechanism) << " M=" << gc.operators
                  << " lambda=" << detail::format_number(gc.lambda) << " block_bits=" << gc.block_bits << "] "
                  << per_cell[i].size() << "/" << spec.replications << " replications\n";
      }
    }
  };

  const std::size_t n_workers = std::min<std::size_t>(spec.jobs, std::max<std::size_t>(cells.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::vector<std::size_t> order(cells.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return cells[a].key() < cells[b].key(); });

  SweepOutcome outcome;
  for (std::size_t i : order) {
    auto& reps = per_cell[i];
    std::sort(reps.begin(), reps.end(), [](const auto& a, const auto& b) { return a.seed < b.seed; });
    for (auto& r : reps) outcome.reports.push_back(std::move(r));
  }
  std::sort(errors.begin(), errors.end());
  outcome.errors = std::move(errors);
  return outcome;
}

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitRuntimeError = 2;

/// Runs the sweep and writes the CSV. On any failed replication the rows
/// gathered so far go to `<output>.partial` and the exit code is 2.
inline int run_sweep(const SweepSpec& spec, std::ostream* progress = nullptr, std::ostream* err = nullptr) {
  const SweepOutcome outcome = run_sweep_reports(spec, progress);
  try {
    if (!outcome.ok()) {
      write_csv(outcome.reports, spec.output_path + ".partial");
      if (err)
        for (const auto& e : outcome.errors) *err << "replication failed: " << e << '\n';
      return kExitRuntimeError;
    }
    write_csv(outcome.reports, spec.output_path);
  } catch (const IoError& e) {
    if (err) *err << e.what() << '\n';
    return kExitRuntimeError;
  }
  return kExitOk;
}

}  // namespace oransim
