// oransim: sweep runner and single-scenario inspector.

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oransim/oransim.hpp"

namespace {

using namespace oransim;

std::optional<std::uint64_t> env_seed() {
  const char* raw = std::getenv("ORANSIM_SEED");
  if (!raw || !*raw) return std::nullopt;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(raw, &used);
    if (used != std::string(raw).size()) throw std::invalid_argument(raw);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(std::string("ORANSIM_SEED: expected unsigned integer, got '") + raw + "'");
  }
}

std::vector<Mechanism> to_mechanisms(const std::vector<std::string>& names) {
  std::vector<Mechanism> out;
  for (auto n : names) {
    std::transform(n.begin(), n.end(), n.begin(), [](unsigned char c) { return std::toupper(c); });
    const auto m = parse_mechanism(n);
    if (!m) throw ConfigError("--mechanisms: unknown mechanism '" + n + "'");
    out.push_back(*m);
  }
  return out;
}

void write_json(const std::string& path, const nlohmann::json& doc) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << doc.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blockchain-enabled RAN sharing simulator"};
  app.require_subcommand(0, 1);

  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> mechanisms;
  std::vector<std::uint32_t> operators;
  std::vector<double> lambdas;
  std::vector<std::uint64_t> block_bits;
  std::optional<std::uint32_t> replications;
  std::optional<std::uint32_t> jobs;
  std::optional<double> horizon;

  app.add_option("--config", config_path, "JSON sweep configuration")->check(CLI::ExistingFile);
  app.add_option("--out", out_path, "CSV output path");
  app.add_option("--seed", seed, "Base seed (overrides config and ORANSIM_SEED)");
  app.add_option("--mechanisms", mechanisms, "STATIC,MARKETPLACE,AUCTION")->delimiter(',');
  app.add_option("--operators", operators, "Operator counts, e.g. 2,4,8")->delimiter(',');
  app.add_option("--lambda", lambdas, "Request rates per second, e.g. 1,5,10")->delimiter(',');
  app.add_option("--block-bits", block_bits, "Maximum block sizes in bits")->delimiter(',');
  app.add_option("--replications", replications, "Replications per grid cell");
  app.add_option("--jobs", jobs, "Worker threads");
  app.add_option("--horizon", horizon, "Arrival horizon in seconds");

  auto* inspect = app.add_subcommand("inspect", "Run one scenario and dump its deployment and chain as JSON");
  std::string deployment_out;
  std::string chain_out;
  inspect->add_option("--deployment-json", deployment_out, "Write the deployment here");
  inspect->add_option("--chain-json", chain_out, "Write the block list here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfigError;
  }

  SweepSpec spec;
  try {
    SweepOverrides ov;
    if (!out_path.empty()) ov.output_path = out_path;
    ov.seed = seed;
    if (!mechanisms.empty()) ov.mechanisms = to_mechanisms(mechanisms);
    if (!operators.empty()) ov.operators = operators;
    if (!lambdas.empty()) ov.lambdas = lambdas;
    if (!block_bits.empty()) ov.block_bits = block_bits;
    ov.replications = replications;
    ov.jobs = jobs;
    ov.horizon_s = horizon;
    spec = config_path.empty() ? parse_config(nlohmann::json(), ov, env_seed())
                               : parse_config_file(config_path, ov, env_seed());
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }

  try {
    if (*inspect) {
      // First grid point, first replication.
      const ScenarioConfig cfg =
          spec.scenario(spec.mechanisms.front(), spec.operators.front(), spec.lambdas.front(), spec.block_bits.front(), 0);
      Simulator sim(cfg);
      sim.run();
      const MetricsReport rep = aggregate(sim.results());
      std::cout << "mechanism=" << to_string(cfg.mechanism) << " M=" << cfg.num_operators
                << " lambda=" << cfg.arrival_rate << " block_bits=" << cfg.chain.max_block_bits << " seed=" << cfg.seed
                << "\nrequests=" << sim.records().size() << " blocks=" << sim.chain().blocks().size()
                << " overhead_bits=" << rep.overhead_bits << " served_fraction=" << rep.served_fraction.value_or(0.0)
                << '\n';
      if (!deployment_out.empty()) write_json(deployment_out, to_json(sim.deployment()));
      if (!chain_out.empty()) write_json(chain_out, sim.chain().to_json());
      return kExitOk;
    }
    return run_sweep(spec, &std::cout, &std::cerr);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return kExitRuntimeError;
  }
}
