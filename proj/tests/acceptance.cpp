// Acceptance run: the full reference sweep, then one PASS/FAIL line per
// headline criterion. Exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <CLI11.hpp>

#include "oransim/oransim.hpp"
#include "scenario_checks.hpp"

using namespace oransim;

namespace {

// Pinned tolerances.
constexpr double kReplicationShare = 0.70;
constexpr double kAuctionEfficiencyFloor = 0.99;
constexpr double kOracleRelTol = 1e-9;
constexpr double kRuntimeBudgetS = 300.0;
constexpr int kPropertyCases = 200;
constexpr double kOrderingLambda = 5.0;
constexpr std::uint32_t kIqrOperators = 8;
constexpr double kIqrLambda = 5.0;
constexpr std::uint64_t kTrendMinBlockBits = 6000;

// Linear interpolation between order statistics.
double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  if (v.empty()) return std::nan("");
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double median(const std::vector<double>& v) { return quantile(v, 0.5); }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

class Verdicts {
 public:
  void report(const std::string& name, bool ok, const std::string& detail) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << " | " << detail << '\n';
    failed_ += !ok;
  }
  int failed() const { return failed_; }

 private:
  int failed_ = 0;
};

struct Index {
  explicit Index(const std::vector<MetricsReport>& reports) {
    for (const auto& r : reports) {
      by_cell[{r.mechanism, r.num_operators, r.arrival_rate}].push_back(&r);
      by_block[{r.mechanism, r.num_operators, r.arrival_rate, r.block_bits}].push_back(&r);
      by_seed[{r.mechanism, r.seed, r.block_bits}] = &r;
    }
  }

  std::vector<double> field(Mechanism m, std::uint32_t ops, double l, std::optional<double> MetricsReport::*f) const {
    std::vector<double> out;
    for (const auto* r : by_cell.at({m, ops, l}))
      if (r->*f) out.push_back(*(r->*f));
    return out;
  }

  std::vector<double> delays(Mechanism m, std::uint32_t ops, double l, std::optional<std::uint64_t> bits = {}) const {
    std::vector<double> out;
    const auto& reps = bits ? by_block.at({m, ops, l, *bits}) : by_cell.at({m, ops, l});
    for (const auto* r : reps)
      for (const auto& s : r->delay_samples) out.push_back(s.delay_s);
    return out;
  }

  std::map<std::tuple<Mechanism, std::uint32_t, double>, std::vector<const MetricsReport*>> by_cell;
  std::map<std::tuple<Mechanism, std::uint32_t, double, std::uint64_t>, std::vector<const MetricsReport*>> by_block;
  std::map<std::tuple<Mechanism, std::uint64_t, std::uint64_t>, const MetricsReport*> by_seed;
};

void ordering(Verdicts& v, const SweepSpec& spec, const Index& idx) {
  bool ok = true;
  std::string detail;
  for (auto field : {&MetricsReport::mean_capacity_mbps, &MetricsReport::mean_satisfaction}) {
    const char* name = field == &MetricsReport::mean_capacity_mbps ? "capacity" : "satisfaction";
    for (auto ops : spec.operators) {
      const double st = median(idx.field(Mechanism::static_only, ops, kOrderingLambda, field));
      const double mp = median(idx.field(Mechanism::marketplace, ops, kOrderingLambda, field));
      const double au = median(idx.field(Mechanism::auction, ops, kOrderingLambda, field));
      // Replications are paired: one seed and block size give the same
      // deployment and arrivals under every mechanism.
      int held = 0, total = 0;
      for (const auto* r : idx.by_cell.at({Mechanism::static_only, ops, kOrderingLambda})) {
        const auto* m = idx.by_seed.at({Mechanism::marketplace, r->seed, r->block_bits});
        const auto* a = idx.by_seed.at({Mechanism::auction, r->seed, r->block_bits});
        ++total;
        held += *(m->*field) > *(a->*field) && *(a->*field) > *(r->*field);
      }
      const double share = static_cast<double>(held) / total;
      const bool cell_ok = mp > au && au > st && share >= kReplicationShare;
      ok = ok && cell_ok;
      detail += std::string(name) + " M=" + std::to_string(ops) + " MP/AU/ST " + fmt(mp) + "/" + fmt(au) + "/" +
                fmt(st) + " reps " + fmt(share) + (cell_ok ? "" : " (!)") + "; ";
    }
  }
  v.report("capacity/satisfaction ordering MARKETPLACE > AUCTION > STATIC at lambda=5", ok, detail);
}

void efficiency(Verdicts& v, const SweepSpec& spec, const Index& idx) {
  bool ok = true;
  std::string detail;
  for (auto ops : spec.operators) {
    std::vector<double> mp, au;
    for (auto l : spec.lambdas) {
      for (double e : idx.field(Mechanism::marketplace, ops, l, &MetricsReport::efficiency)) mp.push_back(e);
      for (double e : idx.field(Mechanism::auction, ops, l, &MetricsReport::efficiency)) au.push_back(e);
    }
    const double m = median(mp), a = median(au);
    const bool cell_ok = a > m && a >= kAuctionEfficiencyFloor;
    ok = ok && cell_ok;
    detail += "M=" + std::to_string(ops) + " AU " + fmt(a) + " MP " + fmt(m) + (cell_ok ? "" : " (!)") + "; ";
  }
  v.report("efficiency AUCTION > MARKETPLACE, auction >= 0.99", ok, detail);
}

void delay_ordering(Verdicts& v, const SweepSpec& spec, const Index& idx) {
  bool ok = true;
  std::string detail;
  for (auto l : spec.lambdas) {
    double prev_au = -1.0;
    for (auto ops : spec.operators) {
      const double mp = median(idx.delays(Mechanism::marketplace, ops, l));
      const double au = median(idx.delays(Mechanism::auction, ops, l));
      const bool cell_ok = au > mp && au > prev_au;
      ok = ok && cell_ok;
      prev_au = au;
      detail += "l=" + fmt(l) + " M=" + std::to_string(ops) + " AU " + fmt(au) + " MP " + fmt(mp) +
                (cell_ok ? "" : " (!)") + "; ";
    }
  }
  v.report("delay AUCTION > MARKETPLACE, auction increasing in M", ok, detail);
}

void marketplace_trend(Verdicts& v, const SweepSpec& spec, const Index& idx) {
  bool ok = true;
  std::string detail;
  for (auto ops : spec.operators)
    for (auto bits : spec.block_bits) {
      if (bits < kTrendMinBlockBits) continue;
      std::string row;
      double prev = INFINITY;
      bool row_ok = true;
      for (auto l : spec.lambdas) {
        const double d = median(idx.delays(Mechanism::marketplace, ops, l, bits));
        row_ok = row_ok && d <= prev;
        prev = d;
        row += fmt(d) + " ";
      }
      ok = ok && row_ok;
      detail += "M=" + std::to_string(ops) + " bits=" + std::to_string(bits) + " [" + row + "]" +
                (row_ok ? "" : " (!)") + "; ";
    }
  v.report("marketplace delay nonincreasing in lambda (block >= 6000)", ok, detail);
}

void overhead(Verdicts& v, const SweepSpec& spec, const Index& idx) {
  auto total = [&](Mechanism m, std::uint32_t ops, double l, std::uint64_t bits) {
    double sum = 0.0;
    for (const auto* r : idx.by_block.at({m, ops, l, bits})) sum += static_cast<double>(r->overhead_bits);
    return sum;
  };
  bool ok = true;
  int bad = 0;
  for (auto l : spec.lambdas)
    for (auto bits : spec.block_bits) {
      double prev_mp = -1.0, prev_au = -1.0;
      for (auto ops : spec.operators) {
        const double mp = total(Mechanism::marketplace, ops, l, bits);
        const double au = total(Mechanism::auction, ops, l, bits);
        const double st = total(Mechanism::static_only, ops, l, bits);
        const bool cell_ok = au > mp && mp > prev_mp && au > prev_au && st == 0.0;
        bad += !cell_ok;
        ok = ok && cell_ok;
        prev_mp = mp;
        prev_au = au;
      }
    }
  const double au8 = total(Mechanism::auction, spec.operators.back(), spec.lambdas.front(), spec.block_bits.front());
  const double mp8 = total(Mechanism::marketplace, spec.operators.back(), spec.lambdas.front(), spec.block_bits.front());
  v.report("overhead AUCTION > MARKETPLACE, increasing in M, STATIC = 0", ok,
           std::to_string(bad) + " violating cells; e.g. M=" + std::to_string(spec.operators.back()) + " AU " +
               fmt(au8) + " MP " + fmt(mp8) + " bits");
}

void variability(Verdicts& v, const Index& idx) {
  auto iqr = [&](Mechanism m) {
    const auto d = idx.delays(m, kIqrOperators, kIqrLambda);
    return quantile(d, 0.75) - quantile(d, 0.25);
  };
  const double au = iqr(Mechanism::auction), mp = iqr(Mechanism::marketplace);
  v.report("pooled delay IQR AUCTION > MARKETPLACE at M=8, lambda=5", au > mp, "AU " + fmt(au) + " MP " + fmt(mp));
}

void structural(Verdicts& v) {
  std::mt19937_64 g(20240611);
  int clean = 0;
  std::string first;
  for (int i = 0; i < kPropertyCases; ++i) {
    const ScenarioConfig cfg = checks::random_case(g);
    const auto violations = checks::check_scenario(cfg, true);
    if (violations.empty()) ++clean;
    else if (first.empty()) first = checks::describe(cfg) + ": " + violations.front();
  }
  v.report("structural invariants on randomized small instances", clean == kPropertyCases,
           std::to_string(clean) + "/" + std::to_string(kPropertyCases) + " clean" +
               (first.empty() ? "" : "; first: " + first));
}

void oracles(Verdicts& v) {
  int bad = 0;
  std::string detail;
  auto rel = [&](const char* name, double got, double want) {
    const bool ok = std::abs(got - want) <= std::abs(want) * kOracleRelTol + (want == 0.0 ? kOracleRelTol : 0.0);
    if (!ok) {
      ++bad;
      detail += std::string(name) + " " + fmt(got) + " != " + fmt(want) + "; ";
    }
  };
  rel("path_loss(1000)", path_loss_db(1000.0), 128.1);
  rel("path_loss(100)", path_loss_db(100.0), 90.5);
  rel("shannon(1, 0 dB)", shannon_capacity_mbps(1, 0.0, 180e3), 0.18);
  rel("shannon(0)", shannon_capacity_mbps(0, 10.0, 180e3), 0.0);
  rel("prbs_needed(1, 0 dB)", prbs_needed(1.0, 0.0, 180e3).count, 6.0);
  for (double sinr = -8.0; sinr <= 25.0; sinr += 1.1)
    for (double demand = 0.1; demand <= 12.0; demand *= 1.5) {
      std::uint32_t n = 1;
      while (n <= 100 && shannon_capacity_mbps(n, sinr, 180e3) < demand) ++n;
      const PrbNeed got = prbs_needed(demand, sinr, 180e3);
      if (n > 100 ? !got.uncoverable : (got.uncoverable || got.count != n)) {
        ++bad;
        detail += "prbs_needed brute-force mismatch; ";
      }
    }
  rel("satisfaction(5,5,0,10)", satisfaction(5.0, 5.0, 0.0, 10.0), 1.0);
  rel("satisfaction(0,5,10,10)", satisfaction(0.0, 5.0, 10.0, 10.0), 0.0);
  rel("satisfaction(2.5,5,5,10)", satisfaction(2.5, 5.0, 5.0, 10.0), 0.5);
  rel("efficiency(exact)", *efficiency(std::vector<AllocationFit>{{5, 5}, {12, 12}}), 1.0);
  rel("efficiency(14,7)", *efficiency(std::vector<AllocationFit>{{14, 7}}), 0.5);
  if (efficiency(std::vector<AllocationFit>{})) {
    ++bad;
    detail += "efficiency of nothing is defined; ";
  }
  ChainParams p;
  p.max_block_bits = 1'000'000;
  rel("fork_rate(1 s propagation)", estimate_fork_rate(p), -std::expm1(-1.0));
  p.max_block_bits = 0;
  rel("fork_rate(0)", estimate_fork_rate(p), 0.0);
  v.report("unit oracles to 1e-9 relative", bad == 0, bad == 0 ? "all match" : detail);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reference sweep acceptance check"};
  std::uint32_t jobs = 4;
  std::uint64_t seed = 1;
  app.add_option("--jobs", jobs, "Worker threads");
  app.add_option("--seed", seed, "Base seed");
  CLI11_PARSE(app, argc, argv);

  SweepOverrides ov;
  ov.jobs = jobs;
  ov.seed = seed;
  const SweepSpec spec = parse_config(nlohmann::json(), ov);

  const auto start = std::chrono::steady_clock::now();
  const SweepOutcome outcome = run_sweep_reports(spec);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!outcome.ok()) {
    for (const auto& e : outcome.errors) std::cerr << "replication failed: " << e << '\n';
    std::cout << "FAIL reference sweep | " << outcome.errors.size() << " replications failed\n";
    return 1;
  }

  const Index idx(outcome.reports);
  Verdicts v;
  ordering(v, spec, idx);
  efficiency(v, spec, idx);
  delay_ordering(v, spec, idx);
  marketplace_trend(v, spec, idx);
  overhead(v, spec, idx);
  variability(v, idx);
  structural(v);
  oracles(v);
  v.report("reference sweep runtime with --jobs " + std::to_string(jobs), elapsed < kRuntimeBudgetS,
           fmt(elapsed) + " s for " + std::to_string(outcome.reports.size()) + " replications");

  std::cout << (v.failed() == 0 ? "ALL PASS" : std::to_string(v.failed()) + " FAILED") << '\n';
  return v.failed() == 0 ? 0 : 1;
}
