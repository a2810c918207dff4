#pragma once

// Per-scenario aggregates and the long-format CSV consumed by the plotting
// scripts.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "oransim/engine.hpp"
#include "oransim/error.hpp"
#include "oransim/metrics.hpp"

namespace oransim {

/// Share of the request-to-service time attributable to the chain. Zero
/// when the request never touched the chain. A chain request that failed
/// counts the time until it was turned down.
inline double blockchain_delay(const ServiceRecord& rec, double processing_delay_s) {
  if (!rec.used_chain) return 0.0;
  if (rec.established_at) return *rec.established_at - rec.requested_at - processing_delay_s;
  if (rec.failed_at) return *rec.failed_at - rec.requested_at;
  return 0.0;
}

inline double record_satisfaction(const ServiceRecord& rec) {
  return satisfaction(rec.capacity_mbps, rec.demand_mbps, rec.price_paid, rec.max_price_ref);
}

struct DelaySample {
  RequestId request_id = 0;
  double delay_s = 0.0;
};

struct MetricsReport {
  Mechanism mechanism = Mechanism::static_only;
  std::uint32_t num_operators = 0;
  double arrival_rate = 0.0;
  std::uint64_t block_bits = 0;
  std::uint64_t seed = 0;
  std::optional<double> mean_capacity_mbps;
  std::optional<double> mean_satisfaction;
  std::optional<double> efficiency;
  std::vector<DelaySample> delay_samples;  // every resolved request that used the chain
  std::uint64_t overhead_bits = 0;
  double fork_rate = 0.0;
  std::optional<double> served_fraction;
};

inline MetricsReport aggregate(const RawResults& raw) {
  const auto& cfg = raw.config;
  MetricsReport rep;
  rep.mechanism = cfg.mechanism;
  rep.num_operators = cfg.num_operators;
  rep.arrival_rate = cfg.arrival_rate;
  rep.block_bits = cfg.chain.max_block_bits;
  rep.seed = cfg.seed;
  rep.overhead_bits = raw.overhead_bits;
  rep.fork_rate = raw.fork_rate;

  // Canonical order so every sum is independent of how records were listed.
  std::vector<const ServiceRecord*> recs;
  recs.reserve(raw.records.size());
  for (const auto& r : raw.records) recs.push_back(&r);
  std::sort(recs.begin(), recs.end(), [](auto* a, auto* b) { return a->request_id < b->request_id; });

  // Every request counts: an unserved one contributes zero capacity and the
  // satisfaction of zero service at zero price.
  double cap_sum = 0.0;
  double sat_sum = 0.0;
  std::size_t served = 0;
  std::vector<AllocationFit> fits;
  for (const auto* r : recs) {
    sat_sum += record_satisfaction(*r);
    if (r->used_chain && (r->established() || r->failed_at))
      rep.delay_samples.push_back({r->request_id, blockchain_delay(*r, cfg.processing_delay_s)});
    if (!r->established()) continue;
    ++served;
    cap_sum += r->capacity_mbps;
    fits.push_back({r->prbs_allocated, r->needed_prbs});
  }
  if (!recs.empty()) {
    const auto n = static_cast<double>(recs.size());
    rep.mean_capacity_mbps = cap_sum / n;
    rep.mean_satisfaction = sat_sum / n;
    rep.served_fraction = static_cast<double>(served) / n;
  }
  rep.efficiency = efficiency(fits);
  return rep;
}

inline constexpr std::string_view kCsvHeader =
    "mechanism,M,lambda,block_bits,seed,row_kind,request_id,delay_s,capacity_mbps,satisfaction,efficiency,"
    "overhead_bits,served_fraction,fork_rate";

namespace detail {

// Shortest round-trip representation; identical on every run.
inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string format_number(std::uint64_t v) { return std::to_string(v); }

inline std::string format_optional(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

}  // namespace detail

/// Long format: per report one summary row, then one row per delay sample.
/// Undefined aggregates are empty cells.
inline void write_csv(std::span<const MetricsReport> reports, std::ostream& os) {
  using detail::format_number;
  using detail::format_optional;
  os << kCsvHeader << '\n';
  for (const auto& r : reports) {
    const std::string key = std::string(to_string(r.mechanism)) + ',' + std::to_string(r.num_operators) + ',' +
                            format_number(r.arrival_rate) + ',' + format_number(r.block_bits) + ',' +
                            format_number(r.seed) + ',';
    os << key << "summary,,," << format_optional(r.mean_capacity_mbps) << ',' << format_optional(r.mean_satisfaction)
       << ',' << format_optional(r.efficiency) << ',' << format_number(r.overhead_bits) << ','
       << format_optional(r.served_fraction) << ',' << format_number(r.fork_rate) << '\n';
    for (const auto& s : r.delay_samples)
      os << key << "sample," << s.request_id << ',' << format_number(s.delay_s) << ",,,,,,\n";
  }
}

inline void write_csv(std::span<const MetricsReport> reports, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_csv(reports, out);
  out.flush();
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace oransim
