#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>

namespace oransim {

inline constexpr double kSatisfactionQosWeight = 0.8;

/// UE satisfaction in [0, 1]: a QoS term (delivered fraction of demand,
/// capped at 1) blended with a price term (unspent fraction of the budget).
inline double satisfaction(double capacity_mbps, double demand_mbps, double price_paid, double max_price_ref,
                           double qos_weight = kSatisfactionQosWeight) {
  const double qos = std::clamp(capacity_mbps / demand_mbps, 0.0, 1.0);
  const double price = std::clamp(1.0 - price_paid / max_price_ref, 0.0, 1.0);
  return qos_weight * qos + (1.0 - qos_weight) * price;
}

struct AllocationFit {
  std::uint32_t allocated_prbs = 0;
  std::uint32_t needed_prbs = 0;
};

/// Share of allocated PRBs that serve actual need. Records with zero PRBs
/// are skipped; no remaining records gives nullopt (undefined, not zero).
inline std::optional<double> efficiency(std::span<const AllocationFit> allocations) {
  std::uint64_t useful = 0;
  std::uint64_t allocated = 0;
  for (const auto& a : allocations) {
    if (a.allocated_prbs == 0) continue;
    useful += std::min(a.allocated_prbs, a.needed_prbs);
    allocated += a.allocated_prbs;
  }
  if (allocated == 0) return std::nullopt;
  return static_cast<double>(useful) / static_cast<double>(allocated);
}

}  // namespace oransim
