#pragma once

// Per-operator RAN sharing broker: admission control, smart contract
// creation, marketplace catalog and offer selection, reverse-auction bidding
// and winner selection, plus the PRB ledger behind them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "oransim/error.hpp"
#include "oransim/ids.hpp"
#include "oransim/metrics.hpp"
#include "oransim/radio.hpp"

namespace oransim {

// Key of one PRB lease in an operator's ledger. The simulator uses the
// request id, which is unique per run.
using LeaseId = std::uint64_t;

struct BrokerParams {
  std::vector<std::uint32_t> bundle_sizes{5, 10, 20, 50};
  double coverage_threshold_db = -5.0;
  std::uint32_t max_prbs_per_ue = 100;
};

struct Lease {
  CellId cell;
  std::uint32_t prbs = 0;
};

class OperatorState {
 public:
  OperatorState(OperatorId id, const Deployment& dep, double price_per_prb) : id_(id), price_per_prb_(price_per_prb) {
    if (!(price_per_prb > 0.0) || !std::isfinite(price_per_prb)) throw ConfigError("price_per_prb must be > 0");
    for (const auto& c : dep.cells)
      if (c.owner == id) {
        owned_.push_back(c.id);
        free_[c.id] = c.total_prbs;
        total_[c.id] = c.total_prbs;
      }
  }

  OperatorId id() const { return id_; }
  double price_per_prb() const { return price_per_prb_; }
  const std::vector<CellId>& owned_cells() const { return owned_; }
  const std::map<LeaseId, Lease>& leases() const { return leases_; }

  bool owns(CellId c) const { return free_.contains(c); }

  std::uint32_t free_prbs(CellId c) const {
    const auto it = free_.find(c);
    if (it == free_.end()) throw LookupError("operator " + std::to_string(id_.value) + " does not own cell " +
                                             std::to_string(c.value));
    return it->second;
  }

  std::uint32_t total_prbs(CellId c) const { return total_.at(c); }

  std::uint32_t allocated_prbs(CellId c) const {
    std::uint32_t sum = 0;
    for (const auto& [_, l] : leases_)
      if (l.cell == c) sum += l.prbs;
    return sum;
  }

  void allocate(CellId cell, std::uint32_t prbs, LeaseId lease) {
    auto it = free_.find(cell);
    if (it == free_.end()) throw StateError("allocate on foreign cell " + std::to_string(cell.value));
    if (prbs > it->second)
      throw StateError("allocate " + std::to_string(prbs) + " PRBs with only " + std::to_string(it->second) + " free");
    if (leases_.contains(lease)) throw StateError("lease " + std::to_string(lease) + " already active");
    it->second -= prbs;
    leases_.emplace(lease, Lease{cell, prbs});
  }

  void release(LeaseId lease) {
    const auto it = leases_.find(lease);
    if (it == leases_.end()) throw StateError("release of inactive lease " + std::to_string(lease));
    free_.at(it->second.cell) += it->second.prbs;
    leases_.erase(it);
  }

 private:
  OperatorId id_;
  double price_per_prb_;
  std::vector<CellId> owned_;
  std::map<CellId, std::uint32_t> free_;
  std::map<CellId, std::uint32_t> total_;
  std::map<LeaseId, Lease> leases_;
};

enum class ResourceType { prb_bundle, per_ue_allocation };

struct QosRequirement {
  UeId ue;
  double required_mbps = 0.0;
  double tolerance = 0.0;

  // Lowest capacity the requester accepts.
  double floor_mbps() const { return (1.0 - tolerance) * required_mbps; }
};

struct SmartContract {
  ContractId id = 0;
  OperatorId requester;
  UeId ue;
  ResourceType resource_type = ResourceType::per_ue_allocation;
  double required_qos_mbps = 0.0;
  double service_duration_s = 0.0;
  double max_price = 0.0;
  double tolerance = 0.0;
  double created_at = 0.0;

  QosRequirement requirement() const { return {ue, required_qos_mbps, tolerance}; }
};

// Issues contracts with ids that increase per requester and never collide
// across requesters (requester index in the high 32 bits).
class ContractFactory {
 public:
  SmartContract create(OperatorId requester, UeId ue, ResourceType type, double qos_mbps, double duration_s,
                       double max_price, double tolerance, double now) {
    if (!(qos_mbps > 0.0) || !std::isfinite(qos_mbps)) throw ConfigError("required_qos must be > 0");
    if (!(duration_s > 0.0) || !std::isfinite(duration_s)) throw ConfigError("service_duration must be > 0");
    if (!(tolerance >= 0.0 && tolerance < 1.0)) throw ConfigError("tolerance must be in [0, 1)");
    if (!(max_price > 0.0) || !std::isfinite(max_price)) throw ConfigError("max_price must be > 0");
    if (requester.value >= next_.size()) next_.resize(requester.value + 1, 0);
    const ContractId id = (static_cast<ContractId>(requester.value) << 32) | ++next_[requester.value];
    return SmartContract{id, requester, ue, type, qos_mbps, duration_s, max_price, tolerance, now};
  }

 private:
  std::vector<std::uint32_t> next_;
};

struct Accept {
  CellId cell;
  std::uint32_t prbs = 0;
};

enum class RejectReason { no_coverage, no_capacity };

struct Reject {
  RejectReason reason;
};

using Admission = std::variant<Accept, Reject>;

/// Owned cells that cover `ue` (SINR at or above the threshold), best SINR
/// first, ties by lowest cell id.
inline std::vector<CellId> covering_cells(const OperatorState& state, UeId ue, const Deployment& dep,
                                          const BrokerParams& params) {
  std::vector<CellId> out;
  for (CellId c : state.owned_cells())
    if (dep.sinr_db(ue, c) >= params.coverage_threshold_db) out.push_back(c);
  std::stable_sort(out.begin(), out.end(),
                   [&](CellId a, CellId b) { return dep.sinr_db(ue, a) > dep.sinr_db(ue, b); });
  return out;
}

/// Best covering cell with at least `prbs` free.
inline std::optional<CellId> find_cell_with_free(const OperatorState& state, UeId ue, std::uint32_t prbs,
                                                 const Deployment& dep, const BrokerParams& params) {
  for (CellId c : covering_cells(state, ue, dep, params))
    if (state.free_prbs(c) >= prbs) return c;
  return std::nullopt;
}

/// Pure admission decision. The granted PRB count is the full need, trimmed
/// to what is free as long as the tolerance floor is still met.
inline Admission admission_control(const OperatorState& state, const QosRequirement& req, const Deployment& dep,
                                   const BrokerParams& params = {}) {
  const auto cover = covering_cells(state, req.ue, dep, params);
  if (cover.empty()) return Reject{RejectReason::no_coverage};
  for (CellId c : cover) {
    const double sinr = dep.sinr_db(req.ue, c);
    const double bw = dep.cell(c).prb_bandwidth_hz;
    const PrbNeed floor = prbs_needed(req.floor_mbps(), sinr, bw, params.max_prbs_per_ue);
    if (floor.uncoverable) continue;
    const PrbNeed full = prbs_needed(req.required_mbps, sinr, bw, params.max_prbs_per_ue);
    const std::uint32_t free = state.free_prbs(c);
    if (free >= floor.count) return Accept{c, std::min(full.count, free)};
  }
  return Reject{RejectReason::no_capacity};
}

inline Admission admission_control(const OperatorState& state, const SmartContract& contract, const Deployment& dep,
                                   const BrokerParams& params = {}) {
  return admission_control(state, contract.requirement(), dep, params);
}

struct Offer {
  OperatorId provider;
  std::uint32_t bundle_prbs = 0;
  double total_price = 0.0;
  std::vector<CellId> covering_cells;  // best SINR first
};

/// Every (provider, bundle) pair another operator can serve `ue` with right now.
inline std::vector<Offer> build_catalog(std::span<const OperatorState> states, OperatorId requester,
                                        const Deployment& dep, UeId ue, const BrokerParams& params = {}) {
  std::vector<Offer> catalog;
  for (const auto& s : states) {
    if (s.id() == requester) continue;
    const auto cover = covering_cells(s, ue, dep, params);
    for (std::uint32_t bundle : params.bundle_sizes) {
      Offer offer{s.id(), bundle, bundle * s.price_per_prb(), {}};
      for (CellId c : cover)
        if (s.free_prbs(c) >= bundle) offer.covering_cells.push_back(c);
      if (!offer.covering_cells.empty()) catalog.push_back(std::move(offer));
    }
  }
  return catalog;
}

/// Cheapest offer whose bundle meets the QoS floor within budget.
/// Ties: smaller bundle, then lower provider id.
inline std::optional<Offer> select_offer(std::span<const Offer> catalog, const SmartContract& contract,
                                         const Deployment& dep) {
  const Offer* best = nullptr;
  for (const auto& o : catalog) {
    if (o.covering_cells.empty() || o.total_price > contract.max_price) continue;
    const CellId c = o.covering_cells.front();
    const double cap = shannon_capacity_mbps(o.bundle_prbs, dep.sinr_db(contract.ue, c), dep.cell(c).prb_bandwidth_hz);
    if (cap < contract.requirement().floor_mbps()) continue;
    if (!best || std::tie(o.total_price, o.bundle_prbs, o.provider) <
                     std::tie(best->total_price, best->bundle_prbs, best->provider))
      best = &o;
  }
  if (!best) return std::nullopt;
  return *best;
}

struct Bid {
  ContractId contract_id = 0;
  OperatorId bidder;
  CellId cell;
  std::uint32_t offered_prbs = 0;
  double price = 0.0;
  double submitted_at = 0.0;
};

/// Linear pricing: offered PRBs times the bidder's unit price. nullopt is a decline.
inline std::optional<Bid> generate_bid(const OperatorState& state, const SmartContract& contract,
                                       const Deployment& dep, double now, const BrokerParams& params = {}) {
  if (state.id() == contract.requester) throw StateError("requester cannot bid on its own contract");
  const auto adm = admission_control(state, contract, dep, params);
  const auto* ok = std::get_if<Accept>(&adm);
  if (!ok) return std::nullopt;
  return Bid{contract.id, state.id(), ok->cell, ok->prbs, ok->prbs * state.price_per_prb(), now};
}

/// Satisfaction the contract's UE would get from `bid`.
inline double bid_satisfaction(const Bid& bid, const SmartContract& contract, const Deployment& dep) {
  const double cap =
      shannon_capacity_mbps(bid.offered_prbs, dep.sinr_db(contract.ue, bid.cell), dep.cell(bid.cell).prb_bandwidth_hz);
  return satisfaction(cap, contract.required_qos_mbps, bid.price, contract.max_price);
}

/// Highest expected satisfaction among in-budget bids. Ties: lower price,
/// then lower bidder id, so the result does not depend on bid order.
inline std::optional<Bid> select_winner(std::span<const Bid> bids, const SmartContract& contract,
                                        const Deployment& dep) {
  const Bid* best = nullptr;
  double best_score = 0.0;
  for (const auto& b : bids) {
    if (b.contract_id != contract.id) throw StateError("bid for a different contract");
    if (b.price > contract.max_price) continue;
    const double score = bid_satisfaction(b, contract, dep);
    const bool better = !best || score > best_score ||
                        (score == best_score && std::tie(b.price, b.bidder) < std::tie(best->price, best->bidder));
    if (better) {
      best = &b;
      best_score = score;
    }
  }
  if (!best) return std::nullopt;
  return *best;
}

}  // namespace oransim
