#pragma once

// Discrete-event core. One Simulator instance is one replication: it owns the
// deployment, the operators' brokers and the blockchain, and executes the
// static, marketplace and auction request flows until every event drains.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "oransim/blockchain.hpp"
#include "oransim/broker.hpp"
#include "oransim/error.hpp"
#include "oransim/ids.hpp"
#include "oransim/metrics.hpp"
#include "oransim/radio.hpp"
#include "oransim/random.hpp"

namespace oransim {

enum class Mechanism { static_only, marketplace, auction };

inline std::string_view to_string(Mechanism m) {
  switch (m) {
    case Mechanism::static_only: return "STATIC";
    case Mechanism::marketplace: return "MARKETPLACE";
    case Mechanism::auction: return "AUCTION";
  }
  return "?";
}

inline std::optional<Mechanism> parse_mechanism(std::string_view s) {
  if (s == "STATIC") return Mechanism::static_only;
  if (s == "MARKETPLACE") return Mechanism::marketplace;
  if (s == "AUCTION") return Mechanism::auction;
  return std::nullopt;
}

struct ScenarioConfig {
  std::uint32_t num_operators = 2;
  std::uint32_t num_cells = 19;
  std::uint32_t num_ues = 200;
  double arrival_rate = 1.0;  // requests per second, all UEs together
  Mechanism mechanism = Mechanism::static_only;
  ChainParams chain;
  double horizon_s = 600.0;
  double mean_service_duration_s = 60.0;
  double processing_delay_s = 0.1;
  double auction_max_wait_s = 10.0;
  std::uint64_t seed = 1;

  RadioParams radio;
  BrokerParams broker;
  double tolerance = 0.05;
  double unit_price_min = 0.5;
  double unit_price_max = 1.5;
  // Contract budget, in price units per PRB the UE needs at its strongest cell.
  double budget_per_prb = 8.0;

  void validate() const {
    if (!(arrival_rate > 0.0)) throw ConfigError("arrival_rate must be > 0");
    if (!(horizon_s > 0.0)) throw ConfigError("horizon must be > 0");
    if (!(mean_service_duration_s > 0.0)) throw ConfigError("mean_service_duration must be > 0");
    if (!(processing_delay_s >= 0.0)) throw ConfigError("processing_delay must be >= 0");
    if (!(auction_max_wait_s > 0.0)) throw ConfigError("auction_max_wait must be > 0");
    if (num_operators < 1) throw ConfigError("num_operators must be >= 1");
    if (mechanism != Mechanism::static_only && num_operators < 2)
      throw ConfigError("num_operators must be >= 2 for sharing mechanisms");
    if (num_operators > num_cells) throw ConfigError("num_operators must not exceed num_cells");
    if (num_ues < 1) throw ConfigError("num_ues must be >= 1");
    if (!(tolerance >= 0.0 && tolerance < 1.0)) throw ConfigError("tolerance must be in [0, 1)");
    if (!(unit_price_min > 0.0 && unit_price_max >= unit_price_min))
      throw ConfigError("unit prices must satisfy 0 < unit_price_min <= unit_price_max");
    if (!(budget_per_prb > 0.0)) throw ConfigError("budget_per_prb must be > 0");
    if (broker.bundle_sizes.empty()) throw ConfigError("bundle_sizes must not be empty");
    ChainParams c = chain;
    c.num_peers = num_operators;
    c.validate();
  }
};

enum class FailureReason { no_resources, no_offer, provider_full };

inline std::string_view to_string(FailureReason r) {
  switch (r) {
    case FailureReason::no_resources: return "NO_RESOURCES";
    case FailureReason::no_offer: return "NO_OFFER";
    case FailureReason::provider_full: return "PROVIDER_FULL";
  }
  return "?";
}

struct ServiceRecord {
  RequestId request_id = 0;
  UeId ue;
  OperatorId requester;
  std::optional<OperatorId> provider;
  std::optional<CellId> cell;
  std::uint32_t prbs_allocated = 0;
  std::uint32_t needed_prbs = 0;  // at the allocated cell
  double demand_mbps = 0.0;
  double capacity_mbps = 0.0;
  double price_paid = 0.0;
  double max_price_ref = 0.0;
  double service_duration_s = 0.0;
  double requested_at = 0.0;
  std::optional<double> established_at;
  std::optional<FailureReason> failure;
  std::optional<double> failed_at;
  std::optional<double> torn_down_at;
  bool used_chain = false;
  std::uint32_t service_txs = 0;  // chain transactions issued for this request

  bool established() const { return established_at.has_value(); }
};

struct TxLatency {
  TxId tx_id = 0;
  TxKind kind = TxKind::sla_contract;
  double submitted_at = 0.0;
  double confirmed_at = 0.0;

  double latency() const { return confirmed_at - submitted_at; }
};

struct RawResults {
  ScenarioConfig config;
  std::vector<ServiceRecord> records;
  std::vector<TxLatency> tx_latencies;
  std::uint64_t overhead_bits = 0;
  double fork_rate = 0.0;
  std::size_t num_blocks = 0;
};

struct Arrival {
  double time = 0.0;
  UeId ue;
};

/// Poisson request process over [0, horizon): exponential gaps of mean
/// 1/rate, each request aimed at a uniformly drawn UE.
inline std::vector<Arrival> poisson_arrivals(double rate, double horizon_s, std::uint32_t num_ues, Rng& rng) {
  if (!(rate > 0.0)) throw ConfigError("arrival_rate must be > 0");
  std::vector<Arrival> out;
  out.reserve(static_cast<std::size_t>(rate * horizon_s * 1.1) + 16);
  for (double t = rng.exponential(1.0 / rate); t < horizon_s; t += rng.exponential(1.0 / rate))
    out.push_back({t, UeId{static_cast<std::uint32_t>(rng.below(num_ues))}});
  return out;
}

enum class EventKind { arrival, fill_deadline, mining_done, block_confirmed, auction_close, teardown };

struct Event {
  double time = 0.0;
  std::uint64_t sequence = 0;
  EventKind kind = EventKind::arrival;
  std::uint64_t subject = 0;  // request id or block id, by kind

  // Min-heap order on (time, sequence).
  bool operator>(const Event& o) const { return time != o.time ? time > o.time : sequence > o.sequence; }
};

class EventQueue {
 public:
  void push(double time, EventKind kind, std::uint64_t subject = 0) { heap_.push(Event{time, next_seq_++, kind, subject}); }
  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }
  Event pop() {
    Event e = heap_.top();
    heap_.pop();
    return e;
  }

 private:
  std::priority_queue<Event, std::vector<Event>, std::greater<>> heap_;
  std::uint64_t next_seq_ = 0;
};

/// Throws StateError unless free + leased PRBs equal the total on every cell.
inline void check_conservation(std::span<const OperatorState> states) {
  for (const auto& s : states)
    for (CellId c : s.owned_cells())
      if (s.free_prbs(c) + s.allocated_prbs(c) != s.total_prbs(c))
        throw StateError("PRB conservation violated on cell " + std::to_string(c.value));
}

class Simulator {
 public:
  using Observer = std::function<void(const Simulator&, const Event&)>;

  explicit Simulator(ScenarioConfig config)
      : config_((config.validate(), std::move(config))),
        deployment_(generate_deployment(config_.num_cells, config_.num_ues, config_.num_operators, config_.seed,
                                        config_.radio)),
        chain_(chain_params(config_)),
        mining_rng_(config_.seed, Stream::mining) {
    Rng prices(config_.seed, Stream::prices);
    states_.reserve(config_.num_operators);
    for (std::uint32_t op = 0; op < config_.num_operators; ++op)
      states_.emplace_back(OperatorId{op}, deployment_,
                           prices.uniform(config_.unit_price_min, config_.unit_price_max));

    Rng arrivals_rng(config_.seed, Stream::arrivals);
    Rng durations_rng(config_.seed, Stream::durations);
    const auto arrivals = poisson_arrivals(config_.arrival_rate, config_.horizon_s, config_.num_ues, arrivals_rng);
    records_.reserve(arrivals.size());
    flows_.resize(arrivals.size());
    for (const auto& a : arrivals) {
      ServiceRecord r;
      r.request_id = records_.size();
      r.ue = a.ue;
      r.requester = deployment_.ue(a.ue).home;
      r.demand_mbps = deployment_.ue(a.ue).demand_mbps;
      r.requested_at = a.time;
      r.service_duration_s = durations_rng.exponential(config_.mean_service_duration_s);
      r.max_price_ref = budget_for(a.ue);
      queue_.push(a.time, EventKind::arrival, r.request_id);
      records_.push_back(r);
    }
  }

  void set_observer(Observer obs) { observer_ = std::move(obs); }

  /// Runs every event to completion: arrivals stop at the horizon, then
  /// pending chain flows and teardowns drain.
  void run() {
    if (ran_) throw StateError("Simulator::run called twice");
    ran_ = true;
    if (config_.mechanism == Mechanism::marketplace) {
      // Each operator registers its catalog entry on the chain once.
      for (std::size_t i = 0; i < states_.size(); ++i) submit(TxKind::offer_update, std::nullopt, 0.0);
      pump(0.0);
    }
    while (!queue_.empty()) {
      const Event e = queue_.pop();
      if (e.time < now_) throw StateError("event scheduled in the past");
      now_ = e.time;
      dispatch(e);
      if (observer_) observer_(*this, e);
    }
  }

  RawResults results() const {
    RawResults out;
    out.config = config_;
    out.records = records_;
    for (const auto& t : chain_.transactions())
      if (t.confirmed_at) out.tx_latencies.push_back({t.id, t.kind, t.submitted_at, *t.confirmed_at});
    out.overhead_bits = chain_.overhead_bits();
    out.fork_rate = chain_.fork_rate_estimate();
    out.num_blocks = chain_.blocks().size();
    return out;
  }

  double now() const { return now_; }
  const ScenarioConfig& config() const { return config_; }
  const Deployment& deployment() const { return deployment_; }
  const Blockchain& chain() const { return chain_; }
  std::span<const OperatorState> states() const { return states_; }
  std::span<const ServiceRecord> records() const { return records_; }

 private:
  struct TxRole {
    std::optional<RequestId> request;
    std::optional<Bid> bid;
  };

  // Chain-side progress of one request.
  struct Flow {
    std::optional<SmartContract> contract;
    std::optional<Offer> offer;
    std::vector<Bid> confirmed_bids;
    std::optional<Bid> winner;
    bool auction_closed = false;
  };

  static ChainParams chain_params(const ScenarioConfig& c) {
    ChainParams p = c.chain;
    p.num_peers = c.num_operators;
    return p;
  }

  double budget_for(UeId ue) const {
    const auto& u = deployment_.ue(ue);
    const PrbNeed need = prbs_needed(u.demand_mbps, deployment_.sinr_db(ue, u.serving_cell),
                                     deployment_.cell(u.serving_cell).prb_bandwidth_hz, config_.radio.max_prbs_per_ue);
    return config_.budget_per_prb * need.count;
  }

  void dispatch(const Event& e) {
    switch (e.kind) {
      case EventKind::arrival: on_arrival(records_.at(e.subject)); break;
      case EventKind::fill_deadline: pump(now_); break;
      case EventKind::mining_done: {
        const Block& b = chain_.finish_mining(now_);
        queue_.push(b.fully_propagated_at, EventKind::block_confirmed, b.id);
        pump(now_);
        break;
      }
      case EventKind::block_confirmed:
        for (const auto& [tx, at] : chain_.confirm_block(e.subject, now_)) on_confirmed(tx);
        pump(now_);
        break;
      case EventKind::auction_close: {
        auto& rec = records_.at(e.subject);
        if (!flows_[rec.request_id].auction_closed) close_auction(rec);
        pump(now_);
        break;
      }
      case EventKind::teardown: teardown(records_.at(e.subject)); break;
    }
  }

  void on_arrival(ServiceRecord& rec) {
    switch (config_.mechanism) {
      case Mechanism::static_only: serve_from_home(rec, true); break;
      case Mechanism::marketplace: start_marketplace(rec); break;
      case Mechanism::auction: start_auction(rec); break;
    }
    pump(now_);
  }

  // Home-operator service. With `allow_partial`, a capacity shortfall is
  // served with whatever the best covering cell has left.
  bool serve_from_home(ServiceRecord& rec, bool allow_partial) {
    auto& home = states_[rec.requester.value];
    const QosRequirement req{rec.ue, rec.demand_mbps, config_.tolerance};
    const Admission adm = admission_control(home, req, deployment_, config_.broker);
    if (const auto* ok = std::get_if<Accept>(&adm)) {
      establish(rec, home, ok->cell, ok->prbs, 0.0);
      return true;
    }
    if (!allow_partial) return false;
    const auto cover = covering_cells(home, rec.ue, deployment_, config_.broker);
    if (!cover.empty()) {
      const CellId best = cover.front();
      const std::uint32_t need = needed_at(rec, best);
      const std::uint32_t partial = std::min(need, home.free_prbs(best));
      if (partial > 0) {
        establish(rec, home, best, partial, 0.0);
        return true;
      }
    }
    fail(rec, FailureReason::no_resources);
    return false;
  }

  void start_marketplace(ServiceRecord& rec) {
    if (serve_from_home(rec, false)) return;
    auto& flow = flows_[rec.request_id];
    const auto catalog = build_catalog(states_, rec.requester, deployment_, rec.ue, config_.broker);
    flow.contract = contracts_.create(rec.requester, rec.ue, ResourceType::prb_bundle, rec.demand_mbps,
                                      rec.service_duration_s, rec.max_price_ref, config_.tolerance, now_);
    flow.offer = select_offer(catalog, *flow.contract, deployment_);
    if (!flow.offer) {
      fail(rec, FailureReason::no_offer);
      return;
    }
    submit(TxKind::sla_contract, rec.request_id, now_);
  }

  void start_auction(ServiceRecord& rec) {
    auto& flow = flows_[rec.request_id];
    flow.contract = contracts_.create(rec.requester, rec.ue, ResourceType::per_ue_allocation, rec.demand_mbps,
                                      rec.service_duration_s, rec.max_price_ref, config_.tolerance, now_);
    submit(TxKind::auction_contract, rec.request_id, now_);
  }

  void on_confirmed(TxId tx) {
    const auto& role = tx_roles_.at(tx - 1);
    if (!role.request) return;  // catalog registration
    auto& rec = records_.at(*role.request);
    auto& flow = flows_[rec.request_id];
    switch (chain_.tx(tx).kind) {
      case TxKind::sla_contract: {
        auto& provider = states_[flow.offer->provider.value];
        const auto cell = find_cell_with_free(provider, rec.ue, flow.offer->bundle_prbs, deployment_, config_.broker);
        if (cell)
          establish(rec, provider, *cell, flow.offer->bundle_prbs, flow.offer->total_price);
        else
          fail(rec, FailureReason::provider_full);
        break;
      }
      case TxKind::auction_contract: {
        for (const auto& s : states_) {
          if (s.id() == rec.requester) continue;
          if (auto bid = generate_bid(s, *flow.contract, deployment_, now_, config_.broker))
            submit(TxKind::bid, rec.request_id, now_, std::move(bid));
        }
        queue_.push(now_ + config_.auction_max_wait_s, EventKind::auction_close, rec.request_id);
        break;
      }
      case TxKind::bid: {
        if (flow.auction_closed) break;  // arrived after the deadline
        flow.confirmed_bids.push_back(*role.bid);
        if (flow.confirmed_bids.size() == states_.size() - 1) close_auction(rec);
        break;
      }
      case TxKind::winner_notice: {
        auto& winner = states_[flow.winner->bidder.value];
        const Bid& bid = *flow.winner;
        if (winner.free_prbs(bid.cell) >= bid.offered_prbs)
          establish(rec, winner, bid.cell, bid.offered_prbs, bid.price);
        else
          serve_from_home(rec, true);
        break;
      }
      case TxKind::offer_update: break;
    }
  }

  void close_auction(ServiceRecord& rec) {
    auto& flow = flows_[rec.request_id];
    flow.auction_closed = true;
    flow.winner = select_winner(flow.confirmed_bids, *flow.contract, deployment_);
    if (!flow.winner) {
      serve_from_home(rec, true);
      return;
    }
    submit(TxKind::winner_notice, rec.request_id, now_);
  }

  std::uint32_t needed_at(const ServiceRecord& rec, CellId cell) const {
    return prbs_needed(rec.demand_mbps, deployment_.sinr_db(rec.ue, cell), deployment_.cell(cell).prb_bandwidth_hz,
                       config_.radio.max_prbs_per_ue)
        .count;
  }

  void establish(ServiceRecord& rec, OperatorState& provider, CellId cell, std::uint32_t prbs, double price) {
    provider.allocate(cell, prbs, rec.request_id);
    rec.provider = provider.id();
    rec.cell = cell;
    rec.prbs_allocated = prbs;
    rec.needed_prbs = needed_at(rec, cell);
    rec.capacity_mbps =
        shannon_capacity_mbps(prbs, deployment_.sinr_db(rec.ue, cell), deployment_.cell(cell).prb_bandwidth_hz);
    rec.price_paid = price;
    rec.established_at = now_ + config_.processing_delay_s;
    queue_.push(*rec.established_at + rec.service_duration_s, EventKind::teardown, rec.request_id);
  }

  void teardown(ServiceRecord& rec) {
    if (rec.torn_down_at) throw StateError("double teardown of request " + std::to_string(rec.request_id));
    if (!rec.provider) throw StateError("teardown of unestablished request " + std::to_string(rec.request_id));
    states_[rec.provider->value].release(rec.request_id);
    rec.torn_down_at = now_;
  }

  void fail(ServiceRecord& rec, FailureReason reason) {
    rec.failure = reason;
    rec.failed_at = now_;
  }

  TxId submit(TxKind kind, std::optional<RequestId> request, double now, std::optional<Bid> bid = std::nullopt) {
    const TxId id = chain_.submit_transaction(kind, now);
    tx_roles_.push_back(TxRole{request, std::move(bid)});
    if (request) {
      auto& rec = records_.at(*request);
      rec.used_chain = true;
      ++rec.service_txs;
    }
    return id;
  }

  // Starts mining when possible and keeps one fill-deadline event pending.
  void pump(double now) {
    if (const auto done = chain_.start_mining(now, mining_rng_)) queue_.push(*done, EventKind::mining_done);
    if (const auto deadline = chain_.next_fill_deadline(); deadline && *deadline > scheduled_deadline_) {
      scheduled_deadline_ = *deadline;
      queue_.push(std::max(*deadline, now), EventKind::fill_deadline);
    }
  }

  ScenarioConfig config_;
  Deployment deployment_;
  Blockchain chain_;
  Rng mining_rng_;
  std::vector<OperatorState> states_;
  std::vector<ServiceRecord> records_;
  std::vector<Flow> flows_;
  std::vector<TxRole> tx_roles_;
  ContractFactory contracts_;
  EventQueue queue_;
  Observer observer_;
  double now_ = 0.0;
  double scheduled_deadline_ = -1.0;
  bool ran_ = false;
};

inline RawResults run_scenario(const ScenarioConfig& config) {
  Simulator sim(config);
  sim.run();
  return sim.results();
}

}  // namespace oransim
