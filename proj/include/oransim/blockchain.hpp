#pragma once

// Private blockchain shared by the operators' brokers: a FIFO mempool,
// fill-or-timeout block formation, one logical miner with exponential
// mining times, single-hop full-mesh propagation and overhead accounting.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "oransim/error.hpp"
#include "oransim/ids.hpp"
#include "oransim/random.hpp"

namespace oransim {

enum class TxKind { offer_update, sla_contract, auction_contract, bid, winner_notice };

inline std::string_view to_string(TxKind k) {
  switch (k) {
    case TxKind::offer_update: return "OFFER_UPDATE";
    case TxKind::sla_contract: return "SLA_CONTRACT";
    case TxKind::auction_contract: return "AUCTION_CONTRACT";
    case TxKind::bid: return "BID";
    case TxKind::winner_notice: return "WINNER_NOTICE";
  }
  return "?";
}

struct TxSizes {
  std::uint64_t offer_update = 300;
  std::uint64_t sla_contract = 500;
  std::uint64_t auction_contract = 500;
  std::uint64_t bid = 300;
  std::uint64_t winner_notice = 200;

  std::uint64_t of(TxKind k) const {
    switch (k) {
      case TxKind::offer_update: return offer_update;
      case TxKind::sla_contract: return sla_contract;
      case TxKind::auction_contract: return auction_contract;
      case TxKind::bid: return bid;
      case TxKind::winner_notice: return winner_notice;
    }
    return 0;
  }

  std::uint64_t smallest() const {
    return std::min({offer_update, sla_contract, auction_contract, bid, winner_notice});
  }
};

struct ChainParams {
  std::uint64_t max_block_bits = 6000;
  std::uint64_t header_bits = 200;
  double mean_mining_time_s = 1.0;
  double fill_timeout_s = 5.0;
  double p2p_link_capacity_bps = 1e6;
  std::uint32_t num_peers = 2;
  TxSizes tx_bits;

  void validate() const {
    if (max_block_bits == 0) throw ConfigError("max_block_bits must be > 0");
    if (!(mean_mining_time_s > 0.0)) throw ConfigError("mean_mining_time must be > 0");
    if (!(fill_timeout_s > 0.0)) throw ConfigError("fill_timeout must be > 0");
    if (!(p2p_link_capacity_bps > 0.0)) throw ConfigError("p2p_link_capacity must be > 0");
    if (num_peers == 0) throw ConfigError("num_peers must be > 0");
    if (max_block_bits <= header_bits + tx_bits.smallest())
      throw ConfigError("max_block_bits must exceed header_bits plus the smallest transaction");
  }

  // Largest payload one block can carry.
  std::uint64_t max_payload_bits() const { return max_block_bits - header_bits; }
};

struct Transaction {
  TxId id = 0;
  TxKind kind = TxKind::sla_contract;
  std::uint64_t payload_bits = 0;
  double submitted_at = 0.0;
  std::optional<double> confirmed_at;
  std::optional<BlockId> block;
};

struct Block {
  BlockId id = 0;
  BlockId parent = 0;  // 0 is the genesis block
  std::vector<TxId> tx_ids;
  std::uint64_t size_bits = 0;
  double mined_at = 0.0;
  double fully_propagated_at = 0.0;
};

struct PendingTx {
  TxId id = 0;
  std::uint64_t payload_bits = 0;
  double submitted_at = 0.0;
};

using Mempool = std::deque<PendingTx>;

// Contents of a block about to be mined.
struct BlockTemplate {
  std::vector<TxId> tx_ids;
  std::uint64_t size_bits = 0;
};

/// Forms a block when the mempool fills one (oldest first, stopping before
/// the first transaction that would overflow) or when the oldest pending
/// transaction has waited `fill_timeout_s`. Taken transactions leave `pool`.
inline std::optional<BlockTemplate> try_form_block(Mempool& pool, const ChainParams& params, double now) {
  if (pool.empty()) return std::nullopt;
  std::uint64_t size = params.header_bits;
  std::size_t take = 0;
  while (take < pool.size() && size + pool[take].payload_bits <= params.max_block_bits)
    size += pool[take++].payload_bits;
  const bool full = take < pool.size() || size == params.max_block_bits;
  const bool timed_out = now >= pool.front().submitted_at + params.fill_timeout_s;
  if (!full && !timed_out) return std::nullopt;

  BlockTemplate out;
  out.size_bits = size;
  out.tx_ids.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.tx_ids.push_back(pool[i].id);
  pool.erase(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take));
  return out;
}

inline double mining_duration(Rng& rng, const ChainParams& params) { return rng.exponential(params.mean_mining_time_s); }

/// Single-hop transfer time; all peers receive in parallel.
inline double propagation_delay(std::uint64_t size_bits, const ChainParams& params) {
  return static_cast<double>(size_bits) / params.p2p_link_capacity_bps;
}

/// Probability that the next mining completion lands within one propagation
/// time of a maximum-size block.
inline double estimate_fork_rate(const ChainParams& params) {
  const double t_prop = propagation_delay(params.max_block_bits, params);
  return -std::expm1(-t_prop / params.mean_mining_time_s);
}

class Blockchain {
 public:
  explicit Blockchain(ChainParams params) : params_(std::move(params)) { params_.validate(); }

  const ChainParams& params() const { return params_; }

  TxId submit_transaction(TxKind kind, std::uint64_t payload_bits, double now) {
    if (payload_bits == 0) throw OversizedTransaction("transaction payload must be > 0 bits");
    if (payload_bits > params_.max_payload_bits())
      throw OversizedTransaction("transaction of " + std::to_string(payload_bits) + " bits exceeds block payload of " +
                                 std::to_string(params_.max_payload_bits()));
    const TxId id = txs_.size() + 1;
    txs_.push_back(Transaction{id, kind, payload_bits, now, std::nullopt, std::nullopt});
    mempool_.push_back(PendingTx{id, payload_bits, now});
    overhead_bits_ += payload_bits * (params_.num_peers - 1);
    return id;
  }

  TxId submit_transaction(TxKind kind, double now) { return submit_transaction(kind, params_.tx_bits.of(kind), now); }

  bool mining() const { return mining_.has_value(); }

  /// Starts mining if the miner is idle and a block can be formed. Returns
  /// the time mining completes.
  std::optional<double> start_mining(double now, Rng& rng) {
    if (mining_) return std::nullopt;
    mining_ = try_form_block(mempool_, params_, now);
    if (!mining_) return std::nullopt;
    return now + mining_duration(rng, params_);
  }

  /// Appends the block being mined to the chain tip.
  const Block& finish_mining(double now) {
    if (!mining_) throw StateError("finish_mining with idle miner");
    Block b;
    b.id = blocks_.size() + 1;
    b.parent = blocks_.empty() ? 0 : blocks_.back().id;
    b.tx_ids = std::move(mining_->tx_ids);
    b.size_bits = mining_->size_bits;
    b.mined_at = now;
    b.fully_propagated_at = now + propagation_delay(b.size_bits, params_);
    mining_.reset();
    for (TxId t : b.tx_ids) mutable_tx(t).block = b.id;
    overhead_bits_ += b.size_bits * (params_.num_peers - 1);
    blocks_.push_back(std::move(b));
    return blocks_.back();
  }

  /// Marks every transaction of `id` confirmed at its full propagation time.
  std::vector<std::pair<TxId, double>> confirm_block(BlockId id, double now) {
    const Block& b = block(id);
    if (now < b.fully_propagated_at) throw StateError("confirm_block before propagation finished");
    std::vector<std::pair<TxId, double>> out;
    out.reserve(b.tx_ids.size());
    for (TxId t : b.tx_ids) {
      auto& x = mutable_tx(t);
      if (x.confirmed_at) throw StateError("transaction " + std::to_string(t) + " confirmed twice");
      x.confirmed_at = b.fully_propagated_at;
      out.emplace_back(t, b.fully_propagated_at);
    }
    return out;
  }

  /// When the oldest pending transaction times out, if the miner is idle.
  std::optional<double> next_fill_deadline() const {
    if (mining_ || mempool_.empty()) return std::nullopt;
    return mempool_.front().submitted_at + params_.fill_timeout_s;
  }

  std::uint64_t overhead_bits() const { return overhead_bits_; }
  double fork_rate_estimate() const { return estimate_fork_rate(params_); }

  const Mempool& mempool() const { return mempool_; }
  const std::vector<Block>& blocks() const { return blocks_; }
  const std::vector<Transaction>& transactions() const { return txs_; }

  const Transaction& tx(TxId id) const {
    if (id == 0 || id > txs_.size()) throw LookupError("unknown tx " + std::to_string(id));
    return txs_[id - 1];
  }

  const Block& block(BlockId id) const {
    if (id == 0 || id > blocks_.size()) throw LookupError("unknown block " + std::to_string(id));
    return blocks_[id - 1];
  }

  nlohmann::json to_json() const {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& b : blocks_) {
      nlohmann::json txs = nlohmann::json::array();
      for (TxId t : b.tx_ids) {
        const auto& x = tx(t);
        txs.push_back({{"id", x.id},
                       {"kind", to_string(x.kind)},
                       {"payload_bits", x.payload_bits},
                       {"submitted_at", x.submitted_at},
                       {"confirmed_at", x.confirmed_at ? nlohmann::json(*x.confirmed_at) : nlohmann::json()}});
      }
      out.push_back({{"id", b.id},
                     {"parent", b.parent},
                     {"size_bits", b.size_bits},
                     {"mined_at", b.mined_at},
                     {"fully_propagated_at", b.fully_propagated_at},
                     {"transactions", std::move(txs)}});
    }
    return out;
  }

 private:
  Transaction& mutable_tx(TxId id) { return txs_.at(id - 1); }

  ChainParams params_;
  Mempool mempool_;
  std::optional<BlockTemplate> mining_;
  std::vector<Transaction> txs_;
  std::vector<Block> blocks_;
  std::uint64_t overhead_bits_ = 0;
};

}  // namespace oransim
