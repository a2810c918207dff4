#pragma once

// Cellular deployment and link model: hexagonal sites, distance-based path
// loss, full-buffer interference, Shannon capacity per PRB.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "oransim/error.hpp"
#include "oransim/ids.hpp"
#include "oransim/random.hpp"

namespace oransim {

struct RadioParams {
  double inter_site_distance_m = 500.0;
  double tx_power_dbm = 46.0;
  double noise_density_dbm_hz = -174.0;
  double min_distance_m = 10.0;
  std::uint32_t prbs_per_cell = 100;
  double prb_bandwidth_hz = 180e3;
  double demand_min_mbps = 1.0;
  double demand_max_mbps = 10.0;
  // A UE that would need more PRBs than this is uncoverable.
  std::uint32_t max_prbs_per_ue = 100;
};

struct Position {
  double x = 0.0;
  double y = 0.0;

  friend double distance(Position a, Position b) { return std::hypot(a.x - b.x, a.y - b.y); }
  bool operator==(const Position&) const = default;
};

struct Cell {
  CellId id;
  OperatorId owner;
  Position position;
  double tx_power_dbm = 46.0;
  std::uint32_t total_prbs = 100;
  double prb_bandwidth_hz = 180e3;

  bool operator==(const Cell&) const = default;
};

struct Ue {
  UeId id;
  OperatorId home;
  Position position;
  double demand_mbps = 1.0;
  CellId serving_cell;

  bool operator==(const Ue&) const = default;
};

/// 3GPP macro-style path loss in dB; distance clamped below at `min_distance_m`.
inline double path_loss_db(double distance_m, double min_distance_m = 10.0) {
  const double d = std::max(distance_m, min_distance_m);
  return 128.1 + 37.6 * std::log10(d / 1000.0);
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

/// Capacity in Mbps of `n_prbs` resource blocks at the given SINR.
inline double shannon_capacity_mbps(std::uint32_t n_prbs, double sinr_db, double prb_bandwidth_hz) {
  if (n_prbs == 0) return 0.0;
  return static_cast<double>(n_prbs) * prb_bandwidth_hz * std::log2(1.0 + db_to_linear(sinr_db)) / 1e6;
}

struct PrbNeed {
  std::uint32_t count = 0;
  bool uncoverable = false;

  bool operator==(const PrbNeed&) const = default;
};

/// Smallest PRB count whose Shannon capacity reaches `demand_mbps`. Counts
/// above `cap` are reported as {cap, uncoverable}.
inline PrbNeed prbs_needed(double demand_mbps, double sinr_db, double prb_bandwidth_hz, std::uint32_t cap = 100) {
  const double per_prb = shannon_capacity_mbps(1, sinr_db, prb_bandwidth_hz);
  if (demand_mbps <= 0.0) return {0, false};
  if (!(per_prb > 0.0) || demand_mbps / per_prb > static_cast<double>(cap) + 1.0) return {cap, true};

  auto n = static_cast<std::uint32_t>(std::max(1.0, std::ceil(demand_mbps / per_prb)));
  // The division can land one ulp either side of an integer; settle it
  // against the capacity function itself so minimality is exact.
  while (n > 1 && shannon_capacity_mbps(n - 1, sinr_db, prb_bandwidth_hz) >= demand_mbps) --n;
  while (shannon_capacity_mbps(n, sinr_db, prb_bandwidth_hz) < demand_mbps) ++n;
  if (n > cap) return {cap, true};
  return {n, false};
}

class Deployment {
 public:
  std::vector<Cell> cells;
  std::vector<Ue> ues;
  std::uint32_t num_operators = 1;
  double inter_site_distance_m = 500.0;
  std::uint64_t seed = 0;
  RadioParams params;

  /// Recomputes serving cells and the UE x cell SINR table. Call after
  /// editing `cells` or `ues` by hand.
  void rebuild_links() {
    const std::size_t nc = cells.size();
    rx_dbm_.assign(ues.size() * nc, 0.0);
    sinr_db_.assign(ues.size() * nc, 0.0);
    for (auto& ue : ues) {
      const std::size_t row = ue.id.value * nc;
      std::size_t best = 0;
      for (std::size_t c = 0; c < nc; ++c) {
        const double rx = cells[c].tx_power_dbm -
                          path_loss_db(distance(ue.position, cells[c].position), params.min_distance_m);
        rx_dbm_[row + c] = rx;
        if (rx > rx_dbm_[row + best]) best = c;
      }
      ue.serving_cell = CellId{static_cast<std::uint32_t>(best)};
      for (std::size_t c = 0; c < nc; ++c) {
        double interference_mw = 0.0;
        for (std::size_t k = 0; k < nc; ++k)
          if (k != c) interference_mw += db_to_linear(rx_dbm_[row + k]);
        const double signal_mw = db_to_linear(rx_dbm_[row + c]);
        sinr_db_[row + c] = linear_to_db(signal_mw / (noise_mw(cells[c]) + interference_mw));
      }
    }
  }

  const Cell& cell(CellId id) const {
    if (id.value >= cells.size()) throw LookupError("unknown cell id " + std::to_string(id.value));
    return cells[id.value];
  }

  const Ue& ue(UeId id) const {
    if (id.value >= ues.size()) throw LookupError("unknown ue id " + std::to_string(id.value));
    return ues[id.value];
  }

  double received_power_dbm(UeId ue_id, CellId cell_id) const {
    check_links(ue_id, cell_id);
    return rx_dbm_[ue_id.value * cells.size() + cell_id.value];
  }

  /// SINR of `ue_id` served by `cell_id`, every other cell interfering.
  double sinr_db(UeId ue_id, CellId cell_id) const {
    check_links(ue_id, cell_id);
    return sinr_db_[ue_id.value * cells.size() + cell_id.value];
  }

  /// Thermal noise over the whole carrier of `c`, in mW. Signal and
  /// interference are also whole-carrier powers, so the ratio equals the
  /// per-PRB ratio for any allocation size.
  double noise_mw(const Cell& c) const {
    return db_to_linear(params.noise_density_dbm_hz + linear_to_db(static_cast<double>(c.total_prbs) * c.prb_bandwidth_hz));
  }

  std::vector<CellId> cells_of(OperatorId op) const {
    std::vector<CellId> out;
    for (const auto& c : cells)
      if (c.owner == op) out.push_back(c.id);
    return out;
  }

  bool operator==(const Deployment& o) const {
    return cells == o.cells && ues == o.ues && num_operators == o.num_operators &&
           inter_site_distance_m == o.inter_site_distance_m && seed == o.seed;
  }

 private:
  void check_links(UeId ue_id, CellId cell_id) const {
    if (ue_id.value >= ues.size()) throw LookupError("unknown ue id " + std::to_string(ue_id.value));
    if (cell_id.value >= cells.size()) throw LookupError("unknown cell id " + std::to_string(cell_id.value));
    if (sinr_db_.size() != ues.size() * cells.size())
      throw StateError("deployment links not built; call rebuild_links()");
  }

  std::vector<double> rx_dbm_;
  std::vector<double> sinr_db_;
};

// Serving-cell override per UE. UEs not listed use their strongest cell.
using AllocationMap = std::map<UeId, CellId>;

/// SINR in dB for `ue_id` under `allocation`. Interference is full-buffer:
/// every cell other than the serving one transmits on every PRB.
inline double compute_sinr(UeId ue_id, const AllocationMap& allocation, const Deployment& dep) {
  const auto& ue = dep.ue(ue_id);
  const auto it = allocation.find(ue_id);
  const CellId serving = it == allocation.end() ? ue.serving_cell : it->second;
  return dep.sinr_db(ue_id, serving);
}

namespace detail {

// Axial hex coordinates of the first `n` sites, ring by ring from the origin.
inline std::vector<std::array<int, 2>> hex_sites(std::size_t n) {
  static constexpr std::array<std::array<int, 2>, 6> dirs{{{1, 0}, {1, -1}, {0, -1}, {-1, 0}, {-1, 1}, {0, 1}}};
  std::vector<std::array<int, 2>> out{{0, 0}};
  for (int ring = 1; out.size() < n; ++ring) {
    std::array<int, 2> h{dirs[4][0] * ring, dirs[4][1] * ring};
    for (int side = 0; side < 6 && out.size() < n; ++side)
      for (int step = 0; step < ring && out.size() < n; ++step) {
        out.push_back(h);
        h[0] += dirs[side][0];
        h[1] += dirs[side][1];
      }
  }
  out.resize(n);
  return out;
}

inline int hex_ring(std::array<int, 2> h) {
  return (std::abs(h[0]) + std::abs(h[1]) + std::abs(h[0] + h[1])) / 2;
}

}  // namespace detail

/// Hexagonal layout centred at the origin, cells owned round-robin, UEs
/// uniform over the coverage disc with uniformly drawn home operators.
inline Deployment generate_deployment(std::uint32_t num_cells, std::uint32_t num_ues, std::uint32_t num_operators,
                                      std::uint64_t seed, const RadioParams& params = {}) {
  if (num_cells < 1) throw ConfigError("num_cells must be >= 1");
  if (num_ues < 1) throw ConfigError("num_ues must be >= 1");
  if (num_operators < 1 || num_operators > num_cells)
    throw ConfigError("num_operators must be in [1, num_cells]");
  if (params.prbs_per_cell < 1) throw ConfigError("prbs_per_cell must be >= 1");
  if (!(params.inter_site_distance_m > 0.0)) throw ConfigError("inter_site_distance_m must be > 0");

  Deployment dep;
  dep.num_operators = num_operators;
  dep.inter_site_distance_m = params.inter_site_distance_m;
  dep.seed = seed;
  dep.params = params;

  const double isd = params.inter_site_distance_m;
  const auto sites = detail::hex_sites(num_cells);
  int outer_ring = 0;
  dep.cells.reserve(num_cells);
  for (std::uint32_t i = 0; i < num_cells; ++i) {
    const auto [q, r] = sites[i];
    outer_ring = std::max(outer_ring, detail::hex_ring(sites[i]));
    dep.cells.push_back(Cell{
        .id = CellId{i},
        .owner = OperatorId{i % num_operators},
        .position = {isd * (q + r / 2.0), isd * (r * std::numbers::sqrt3 / 2.0)},
        .tx_power_dbm = params.tx_power_dbm,
        .total_prbs = params.prbs_per_cell,
        .prb_bandwidth_hz = params.prb_bandwidth_hz,
    });
  }

  // Union of the hex cells is approximated by the disc through the outer
  // ring's far corners.
  const double radius = outer_ring * isd + isd / std::numbers::sqrt3;
  Rng rng(seed, Stream::deployment);
  dep.ues.reserve(num_ues);
  for (std::uint32_t i = 0; i < num_ues; ++i) {
    const double rho = radius * std::sqrt(rng.uniform());
    const double theta = 2.0 * std::numbers::pi * rng.uniform();
    Ue ue;
    ue.id = UeId{i};
    ue.position = {rho * std::cos(theta), rho * std::sin(theta)};
    ue.home = OperatorId{static_cast<std::uint32_t>(rng.below(num_operators))};
    ue.demand_mbps = rng.uniform(params.demand_min_mbps, params.demand_max_mbps);
    dep.ues.push_back(ue);
  }
  dep.rebuild_links();
  return dep;
}

inline double coverage_radius_m(const Deployment& dep) {
  double r = 0.0;
  for (const auto& c : dep.cells) r = std::max(r, std::hypot(c.position.x, c.position.y));
  return r + dep.inter_site_distance_m / std::numbers::sqrt3;
}

// JSON view of a deployment. Schema documented in README.md.
inline nlohmann::json to_json(const Deployment& dep) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : dep.cells)
    cells.push_back({{"id", c.id.value},
                     {"owner", c.owner.value},
                     {"x_m", c.position.x},
                     {"y_m", c.position.y},
                     {"tx_power_dbm", c.tx_power_dbm},
                     {"total_prbs", c.total_prbs},
                     {"prb_bandwidth_hz", c.prb_bandwidth_hz}});
  nlohmann::json ues = nlohmann::json::array();
  for (const auto& u : dep.ues)
    ues.push_back({{"id", u.id.value},
                   {"home", u.home.value},
                   {"x_m", u.position.x},
                   {"y_m", u.position.y},
                   {"demand_mbps", u.demand_mbps},
                   {"serving_cell", u.serving_cell.value}});
  return {{"seed", dep.seed},
          {"num_operators", dep.num_operators},
          {"inter_site_distance_m", dep.inter_site_distance_m},
          {"cells", std::move(cells)},
          {"ues", std::move(ues)}};
}

}  // namespace oransim
