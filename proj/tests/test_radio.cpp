#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "oransim/radio.hpp"

using namespace oransim;

namespace {

constexpr double kRel = 1e-9;

void expect_rel(double actual, double expected) {
  EXPECT_NEAR(actual, expected, std::abs(expected) * kRel) << "expected " << expected;
}

Deployment hand_built(std::vector<Position> cells, std::vector<Position> ues, std::uint32_t ops = 1) {
  Deployment d;
  d.num_operators = ops;
  for (std::uint32_t i = 0; i < cells.size(); ++i)
    d.cells.push_back(Cell{.id = CellId{i}, .owner = OperatorId{i % ops}, .position = cells[i]});
  for (std::uint32_t i = 0; i < ues.size(); ++i) {
    Ue u;
    u.id = UeId{i};
    u.position = ues[i];
    u.demand_mbps = 1.0;
    d.ues.push_back(u);
  }
  d.rebuild_links();
  return d;
}

}  // namespace

TEST(PathLoss, Oracles) {
  expect_rel(path_loss_db(1000.0), 128.1);
  expect_rel(path_loss_db(100.0), 90.5);
}

TEST(PathLoss, ClampsAndIsMonotone) {
  EXPECT_DOUBLE_EQ(path_loss_db(1.0), path_loss_db(10.0));
  EXPECT_DOUBLE_EQ(path_loss_db(0.0), path_loss_db(10.0));
  double prev = path_loss_db(10.0);
  for (double d = 20.0; d < 5000.0; d *= 1.3) {
    EXPECT_GT(path_loss_db(d), prev);
    prev = path_loss_db(d);
  }
}

TEST(Shannon, Oracles) {
  EXPECT_EQ(shannon_capacity_mbps(0, 10.0, 180e3), 0.0);
  expect_rel(shannon_capacity_mbps(1, 0.0, 180e3), 0.18);
  expect_rel(shannon_capacity_mbps(10, 7.3, 180e3), 2.0 * shannon_capacity_mbps(5, 7.3, 180e3));
}

TEST(Shannon, IncreasingInBothArguments) {
  for (std::uint32_t n = 1; n < 20; ++n)
    for (double s = -10.0; s < 30.0; s += 2.5) {
      EXPECT_GT(shannon_capacity_mbps(n + 1, s, 180e3), shannon_capacity_mbps(n, s, 180e3));
      EXPECT_GT(shannon_capacity_mbps(n, s + 0.5, 180e3), shannon_capacity_mbps(n, s, 180e3));
    }
}

TEST(PrbsNeeded, Oracles) {
  EXPECT_EQ(prbs_needed(1.0, 0.0, 180e3).count, 6u);
  const double three = shannon_capacity_mbps(3, 4.2, 180e3);
  EXPECT_EQ(prbs_needed(three, 4.2, 180e3).count, 3u);
  EXPECT_EQ(prbs_needed(three * (1.0 + 1e-9), 4.2, 180e3).count, 4u);
  EXPECT_FALSE(prbs_needed(1.0, 0.0, 180e3).uncoverable);
}

TEST(PrbsNeeded, MatchesBruteForceScan) {
  for (double sinr = -8.0; sinr <= 25.0; sinr += 0.7)
    for (double demand = 0.05; demand <= 12.0; demand *= 1.37) {
      std::uint32_t n = 1;
      while (n <= 100 && shannon_capacity_mbps(n, sinr, 180e3) < demand) ++n;
      const PrbNeed got = prbs_needed(demand, sinr, 180e3);
      if (n > 100) {
        EXPECT_TRUE(got.uncoverable) << sinr << " " << demand;
      } else {
        EXPECT_FALSE(got.uncoverable);
        EXPECT_EQ(got.count, n) << sinr << " " << demand;
      }
    }
}

TEST(PrbsNeeded, VeryLowSinrIsUncoverable) {
  const PrbNeed need = prbs_needed(10.0, -40.0, 180e3);
  EXPECT_TRUE(need.uncoverable);
  EXPECT_EQ(need.count, 100u);
}

TEST(Deployment, SingleCellDegenerateCase) {
  const Deployment d = generate_deployment(1, 1, 1, 7);
  ASSERT_EQ(d.cells.size(), 1u);
  EXPECT_EQ(d.cells[0].position, (Position{0.0, 0.0}));
  EXPECT_EQ(d.cells[0].owner, OperatorId{0});
  EXPECT_EQ(d.cells[0].total_prbs, 100u);
  ASSERT_EQ(d.ues.size(), 1u);
  EXPECT_LE(std::hypot(d.ues[0].position.x, d.ues[0].position.y), coverage_radius_m(d));
  EXPECT_EQ(d.ues[0].serving_cell, CellId{0});
}

TEST(Deployment, RoundRobinPartitionOfReferenceLayout) {
  const Deployment d = generate_deployment(19, 200, 4, 1);
  std::map<std::uint32_t, int> owned;
  for (const auto& c : d.cells) ++owned[c.owner.value];
  EXPECT_EQ(owned, (std::map<std::uint32_t, int>{{0, 5}, {1, 5}, {2, 5}, {3, 4}}));
}

TEST(Deployment, PartitionIsBalancedForAllSizes) {
  for (std::uint32_t cells = 1; cells <= 19; ++cells)
    for (std::uint32_t ops = 1; ops <= cells; ++ops) {
      const Deployment d = generate_deployment(cells, 3, ops, 5);
      std::vector<int> owned(ops, 0);
      for (const auto& c : d.cells) ++owned[c.owner.value];
      const auto [lo, hi] = std::minmax_element(owned.begin(), owned.end());
      EXPECT_GE(*lo, 1);
      EXPECT_LE(*hi - *lo, 1);
    }
}

TEST(Deployment, HexRingsAtReferenceDistances) {
  const Deployment d = generate_deployment(19, 1, 1, 1);
  int centre = 0, ring1 = 0, ring2 = 0;
  for (const auto& c : d.cells) {
    const double r = std::hypot(c.position.x, c.position.y);
    if (r < 1.0) ++centre;
    else if (std::abs(r - 500.0) < 1e-6) ++ring1;
    else if (std::abs(r - 1000.0) < 1e-6 || std::abs(r - 500.0 * std::sqrt(3.0)) < 1e-6) ++ring2;
  }
  EXPECT_EQ(centre, 1);
  EXPECT_EQ(ring1, 6);
  EXPECT_EQ(ring2, 12);
}

TEST(Deployment, Deterministic) {
  const Deployment a = generate_deployment(19, 200, 4, 99);
  const Deployment b = generate_deployment(19, 200, 4, 99);
  EXPECT_EQ(a, b);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
  for (std::uint32_t u = 0; u < 200; u += 17)
    for (std::uint32_t c = 0; c < 19; ++c) EXPECT_EQ(a.sinr_db(UeId{u}, CellId{c}), b.sinr_db(UeId{u}, CellId{c}));
  EXPECT_NE(a, generate_deployment(19, 200, 4, 100));
}

TEST(Deployment, UeInvariants) {
  const Deployment d = generate_deployment(19, 200, 8, 3);
  for (const auto& u : d.ues) {
    EXPECT_GE(u.demand_mbps, 1.0);
    EXPECT_LE(u.demand_mbps, 10.0);
    EXPECT_LT(u.home.value, 8u);
    for (const auto& c : d.cells) {
      EXPECT_LE(d.received_power_dbm(u.id, c.id), d.received_power_dbm(u.id, u.serving_cell));
      if (d.received_power_dbm(u.id, c.id) == d.received_power_dbm(u.id, u.serving_cell)) {
        EXPECT_LE(u.serving_cell.value, c.id.value);
      }
    }
  }
}

TEST(Deployment, InvalidCountsNameTheField) {
  auto message = [](auto fn) {
    try {
      fn();
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(message([] { generate_deployment(0, 1, 1, 1); }).find("num_cells"), std::string::npos);
  EXPECT_NE(message([] { generate_deployment(1, 0, 1, 1); }).find("num_ues"), std::string::npos);
  EXPECT_NE(message([] { generate_deployment(3, 1, 4, 1); }).find("num_operators"), std::string::npos);
  EXPECT_NE(message([] { generate_deployment(3, 1, 0, 1); }).find("num_operators"), std::string::npos);
}

TEST(Sinr, TieOnServingCellGoesToLowestId) {
  const Deployment d = hand_built({{-250.0, 0.0}, {250.0, 0.0}}, {{0.0, 0.0}});
  EXPECT_EQ(d.ues[0].serving_cell, CellId{0});
}

TEST(Sinr, NoiseOnlyWithSingleCell) {
  const Deployment d = hand_built({{0.0, 0.0}}, {{300.0, 0.0}});
  const double rx = 46.0 - path_loss_db(300.0);
  const double noise_dbm = -174.0 + 10.0 * std::log10(100 * 180e3);
  expect_rel(compute_sinr(UeId{0}, {}, d), rx - noise_dbm);
}

TEST(Sinr, EquidistantInterfererGivesAtMostZeroDb) {
  const Deployment d = hand_built({{-250.0, 0.0}, {250.0, 0.0}}, {{0.0, 0.0}});
  EXPECT_LE(compute_sinr(UeId{0}, {}, d), 0.0);
  EXPECT_LE(compute_sinr(UeId{0}, {{UeId{0}, CellId{1}}}, d), 0.0);
}

TEST(Sinr, AddingAnInterfererNeverIncreasesSinr) {
  const Deployment two = hand_built({{0.0, 0.0}, {500.0, 0.0}}, {{120.0, 40.0}});
  const Deployment three = hand_built({{0.0, 0.0}, {500.0, 0.0}, {-500.0, 0.0}}, {{120.0, 40.0}});
  EXPECT_LT(three.sinr_db(UeId{0}, CellId{0}), two.sinr_db(UeId{0}, CellId{0}));
  EXPECT_LT(three.sinr_db(UeId{0}, CellId{1}), two.sinr_db(UeId{0}, CellId{1}));
}

TEST(Sinr, UnknownIdsAreLookupErrors) {
  const Deployment d = generate_deployment(3, 2, 1, 1);
  EXPECT_THROW(compute_sinr(UeId{2}, {}, d), LookupError);
  EXPECT_THROW(d.sinr_db(UeId{0}, CellId{3}), LookupError);
}

TEST(Deployment, JsonView) {
  const Deployment d = generate_deployment(7, 5, 2, 11);
  const auto j = to_json(d);
  ASSERT_EQ(j.at("cells").size(), 7u);
  ASSERT_EQ(j.at("ues").size(), 5u);
  EXPECT_EQ(j.at("seed").get<std::uint64_t>(), 11u);
  EXPECT_EQ(j.at("num_operators").get<std::uint32_t>(), 2u);
  EXPECT_EQ(j.at("cells")[1].at("owner").get<std::uint32_t>(), 1u);
  EXPECT_TRUE(j.at("ues")[0].contains("serving_cell"));
}
