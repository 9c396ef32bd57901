#include "stlink/spatial.h"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "support/fixtures.h"

namespace stlink {
namespace {

constexpr double kMetersPerDegree = kEarthRadiusMeters * std::numbers::pi / 180.0;
constexpr double kEdge = 10000.0;
constexpr double kLat0 = 40.0;
constexpr double kLon0 = 20.0;

// Maps plane offsets (meters east/north of (kLat0, kLon0)) to lat/lon using
// the cosine at `ref_lat`.
LatLon Plane(double x, double y, double ref_lat) {
  return {kLat0 + y / kMetersPerDegree,
          kLon0 + x / (kMetersPerDegree * std::cos(ref_lat * std::numbers::pi / 180.0))};
}

// Uniform sample over a square just under 4 * kEdge, anchored at the origin.
std::vector<LatLon> SquareSample(double side, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double ref_lat = kLat0 + side / 2.0 / kMetersPerDegree;
  std::vector<LatLon> out{Plane(0, 0, ref_lat), Plane(side, side, ref_lat)};
  for (int n = 0; n < count; ++n) out.push_back(Plane(unit(rng) * side, unit(rng) * side, ref_lat));
  return out;
}

Event At(const std::string& user, Side side, LatLon p, std::uint64_t seq) {
  Event ev;
  ev.user = user;
  ev.side = side;
  ev.time = static_cast<std::int64_t>(seq);
  ev.region = Region{p.lat, p.lon, 100.0, std::nullopt};
  ev.seq = seq;
  return ev;
}

TEST(GridTree, SingleEventIsOneRootLeaf) {
  const GridTree tree = GridTree::Build({{kLat0, kLon0}}, kEdge);
  EXPECT_EQ(tree.leaf_count(), 1u);
  EXPECT_EQ(tree.Leaves(), std::vector<CellId>{"r"});
  EXPECT_EQ(tree.Locate(kLat0, kLon0), "r");
}

TEST(GridTree, UniformSquareOfFourMinEdgesGivesSixteenLeaves) {
  const GridTree tree = GridTree::Build(SquareSample(3.9 * kEdge, 2000, 1), kEdge);
  EXPECT_EQ(tree.leaf_count(), 16u);
  for (const CellId& id : tree.Leaves()) {
    EXPECT_DOUBLE_EQ(tree.LeafEdge(id), kEdge);
    EXPECT_EQ(id.size(), 3u);
  }
}

TEST(GridTree, TightClusterSplitsOnlyAlongItsPath) {
  std::vector<LatLon> sample;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int n = 0; n < 100; ++n) sample.push_back(Plane(unit(rng) * 500, unit(rng) * 500, kLat0));
  sample.push_back(Plane(60000, 60000, kLat0));
  const GridTree tree = GridTree::Build(sample, kEdge);
  // A fully split 8x8 tree would have 64 leaves.
  EXPECT_LT(tree.leaf_count(), 20u);
  const CellId home = tree.Locate(sample[0].lat, sample[0].lon);
  EXPECT_DOUBLE_EQ(tree.LeafEdge(home), kEdge);
  double largest = 0.0;
  for (const CellId& id : tree.Leaves()) largest = std::max(largest, tree.LeafEdge(id));
  EXPECT_GT(largest, kEdge);
}

TEST(GridTree, BuildIsDeterministic) {
  const auto sample = SquareSample(55000, 3000, 9);
  const GridTree a = GridTree::Build(sample, kEdge);
  const GridTree b = GridTree::Build(sample, kEdge);
  ASSERT_EQ(a.Leaves(), b.Leaves());
  for (const CellId& id : a.Leaves()) {
    const CellBounds x = a.Bounds(id);
    const CellBounds y = b.Bounds(id);
    EXPECT_EQ(x.min_lat, y.min_lat);
    EXPECT_EQ(x.max_lon, y.max_lon);
  }
  for (const LatLon& p : sample) EXPECT_EQ(a.Locate(p.lat, p.lon), b.Locate(p.lat, p.lon));
}

TEST(GridTree, RejectsBadInput) {
  EXPECT_THROW(GridTree::Build({}, kEdge), std::invalid_argument);
  EXPECT_THROW(GridTree::Build({{kLat0, kLon0}}, 0.0), std::invalid_argument);
}

TEST(GridTree, OutsidePointsAreClampedAndReported) {
  const GridTree tree = GridTree::Build(SquareSample(3.9 * kEdge, 500, 4), kEdge);
  bool outside = false;
  const CellId id = tree.Locate(kLat0 - 1.0, kLon0 - 1.0, &outside);
  EXPECT_TRUE(outside);
  EXPECT_EQ(id, tree.Locate(kLat0, kLon0));
  tree.Locate(kLat0 + 0.1, kLon0 + 0.1, &outside);
  EXPECT_FALSE(outside);
}

class StripTest : public ::testing::Test {
 protected:
  StripTest() : tree_(GridTree::Build(SquareSample(3.9 * kEdge, 2000, 5), kEdge)) {}

  // Cells for a point given in root-plane meters (root anchored at origin).
  std::vector<CellId> CellsAt(double x, double y) const {
    const double ref_lat = kLat0 + 3.9 * kEdge / 2.0 / kMetersPerDegree;
    const LatLon p = Plane(x, y, ref_lat);
    return tree_.CellsForPoint(p.lat, p.lon, 0.125);
  }

  GridTree tree_;
};

TEST_F(StripTest, CenterOfLeafIsOnlyHome) {
  EXPECT_EQ(CellsAt(1.5 * kEdge, 1.5 * kEdge).size(), 1u);
}

TEST_F(StripTest, NearOneEdgeGivesTwoCells) {
  const auto cells = CellsAt(1.5 * kEdge, 2.0 * kEdge + 100.0);
  ASSERT_EQ(cells.size(), 2u);
  EXPECT_NE(cells[0], cells[1]);
}

TEST_F(StripTest, NearCornerGivesHomePlusThree) {
  const auto cells = CellsAt(2.0 * kEdge + 100.0, 2.0 * kEdge + 100.0);
  EXPECT_EQ(cells.size(), 4u);
  EXPECT_EQ(std::set<CellId>(cells.begin(), cells.end()).size(), 4u);
}

TEST_F(StripTest, OuterBorderHasNoNeighbors) {
  EXPECT_EQ(CellsAt(100.0, 100.0).size(), 1u);
}

TEST(InBorderStrip, OneEighthStripCoversSevenSixteenths) {
  constexpr int kSteps = 1000;
  int inside = 0;
  for (int i = 0; i < kSteps; ++i) {
    for (int j = 0; j < kSteps; ++j) {
      if (InBorderStrip((i + 0.5) / kSteps, (j + 0.5) / kSteps, 1.0, 0.125)) ++inside;
    }
  }
  EXPECT_DOUBLE_EQ(static_cast<double>(inside) / (kSteps * kSteps), 7.0 / 16.0);
}

TEST(DominatingGrids, Examples) {
  EXPECT_EQ(DominatingGrids({{"u", {{"A", 10}, {"B", 2}}}}).at("u"), std::vector<CellId>{"A"});
  EXPECT_EQ(DominatingGrids({{"u", {{"A", 10}, {"B", 10}}}}).at("u"),
            (std::vector<CellId>{"A", "B"}));
  EXPECT_EQ(DominatingGrids({{"u", {{"A", 10}, {"B", 9}}}}, 0.1).at("u"),
            (std::vector<CellId>{"A", "B"}));
  EXPECT_EQ(DominatingGrids({{"u", {{"A", 10}, {"B", 9}}}}, 0.0).at("u"),
            std::vector<CellId>{"A"});
}

TEST(PartitionDatasets, SingleCellEqualsInput) {
  const testing::Instance inst = testing::RandomInstance(21, {50, 2000});
  const GridTree tree = BuildGrid(inst.log_i, inst.log_e, 5e6);
  ASSERT_EQ(tree.leaf_count(), 1u);
  const auto counts = CountUserCells(tree, inst.log_i, inst.log_e, 0.125);
  const auto parts = PartitionDatasets(inst.log_i, inst.log_e, DominatingGrids(counts.counts));
  ASSERT_EQ(parts.size(), 1u);
  EXPECT_EQ(parts.begin()->second.log_i.events, inst.log_i.events);
  EXPECT_EQ(parts.begin()->second.log_e.events, inst.log_e.events);
}

TEST(PartitionDatasets, FarEventFollowsItsUsersDominatingCell) {
  EventLog log_i;
  log_i.side = Side::kI;
  for (std::uint64_t n = 0; n < 5; ++n) {
    log_i.events.push_back(At("I:a", Side::kI, Plane(1000 + n, 1000, kLat0), n));
  }
  log_i.events.push_back(At("I:a", Side::kI, Plane(70000, 70000, kLat0), 5));
  EventLog log_e;
  log_e.side = Side::kE;
  log_e.events.push_back(At("E:b", Side::kE, Plane(70000, 70000, kLat0), 0));
  const GridTree tree = BuildGrid(log_i, log_e, kEdge);
  const auto assignment = DominatingGrids(CountUserCells(tree, log_i, log_e, 0.125).counts);
  ASSERT_EQ(assignment.at("I:a").size(), 1u);
  const auto parts = PartitionDatasets(log_i, log_e, assignment);
  const auto& home = parts.at(assignment.at("I:a")[0]);
  EXPECT_EQ(home.log_i.events.size(), 6u);
  EXPECT_TRUE(home.log_e.events.empty());
  EXPECT_EQ(CountSpatialPairs(assignment), 0u);
}

// Users scattered over a wide area, each with a home and occasional trips.
struct World {
  EventLog log_i;
  EventLog log_e;
};

World RandomWorld(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  World w;
  w.log_i.side = Side::kI;
  w.log_e.side = Side::kE;
  std::uint64_t seq = 0;
  for (int s = 0; s < 2; ++s) {
    EventLog& log = s == 0 ? w.log_i : w.log_e;
    const int users = 20 + static_cast<int>(rng() % 60);
    for (int u = 0; u < users; ++u) {
      const double hx = unit(rng) * 80000;
      const double hy = unit(rng) * 80000;
      const int n = 1 + static_cast<int>(rng() % 20);
      for (int e = 0; e < n; ++e) {
        const bool trip = unit(rng) < 0.2;
        const double x = trip ? unit(rng) * 80000 : hx + (unit(rng) - 0.5) * 6000;
        const double y = trip ? unit(rng) * 80000 : hy + (unit(rng) - 0.5) * 6000;
        log.events.push_back(At((s == 0 ? "I:" : "E:") + std::to_string(u),
                                s == 0 ? Side::kI : Side::kE, Plane(x, y, kLat0), seq++));
      }
    }
    std::sort(log.events.begin(), log.events.end(), EventOrder);
  }
  return w;
}

TEST(SpatialProperties, PartitionIsLosslessPerUser) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const World w = RandomWorld(seed);
    const GridTree tree = BuildGrid(w.log_i, w.log_e, kEdge);
    const auto assignment = DominatingGrids(CountUserCells(tree, w.log_i, w.log_e, 0.125).counts);
    const auto parts = PartitionDatasets(w.log_i, w.log_e, assignment);
    for (const EventLog* log : {&w.log_i, &w.log_e}) {
      std::map<std::string, std::vector<Event>> expected;
      for (const Event& ev : log->events) expected[ev.user].push_back(ev);
      for (const auto& [user, events] : expected) {
        for (const CellId& cell : assignment.at(user)) {
          const EventLog& part = log->side == Side::kI ? parts.at(cell).log_i : parts.at(cell).log_e;
          std::vector<Event> got;
          for (const Event& ev : part.events) {
            if (ev.user == user) got.push_back(ev);
          }
          EXPECT_EQ(got, events) << user << " in " << cell;
        }
      }
    }
  }
}

TEST(SpatialProperties, PairsAreComparedIffDominatingSetsIntersect) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const World w = RandomWorld(seed + 100);
    const GridTree tree = BuildGrid(w.log_i, w.log_e, kEdge);
    const auto assignment =
        DominatingGrids(CountUserCells(tree, w.log_i, w.log_e, 0.125).counts, 0.2);
    const auto parts = PartitionDatasets(w.log_i, w.log_e, assignment);
    std::set<std::pair<std::string, std::string>> co_resident;
    for (const auto& [cell, part] : parts) {
      std::set<std::string> ui, ue;
      for (const Event& ev : part.log_i.events) ui.insert(ev.user);
      for (const Event& ev : part.log_e.events) ue.insert(ev.user);
      for (const auto& a : ui) {
        for (const auto& b : ue) co_resident.insert({a, b});
      }
    }
    std::uint64_t sharing = 0;
    for (const auto& [a, cells_a] : assignment) {
      if (a.rfind("I:", 0) != 0) continue;
      for (const auto& [b, cells_b] : assignment) {
        if (b.rfind("E:", 0) != 0) continue;
        bool shared = false;
        for (const CellId& c : cells_a) {
          shared |= std::find(cells_b.begin(), cells_b.end(), c) != cells_b.end();
        }
        EXPECT_EQ(shared, co_resident.count({a, b}) > 0);
        sharing += shared;
      }
    }
    EXPECT_EQ(CountSpatialPairs(assignment), sharing);
  }
}

TEST(SpatialProperties, StripCellsAreWithinOneStripOfHome) {
  const GridTree tree = GridTree::Build(SquareSample(70000, 4000, 8), kEdge);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int c = 0; c < 2000; ++c) {
    const LatLon p = Plane(unit(rng) * 70000, unit(rng) * 70000, kLat0);
    const auto cells = tree.CellsForPoint(p.lat, p.lon, 0.125);
    ASSERT_GE(cells.size(), 1u);
    ASSERT_LE(cells.size(), 4u);
    EXPECT_EQ(cells[0], tree.Locate(p.lat, p.lon));
    EXPECT_EQ(std::set<CellId>(cells.begin(), cells.end()).size(), cells.size());
  }
}

}  // namespace
}  // namespace stlink
