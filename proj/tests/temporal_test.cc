#include "stlink/temporal.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <set>

#include "stlink/eval.h"
#include "support/fixtures.h"

namespace stlink {
namespace {

using testing::FromRecords;
using testing::Instance;
using testing::RandomInstance;
using testing::Record;

constexpr double kMetersPerDegree = kEarthRadiusMeters * std::numbers::pi / 180.0;

double North(double meters) { return 45.0 + meters / kMetersPerDegree; }

std::set<UserPair> Pairs(const CandidateState& state) {
  std::set<UserPair> out;
  for (const auto& [pair, info] : state.candidates) out.insert(pair);
  return out;
}

TEST(SlidingWindow, EmptyLogsHaveNoSteps) {
  EventLog a, b;
  b.side = Side::kE;
  SlidingWindow w(a, b, 1800, ScanDirection::kForward);
  EXPECT_FALSE(w.HasNext());
}

TEST(SlidingWindow, SingleEventEntersThenLeaves) {
  const Instance inst = FromRecords({Record("a", 100, 45, 7, 10)}, {});
  SlidingWindow w(inst.log_i, inst.log_e, 1800, ScanDirection::kForward);
  ASSERT_TRUE(w.HasNext());
  const auto first = w.Next();
  EXPECT_EQ(first.inserted_i.size(), 1u);
  EXPECT_TRUE(first.removed_i.empty());
  ASSERT_TRUE(w.HasNext());
  const auto second = w.Next();
  EXPECT_TRUE(second.inserted_i.empty());
  EXPECT_EQ(second.removed_i.size(), 1u);
  EXPECT_FALSE(w.HasNext());
}

TEST(SlidingWindow, EventsAlphaPlusOneApartNeverCoResident) {
  const Instance inst = FromRecords({Record("a", 0, 45, 7, 10)}, {Record("b", 1801, 45, 7, 10)});
  SlidingWindow w(inst.log_i, inst.log_e, 1800, ScanDirection::kForward);
  while (w.HasNext()) {
    w.Next();
    EXPECT_FALSE(!w.contents_i().empty() && !w.contents_e().empty());
  }
}

TEST(SlidingWindow, EventsExactlyAlphaApartAreCoResident) {
  const Instance inst = FromRecords({Record("a", 0, 45, 7, 10)}, {Record("b", 1800, 45, 7, 10)});
  SlidingWindow w(inst.log_i, inst.log_e, 1800, ScanDirection::kForward);
  bool together = false;
  while (w.HasNext()) {
    w.Next();
    together |= !w.contents_i().empty() && !w.contents_e().empty();
  }
  EXPECT_TRUE(together);
}

// Counts cross-side pairs met when each inserted event is checked against
// the opposite window, in the scan's side order; this must equal the number
// of pairs within alpha.
std::uint64_t WindowPairs(const EventLog& log_i, const EventLog& log_e, std::int64_t alpha,
                          ScanDirection dir) {
  SlidingWindow w(log_i, log_e, alpha, dir);
  std::uint64_t pairs = 0;
  while (w.HasNext()) {
    const auto step = w.Next();
    const IndexRange ci = w.contents_i();
    const IndexRange ce = w.contents_e();
    // Contents include this step's inserts; E inserts meet the whole I window,
    // I inserts meet the E window minus this step's E inserts.
    pairs += step.inserted_i.size() * (ce.size() - step.inserted_e.size());
    pairs += step.inserted_e.size() * ci.size();
  }
  return pairs;
}

TEST(SlidingWindow, ResidencyMatchesAllPairsWithinAlpha) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Instance inst = RandomInstance(seed, {40, 1500});
    Params p;
    p.alpha = 1 + static_cast<std::int64_t>(seed * 97 % 3600);
    const OracleResult oracle = OracleLink(inst.log_i, inst.log_e, p);
    EXPECT_EQ(WindowPairs(inst.log_i, inst.log_e, p.alpha, ScanDirection::kForward),
              oracle.window_pairs);
    EXPECT_EQ(WindowPairs(inst.log_i, inst.log_e, p.alpha, ScanDirection::kReverse),
              oracle.window_pairs);
  }
}

TEST(WindowSpatialIndex, Queries) {
  WindowSpatialIndex index(8, 1000.0);
  std::vector<std::uint32_t> out;
  index.Query(Region{45, 7, 1000, {}}, &out);
  EXPECT_TRUE(out.empty());
  index.Insert(0, Region{45, 7, 1000, {}});
  index.Insert(1, Region{North(10000), 7, 1000, {}});
  index.Query(Region{45, 7, 1000, {}}, &out);
  EXPECT_NE(std::find(out.begin(), out.end(), 0u), out.end());
  EXPECT_EQ(std::find(out.begin(), out.end(), 1u), out.end());
  index.Remove(0);
  index.Query(Region{45, 7, 1000, {}}, &out);
  EXPECT_TRUE(out.empty());
  EXPECT_EQ(index.size(), 1u);
}

TEST(WindowSpatialIndex, NoFalseNegativesProperty) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const double max_r = 10.0 + unit(rng) * 3000.0;
    std::vector<Region> regions;
    for (int n = 0; n < 200; ++n) {
      regions.push_back(Region{North(unit(rng) * 40000), 7.0 + unit(rng) * 0.5,
                               unit(rng) * max_r, {}});
    }
    WindowSpatialIndex index(regions.size(), max_r);
    for (std::uint32_t n = 0; n < regions.size(); ++n) index.Insert(n, regions[n]);
    std::vector<std::uint32_t> out;
    for (int q = 0; q < 50; ++q) {
      const Region query{North(unit(rng) * 40000), 7.0 + unit(rng) * 0.5, unit(rng) * max_r, {}};
      index.Query(query, &out);
      const std::set<std::uint32_t> got(out.begin(), out.end());
      for (std::uint32_t n = 0; n < regions.size(); ++n) {
        if (RegionsIntersect(query, regions[n])) EXPECT_TRUE(got.count(n));
      }
    }
  }
}

TEST(ForwardScan, SingleCoOccurrenceAdmitsPair) {
  const Instance inst = FromRecords({Record("a", 100, 45, 7, 100)}, {Record("b", 160, 45, 7, 100)});
  const ScanResult r = ForwardScan(inst.log_i, inst.log_e, Params{});
  EXPECT_EQ(Pairs(r.state), (std::set<UserPair>{{"I:a", "E:b"}}));
  EXPECT_EQ(r.state.candidates.at({"I:a", "E:b"}).admitted_at, 160);
}

TEST(ForwardScan, AlibisAfterCoOccurrenceEvict) {
  Params p;
  p.alibi_threshold = 1;
  // Co-occur at t=0, then alibis at t=5000 and t=10000.
  const Instance inst = FromRecords(
      {Record("a", 0, 45, 7, 100), Record("a", 5000, 45, 7, 100), Record("a", 10000, 45, 7, 100)},
      {Record("b", 0, 45, 7, 100), Record("b", 5000, North(90000), 7, 100),
       Record("b", 10000, North(90000), 7, 100)});
  EXPECT_TRUE(Pairs(ForwardScan(inst.log_i, inst.log_e, p).state).empty());
  p.alibi_threshold = 2;
  EXPECT_FALSE(Pairs(ForwardScan(inst.log_i, inst.log_e, p).state).empty());
}

TEST(ForwardScan, AlibiWithoutCoOccurrenceIsNotRecorded) {
  const Instance inst =
      FromRecords({Record("a", 100, 45, 7, 100)}, {Record("b", 100, North(90000), 7, 100)});
  const ScanResult r = ForwardScan(inst.log_i, inst.log_e, Params{});
  EXPECT_TRUE(r.state.candidates.empty());
  EXPECT_TRUE(r.state.alibi_counts.empty());
}

TEST(ReverseScan, RemovesPairWithEarlierAlibi) {
  const Instance inst = testing::ReverseScanFixture();
  const ScanResult forward = ForwardScan(inst.log_i, inst.log_e, Params{});
  EXPECT_EQ(Pairs(forward.state), (std::set<UserPair>{{"I:alice", "E:bob"}}));
  const ScanResult reverse = ReverseScan(inst.log_i, inst.log_e, forward.state, Params{});
  EXPECT_TRUE(reverse.state.candidates.empty());
}

TEST(ReverseScan, NoAlibisLeavesCandidatesUnchanged) {
  const Instance inst = FromRecords({Record("a", 0, 45, 7, 100), Record("c", 50, 45, 7, 100)},
                                    {Record("b", 10, 45, 7, 100)});
  const ScanResult forward = ForwardScan(inst.log_i, inst.log_e, Params{});
  const ScanResult reverse = ReverseScan(inst.log_i, inst.log_e, forward.state, Params{});
  EXPECT_EQ(Pairs(reverse.state), Pairs(forward.state));
  EXPECT_EQ(Pairs(reverse.state).size(), 2u);
}

TEST(ReverseScan, ExactlyThresholdAlibisSurvive) {
  Params p;
  p.alibi_threshold = 2;
  const Instance inst = FromRecords(
      {Record("a", 100, 45, 7, 100), Record("a", 2000, 45, 7, 100), Record("a", 9000, 45, 7, 100)},
      {Record("b", 100, North(90000), 7, 100), Record("b", 2000, North(90000), 7, 100),
       Record("b", 9000, 45, 7, 100)});
  const ScanResult forward = ForwardScan(inst.log_i, inst.log_e, p);
  const ScanResult reverse = ReverseScan(inst.log_i, inst.log_e, forward.state, p);
  ASSERT_EQ(Pairs(reverse.state).size(), 1u);
  EXPECT_EQ(reverse.state.alibi_counts.at({"I:a", "E:b"}), 2u);
  p.alibi_threshold = 1;
  const ScanResult strict =
      ReverseScan(inst.log_i, inst.log_e, ForwardScan(inst.log_i, inst.log_e, p).state, p);
  EXPECT_TRUE(strict.state.candidates.empty());
}

TEST(ForwardScan, RejectsUnsortedLog) {
  Instance inst = FromRecords({Record("a", 1, 45, 7, 1), Record("a", 2, 45, 7, 1)}, {});
  std::swap(inst.log_i.events[0], inst.log_i.events[1]);
  EXPECT_THROW(ForwardScan(inst.log_i, inst.log_e, Params{}), PipelineError);
}

// Random single-cell instances checked against the quadratic oracle.
class ScanProperties : public ::testing::TestWithParam<int> {};

TEST_P(ScanProperties, MatchOracle) {
  const int seed = GetParam();
  const Instance inst = RandomInstance(500 + seed, {80, 3000});
  for (int a : {0, 1, 3}) {
    Params p;
    p.alibi_threshold = a;
    const OracleResult oracle = OracleLink(inst.log_i, inst.log_e, p);

    std::map<std::pair<Side, std::uint64_t>, std::uint32_t> counts;
    std::map<std::pair<Side, std::uint64_t>, int> exits;
    std::uint64_t compared = 0;
    bool compared_outside_window = false;
    std::set<std::tuple<std::uint64_t, std::uint64_t>> co_pairs;
    ScanHooks hooks;
    hooks.on_window_exit = [&](const Event& ev, std::uint32_t count) {
      counts[{ev.side, ev.seq}] = count;
      ++exits[{ev.side, ev.seq}];
    };
    hooks.on_compare = [&](const Event& x, const Event& y) {
      ++compared;
      compared_outside_window |= !TemporallyClose(x.time, y.time, p.alpha);
      const Event& i = x.side == Side::kI ? x : y;
      const Event& e = x.side == Side::kI ? y : x;
      if (CoOccurs(i, e, p)) co_pairs.insert({i.seq, e.seq});
    };
    const ScanResult forward = ForwardScan(inst.log_i, inst.log_e, p, hooks);
    EXPECT_EQ(compared, forward.stats.comparisons);
    EXPECT_FALSE(compared_outside_window);

    // Match counts: every event exits once with the brute-force count.
    EXPECT_EQ(counts, oracle.match_counts);
    for (const auto& [key, n] : exits) EXPECT_EQ(n, 1);

    // Every co-occurring event pair is found exactly once.
    std::uint64_t oracle_co_events = 0;
    for (const Event& i : inst.log_i.events) {
      for (const Event& e : inst.log_e.events) oracle_co_events += CoOccurs(i, e, p);
    }
    EXPECT_EQ(forward.stats.co_occurring_event_pairs, oracle_co_events);
    EXPECT_EQ(co_pairs.size(), oracle_co_events);

    const ScanResult reverse = ReverseScan(inst.log_i, inst.log_e, forward.state, p);
    const std::set<UserPair> after_forward = Pairs(forward.state);
    const std::set<UserPair> after_reverse = Pairs(reverse.state);
    EXPECT_TRUE(std::includes(after_forward.begin(), after_forward.end(), after_reverse.begin(),
                              after_reverse.end()));
    EXPECT_EQ(after_reverse, oracle.candidates) << "seed " << seed << " a=" << a;
    for (const UserPair& pair : after_reverse) {
      const auto it = oracle.alibi_counts.find(pair);
      const std::uint32_t exhaustive = it == oracle.alibi_counts.end() ? 0 : it->second;
      EXPECT_LE(exhaustive, static_cast<std::uint32_t>(a));
      const auto got = reverse.state.alibi_counts.find(pair);
      EXPECT_EQ(got == reverse.state.alibi_counts.end() ? 0 : got->second, exhaustive);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, ScanProperties, ::testing::Range(0, 25));

}  // namespace
}  // namespace stlink
