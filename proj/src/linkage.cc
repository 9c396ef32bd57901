#include "stlink/linkage.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <tuple>
#include <utility>

namespace stlink {
namespace {

constexpr double kMetersPerDegree = kEarthRadiusMeters * std::numbers::pi / 180.0;

struct Visit {
  int side;
  std::size_t index;
};

}  // namespace

std::string PlaceBinKey(double lat, double lon, double bin_edge) {
  const auto row = static_cast<std::int64_t>(std::floor(lat * kMetersPerDegree / bin_edge));
  const double row_lat = (static_cast<double>(row) + 0.5) * bin_edge / kMetersPerDegree;
  const double scale = std::max(1e-6, std::cos(row_lat * std::numbers::pi / 180.0));
  const auto col =
      static_cast<std::int64_t>(std::floor(lon * kMetersPerDegree * scale / bin_edge));
  return "bin:" + std::to_string(row) + ":" + std::to_string(col);
}

std::string PlaceForPair(const Region& region_i, const Region& region_e, double bin_edge) {
  if (region_e.place_id) return "id:" + *region_e.place_id;
  return PlaceBinKey((region_i.lat + region_e.lat) / 2.0, (region_i.lon + region_e.lon) / 2.0,
                     bin_edge);
}

PairEvaluation EvaluatePair(const std::vector<IndexedEvent>& events_i,
                            const std::vector<IndexedEvent>& events_e, const Params& params) {
  PairEvaluation out;
  if (!events_i.empty()) out.user_i = events_i.front().event.user;
  if (!events_e.empty()) out.user_e = events_e.front().event.user;
  if (events_i.empty() || events_e.empty()) return out;

  const std::vector<IndexedEvent>* sides[2] = {&events_i, &events_e};
  std::vector<bool> used[2] = {std::vector<bool>(events_i.size()),
                               std::vector<bool>(events_e.size())};

  std::vector<Visit> order;
  order.reserve(events_i.size() + events_e.size());
  for (int s = 0; s < 2; ++s) {
    for (std::size_t n = 0; n < sides[s]->size(); ++n) order.push_back({s, n});
  }
  std::sort(order.begin(), order.end(), [&](const Visit& a, const Visit& b) {
    const Event& ea = (*sides[a.side])[a.index].event;
    const Event& eb = (*sides[b.side])[b.index].event;
    if (ea.time != eb.time) return ea.time < eb.time;
    if (a.side != b.side) return a.side < b.side;
    return ea.seq < eb.seq;
  });

  for (const Visit& v : order) {
    if (used[v.side][v.index]) continue;
    const IndexedEvent& self = (*sides[v.side])[v.index];
    const int other = 1 - v.side;
    const auto& partners = *sides[other];
    // Partners are time-sorted; only those within alpha can co-occur.
    const auto first = std::lower_bound(
        partners.begin(), partners.end(), self.event.time - params.alpha,
        [](const IndexedEvent& p, std::int64_t t) { return p.event.time < t; });
    std::optional<std::size_t> best;
    std::uint64_t best_product = 0;
    for (auto it = first; it != partners.end() && it->event.time <= self.event.time + params.alpha;
         ++it) {
      const auto m = static_cast<std::size_t>(it - partners.begin());
      if (used[other][m]) continue;
      if (!CoOccurs(self.event, it->event, params)) continue;
      const std::uint64_t product =
          params.weighted ? std::uint64_t{self.match_count} * it->match_count : 1;
      if (params.weighted && product == 0) {
        throw PipelineError("co-occurring event with zero match count for user " +
                            self.event.user);
      }
      bool better = !best.has_value() || product < best_product;
      if (!better && product == best_product) {
        const Event& cur = partners[*best].event;
        better = it->event.time < cur.time ||
                 (it->event.time == cur.time && it->event.seq < cur.seq);
      }
      if (better) {
        best = m;
        best_product = product;
      }
    }
    if (!best) continue;
    used[v.side][v.index] = true;
    used[other][*best] = true;
    const IndexedEvent& ei = v.side == 0 ? self : partners[*best];
    const IndexedEvent& ee = v.side == 0 ? partners[*best] : self;
    MatchedPair pair;
    pair.seq_i = ei.event.seq;
    pair.seq_e = ee.event.seq;
    pair.time_i = ei.event.time;
    pair.time_e = ee.event.time;
    pair.weight = params.weighted ? PairWeight(ei.match_count, ee.match_count) : 1.0;
    pair.place = PlaceForPair(ei.event.region, ee.event.region, params.place_bin_edge);
    out.k_value += pair.weight;
    out.place_weights[pair.place] += pair.weight;
    out.matched.push_back(std::move(pair));
  }
  for (const auto& [place, weight] : out.place_weights) {
    if (weight + kWeightTolerance >= 1.0) ++out.l_value;
  }
  return out;
}

bool SatisfiesKl(const PairEvaluation& evaluation, const Params& params) {
  return evaluation.k_value + kWeightTolerance >= params.k && evaluation.l_value >= params.l;
}

LinkResult ResolveAmbiguity(std::vector<PairEvaluation> passing) {
  std::map<std::string, int> uses_i;
  std::map<std::string, int> uses_e;
  for (const PairEvaluation& ev : passing) {
    ++uses_i[ev.user_i];
    ++uses_e[ev.user_e];
  }
  LinkResult result;
  for (PairEvaluation& ev : passing) {
    if (uses_i[ev.user_i] == 1 && uses_e[ev.user_e] == 1) {
      result.linked.push_back(std::move(ev));
    } else {
      result.rejected_ambiguous.push_back({ev.user_i, ev.user_e});
    }
  }
  std::sort(result.linked.begin(), result.linked.end(),
            [](const PairEvaluation& a, const PairEvaluation& b) {
              return std::tie(a.user_i, a.user_e) < std::tie(b.user_i, b.user_e);
            });
  std::sort(result.rejected_ambiguous.begin(), result.rejected_ambiguous.end());
  return result;
}

Elbow FindElbow(std::span<const double> values) {
  if (values.size() < 3) {
    throw InputError("insufficient data for elbow detection (need at least 3 values, got " +
                     std::to_string(values.size()) + ")");
  }
  Elbow best{1, values[1]};
  double best_sd = -1.0;
  for (std::size_t i = 1; i + 1 < values.size(); ++i) {
    const double sd = std::abs(values[i + 1] + values[i - 1] - 2.0 * values[i]);
    if (sd > best_sd) {
      best_sd = sd;
      best = {i, values[i]};
    }
  }
  return best;
}

KlChoice ChooseKlByElbow(const std::vector<PairEvaluation>& evaluations) {
  std::vector<double> ks;
  std::vector<double> ls;
  for (const PairEvaluation& ev : evaluations) {
    ks.push_back(ev.k_value);
    ls.push_back(static_cast<double>(ev.l_value));
  }
  std::sort(ks.rbegin(), ks.rend());
  std::sort(ls.rbegin(), ls.rend());
  KlChoice choice;
  choice.l = std::max(1, static_cast<int>(std::lround(FindElbow(ls).value)));
  choice.k = std::max(FindElbow(ks).value, static_cast<double>(choice.l));
  return choice;
}

CellLinkage EvaluateCandidates(const CandidateState& candidates, const UserEventIndex& index_i,
                               const UserEventIndex& index_e, const Params& params) {
  CellLinkage out;
  const bool dense_is_i = index_i.size() >= index_e.size();
  std::vector<const UserPair*> pairs;
  pairs.reserve(candidates.candidates.size());
  for (const auto& [pair, info] : candidates.candidates) pairs.push_back(&pair);
  if (!dense_is_i) {
    std::sort(pairs.begin(), pairs.end(), [](const UserPair* a, const UserPair* b) {
      return std::tie(a->user_e, a->user_i) < std::tie(b->user_e, b->user_i);
    });
  }

  const std::string* loaded_user = nullptr;
  std::vector<IndexedEvent> dense_events;
  for (const UserPair* pair : pairs) {
    const std::string& dense_user = dense_is_i ? pair->user_i : pair->user_e;
    if (loaded_user == nullptr || *loaded_user != dense_user) {
      dense_events = (dense_is_i ? index_i : index_e).ScanUser(dense_user);
      loaded_user = &dense_user;
      ++out.index_reads;
    }
    const std::vector<IndexedEvent> sparse_events =
        (dense_is_i ? index_e : index_i).ScanUser(dense_is_i ? pair->user_e : pair->user_i);
    ++out.index_reads;
    PairEvaluation ev = dense_is_i ? EvaluatePair(dense_events, sparse_events, params)
                                   : EvaluatePair(sparse_events, dense_events, params);
    ev.user_i = pair->user_i;
    ev.user_e = pair->user_e;
    out.evaluations.push_back(std::move(ev));
  }
  std::sort(out.evaluations.begin(), out.evaluations.end(),
            [](const PairEvaluation& a, const PairEvaluation& b) {
              return std::tie(a.user_i, a.user_e) < std::tie(b.user_i, b.user_e);
            });
  return out;
}

}  // namespace stlink
