#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <tuple>

#include "stlink/eval.h"

namespace stlink {
namespace {

using MatchKey = std::pair<Side, std::uint64_t>;

// Maximum-weight bipartite matching via the Hungarian method on a cost
// matrix padded to square; absent edges cost 0 (weight 0 means unmatched).
double MaxWeightMatching(const std::vector<std::vector<double>>& weight) {
  const std::size_t rows = weight.size();
  const std::size_t cols = rows ? weight[0].size() : 0;
  const std::size_t n = std::max(rows, cols);
  if (n == 0) return 0.0;
  auto cost = [&](std::size_t r, std::size_t c) {
    return (r < rows && c < cols) ? -weight[r][c] : 0.0;
  };
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t r = 1; r <= n; ++r) {
    p[0] = r;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  double total = 0.0;
  for (std::size_t j = 1; j <= n; ++j) {
    if (p[j] != 0 && p[j] - 1 < rows && j - 1 < cols) total += weight[p[j] - 1][j - 1];
  }
  return total;
}

}  // namespace

OracleResult OracleLink(const EventLog& log_i, const EventLog& log_e, const Params& params,
                        std::size_t guard) {
  params.Validate();
  if (log_i.events.size() + log_e.events.size() > guard) {
    throw InputError("oracle refuses inputs above " + std::to_string(guard) + " events");
  }
  OracleResult out;
  const auto& ei = log_i.events;
  const auto& ee = log_e.events;

  std::map<std::string, std::vector<std::size_t>> user_events_i;
  std::map<std::string, std::vector<std::size_t>> user_events_e;
  for (std::size_t a = 0; a < ei.size(); ++a) user_events_i[ei[a].user].push_back(a);
  for (std::size_t b = 0; b < ee.size(); ++b) user_events_e[ee[b].user].push_back(b);

  std::vector<std::set<std::string>> partners_i(ei.size());
  std::vector<std::set<std::string>> partners_e(ee.size());
  for (std::size_t a = 0; a < ei.size(); ++a) {
    for (std::size_t b = 0; b < ee.size(); ++b) {
      if (!TemporallyClose(ei[a].time, ee[b].time, params.alpha)) continue;
      ++out.window_pairs;
      const UserPair pair{ei[a].user, ee[b].user};
      if (CoOccurs(ei[a], ee[b], params)) {
        out.co_occurring_pairs.insert(pair);
        partners_i[a].insert(ee[b].user);
        partners_e[b].insert(ei[a].user);
      } else if (IsAlibi(ei[a], ee[b], params)) {
        ++out.alibi_counts[pair];
      }
    }
  }
  for (std::size_t a = 0; a < ei.size(); ++a) {
    out.match_counts[{Side::kI, ei[a].seq}] = static_cast<std::uint32_t>(partners_i[a].size());
  }
  for (std::size_t b = 0; b < ee.size(); ++b) {
    out.match_counts[{Side::kE, ee[b].seq}] = static_cast<std::uint32_t>(partners_e[b].size());
  }
  for (const UserPair& pair : out.co_occurring_pairs) {
    const auto it = out.alibi_counts.find(pair);
    const std::uint32_t alibis = it == out.alibi_counts.end() ? 0 : it->second;
    if (alibis <= static_cast<std::uint32_t>(params.alibi_threshold)) out.candidates.insert(pair);
  }

  std::vector<PairEvaluation> passing;
  for (const UserPair& pair : out.candidates) {
    const auto& list_i = user_events_i[pair.user_i];
    const auto& list_e = user_events_e[pair.user_e];

    // (time, side, seq, index) visit list across both users.
    std::vector<std::tuple<std::int64_t, int, std::uint64_t, std::size_t>> visits;
    for (std::size_t a : list_i) visits.emplace_back(ei[a].time, 0, ei[a].seq, a);
    for (std::size_t b : list_e) visits.emplace_back(ee[b].time, 1, ee[b].seq, b);
    std::sort(visits.begin(), visits.end());

    std::set<std::size_t> used_i;
    std::set<std::size_t> used_e;
    PairEvaluation ev;
    ev.user_i = pair.user_i;
    ev.user_e = pair.user_e;
    for (const auto& [time, side, seq, idx] : visits) {
      if (side == 0 ? used_i.count(idx) : used_e.count(idx)) continue;
      const auto& others = side == 0 ? list_e : list_i;
      // Best = smallest (count product, time, seq).
      std::optional<std::tuple<std::uint64_t, std::int64_t, std::uint64_t, std::size_t>> best;
      for (std::size_t o : others) {
        if (side == 0 ? used_e.count(o) : used_i.count(o)) continue;
        const Event& a = side == 0 ? ei[idx] : ei[o];
        const Event& b = side == 0 ? ee[o] : ee[idx];
        if (!CoOccurs(a, b, params)) continue;
        const std::uint64_t product =
            params.weighted ? std::uint64_t{out.match_counts[{Side::kI, a.seq}]} *
                                  out.match_counts[{Side::kE, b.seq}]
                            : 1;
        const Event& other = side == 0 ? b : a;
        const auto key = std::make_tuple(product, other.time, other.seq, o);
        if (!best || key < *best) best = key;
      }
      if (!best) continue;
      const std::size_t o = std::get<3>(*best);
      const std::size_t a = side == 0 ? idx : o;
      const std::size_t b = side == 0 ? o : idx;
      used_i.insert(a);
      used_e.insert(b);
      MatchedPair m;
      m.seq_i = ei[a].seq;
      m.seq_e = ee[b].seq;
      m.time_i = ei[a].time;
      m.time_e = ee[b].time;
      m.weight = params.weighted ? 1.0 / (static_cast<double>(out.match_counts[{Side::kI, m.seq_i}]) *
                                          static_cast<double>(out.match_counts[{Side::kE, m.seq_e}]))
                                 : 1.0;
      m.place = PlaceForPair(ei[a].region, ee[b].region, params.place_bin_edge);
      ev.k_value += m.weight;
      ev.place_weights[m.place] += m.weight;
      ev.matched.push_back(std::move(m));
    }
    for (const auto& [place, w] : ev.place_weights) {
      if (w >= 1.0 - kWeightTolerance) ++ev.l_value;
    }

    std::vector<std::vector<double>> weights(list_i.size(), std::vector<double>(list_e.size()));
    for (std::size_t r = 0; r < list_i.size(); ++r) {
      for (std::size_t c = 0; c < list_e.size(); ++c) {
        const Event& a = ei[list_i[r]];
        const Event& b = ee[list_e[c]];
        if (!CoOccurs(a, b, params)) continue;
        weights[r][c] = params.weighted
                            ? 1.0 / (static_cast<double>(out.match_counts[{Side::kI, a.seq}]) *
                                     static_cast<double>(out.match_counts[{Side::kE, b.seq}]))
                            : 1.0;
      }
    }
    out.optimal_k[pair] = MaxWeightMatching(weights);

    if (ev.k_value >= params.k - kWeightTolerance && ev.l_value >= params.l) passing.push_back(ev);
    out.evaluations.push_back(std::move(ev));
  }

  std::map<std::string, int> count_i;
  std::map<std::string, int> count_e;
  for (const PairEvaluation& ev : passing) {
    ++count_i[ev.user_i];
    ++count_e[ev.user_e];
  }
  for (PairEvaluation& ev : passing) {
    if (count_i[ev.user_i] > 1 || count_e[ev.user_e] > 1) {
      out.link.rejected_ambiguous.push_back({ev.user_i, ev.user_e});
    } else {
      out.link.linked.push_back(std::move(ev));
    }
  }
  return out;
}

}  // namespace stlink
