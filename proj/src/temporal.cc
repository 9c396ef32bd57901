#include "stlink/temporal.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace stlink {
namespace {

constexpr double kMinBucketEdge = 50.0;
constexpr std::int64_t kBucketBias = 1 << 20;

std::array<double, 3> ToCartesian(double lat, double lon) {
  const double phi = lat * std::numbers::pi / 180.0;
  const double lam = lon * std::numbers::pi / 180.0;
  return {kEarthRadiusMeters * std::cos(phi) * std::cos(lam),
          kEarthRadiusMeters * std::cos(phi) * std::sin(lam), kEarthRadiusMeters * std::sin(phi)};
}

std::uint64_t PackBucket(std::int64_t ix, std::int64_t iy, std::int64_t iz) {
  auto field = [](std::int64_t v) { return static_cast<std::uint64_t>(v + kBucketBias) & 0x1fffff; };
  return (field(ix) << 42) | (field(iy) << 21) | field(iz);
}

void RequireSorted(const EventLog& log) {
  for (std::size_t n = 1; n < log.events.size(); ++n) {
    if (log.events[n].time < log.events[n - 1].time) {
      throw PipelineError("event log " + std::string(SideName(log.side)) +
                          " is not time-sorted: timestamp " + std::to_string(log.events[n].time) +
                          " follows " + std::to_string(log.events[n - 1].time));
    }
  }
}

std::uint64_t PairKey(std::uint32_t user_i, std::uint32_t user_e) {
  return (static_cast<std::uint64_t>(user_i) << 32) | user_e;
}

// Dense per-side user ids, per-user event lists and the CS/AS relations
// shared by both scan directions.
class ScanState {
 public:
  ScanState(const EventLog& log_i, const EventLog& log_e) {
    logs_[0] = &log_i;
    logs_[1] = &log_e;
    for (int s = 0; s < 2; ++s) {
      const auto& events = logs_[s]->events;
      for (const Event& ev : events) names_[s].push_back(ev.user);
      std::sort(names_[s].begin(), names_[s].end());
      names_[s].erase(std::unique(names_[s].begin(), names_[s].end()), names_[s].end());
      user_of_[s].resize(events.size());
      user_events_[s].resize(names_[s].size());
      for (std::size_t n = 0; n < events.size(); ++n) {
        const auto it = std::lower_bound(names_[s].begin(), names_[s].end(), events[n].user);
        const auto u = static_cast<std::uint32_t>(it - names_[s].begin());
        user_of_[s][n] = u;
        user_events_[s][u].push_back(static_cast<std::uint32_t>(n));
      }
      partners_[s].resize(names_[s].size());
    }
  }

  const Event& event(int side, std::size_t n) const { return logs_[side]->events[n]; }
  std::uint32_t user_of(int side, std::size_t n) const { return user_of_[side][n]; }
  std::size_t user_count(int side) const { return names_[side].size(); }

  std::uint64_t Key(int side, std::uint32_t u, std::uint32_t v) const {
    return side == 0 ? PairKey(u, v) : PairKey(v, u);
  }

  bool InCandidates(std::uint64_t key) const { return admitted_.count(key) > 0; }

  void Admit(std::uint32_t user_i, std::uint32_t user_e, Candidate info) {
    admitted_.emplace(PairKey(user_i, user_e), info);
    partners_[0][user_i].push_back(user_e);
    partners_[1][user_e].push_back(user_i);
  }

  void Evict(std::uint32_t user_i, std::uint32_t user_e) {
    admitted_.erase(PairKey(user_i, user_e));
    auto drop = [](std::vector<std::uint32_t>& list, std::uint32_t v) {
      const auto it = std::find(list.begin(), list.end(), v);
      if (it != list.end()) {
        *it = list.back();
        list.pop_back();
      }
    };
    drop(partners_[0][user_i], user_e);
    drop(partners_[1][user_e], user_i);
  }

  const std::vector<std::uint32_t>& partners(int side, std::uint32_t u) const {
    return partners_[side][u];
  }

  std::uint32_t& alibi_count(std::uint64_t key) { return alibis_[key]; }
  std::uint32_t alibi_count_or_zero(std::uint64_t key) const {
    const auto it = alibis_.find(key);
    return it == alibis_.end() ? 0 : it->second;
  }
  void ResetAlibis() { alibis_.clear(); }

  // Window of user u's events on one side: a slice of its event list
  // delimited by two cursors that only move in the scan direction.
  void ResetUserWindows(ScanDirection direction) {
    for (int s = 0; s < 2; ++s) {
      win_lo_[s].assign(names_[s].size(), 0);
      win_hi_[s].assign(names_[s].size(), 0);
      if (direction == ScanDirection::kReverse) {
        for (std::size_t u = 0; u < names_[s].size(); ++u) {
          win_lo_[s][u] = win_hi_[s][u] = static_cast<std::uint32_t>(user_events_[s][u].size());
        }
      }
    }
  }
  void UserWindowInsert(int side, std::uint32_t u, ScanDirection direction) {
    if (direction == ScanDirection::kForward) ++win_hi_[side][u];
    else --win_lo_[side][u];
  }
  void UserWindowRemove(int side, std::uint32_t u, ScanDirection direction) {
    if (direction == ScanDirection::kForward) ++win_lo_[side][u];
    else --win_hi_[side][u];
  }
  template <typename Fn>
  bool ForEachUserWindowEvent(int side, std::uint32_t u, Fn&& fn) const {
    const auto& list = user_events_[side][u];
    for (std::uint32_t k = win_lo_[side][u]; k < win_hi_[side][u]; ++k) {
      if (!fn(list[k])) return false;
    }
    return true;
  }

  CandidateState Export() const {
    CandidateState out;
    for (const auto& [key, info] : admitted_) {
      out.candidates.emplace(UserPair{names_[0][key >> 32], names_[1][key & 0xffffffffu]}, info);
    }
    for (const auto& [key, count] : alibis_) {
      if (count == 0) continue;
      out.alibi_counts.emplace(UserPair{names_[0][key >> 32], names_[1][key & 0xffffffffu]},
                               count);
    }
    return out;
  }

  void Import(const CandidateState& state) {
    for (const auto& [pair, info] : state.candidates) {
      const auto ui = std::lower_bound(names_[0].begin(), names_[0].end(), pair.user_i);
      const auto ue = std::lower_bound(names_[1].begin(), names_[1].end(), pair.user_e);
      if (ui == names_[0].end() || *ui != pair.user_i || ue == names_[1].end() ||
          *ue != pair.user_e) {
        foreign_.emplace(pair, info);
        continue;
      }
      Admit(static_cast<std::uint32_t>(ui - names_[0].begin()),
            static_cast<std::uint32_t>(ue - names_[1].begin()), info);
    }
  }

  // Candidates naming users absent from these logs; they have no events to
  // check and pass through unchanged.
  const std::map<UserPair, Candidate>& foreign() const { return foreign_; }

 private:
  const EventLog* logs_[2];
  std::vector<std::string> names_[2];
  std::vector<std::uint32_t> user_of_[2];
  std::vector<std::vector<std::uint32_t>> user_events_[2];
  std::vector<std::vector<std::uint32_t>> partners_[2];
  std::vector<std::uint32_t> win_lo_[2];
  std::vector<std::uint32_t> win_hi_[2];
  std::unordered_map<std::uint64_t, Candidate> admitted_;
  std::unordered_map<std::uint64_t, std::uint32_t> alibis_;
  std::map<UserPair, Candidate> foreign_;
};

double MaxRadius(const EventLog& log) {
  double r = 0.0;
  for (const Event& ev : log.events) r = std::max(r, ev.region.radius);
  return r;
}

// Checks every in-window event of each current partner of the inserted
// event's user for alibis, evicting pairs once their count exceeds a.
void AlibiPass(ScanState& st, int side, std::size_t n, const Params& params,
               const ScanHooks& hooks, ScanStats& stats) {
  const int other = 1 - side;
  const Event& ev = st.event(side, n);
  const std::uint32_t u = st.user_of(side, n);
  const std::vector<std::uint32_t> partners = st.partners(side, u);
  for (const std::uint32_t v : partners) {
    const std::uint64_t key = st.Key(side, u, v);
    st.ForEachUserWindowEvent(other, v, [&](std::uint32_t m) {
      const Event& opp = st.event(other, m);
      ++stats.comparisons;
      if (hooks.on_compare) hooks.on_compare(ev, opp);
      if (!IsAlibi(ev, opp, params)) return true;
      ++stats.alibi_event_pairs;
      if (++st.alibi_count(key) > static_cast<std::uint32_t>(params.alibi_threshold)) {
        st.Evict(side == 0 ? u : v, side == 0 ? v : u);
        ++stats.evicted;
        return false;
      }
      return true;
    });
  }
}

}  // namespace

SlidingWindow::SlidingWindow(const EventLog& log_i, const EventLog& log_e, std::int64_t alpha,
                             ScanDirection direction)
    : events_{&log_i.events, &log_e.events}, alpha_(alpha), direction_(direction) {
  if (direction_ == ScanDirection::kReverse) {
    for (int s = 0; s < 2; ++s) lo_[s] = hi_[s] = events_[s]->size();
  }
}

bool SlidingWindow::HasNext() const {
  for (int s = 0; s < 2; ++s) {
    if (lo_[s] != hi_[s]) return true;
    if (direction_ == ScanDirection::kForward ? hi_[s] < events_[s]->size() : lo_[s] > 0) {
      return true;
    }
  }
  return false;
}

SlidingWindow::Step SlidingWindow::Next() {
  Step step;
  IndexRange* inserted[2] = {&step.inserted_i, &step.inserted_e};
  IndexRange* removed[2] = {&step.removed_i, &step.removed_e};

  if (direction_ == ScanDirection::kForward) {
    std::int64_t t = std::numeric_limits<std::int64_t>::max();
    bool pending = false;
    for (int s = 0; s < 2; ++s) {
      if (hi_[s] < events_[s]->size()) {
        t = std::min(t, (*events_[s])[hi_[s]].time);
        pending = true;
      }
    }
    if (!pending) {
      // Drain: a time past every resident event's expiry.
      std::int64_t last = std::numeric_limits<std::int64_t>::min();
      for (int s = 0; s < 2; ++s) {
        if (hi_[s] > lo_[s]) last = std::max(last, (*events_[s])[hi_[s] - 1].time);
      }
      t = last + alpha_ + 1;
    }
    step.time = t;
    for (int s = 0; s < 2; ++s) {
      const auto& ev = *events_[s];
      std::size_t lo = lo_[s];
      while (lo < hi_[s] && ev[lo].time < t - alpha_) ++lo;
      *removed[s] = {lo_[s], lo};
      lo_[s] = lo;
      std::size_t hi = hi_[s];
      while (hi < ev.size() && ev[hi].time == t) ++hi;
      *inserted[s] = {hi_[s], hi};
      hi_[s] = hi;
    }
  } else {
    std::int64_t t = std::numeric_limits<std::int64_t>::min();
    bool pending = false;
    for (int s = 0; s < 2; ++s) {
      if (lo_[s] > 0) {
        t = std::max(t, (*events_[s])[lo_[s] - 1].time);
        pending = true;
      }
    }
    if (!pending) {
      std::int64_t first = std::numeric_limits<std::int64_t>::max();
      for (int s = 0; s < 2; ++s) {
        if (hi_[s] > lo_[s]) first = std::min(first, (*events_[s])[lo_[s]].time);
      }
      t = first - alpha_ - 1;
    }
    step.time = t;
    for (int s = 0; s < 2; ++s) {
      const auto& ev = *events_[s];
      std::size_t hi = hi_[s];
      while (hi > lo_[s] && ev[hi - 1].time > t + alpha_) --hi;
      *removed[s] = {hi, hi_[s]};
      hi_[s] = hi;
      std::size_t lo = lo_[s];
      while (lo > 0 && ev[lo - 1].time == t) --lo;
      *inserted[s] = {lo, lo_[s]};
      lo_[s] = lo;
    }
  }
  return step;
}

WindowSpatialIndex::WindowSpatialIndex(std::size_t capacity, double max_radius)
    : max_radius_(max_radius),
      bucket_edge_(std::max(kMinBucketEdge, 2.0 * max_radius)),
      slots_(capacity) {}

std::uint64_t WindowSpatialIndex::KeyFor(double x, double y, double z) const {
  return PackBucket(static_cast<std::int64_t>(std::floor(x / bucket_edge_)),
                    static_cast<std::int64_t>(std::floor(y / bucket_edge_)),
                    static_cast<std::int64_t>(std::floor(z / bucket_edge_)));
}

void WindowSpatialIndex::Insert(std::uint32_t handle, const Region& region) {
  Slot& slot = slots_.at(handle);
  if (slot.present) return;
  const auto p = ToCartesian(region.lat, region.lon);
  slot.key = KeyFor(p[0], p[1], p[2]);
  auto& bucket = buckets_[slot.key];
  slot.position = static_cast<std::uint32_t>(bucket.size());
  slot.present = true;
  bucket.push_back(handle);
  ++size_;
}

void WindowSpatialIndex::Remove(std::uint32_t handle) {
  Slot& slot = slots_.at(handle);
  if (!slot.present) return;
  auto it = buckets_.find(slot.key);
  auto& bucket = it->second;
  const std::uint32_t last = bucket.back();
  bucket[slot.position] = last;
  slots_[last].position = slot.position;
  bucket.pop_back();
  if (bucket.empty()) buckets_.erase(it);
  slot.present = false;
  --size_;
}

void WindowSpatialIndex::Query(const Region& region, std::vector<std::uint32_t>* out) const {
  out->clear();
  if (size_ == 0) return;
  const auto p = ToCartesian(region.lat, region.lon);
  // One meter of slack absorbs rounding in the trigonometry.
  const double half = region.radius + max_radius_ + 1.0;
  std::int64_t lo[3], hi[3];
  for (int d = 0; d < 3; ++d) {
    lo[d] = static_cast<std::int64_t>(std::floor((p[d] - half) / bucket_edge_));
    hi[d] = static_cast<std::int64_t>(std::floor((p[d] + half) / bucket_edge_));
  }
  for (std::int64_t ix = lo[0]; ix <= hi[0]; ++ix) {
    for (std::int64_t iy = lo[1]; iy <= hi[1]; ++iy) {
      for (std::int64_t iz = lo[2]; iz <= hi[2]; ++iz) {
        const auto it = buckets_.find(PackBucket(ix, iy, iz));
        if (it == buckets_.end()) continue;
        out->insert(out->end(), it->second.begin(), it->second.end());
      }
    }
  }
}

ScanResult ForwardScan(const EventLog& log_i, const EventLog& log_e, const Params& params,
                       const ScanHooks& hooks) {
  RequireSorted(log_i);
  RequireSorted(log_e);
  ScanResult result;
  ScanStats& stats = result.stats;
  stats.events_i = log_i.events.size();
  stats.events_e = log_e.events.size();

  ScanState st(log_i, log_e);
  st.ResetUserWindows(ScanDirection::kForward);
  const EventLog* logs[2] = {&log_i, &log_e};
  WindowSpatialIndex spatial[2] = {WindowSpatialIndex(log_i.events.size(), MaxRadius(log_i)),
                                   WindowSpatialIndex(log_e.events.size(), MaxRadius(log_e))};
  // Distinct opposite-side users each event has co-occurred with so far.
  std::vector<std::vector<std::uint32_t>> matched[2];
  matched[0].resize(log_i.events.size());
  matched[1].resize(log_e.events.size());
  auto note_match = [&](int side, std::size_t n, std::uint32_t user) {
    auto& list = matched[side][n];
    if (std::find(list.begin(), list.end(), user) == list.end()) list.push_back(user);
  };

  const auto alibi_limit = static_cast<std::uint32_t>(params.alibi_threshold);
  std::vector<std::uint32_t> hits;
  SlidingWindow window(log_i, log_e, params.alpha, ScanDirection::kForward);
  std::uint64_t step_index = 0;
  while (window.HasNext()) {
    const SlidingWindow::Step step = window.Next();
    ++stats.steps;
    const IndexRange removed[2] = {step.removed_i, step.removed_e};
    const IndexRange inserted[2] = {step.inserted_i, step.inserted_e};
    for (int s = 0; s < 2; ++s) {
      for (std::size_t n = removed[s].begin; n < removed[s].end; ++n) {
        spatial[s].Remove(static_cast<std::uint32_t>(n));
        st.UserWindowRemove(s, st.user_of(s, n), ScanDirection::kForward);
        if (hooks.on_window_exit) {
          hooks.on_window_exit(logs[s]->events[n],
                               static_cast<std::uint32_t>(matched[s][n].size()));
        }
        matched[s][n].clear();
        matched[s][n].shrink_to_fit();
      }
    }
    // I inserts against the E window first, then E inserts against the I
    // window (which by then holds this step's I inserts).
    for (int s = 0; s < 2; ++s) {
      const int other = 1 - s;
      for (std::size_t n = inserted[s].begin; n < inserted[s].end; ++n) {
        const Event& ev = logs[s]->events[n];
        const std::uint32_t u = st.user_of(s, n);
        spatial[other].Query(ev.region, &hits);
        std::sort(hits.begin(), hits.end());
        for (const std::uint32_t m : hits) {
          const Event& opp = logs[other]->events[m];
          ++stats.comparisons;
          if (hooks.on_compare) hooks.on_compare(ev, opp);
          if (!CoOccurs(ev, opp, params)) continue;
          ++stats.co_occurring_event_pairs;
          const std::uint32_t v = st.user_of(other, m);
          note_match(s, n, v);
          note_match(other, m, u);
          const std::uint64_t key = st.Key(s, u, v);
          if (st.InCandidates(key)) continue;
          if (st.alibi_count_or_zero(key) > alibi_limit) continue;
          st.Admit(s == 0 ? u : v, s == 0 ? v : u, Candidate{step.time, step_index});
          ++stats.admitted;
        }
        AlibiPass(st, s, n, params, hooks, stats);
        spatial[s].Insert(static_cast<std::uint32_t>(n), ev.region);
        st.UserWindowInsert(s, u, ScanDirection::kForward);
      }
    }
    ++step_index;
  }
  result.state = st.Export();
  return result;
}

ScanResult ReverseScan(const EventLog& log_i, const EventLog& log_e, CandidateState state,
                       const Params& params, const ScanHooks& hooks) {
  RequireSorted(log_i);
  RequireSorted(log_e);
  ScanResult result;
  ScanStats& stats = result.stats;
  stats.events_i = log_i.events.size();
  stats.events_e = log_e.events.size();

  ScanState st(log_i, log_e);
  st.Import(state);
  st.ResetAlibis();
  st.ResetUserWindows(ScanDirection::kReverse);

  SlidingWindow window(log_i, log_e, params.alpha, ScanDirection::kReverse);
  while (window.HasNext()) {
    const SlidingWindow::Step step = window.Next();
    ++stats.steps;
    const IndexRange removed[2] = {step.removed_i, step.removed_e};
    const IndexRange inserted[2] = {step.inserted_i, step.inserted_e};
    for (int s = 0; s < 2; ++s) {
      for (std::size_t n = removed[s].begin; n < removed[s].end; ++n) {
        st.UserWindowRemove(s, st.user_of(s, n), ScanDirection::kReverse);
      }
    }
    for (int s = 0; s < 2; ++s) {
      for (std::size_t n = inserted[s].end; n-- > inserted[s].begin;) {
        if (!st.partners(s, st.user_of(s, n)).empty()) {
          AlibiPass(st, s, n, params, hooks, stats);
        }
        st.UserWindowInsert(s, st.user_of(s, n), ScanDirection::kReverse);
      }
    }
  }
  result.state = st.Export();
  for (const auto& [pair, info] : st.foreign()) result.state.candidates.emplace(pair, info);
  return result;
}

}  // namespace stlink
