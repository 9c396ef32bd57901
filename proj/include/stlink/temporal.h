// Temporal filtering: a window of span alpha slides jointly over the two
// time-sorted event logs of one grid cell. The forward scan admits user
// pairs with co-occurring events and evicts pairs whose alibi count exceeds
// the threshold; the reverse scan recounts alibis of the surviving pairs
// from scratch so that alibis seen before a pair's admission are included.

#ifndef STLINK_TEMPORAL_H_
#define STLINK_TEMPORAL_H_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "stlink/model.h"
#include "stlink/store.h"

namespace stlink {

struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  bool empty() const { return begin == end; }
};

enum class ScanDirection { kForward, kReverse };

// Event-at-a-time window over both logs. Each step moves to the next
// distinct timestamp t and reports which log positions entered and left.
// Forward windows hold [t - alpha, t]; reverse windows hold [t, t + alpha].
// Ranges index into the respective log's event vector.
class SlidingWindow {
 public:
  struct Step {
    std::int64_t time = 0;
    IndexRange inserted_i;
    IndexRange inserted_e;
    IndexRange removed_i;
    IndexRange removed_e;
  };

  SlidingWindow(const EventLog& log_i, const EventLog& log_e, std::int64_t alpha,
                ScanDirection direction);

  bool HasNext() const;
  Step Next();

  // Current window contents per side.
  IndexRange contents_i() const { return {lo_[0], hi_[0]}; }
  IndexRange contents_e() const { return {lo_[1], hi_[1]}; }

 private:
  const std::vector<Event>* events_[2];
  std::int64_t alpha_;
  ScanDirection direction_;
  std::size_t lo_[2] = {0, 0};
  std::size_t hi_[2] = {0, 0};
};

// Hash grid over 3-D earth-centered coordinates. Chord length never exceeds
// great-circle distance, so a cube query of half-width r + max_radius finds
// every disk that can intersect the query disk. Results may contain false
// positives; callers re-check with RegionsIntersect.
class WindowSpatialIndex {
 public:
  WindowSpatialIndex(std::size_t capacity, double max_radius);

  void Insert(std::uint32_t handle, const Region& region);
  void Remove(std::uint32_t handle);
  void Query(const Region& region, std::vector<std::uint32_t>* out) const;

  std::size_t size() const { return size_; }
  double bucket_edge() const { return bucket_edge_; }

 private:
  struct Slot {
    std::uint64_t key = 0;
    std::uint32_t position = 0;
    bool present = false;
  };

  std::uint64_t KeyFor(double x, double y, double z) const;

  double max_radius_;
  double bucket_edge_;
  std::vector<Slot> slots_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> buckets_;
  std::size_t size_ = 0;
};

struct UserPair {
  std::string user_i;
  std::string user_e;
  friend auto operator<=>(const UserPair&, const UserPair&) = default;
};

struct Candidate {
  std::int64_t admitted_at = 0;     // window time of admission
  std::uint64_t admitted_step = 0;  // forward step index of admission
  friend bool operator==(const Candidate&, const Candidate&) = default;
};

// CS and AS. Pairs are stored as (I user, E user), which makes the relation
// symmetric by construction.
struct CandidateState {
  std::map<UserPair, Candidate> candidates;
  std::map<UserPair, std::uint32_t> alibi_counts;

  bool Contains(const std::string& user_i, const std::string& user_e) const {
    return candidates.count(UserPair{user_i, user_e}) > 0;
  }
};

struct ScanStats {
  std::size_t events_i = 0;
  std::size_t events_e = 0;
  std::size_t steps = 0;
  std::uint64_t comparisons = 0;
  std::uint64_t co_occurring_event_pairs = 0;
  std::uint64_t alibi_event_pairs = 0;
  std::uint64_t admitted = 0;
  std::uint64_t evicted = 0;
};

struct ScanHooks {
  // Forward scan only: called once per event as it leaves the window, with
  // the number of distinct opposite-side users it co-occurred with.
  std::function<void(const Event&, std::uint32_t)> on_window_exit;
  // Called for every event pair the scan compares (inserted event first).
  std::function<void(const Event&, const Event&)> on_compare;
};

struct ScanResult {
  CandidateState state;
  ScanStats stats;
};

// Both logs must be time-sorted; PipelineError names the offending
// timestamp otherwise.
ScanResult ForwardScan(const EventLog& log_i, const EventLog& log_e, const Params& params,
                       const ScanHooks& hooks = {});

// Resets all alibi counters, then slides the window backwards and recounts
// alibi event pairs of every current candidate; pairs whose count exceeds
// the threshold are dropped. No pair is ever admitted here.
ScanResult ReverseScan(const EventLog& log_i, const EventLog& log_e, CandidateState state,
                       const Params& params, const ScanHooks& hooks = {});

}  // namespace stlink

#endif  // STLINK_TEMPORAL_H_
