// Pairwise k-l diversity evaluation of surviving candidate pairs, global
// ambiguity elimination and elbow-based selection of k and l.

#ifndef STLINK_LINKAGE_H_
#define STLINK_LINKAGE_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "stlink/model.h"
#include "stlink/store.h"
#include "stlink/temporal.h"

namespace stlink {

struct MatchedPair {
  std::uint64_t seq_i = 0;
  std::uint64_t seq_e = 0;
  std::int64_t time_i = 0;
  std::int64_t time_e = 0;
  double weight = 0.0;
  std::string place;

  friend bool operator==(const MatchedPair&, const MatchedPair&) = default;
};

struct PairEvaluation {
  std::string user_i;
  std::string user_e;
  std::vector<MatchedPair> matched;
  double k_value = 0.0;
  std::map<std::string, double> place_weights;
  int l_value = 0;

  friend bool operator==(const PairEvaluation&, const PairEvaluation&) = default;
};

struct LinkResult {
  std::vector<PairEvaluation> linked;         // sorted by (user_i, user_e)
  std::vector<UserPair> rejected_ambiguous;   // sorted
};

// Place of a single location: a square bin of `bin_edge` meters.
std::string PlaceBinKey(double lat, double lon, double bin_edge);

// Place credited by a matched pair: the E event's place id when it has one,
// otherwise the bin holding the midpoint of the two region centers.
std::string PlaceForPair(const Region& region_i, const Region& region_e, double bin_edge);

// Greedy event matching. Events of both users are visited in (time, side,
// seq) order; each still-unmatched event takes the unmatched co-occurring
// partner with the highest weight (ties: earlier time, then smaller seq).
// `params.weighted == false` forces every weight to 1.
PairEvaluation EvaluatePair(const std::vector<IndexedEvent>& events_i,
                            const std::vector<IndexedEvent>& events_e, const Params& params);

bool SatisfiesKl(const PairEvaluation& evaluation, const Params& params);

// Drops every pair whose I user or E user occurs in another passing pair.
LinkResult ResolveAmbiguity(std::vector<PairEvaluation> passing);

struct Elbow {
  std::size_t index = 0;
  double value = 0.0;
};

// Interior index maximizing |A[i+1] + A[i-1] - 2 A[i]|; the smallest such
// index wins ties. Throws InputError when fewer than three values are given.
Elbow FindElbow(std::span<const double> descending);

struct KlChoice {
  double k = 0.0;
  int l = 0;
};

// Elbow of the k-value and l-value distributions over the evaluated pairs,
// adjusted so that l >= 1 and k >= l.
KlChoice ChooseKlByElbow(const std::vector<PairEvaluation>& evaluations);

struct CellLinkage {
  std::vector<PairEvaluation> evaluations;  // every candidate, sorted by pair
  std::uint64_t index_reads = 0;
};

// Evaluates every candidate pair against the per-user event indexes of one
// cell. Pairs are grouped by the user of the denser side so each of those
// users is read once.
CellLinkage EvaluateCandidates(const CandidateState& candidates, const UserEventIndex& index_i,
                               const UserEventIndex& index_e, const Params& params);

}  // namespace stlink

#endif  // STLINK_LINKAGE_H_
