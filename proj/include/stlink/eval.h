// Linkage quality metrics, stage accounting, report formatting and the
// brute-force reference linker.

#ifndef STLINK_EVAL_H_
#define STLINK_EVAL_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "stlink/linkage.h"
#include "stlink/store.h"
#include "stlink/synth.h"
#include "stlink/temporal.h"

namespace stlink {

// Whether the linked pair (I user, E user) agrees with the truth map. User
// ids may be prefixed or raw.
bool IsCorrectLink(const std::string& user_i, const std::string& user_e, const TruthMap& truth);

// Fraction of linked pairs that are correct; nullopt for an empty result.
std::optional<double> Precision(const LinkResult& linked, const TruthMap& truth);

std::size_t TruePositives(const LinkResult& linked, const TruthMap& truth);

struct RecallResult {
  double recall = 0.0;  // correct eligible links / eligible users
  std::size_t eligible_users = 0;
  std::size_t correct_eligible = 0;
  double recall_all = 0.0;  // correct links / all truth users
  std::size_t truth_users = 0;
  std::size_t correct = 0;
};

// A truth user is eligible when its events in `events_e` span at least
// params.l distinct places.
RecallResult Recall(const LinkResult& linked, const TruthMap& truth, const EventLog& events_e,
                    const Params& params);

// (floor(k), l) -> number of pairs.
using KlHistogram = std::map<std::pair<std::int64_t, int>, std::size_t>;
KlHistogram KlDistribution(const std::vector<PairEvaluation>& evaluations);

struct StageCounts {
  std::uint64_t unfiltered = 0;  // |U_I| * |U_E|
  std::uint64_t spatial = 0;
  std::uint64_t temporal = 0;
  std::uint64_t passing = 0;
  std::uint64_t linked = 0;

  bool Monotone() const {
    return unfiltered >= spatial && spatial >= temporal && temporal >= passing &&
           passing >= linked;
  }
};

struct MetricsReport {
  std::optional<double> precision;
  std::size_t true_positives = 0;
  RecallResult recall;
  StageCounts stages;
  std::uint64_t comparisons = 0;
  std::map<std::string, double> stage_seconds;
  KlHistogram kl_histogram;
};

std::string FormatReportText(const MetricsReport& report);
// One `key=value` per line; stable key order.
std::string FormatReportKv(const MetricsReport& report);

void WriteTruthTsv(const std::filesystem::path& path, const TruthMap& truth);
TruthMap ReadTruthTsv(const std::filesystem::path& path);

// Writes a header row followed by the rows, comma separated.
void WriteCurveCsv(const std::filesystem::path& path, const std::vector<std::string>& header,
                   const std::vector<std::vector<std::string>>& rows);
void WriteKlHistogramCsv(const std::filesystem::path& path, const KlHistogram& histogram);

struct OracleResult {
  std::set<UserPair> co_occurring_pairs;
  std::map<UserPair, std::uint32_t> alibi_counts;  // exhaustive
  std::set<UserPair> candidates;                   // co-occurring and alibis <= a
  std::map<std::pair<Side, std::uint64_t>, std::uint32_t> match_counts;  // by (side, seq)
  std::vector<PairEvaluation> evaluations;         // one per candidate
  std::map<UserPair, double> optimal_k;            // max-weight matching per candidate
  std::uint64_t window_pairs = 0;                  // cross pairs with |dt| <= alpha
  LinkResult link;
};

inline constexpr std::size_t kOracleEventGuard = 50000;

// Quadratic reference: every cross-side event pair is examined directly, no
// windows, grids or on-disk index. Throws InputError above the guard.
OracleResult OracleLink(const EventLog& log_i, const EventLog& log_e, const Params& params,
                        std::size_t guard = kOracleEventGuard);

}  // namespace stlink

#endif  // STLINK_EVAL_H_
