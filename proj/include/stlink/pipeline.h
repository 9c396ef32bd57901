// Stage orchestration over a working directory.
//
// Layout under the workdir:
//   config.txt                 canonical echo of the effective config
//   ingest/{I,E}.tsv           time-sorted event logs
//   partitions.json            grid cells, bounds and per-side counts
//   <cell>/{I,E}.tsv           events of users dominated by the cell
//   <cell>/{I,E}/              per-user event index with match counts
//   <cell>/candidates.tsv      surviving candidate pairs
//   <cell>/scan_stats.json
//   evaluations.tsv            k-l evaluation of every candidate pair, merged over cells
//   linked.tsv                 user_x, user_y, k_value, l_value
//   link_metrics.json          pair counts per stage, chosen k and l
//   metrics.txt, metrics.kv, kl_histogram.csv
//   timings.kv                 wall time per stage (the only non-deterministic file)
//   <stage>.done               completion markers

#ifndef STLINK_PIPELINE_H_
#define STLINK_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "stlink/config.h"
#include "stlink/eval.h"
#include "stlink/linkage.h"
#include "stlink/spatial.h"
#include "stlink/temporal.h"

namespace stlink {

enum class Stage { kIngest, kPartition, kFilter, kLink, kEvaluate };

std::string StageName(Stage stage);

void RunIngest(const PipelineConfig& config);
void RunPartition(const PipelineConfig& config);
void RunFilter(const PipelineConfig& config);
void RunLink(const PipelineConfig& config);
MetricsReport RunEvaluate(const PipelineConfig& config);
MetricsReport RunPipeline(const PipelineConfig& config);

// Temporal filtering of one cell: the forward scan writes the per-user
// indexes under `cell_dir`/I and `cell_dir`/E; the reverse scan runs unless
// `forward_only`. Stats of both scans are summed.
ScanResult FilterCell(const CellPartition& cell, const Params& params, bool forward_only,
                      const std::filesystem::path& cell_dir);

// k-l evaluation of a cell's candidates against the cell's indexes.
CellLinkage LinkCell(const CandidateState& candidates, const std::filesystem::path& cell_dir,
                     const Params& params);

// A pair that is a candidate in several cells keeps its best evaluation:
// passing first, then larger k, then larger l, then the smaller cell id.
std::vector<PairEvaluation> MergeEvaluations(
    const std::map<CellId, std::vector<PairEvaluation>>& per_cell, const Params& params);

struct LinkOutcome {
  Params effective;  // k and l after optional elbow selection
  std::vector<PairEvaluation> passing;
  LinkResult link;
};
LinkOutcome DecideLinks(const std::vector<PairEvaluation>& merged, const Params& params,
                        bool auto_kl);

// Whole engine over in-memory logs; indexes live under `scratch_dir`.
struct EngineResult {
  CellAssignment assignment;
  std::map<CellId, CandidateState> cell_candidates;
  std::map<UserPair, std::uint32_t> merged_alibis;  // from the cell holding the pair
  std::vector<PairEvaluation> evaluations;
  LinkOutcome outcome;
  StageCounts stages;
  ScanStats stats;
  std::map<std::string, double> stage_seconds;

  std::vector<UserPair> Candidates() const;
};
EngineResult RunEngine(const EventLog& log_i, const EventLog& log_e, const PipelineConfig& config,
                       const std::filesystem::path& scratch_dir);

// Writes `user \t user \t k \t l` rows with raw user ids.
void WriteLinkedTsv(const std::filesystem::path& path, const LinkResult& link);
struct LinkedRow {
  std::string user_i;
  std::string user_e;
  double k_value = 0.0;
  int l_value = 0;
};
std::vector<LinkedRow> ReadLinkedTsv(const std::filesystem::path& path);

void WriteCandidatesTsv(const std::filesystem::path& path, const CandidateState& state);
CandidateState ReadCandidatesTsv(const std::filesystem::path& path);

}  // namespace stlink

#endif  // STLINK_PIPELINE_H_
