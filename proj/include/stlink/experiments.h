// Parameter sweeps over synthetic data, written as CSV curves for external
// plotting: precision against check-in probability, recall against usage
// ratio and filter+link time against dataset length.

#ifndef STLINK_EXPERIMENTS_H_
#define STLINK_EXPERIMENTS_H_

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "stlink/config.h"
#include "stlink/synth.h"

namespace stlink {

struct SweepConfig {
  BaseConfig base;
  SynthConfig synth;         // p and f are overridden per sweep point
  PipelineConfig pipeline;   // workdir is ignored; runs use scratch dirs
  std::vector<double> checkin_probs{0.01, 0.02, 0.05, 0.1, 0.2};
  std::vector<double> usage_ratios{0.1, 0.3, 0.5, 0.7, 0.9};
  std::vector<int> days{5, 10, 20, 40};
  std::vector<std::pair<double, int>> kl{{1, 1}, {2, 2}, {3, 3}};
};

struct CurveTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Columns p, k, l, precision, recall, recall_all, linked.
CurveTable PrecisionVsCheckinProb(const SweepConfig& config, const std::filesystem::path& scratch);
// Columns f, k, l, precision, recall, recall_all, linked at the configured k and l.
CurveTable RecallVsUsageRatio(const SweepConfig& config, const std::filesystem::path& scratch);
// Columns days, events_i, events_e, seconds_filter, seconds_link.
CurveTable RuntimeVsDays(const SweepConfig& config, const std::filesystem::path& scratch);

// Writes precision_vs_p.csv, recall_vs_f.csv and runtime_vs_days.csv.
void WriteCurves(const SweepConfig& config, const std::filesystem::path& out_dir);

}  // namespace stlink

#endif  // STLINK_EXPERIMENTS_H_
