#include "stlink/experiments.h"

#include "stlink/eval.h"
#include "stlink/pipeline.h"

namespace stlink {
namespace {

struct PointResult {
  std::optional<double> precision;
  RecallResult recall;
  std::size_t linked = 0;
  double seconds_filter = 0.0;
  double seconds_link = 0.0;
};

EventLog BaseLog(const BaseConfig& config) {
  return Ingest(GenerateBaseRecords(config), Side::kI, IngestOptions{}).log;
}

PointResult RunPoint(const EventLog& base, const SynthOutput& syn, const PipelineConfig& config,
                     const std::filesystem::path& scratch) {
  std::filesystem::remove_all(scratch);
  PipelineConfig run = config;
  run.workdir = scratch;
  const EngineResult r = RunEngine(base, syn.log, run, scratch);
  PointResult out;
  out.precision = Precision(r.outcome.link, syn.truth);
  out.recall = Recall(r.outcome.link, syn.truth, syn.log, r.outcome.effective);
  out.linked = r.outcome.link.linked.size();
  out.seconds_filter = r.stage_seconds.at("filter");
  out.seconds_link = r.stage_seconds.at("link");
  std::filesystem::remove_all(scratch);
  return out;
}

std::vector<std::string> QualityRow(double x, const PipelineConfig& config, const PointResult& r) {
  return {FormatNumber(x),
          FormatNumber(config.params.k),
          std::to_string(config.params.l),
          r.precision ? FormatNumber(*r.precision) : "",
          FormatNumber(r.recall.recall),
          FormatNumber(r.recall.recall_all),
          std::to_string(r.linked)};
}

}  // namespace

CurveTable PrecisionVsCheckinProb(const SweepConfig& config, const std::filesystem::path& scratch) {
  CurveTable table{{"p", "k", "l", "precision", "recall", "recall_all", "linked"}, {}};
  const EventLog base = BaseLog(config.base);
  for (double p : config.checkin_probs) {
    SynthConfig synth = config.synth;
    synth.checkin_prob_mean = p;
    const SynthOutput syn = GenerateSynthetic(base, synth);
    for (const auto& [k, l] : config.kl) {
      PipelineConfig run = config.pipeline;
      run.params.k = k;
      run.params.l = l;
      table.rows.push_back(QualityRow(p, run, RunPoint(base, syn, run, scratch)));
    }
  }
  return table;
}

CurveTable RecallVsUsageRatio(const SweepConfig& config, const std::filesystem::path& scratch) {
  CurveTable table{{"f", "k", "l", "precision", "recall", "recall_all", "linked"}, {}};
  const EventLog base = BaseLog(config.base);
  for (double f : config.usage_ratios) {
    SynthConfig synth = config.synth;
    synth.usage_ratio = f;
    const SynthOutput syn = GenerateSynthetic(base, synth);
    table.rows.push_back(
        QualityRow(f, config.pipeline, RunPoint(base, syn, config.pipeline, scratch)));
  }
  return table;
}

CurveTable RuntimeVsDays(const SweepConfig& config, const std::filesystem::path& scratch) {
  CurveTable table{{"days", "events_i", "events_e", "seconds_filter", "seconds_link"}, {}};
  for (int days : config.days) {
    BaseConfig base_config = config.base;
    base_config.days = days;
    const EventLog base = BaseLog(base_config);
    const SynthOutput syn = GenerateSynthetic(base, config.synth);
    const PointResult r = RunPoint(base, syn, config.pipeline, scratch);
    table.rows.push_back({std::to_string(days), std::to_string(base.events.size()),
                          std::to_string(syn.log.events.size()), FormatNumber(r.seconds_filter),
                          FormatNumber(r.seconds_link)});
  }
  return table;
}

void WriteCurves(const SweepConfig& config, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path scratch = out_dir / "scratch";
  const CurveTable precision = PrecisionVsCheckinProb(config, scratch);
  WriteCurveCsv(out_dir / "precision_vs_p.csv", precision.header, precision.rows);
  const CurveTable recall = RecallVsUsageRatio(config, scratch);
  WriteCurveCsv(out_dir / "recall_vs_f.csv", recall.header, recall.rows);
  const CurveTable runtime = RuntimeVsDays(config, scratch);
  WriteCurveCsv(out_dir / "runtime_vs_days.csv", runtime.header, runtime.rows);
  std::filesystem::remove_all(scratch);
}

}  // namespace stlink
