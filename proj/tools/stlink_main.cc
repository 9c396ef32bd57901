// stlink: spatio-temporal user linkage pipeline.

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stlink/config.h"
#include "stlink/eval.h"
#include "stlink/experiments.h"
#include "stlink/pipeline.h"
#include "stlink/store.h"
#include "stlink/synth.h"

namespace {

using stlink::InputError;
using stlink::PipelineError;

std::string FlagName(const std::string& key) {
  std::string flag = "--" + key;
  for (char& c : flag) {
    if (c == '_') c = '-';
  }
  return flag;
}

// Every config key as a flag; values are kept as text and applied over the
// config file in key order.
struct ConfigFlags {
  std::string config_path;
  std::map<std::string, std::string> values;
  std::map<std::string, bool> switches;

  void Attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "key = value config file");
    for (const std::string& key : stlink::ConfigKeys()) {
      if (stlink::IsSwitchKey(key)) {
        cmd->add_flag(FlagName(key), switches[key]);
      } else {
        cmd->add_option(FlagName(key), values[key]);
      }
    }
  }

  stlink::PipelineConfig Load(CLI::App* cmd) const {
    std::vector<std::pair<std::string, std::string>> overrides;
    for (const std::string& key : stlink::ConfigKeys()) {
      if (cmd->count(FlagName(key)) == 0) continue;
      overrides.emplace_back(key, stlink::IsSwitchKey(key) ? "true" : values.at(key));
    }
    return stlink::LoadConfig(config_path, overrides);
  }
};

stlink::EventLog LoadCsvLog(const std::string& path, stlink::Side side, double radius,
                            std::int64_t alpha) {
  stlink::ParsedRecords parsed = stlink::ReadRecordsCsv(path);
  stlink::IngestOptions options;
  options.default_radius = radius;
  options.alpha = alpha;
  stlink::IngestResult result = stlink::Ingest(parsed.records, side, options);
  for (const auto& d : parsed.diagnostics) std::cerr << path << ':' << d.line << ": " << d.message << '\n';
  for (const auto& d : result.diagnostics) std::cerr << path << ':' << d.line << ": " << d.message << '\n';
  return std::move(result.log);
}

void WriteCsvFile(const std::string& path, const std::vector<stlink::RawRecord>& records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw PipelineError("cannot write " + path);
  stlink::WriteRecordsCsv(out, records);
  if (!out) throw PipelineError("write failed for " + path);
}

int Run(int argc, char** argv) {
  CLI::App app{"Spatio-temporal user linkage across two location datasets"};
  app.require_subcommand(1);

  struct StageCommand {
    CLI::App* cmd;
    ConfigFlags flags;
  };
  std::map<std::string, StageCommand> stages;
  const std::vector<std::pair<std::string, std::string>> stage_help = {
      {"ingest", "parse both input CSVs into sorted event logs"},
      {"partition", "build the grid and split users by dominating cell"},
      {"filter", "forward and reverse window scans per cell"},
      {"link", "k-l evaluation, ambiguity removal, linked pairs"},
      {"evaluate", "metrics against optional ground truth"},
      {"pipeline", "run every stage in order"},
  };
  for (const auto& [name, help] : stage_help) {
    StageCommand& sc = stages[name];
    sc.cmd = app.add_subcommand(name, help);
    sc.flags.Attach(sc.cmd);
  }

  stlink::SynthConfig synth;
  std::string gen_base;
  std::string gen_out;
  std::string gen_truth;
  std::optional<double> gen_stddev;
  double gen_radius = 500.0;
  CLI::App* generate = app.add_subcommand("generate", "derive a synthetic E dataset from a base CSV");
  generate->add_option("--base", gen_base, "base dataset CSV")->required();
  generate->add_option("--out", gen_out, "synthetic CSV to write")->required();
  generate->add_option("--truth-out", gen_truth, "ground truth TSV to write")->required();
  generate->add_option("--usage-ratio", synth.usage_ratio, "fraction f of base users");
  generate->add_option("--checkin-prob", synth.checkin_prob_mean, "mean check-in probability p");
  generate->add_option("--checkin-stddev", gen_stddev, "stddev of p (default p/4)");
  generate->add_option("--jitter-secs", synth.jitter_window, "time jitter either side");
  generate->add_option("--seed", synth.seed, "random seed");
  generate->add_option("--location-noise-prob", synth.location_noise_prob);
  generate->add_option("--location-noise-m", synth.location_noise_m);
  generate->add_option("--default-radius-m", gen_radius, "radius for base rows without one");

  stlink::BaseConfig base;
  std::string base_out;
  CLI::App* generate_base =
      app.add_subcommand("generate-base", "write a call-record style base dataset");
  generate_base->add_option("--out", base_out, "CSV to write")->required();
  generate_base->add_option("--users", base.users);
  generate_base->add_option("--days", base.days);
  generate_base->add_option("--events-per-day", base.events_per_day);
  generate_base->add_option("--towers", base.towers);
  generate_base->add_option("--area-m", base.area_m);
  generate_base->add_option("--tower-radius-m", base.tower_radius);
  generate_base->add_option("--seed", base.seed);

  ConfigFlags oracle_flags;
  std::string oracle_out;
  CLI::App* oracle = app.add_subcommand("oracle", "brute-force reference linkage (small inputs)");
  oracle_flags.Attach(oracle);
  oracle->add_option("--out", oracle_out, "linked TSV to write")->required();

  ConfigFlags curve_flags;
  stlink::SweepConfig sweep;
  std::string curves_out;
  CLI::App* curves =
      app.add_subcommand("curves", "synthetic sweeps written as CSV curves for plotting");
  curve_flags.Attach(curves);
  curves->add_option("--out-dir", curves_out, "directory for the CSV files")->required();
  curves->add_option("--users", sweep.base.users, "base users");
  curves->add_option("--events-per-day", sweep.base.events_per_day);
  curves->add_option("--base-days", sweep.base.days, "days for the quality sweeps");
  curves->add_option("--base-seed", sweep.base.seed);
  curves->add_option("--synth-seed", sweep.synth.seed);
  curves->add_option("--usage-ratio", sweep.synth.usage_ratio, "f used by the p and days sweeps");
  curves->add_option("--checkin-prob", sweep.synth.checkin_prob_mean,
                     "p used by the f and days sweeps");
  curves->add_option("--probs", sweep.checkin_probs, "p values")->delimiter(',');
  curves->add_option("--ratios", sweep.usage_ratios, "f values")->delimiter(',');
  curves->add_option("--days", sweep.days, "dataset lengths in days")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  for (auto& [name, sc] : stages) {
    if (!sc.cmd->parsed()) continue;
    const stlink::PipelineConfig config = sc.flags.Load(sc.cmd);
    if (name == "ingest") stlink::RunIngest(config);
    if (name == "partition") stlink::RunPartition(config);
    if (name == "filter") stlink::RunFilter(config);
    if (name == "link") stlink::RunLink(config);
    if (name == "evaluate" || name == "pipeline") {
      const stlink::MetricsReport report =
          name == "pipeline" ? stlink::RunPipeline(config) : stlink::RunEvaluate(config);
      std::cout << stlink::FormatReportText(report);
    }
    return 0;
  }

  if (generate->parsed()) {
    synth.checkin_prob_stddev = gen_stddev;
    const stlink::EventLog log = LoadCsvLog(gen_base, stlink::Side::kI, gen_radius, 1800);
    const stlink::SynthOutput out = stlink::GenerateSynthetic(log, synth);
    WriteCsvFile(gen_out, out.records);
    stlink::WriteTruthTsv(gen_truth, out.truth);
    std::cout << "synthetic users " << out.truth.size() << ", events " << out.records.size()
              << '\n';
    return 0;
  }
  if (generate_base->parsed()) {
    const std::vector<stlink::RawRecord> records = stlink::GenerateBaseRecords(base);
    WriteCsvFile(base_out, records);
    std::cout << "base events " << records.size() << '\n';
    return 0;
  }
  if (curves->parsed()) {
    sweep.pipeline = curve_flags.Load(curves);
    stlink::WriteCurves(sweep, curves_out);
    std::cout << "wrote precision_vs_p.csv, recall_vs_f.csv, runtime_vs_days.csv to "
              << curves_out << '\n';
    return 0;
  }

  if (oracle->parsed()) {
    const stlink::PipelineConfig config = oracle_flags.Load(oracle);
    const stlink::EventLog log_i = LoadCsvLog(config.input_i.string(), stlink::Side::kI,
                                              config.default_radius_i, config.params.alpha);
    const stlink::EventLog log_e = LoadCsvLog(config.input_e.string(), stlink::Side::kE,
                                              config.default_radius_e, config.params.alpha);
    const stlink::OracleResult result = stlink::OracleLink(log_i, log_e, config.params);
    stlink::WriteLinkedTsv(oracle_out, result.link);
    std::cout << "candidates " << result.candidates.size() << ", linked "
              << result.link.linked.size() << '\n';
    return 0;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return Run(argc, argv);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return 2;
  }
}
