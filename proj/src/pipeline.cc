#include "stlink/pipeline.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <regex>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "json.hpp"
#include "stlink/store.h"

namespace stlink {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double SecondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

constexpr Stage kStages[] = {Stage::kIngest, Stage::kPartition, Stage::kFilter, Stage::kLink,
                             Stage::kEvaluate};

fs::path MarkerPath(const PipelineConfig& config, Stage stage) {
  return config.workdir / (StageName(stage) + ".done");
}

void RequireMarker(const PipelineConfig& config, Stage prerequisite) {
  if (!fs::exists(MarkerPath(config, prerequisite))) {
    throw InputError("stage '" + StageName(prerequisite) + "' has not completed in " +
                     config.workdir.string() + "; run `stlink " + StageName(prerequisite) +
                     "` first");
  }
}

// Prepares the workdir for `stage`: validates the config, echoes it, and
// clears this stage's marker and every downstream one.
void BeginStage(const PipelineConfig& config, Stage stage) {
  config.Validate();
  std::error_code ec;
  fs::create_directories(config.workdir, ec);
  if (ec) throw PipelineError("cannot create workdir " + config.workdir.string());
  std::ofstream echo(config.workdir / "config.txt", std::ios::trunc);
  if (!echo) throw PipelineError("cannot write config echo in " + config.workdir.string());
  echo << config.Serialize();
  bool downstream = false;
  for (Stage s : kStages) {
    if (s == stage) downstream = true;
    if (downstream) fs::remove(MarkerPath(config, s), ec);
  }
}

void FinishStage(const PipelineConfig& config, Stage stage, double seconds) {
  const fs::path timings = config.workdir / "timings.kv";
  std::map<std::string, std::string> entries;
  if (std::ifstream in(timings); in) {
    std::string line;
    while (std::getline(in, line)) {
      const auto eq = line.find('=');
      if (eq != std::string::npos) entries[line.substr(0, eq)] = line.substr(eq + 1);
    }
  }
  entries["seconds_" + StageName(stage)] = FormatNumber(seconds);
  {
    std::ofstream out(timings, std::ios::trunc);
    for (const auto& [key, value] : entries) out << key << '=' << value << '\n';
  }
  std::ofstream marker(MarkerPath(config, stage), std::ios::trunc);
  if (!marker) throw PipelineError("cannot write stage marker for " + StageName(stage));
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw PipelineError("cannot write " + path.string());
  out << text;
  if (!out) throw PipelineError("write failed for " + path.string());
}

json ReadJson(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw PipelineError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw PipelineError("corrupt " + path.string() + ": " + e.what());
  }
}

// Runs fn(0..n-1) on up to `workers` threads; rethrows the first failure.
template <typename Fn>
void ParallelFor(std::size_t n, int workers, Fn fn) {
  const std::size_t threads = std::min<std::size_t>(std::max(1, workers), n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<std::string> SplitTabs(const std::string& line) {
  std::vector<std::string> cols;
  std::size_t begin = 0;
  while (true) {
    const auto tab = line.find('\t', begin);
    cols.push_back(line.substr(begin, tab - begin));
    if (tab == std::string::npos) break;
    begin = tab + 1;
  }
  return cols;
}

std::size_t DistinctUsers(const EventLog& log) {
  std::set<std::string_view> users;
  for (const Event& ev : log.events) users.insert(ev.user);
  return users.size();
}

bool IsCellDirName(const std::string& name) {
  static const std::regex pattern("r[0-3]*");
  return std::regex_match(name, pattern);
}

std::vector<CellId> CellsFromManifest(const json& manifest) {
  std::vector<CellId> cells;
  for (const json& cell : manifest.at("cells")) cells.push_back(cell.at("id").get<std::string>());
  return cells;
}

json StatsJson(const ScanStats& s) {
  return json{{"events_i", s.events_i},
              {"events_e", s.events_e},
              {"steps", s.steps},
              {"comparisons", s.comparisons},
              {"co_occurring_event_pairs", s.co_occurring_event_pairs},
              {"alibi_event_pairs", s.alibi_event_pairs},
              {"admitted", s.admitted},
              {"evicted", s.evicted}};
}

void AddStats(ScanStats* into, const ScanStats& s) {
  into->events_i += s.events_i;
  into->events_e += s.events_e;
  into->steps += s.steps;
  into->comparisons += s.comparisons;
  into->co_occurring_event_pairs += s.co_occurring_event_pairs;
  into->alibi_event_pairs += s.alibi_event_pairs;
  into->admitted += s.admitted;
  into->evicted += s.evicted;
}

void WriteEvaluationsTsv(const fs::path& path, const std::vector<PairEvaluation>& evaluations,
                         const Params& params) {
  std::ostringstream out;
  out << "# user_x\tuser_y\tk_value\tl_value\tmatched_pairs\tpasses\n";
  for (const PairEvaluation& ev : evaluations) {
    out << RawUser(ev.user_i) << '\t' << RawUser(ev.user_e) << '\t' << FormatNumber(ev.k_value)
        << '\t' << ev.l_value << '\t' << ev.matched.size() << '\t'
        << (SatisfiesKl(ev, params) ? 1 : 0) << '\n';
  }
  WriteText(path, out.str());
}

std::vector<PairEvaluation> ReadEvaluationsTsv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw PipelineError("cannot read " + path.string());
  std::vector<PairEvaluation> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const std::vector<std::string> cols = SplitTabs(line);
    if (cols.size() != 6) throw PipelineError("corrupt evaluation row in " + path.string());
    PairEvaluation ev;
    ev.user_i = cols[0];
    ev.user_e = cols[1];
    ev.k_value = ParseNumber(cols[2], "k_value");
    ev.l_value = static_cast<int>(ParseInteger(cols[3], "l_value"));
    out.push_back(std::move(ev));
  }
  return out;
}

StageCounts CountStages(std::uint64_t users_i, std::uint64_t users_e, std::uint64_t spatial,
                        const std::vector<PairEvaluation>& merged, const LinkOutcome& outcome) {
  StageCounts s;
  s.unfiltered = users_i * users_e;
  s.spatial = spatial;
  s.temporal = merged.size();
  s.passing = outcome.passing.size();
  s.linked = outcome.link.linked.size();
  return s;
}

}  // namespace

std::string StageName(Stage stage) {
  switch (stage) {
    case Stage::kIngest:
      return "ingest";
    case Stage::kPartition:
      return "partition";
    case Stage::kFilter:
      return "filter";
    case Stage::kLink:
      return "link";
    case Stage::kEvaluate:
      return "evaluate";
  }
  return "unknown";
}

ScanResult FilterCell(const CellPartition& cell, const Params& params, bool forward_only,
                      const fs::path& cell_dir) {
  UserEventIndexWriter writer_i(cell_dir / "I");
  UserEventIndexWriter writer_e(cell_dir / "E");
  ScanHooks hooks;
  hooks.on_window_exit = [&](const Event& ev, std::uint32_t count) {
    (ev.side == Side::kI ? writer_i : writer_e).Put(ev, count);
  };
  ScanResult forward = ForwardScan(cell.log_i, cell.log_e, params, hooks);
  writer_i.Finalize();
  writer_e.Finalize();
  if (forward_only) return forward;
  ScanResult reverse = ReverseScan(cell.log_i, cell.log_e, std::move(forward.state), params);
  AddStats(&reverse.stats, forward.stats);
  reverse.stats.events_i = forward.stats.events_i;
  reverse.stats.events_e = forward.stats.events_e;
  return reverse;
}

CellLinkage LinkCell(const CandidateState& candidates, const fs::path& cell_dir,
                     const Params& params) {
  const UserEventIndex index_i = UserEventIndex::Open(cell_dir / "I");
  const UserEventIndex index_e = UserEventIndex::Open(cell_dir / "E");
  return EvaluateCandidates(candidates, index_i, index_e, params);
}

std::vector<PairEvaluation> MergeEvaluations(
    const std::map<CellId, std::vector<PairEvaluation>>& per_cell, const Params& params) {
  std::map<UserPair, const PairEvaluation*> best;
  for (const auto& [cell, evaluations] : per_cell) {
    for (const PairEvaluation& ev : evaluations) {
      const PairEvaluation*& slot = best[UserPair{ev.user_i, ev.user_e}];
      if (slot == nullptr) {
        slot = &ev;
        continue;
      }
      // Cells are visited in id order, so only a strictly better one replaces.
      const auto rank = [&](const PairEvaluation& e) {
        return std::make_tuple(SatisfiesKl(e, params), e.k_value, e.l_value);
      };
      if (rank(ev) > rank(*slot)) slot = &ev;
    }
  }
  std::vector<PairEvaluation> merged;
  merged.reserve(best.size());
  for (const auto& [pair, ev] : best) merged.push_back(*ev);
  return merged;
}

LinkOutcome DecideLinks(const std::vector<PairEvaluation>& merged, const Params& params,
                        bool auto_kl) {
  LinkOutcome out;
  out.effective = params;
  if (auto_kl) {
    const KlChoice choice = ChooseKlByElbow(merged);
    out.effective.k = choice.k;
    out.effective.l = choice.l;
  }
  for (const PairEvaluation& ev : merged) {
    if (SatisfiesKl(ev, out.effective)) out.passing.push_back(ev);
  }
  out.link = ResolveAmbiguity(out.passing);
  return out;
}

std::vector<UserPair> EngineResult::Candidates() const {
  std::set<UserPair> all;
  for (const auto& [cell, state] : cell_candidates) {
    for (const auto& [pair, info] : state.candidates) all.insert(pair);
  }
  return {all.begin(), all.end()};
}

EngineResult RunEngine(const EventLog& log_i, const EventLog& log_e, const PipelineConfig& config,
                       const fs::path& scratch_dir) {
  config.params.Validate();
  EngineResult out;
  const Params& params = config.params;

  auto start = Clock::now();
  std::map<CellId, CellPartition> partitions;
  if (!log_i.events.empty() || !log_e.events.empty()) {
    const GridTree tree = BuildGrid(log_i, log_e, params.min_cell_edge);
    const CellCountResult counts = CountUserCells(tree, log_i, log_e, params.strip_fraction);
    out.assignment = DominatingGrids(counts.counts, config.tie_epsilon);
    partitions = PartitionDatasets(log_i, log_e, out.assignment);
  }
  out.stage_seconds["partition"] = SecondsSince(start);

  std::vector<CellId> cells;
  for (const auto& [id, part] : partitions) cells.push_back(id);
  std::vector<ScanResult> scans(cells.size());
  start = Clock::now();
  ParallelFor(cells.size(), config.workers, [&](std::size_t n) {
    scans[n] = FilterCell(partitions.at(cells[n]), params, config.forward_only,
                          scratch_dir / cells[n]);
  });
  out.stage_seconds["filter"] = SecondsSince(start);

  start = Clock::now();
  std::vector<CellLinkage> linkages(cells.size());
  ParallelFor(cells.size(), config.workers, [&](std::size_t n) {
    linkages[n] = LinkCell(scans[n].state, scratch_dir / cells[n], params);
  });
  std::map<CellId, std::vector<PairEvaluation>> per_cell;
  for (std::size_t n = 0; n < cells.size(); ++n) {
    AddStats(&out.stats, scans[n].stats);
    for (const auto& [pair, count] : scans[n].state.alibi_counts) {
      if (scans[n].state.candidates.count(pair)) out.merged_alibis.emplace(pair, count);
    }
    out.cell_candidates[cells[n]] = std::move(scans[n].state);
    per_cell[cells[n]] = std::move(linkages[n].evaluations);
  }
  out.evaluations = MergeEvaluations(per_cell, params);
  out.outcome = DecideLinks(out.evaluations, params, config.auto_kl);
  out.stage_seconds["link"] = SecondsSince(start);

  out.stages = CountStages(DistinctUsers(log_i), DistinctUsers(log_e),
                           CountSpatialPairs(out.assignment), out.evaluations, out.outcome);
  return out;
}

void WriteLinkedTsv(const fs::path& path, const LinkResult& link) {
  std::ostringstream out;
  for (const PairEvaluation& ev : link.linked) {
    out << RawUser(ev.user_i) << '\t' << RawUser(ev.user_e) << '\t' << FormatNumber(ev.k_value)
        << '\t' << ev.l_value << '\n';
  }
  WriteText(path, out.str());
}

std::vector<LinkedRow> ReadLinkedTsv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw PipelineError("cannot read " + path.string());
  std::vector<LinkedRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> cols = SplitTabs(line);
    if (cols.size() != 4) throw PipelineError("corrupt linked row in " + path.string());
    rows.push_back({cols[0], cols[1], ParseNumber(cols[2], "k_value"),
                    static_cast<int>(ParseInteger(cols[3], "l_value"))});
  }
  return rows;
}

void WriteCandidatesTsv(const fs::path& path, const CandidateState& state) {
  std::ostringstream out;
  out << "# user_i\tuser_e\tadmitted_at\tadmitted_step\talibis\n";
  for (const auto& [pair, info] : state.candidates) {
    const auto it = state.alibi_counts.find(pair);
    out << pair.user_i << '\t' << pair.user_e << '\t' << info.admitted_at << '\t'
        << info.admitted_step << '\t' << (it == state.alibi_counts.end() ? 0 : it->second)
        << '\n';
  }
  WriteText(path, out.str());
}

CandidateState ReadCandidatesTsv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw PipelineError("cannot read " + path.string());
  CandidateState state;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const std::vector<std::string> cols = SplitTabs(line);
    if (cols.size() != 5) throw PipelineError("corrupt candidate row in " + path.string());
    const UserPair pair{cols[0], cols[1]};
    Candidate info;
    info.admitted_at = ParseInteger(cols[2], "admitted_at");
    info.admitted_step = static_cast<std::uint64_t>(ParseInteger(cols[3], "admitted_step"));
    state.candidates.emplace(pair, info);
    const auto alibis = ParseInteger(cols[4], "alibis");
    if (alibis > 0) state.alibi_counts[pair] = static_cast<std::uint32_t>(alibis);
  }
  return state;
}

void RunIngest(const PipelineConfig& config) {
  BeginStage(config, Stage::kIngest);
  const auto start = Clock::now();
  if (config.input_i.empty() || config.input_e.empty()) {
    throw InputError("ingest needs both --input-i and --input-e");
  }
  const fs::path dir = config.workdir / "ingest";
  fs::create_directories(dir);
  std::ostringstream report;
  const std::pair<Side, const fs::path*> inputs[] = {{Side::kI, &config.input_i},
                                                     {Side::kE, &config.input_e}};
  for (const auto& [side, path] : inputs) {
    ParsedRecords parsed = ReadRecordsCsv(*path);
    IngestOptions options;
    options.alpha = config.params.alpha;
    options.default_radius = side == Side::kI ? config.default_radius_i : config.default_radius_e;
    IngestResult result = Ingest(parsed.records, side, options);
    for (const Diagnostic& d : parsed.diagnostics) {
      report << path->string() << ':' << d.line << ": " << d.message << '\n';
    }
    for (const Diagnostic& d : result.diagnostics) {
      report << path->string() << ':' << d.line << ": " << d.message << '\n';
    }
    WriteEventLog(dir / (std::string(SideName(side)) + ".tsv"), result.log);
  }
  WriteText(dir / "diagnostics.txt", report.str());
  if (!report.str().empty()) std::cerr << report.str();
  FinishStage(config, Stage::kIngest, SecondsSince(start));
}

void RunPartition(const PipelineConfig& config) {
  RequireMarker(config, Stage::kIngest);
  BeginStage(config, Stage::kPartition);
  const auto start = Clock::now();
  const EventLog log_i = ReadEventLog(config.workdir / "ingest" / "I.tsv");
  const EventLog log_e = ReadEventLog(config.workdir / "ingest" / "E.tsv");

  for (const auto& entry : fs::directory_iterator(config.workdir)) {
    if (entry.is_directory() && IsCellDirName(entry.path().filename().string())) {
      fs::remove_all(entry.path());
    }
  }

  json manifest;
  manifest["users_i"] = DistinctUsers(log_i);
  manifest["users_e"] = DistinctUsers(log_e);
  manifest["min_cell_edge_m"] = config.params.min_cell_edge;
  manifest["strip_fraction"] = config.params.strip_fraction;
  manifest["cells"] = json::array();
  if (log_i.events.empty() && log_e.events.empty()) {
    manifest["outside_events"] = 0;
    manifest["spatial_pairs"] = 0;
  } else {
    const GridTree tree = BuildGrid(log_i, log_e, config.params.min_cell_edge);
    const CellCountResult counts =
        CountUserCells(tree, log_i, log_e, config.params.strip_fraction);
    const CellAssignment assignment = DominatingGrids(counts.counts, config.tie_epsilon);
    const auto partitions = PartitionDatasets(log_i, log_e, assignment);
    manifest["outside_events"] = counts.outside_events;
    manifest["spatial_pairs"] = CountSpatialPairs(assignment);
    manifest["leaf_count"] = tree.leaf_count();
    for (const auto& [id, part] : partitions) {
      const CellBounds b = tree.Bounds(id);
      manifest["cells"].push_back(json{
          {"id", id},
          {"bounds", {b.min_lat, b.min_lon, b.max_lat, b.max_lon}},
          {"edge_m", tree.LeafEdge(id)},
          {"users_i", DistinctUsers(part.log_i)},
          {"users_e", DistinctUsers(part.log_e)},
          {"events_i", part.log_i.events.size()},
          {"events_e", part.log_e.events.size()},
      });
      const fs::path cell_dir = config.workdir / id;
      fs::create_directories(cell_dir);
      WriteEventLog(cell_dir / "I.tsv", part.log_i);
      WriteEventLog(cell_dir / "E.tsv", part.log_e);
    }
  }
  WriteText(config.workdir / "partitions.json", manifest.dump(2) + "\n");
  FinishStage(config, Stage::kPartition, SecondsSince(start));
}

void RunFilter(const PipelineConfig& config) {
  RequireMarker(config, Stage::kPartition);
  BeginStage(config, Stage::kFilter);
  const auto start = Clock::now();
  const std::vector<CellId> cells = CellsFromManifest(ReadJson(config.workdir / "partitions.json"));
  ParallelFor(cells.size(), config.workers, [&](std::size_t n) {
    const fs::path cell_dir = config.workdir / cells[n];
    CellPartition part;
    part.log_i = ReadEventLog(cell_dir / "I.tsv");
    part.log_e = ReadEventLog(cell_dir / "E.tsv");
    const ScanResult result = FilterCell(part, config.params, config.forward_only, cell_dir);
    WriteCandidatesTsv(cell_dir / "candidates.tsv", result.state);
    json stats = StatsJson(result.stats);
    stats["candidates"] = result.state.candidates.size();
    stats["forward_only"] = config.forward_only;
    WriteText(cell_dir / "scan_stats.json", stats.dump(2) + "\n");
  });
  FinishStage(config, Stage::kFilter, SecondsSince(start));
}

void RunLink(const PipelineConfig& config) {
  RequireMarker(config, Stage::kFilter);
  BeginStage(config, Stage::kLink);
  const auto start = Clock::now();
  const json manifest = ReadJson(config.workdir / "partitions.json");
  const std::vector<CellId> cells = CellsFromManifest(manifest);
  std::vector<CellLinkage> linkages(cells.size());
  ParallelFor(cells.size(), config.workers, [&](std::size_t n) {
    const fs::path cell_dir = config.workdir / cells[n];
    linkages[n] = LinkCell(ReadCandidatesTsv(cell_dir / "candidates.tsv"), cell_dir, config.params);
  });
  std::map<CellId, std::vector<PairEvaluation>> per_cell;
  ScanStats stats;
  for (std::size_t n = 0; n < cells.size(); ++n) {
    per_cell[cells[n]] = std::move(linkages[n].evaluations);
    const json cell_stats = ReadJson(config.workdir / cells[n] / "scan_stats.json");
    stats.comparisons += cell_stats.at("comparisons").get<std::uint64_t>();
  }
  const std::vector<PairEvaluation> merged = MergeEvaluations(per_cell, config.params);
  const LinkOutcome outcome = DecideLinks(merged, config.params, config.auto_kl);
  const StageCounts stages = CountStages(
      manifest.at("users_i").get<std::uint64_t>(), manifest.at("users_e").get<std::uint64_t>(),
      manifest.at("spatial_pairs").get<std::uint64_t>(), merged, outcome);

  WriteLinkedTsv(config.workdir / "linked.tsv", outcome.link);
  WriteEvaluationsTsv(config.workdir / "evaluations.tsv", merged, outcome.effective);
  json metrics{{"candidates_unfiltered", stages.unfiltered},
               {"candidates_spatial", stages.spatial},
               {"candidates_temporal", stages.temporal},
               {"pairs_passing", stages.passing},
               {"pairs_linked", stages.linked},
               {"pairs_ambiguous", outcome.link.rejected_ambiguous.size()},
               {"comparisons", stats.comparisons},
               {"k", outcome.effective.k},
               {"l", outcome.effective.l},
               {"auto_kl", config.auto_kl}};
  WriteText(config.workdir / "link_metrics.json", metrics.dump(2) + "\n");
  FinishStage(config, Stage::kLink, SecondsSince(start));
}

MetricsReport RunEvaluate(const PipelineConfig& config) {
  RequireMarker(config, Stage::kLink);
  BeginStage(config, Stage::kEvaluate);
  const auto start = Clock::now();
  const json metrics = ReadJson(config.workdir / "link_metrics.json");
  MetricsReport report;
  report.stages.unfiltered = metrics.at("candidates_unfiltered").get<std::uint64_t>();
  report.stages.spatial = metrics.at("candidates_spatial").get<std::uint64_t>();
  report.stages.temporal = metrics.at("candidates_temporal").get<std::uint64_t>();
  report.stages.passing = metrics.at("pairs_passing").get<std::uint64_t>();
  report.stages.linked = metrics.at("pairs_linked").get<std::uint64_t>();
  report.comparisons = metrics.at("comparisons").get<std::uint64_t>();
  report.kl_histogram = KlDistribution(ReadEvaluationsTsv(config.workdir / "evaluations.tsv"));

  if (!config.truth.empty()) {
    const TruthMap truth = ReadTruthTsv(config.truth);
    LinkResult link;
    for (const LinkedRow& row : ReadLinkedTsv(config.workdir / "linked.tsv")) {
      PairEvaluation ev;
      ev.user_i = row.user_i;
      ev.user_e = row.user_e;
      ev.k_value = row.k_value;
      ev.l_value = row.l_value;
      link.linked.push_back(std::move(ev));
    }
    Params params = config.params;
    params.l = metrics.at("l").get<int>();
    report.precision = Precision(link, truth);
    report.true_positives = TruePositives(link, truth);
    report.recall =
        Recall(link, truth, ReadEventLog(config.workdir / "ingest" / "E.tsv"), params);
  }

  WriteText(config.workdir / "metrics.txt", FormatReportText(report));
  WriteText(config.workdir / "metrics.kv", FormatReportKv(report));
  WriteKlHistogramCsv(config.workdir / "kl_histogram.csv", report.kl_histogram);
  FinishStage(config, Stage::kEvaluate, SecondsSince(start));

  if (std::ifstream in(config.workdir / "timings.kv"); in) {
    std::string line;
    while (std::getline(in, line)) {
      const auto eq = line.find('=');
      if (eq == std::string::npos || line.rfind("seconds_", 0) != 0) continue;
      report.stage_seconds[line.substr(8, eq - 8)] = ParseNumber(line.substr(eq + 1), line);
    }
  }
  return report;
}

MetricsReport RunPipeline(const PipelineConfig& config) {
  RunIngest(config);
  RunPartition(config);
  RunFilter(config);
  RunLink(config);
  return RunEvaluate(config);
}

}  // namespace stlink
