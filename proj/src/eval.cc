#include "stlink/eval.h"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace stlink {
namespace {

std::string FormatDouble(double v) {
  std::array<char, 64> buf;
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

std::string EventPlace(const Region& region, double bin_edge) {
  if (region.place_id) return "id:" + *region.place_id;
  return PlaceBinKey(region.lat, region.lon, bin_edge);
}

}  // namespace

bool IsCorrectLink(const std::string& user_i, const std::string& user_e, const TruthMap& truth) {
  const auto it = truth.find(std::string(RawUser(user_e)));
  return it != truth.end() && it->second == RawUser(user_i);
}

std::optional<double> Precision(const LinkResult& linked, const TruthMap& truth) {
  if (linked.linked.empty()) return std::nullopt;
  return static_cast<double>(TruePositives(linked, truth)) /
         static_cast<double>(linked.linked.size());
}

std::size_t TruePositives(const LinkResult& linked, const TruthMap& truth) {
  std::size_t correct = 0;
  for (const PairEvaluation& ev : linked.linked) {
    if (IsCorrectLink(ev.user_i, ev.user_e, truth)) ++correct;
  }
  return correct;
}

RecallResult Recall(const LinkResult& linked, const TruthMap& truth, const EventLog& events_e,
                    const Params& params) {
  std::map<std::string, std::set<std::string>> places;
  for (const Event& ev : events_e.events) {
    places[std::string(RawUser(ev.user))].insert(EventPlace(ev.region, params.place_bin_edge));
  }
  std::set<std::string> eligible;
  for (const auto& [user, base] : truth) {
    const auto it = places.find(user);
    if (it != places.end() && it->second.size() >= static_cast<std::size_t>(params.l)) {
      eligible.insert(user);
    }
  }
  RecallResult r;
  r.eligible_users = eligible.size();
  r.truth_users = truth.size();
  for (const PairEvaluation& ev : linked.linked) {
    if (!IsCorrectLink(ev.user_i, ev.user_e, truth)) continue;
    ++r.correct;
    if (eligible.count(std::string(RawUser(ev.user_e)))) ++r.correct_eligible;
  }
  r.recall = r.eligible_users ? static_cast<double>(r.correct_eligible) /
                                    static_cast<double>(r.eligible_users)
                              : 0.0;
  r.recall_all =
      r.truth_users ? static_cast<double>(r.correct) / static_cast<double>(r.truth_users) : 0.0;
  return r;
}

KlHistogram KlDistribution(const std::vector<PairEvaluation>& evaluations) {
  KlHistogram h;
  for (const PairEvaluation& ev : evaluations) {
    const auto k = static_cast<std::int64_t>(std::floor(ev.k_value + kWeightTolerance));
    ++h[{k, ev.l_value}];
  }
  return h;
}

std::string FormatReportText(const MetricsReport& report) {
  std::ostringstream out;
  out << "Linkage quality\n";
  out << "  precision            "
      << (report.precision ? FormatDouble(*report.precision) : std::string("undefined")) << '\n';
  out << "  true positives       " << report.true_positives << '\n';
  out << "  recall (eligible)    " << FormatDouble(report.recall.recall) << "  ("
      << report.recall.correct_eligible << " / " << report.recall.eligible_users << ")\n";
  out << "  recall (all users)   " << FormatDouble(report.recall.recall_all) << "  ("
      << report.recall.correct << " / " << report.recall.truth_users << ")\n";
  out << "Candidate pairs per stage\n";
  out << "  no filtering         " << report.stages.unfiltered << '\n';
  out << "  spatial filtering    " << report.stages.spatial << '\n';
  out << "  temporal filtering   " << report.stages.temporal << '\n';
  out << "  k-l satisfied        " << report.stages.passing << '\n';
  out << "  linked               " << report.stages.linked << '\n';
  out << "Event comparisons      " << report.comparisons << '\n';
  if (!report.stage_seconds.empty()) {
    out << "Runtime (s)\n";
    for (const auto& [stage, secs] : report.stage_seconds) {
      out << "  " << stage << std::string(stage.size() < 21 ? 21 - stage.size() : 1, ' ')
          << FormatDouble(secs) << '\n';
    }
  }
  out << "k-l distribution (floor k, l: pairs)\n";
  for (const auto& [bucket, count] : report.kl_histogram) {
    out << "  " << bucket.first << '-' << bucket.second << ": " << count << '\n';
  }
  return out.str();
}

std::string FormatReportKv(const MetricsReport& report) {
  std::ostringstream out;
  out << "precision=" << (report.precision ? FormatDouble(*report.precision) : "undefined")
      << '\n';
  out << "true_positives=" << report.true_positives << '\n';
  out << "recall=" << FormatDouble(report.recall.recall) << '\n';
  out << "eligible_users=" << report.recall.eligible_users << '\n';
  out << "correct_eligible=" << report.recall.correct_eligible << '\n';
  out << "recall_all=" << FormatDouble(report.recall.recall_all) << '\n';
  out << "truth_users=" << report.recall.truth_users << '\n';
  out << "candidates_unfiltered=" << report.stages.unfiltered << '\n';
  out << "candidates_spatial=" << report.stages.spatial << '\n';
  out << "candidates_temporal=" << report.stages.temporal << '\n';
  out << "pairs_passing=" << report.stages.passing << '\n';
  out << "pairs_linked=" << report.stages.linked << '\n';
  out << "comparisons=" << report.comparisons << '\n';
  for (const auto& [stage, secs] : report.stage_seconds) {
    out << "seconds_" << stage << '=' << FormatDouble(secs) << '\n';
  }
  for (const auto& [bucket, count] : report.kl_histogram) {
    out << "kl_" << bucket.first << '_' << bucket.second << '=' << count << '\n';
  }
  return out.str();
}

void WriteTruthTsv(const std::filesystem::path& path, const TruthMap& truth) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw PipelineError("cannot write truth file " + path.string());
  for (const auto& [synthetic, base] : truth) out << synthetic << '\t' << base << '\n';
}

TruthMap ReadTruthTsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open truth file " + path.string());
  TruthMap truth;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": expected two columns");
    }
    truth[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return truth;
}

void WriteCurveCsv(const std::filesystem::path& path, const std::vector<std::string>& header,
                   const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw PipelineError("cannot write " + path.string());
  auto write_row = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
    out << '\n';
  };
  write_row(header);
  for (const auto& row : rows) write_row(row);
}

void WriteKlHistogramCsv(const std::filesystem::path& path, const KlHistogram& histogram) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& [bucket, count] : histogram) {
    rows.push_back({std::to_string(bucket.first), std::to_string(bucket.second),
                    std::to_string(count)});
  }
  WriteCurveCsv(path, {"k", "l", "pairs"}, rows);
}

}  // namespace stlink
