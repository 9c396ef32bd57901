#include "stlink/config.h"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace stlink {
namespace {

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double ParsePlainDouble(std::string_view text, std::string_view what) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw InputError(std::string(what) + ": not a number: '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

double ParseNumber(std::string_view text, std::string_view what) {
  text = Trim(text);
  const auto slash = text.find('/');
  double value;
  if (slash == std::string_view::npos) {
    value = ParsePlainDouble(text, what);
  } else {
    const double num = ParsePlainDouble(Trim(text.substr(0, slash)), what);
    const double den = ParsePlainDouble(Trim(text.substr(slash + 1)), what);
    if (den == 0.0) throw InputError(std::string(what) + ": division by zero");
    value = num / den;
  }
  if (!std::isfinite(value)) throw InputError(std::string(what) + ": must be finite");
  return value;
}

std::int64_t ParseInteger(std::string_view text, std::string_view what) {
  text = Trim(text);
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw InputError(std::string(what) + ": not an integer: '" + std::string(text) + "'");
  }
  return value;
}

bool ParseBool(std::string_view text, std::string_view what) {
  text = Trim(text);
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw InputError(std::string(what) + ": expected true or false, got '" + std::string(text) +
                   "'");
}

std::string FormatNumber(double value) {
  std::array<char, 64> buf;
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

const std::vector<std::string>& ConfigKeys() {
  static const std::vector<std::string> keys = {
      "input_i",          "input_e",         "workdir",          "truth",
      "alpha_secs",       "lambda_mps",      "alibi_threshold",  "k",
      "l",                "auto_kl",         "min_cell_edge_m",  "strip_fraction",
      "place_bin_edge_m", "tie_epsilon",     "default_radius_i_m", "default_radius_e_m",
      "unweighted",       "forward_only",    "workers",          "seed",
  };
  return keys;
}

bool IsSwitchKey(std::string_view key) {
  return key == "auto_kl" || key == "unweighted" || key == "forward_only";
}

void PipelineConfig::Set(std::string_view key, std::string_view value) {
  value = Trim(value);
  if (key == "input_i") {
    input_i = std::string(value);
  } else if (key == "input_e") {
    input_e = std::string(value);
  } else if (key == "workdir") {
    workdir = std::string(value);
  } else if (key == "truth") {
    truth = std::string(value);
  } else if (key == "alpha_secs") {
    params.alpha = ParseInteger(value, key);
  } else if (key == "lambda_mps") {
    params.lambda = ParseNumber(value, key);
  } else if (key == "alibi_threshold") {
    const std::int64_t a = ParseInteger(value, key);
    if (a < 0 || a > 1'000'000'000) throw InputError("alibi_threshold must be in [0, 1e9]");
    params.alibi_threshold = static_cast<int>(a);
  } else if (key == "k") {
    params.k = ParseNumber(value, key);
  } else if (key == "l") {
    const std::int64_t l = ParseInteger(value, key);
    if (l < 0 || l > 1'000'000'000) throw InputError("l must be in [0, 1e9]");
    params.l = static_cast<int>(l);
  } else if (key == "auto_kl") {
    auto_kl = ParseBool(value, key);
  } else if (key == "min_cell_edge_m") {
    params.min_cell_edge = ParseNumber(value, key);
  } else if (key == "strip_fraction") {
    params.strip_fraction = ParseNumber(value, key);
  } else if (key == "place_bin_edge_m") {
    params.place_bin_edge = ParseNumber(value, key);
  } else if (key == "tie_epsilon") {
    tie_epsilon = ParseNumber(value, key);
  } else if (key == "default_radius_i_m") {
    default_radius_i = ParseNumber(value, key);
  } else if (key == "default_radius_e_m") {
    default_radius_e = ParseNumber(value, key);
  } else if (key == "unweighted") {
    params.weighted = !ParseBool(value, key);
  } else if (key == "forward_only") {
    forward_only = ParseBool(value, key);
  } else if (key == "workers") {
    const std::int64_t w = ParseInteger(value, key);
    if (w < 1 || w > 1024) throw InputError("workers must be in [1, 1024]");
    workers = static_cast<int>(w);
  } else if (key == "seed") {
    const std::int64_t s = ParseInteger(value, key);
    if (s < 0) throw InputError("seed must be >= 0");
    seed = static_cast<std::uint64_t>(s);
  } else {
    throw InputError("unknown config key '" + std::string(key) + "'");
  }
}

void PipelineConfig::Validate() const {
  params.Validate();
  if (!(tie_epsilon >= 0.0 && tie_epsilon < 1.0)) throw InputError("tie_epsilon must be in [0, 1)");
  if (!(default_radius_i >= 0.0)) throw InputError("default_radius_i_m must be >= 0");
  if (!(default_radius_e >= 0.0)) throw InputError("default_radius_e_m must be >= 0");
  if (workers < 1) throw InputError("workers must be >= 1");
  if (workdir.empty()) throw InputError("workdir is required (--workdir)");
}

std::string PipelineConfig::Serialize() const {
  std::ostringstream out;
  out << "input_i=" << input_i.string() << '\n';
  out << "input_e=" << input_e.string() << '\n';
  out << "workdir=" << workdir.string() << '\n';
  out << "truth=" << truth.string() << '\n';
  out << "alpha_secs=" << params.alpha << '\n';
  out << "lambda_mps=" << FormatNumber(params.lambda) << '\n';
  out << "alibi_threshold=" << params.alibi_threshold << '\n';
  out << "k=" << FormatNumber(params.k) << '\n';
  out << "l=" << params.l << '\n';
  out << "auto_kl=" << (auto_kl ? "true" : "false") << '\n';
  out << "min_cell_edge_m=" << FormatNumber(params.min_cell_edge) << '\n';
  out << "strip_fraction=" << FormatNumber(params.strip_fraction) << '\n';
  out << "place_bin_edge_m=" << FormatNumber(params.place_bin_edge) << '\n';
  out << "tie_epsilon=" << FormatNumber(tie_epsilon) << '\n';
  out << "default_radius_i_m=" << FormatNumber(default_radius_i) << '\n';
  out << "default_radius_e_m=" << FormatNumber(default_radius_e) << '\n';
  out << "unweighted=" << (params.weighted ? "false" : "true") << '\n';
  out << "forward_only=" << (forward_only ? "true" : "false") << '\n';
  out << "workers=" << workers << '\n';
  out << "seed=" << seed << '\n';
  return out.str();
}

std::vector<std::pair<std::string, std::string>> ParseConfigText(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw InputError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key(Trim(line.substr(0, eq)));
    for (char& c : key) {
      if (c == '-') c = '_';
    }
    out.emplace_back(std::move(key), std::string(Trim(line.substr(eq + 1))));
  }
  return out;
}

PipelineConfig LoadConfig(const std::filesystem::path& path,
                          const std::vector<std::pair<std::string, std::string>>& overrides) {
  PipelineConfig config;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    for (const auto& [key, value] : ParseConfigText(buf.str())) {
      try {
        config.Set(key, value);
      } catch (const InputError& e) {
        throw InputError(path.string() + ": " + e.what());
      }
    }
  }
  for (const auto& [key, value] : overrides) config.Set(key, value);
  return config;
}

}  // namespace stlink
