// Pipeline configuration: flat `key = value` files with flag overrides.
//
// Every key doubles as a command-line flag: `alpha_secs` is `--alpha-secs`.

#ifndef STLINK_CONFIG_H_
#define STLINK_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stlink/model.h"

namespace stlink {

struct PipelineConfig {
  Params params;
  bool auto_kl = false;
  bool forward_only = false;
  int workers = 1;
  std::uint64_t seed = 1;
  double default_radius_i = 500.0;
  double default_radius_e = 500.0;
  double tie_epsilon = 0.0;
  std::filesystem::path workdir;
  std::filesystem::path input_i;
  std::filesystem::path input_e;
  std::filesystem::path truth;  // optional ground truth for evaluation

  // Sets one field from its key; throws InputError on an unknown key or a
  // malformed value.
  void Set(std::string_view key, std::string_view value);
  // Throws InputError naming the first invalid field.
  void Validate() const;
  // Canonical `key=value` lines in a fixed key order.
  std::string Serialize() const;
};

// Keys accepted by PipelineConfig::Set, in serialization order.
const std::vector<std::string>& ConfigKeys();
// Keys whose flag takes no value (`--unweighted`).
bool IsSwitchKey(std::string_view key);

// Parses `key = value` lines; `#` starts a comment and '-' in keys becomes
// '_'. Throws InputError with the line number on malformed lines.
std::vector<std::pair<std::string, std::string>> ParseConfigText(std::string_view text);

// Loads `path` (if non-empty) and then applies `overrides` in order. Unknown
// keys throw InputError.
PipelineConfig LoadConfig(const std::filesystem::path& path,
                          const std::vector<std::pair<std::string, std::string>>& overrides);

// Accepts decimals and simple fractions such as "1/8".
double ParseNumber(std::string_view text, std::string_view what);
std::int64_t ParseInteger(std::string_view text, std::string_view what);
bool ParseBool(std::string_view text, std::string_view what);

// Shortest round-trip decimal form.
std::string FormatNumber(double value);

}  // namespace stlink

#endif  // STLINK_CONFIG_H_
