// Synthetic second-service datasets derived from a base dataset, plus a
// small call-record style base generator used by experiments and tests.

#ifndef STLINK_SYNTH_H_
#define STLINK_SYNTH_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stlink/store.h"

namespace stlink {

struct SynthConfig {
  double usage_ratio = 0.5;       // f
  double checkin_prob_mean = 0.1;  // p
  // Standard deviation of the per-user probability; 0.25 * p when unset.
  std::optional<double> checkin_prob_stddev;
  std::int64_t jitter_window = 900;  // seconds either side of the source event
  std::uint64_t seed = 1;

  // Optional location noise: with this probability an emitted event is moved
  // `location_noise_m` meters in a random direction.
  double location_noise_prob = 0.0;
  double location_noise_m = 0.0;

  double stddev() const { return checkin_prob_stddev.value_or(0.25 * checkin_prob_mean); }
  void Validate() const;
};

// Raw synthetic user id -> raw base user id.
using TruthMap = std::map<std::string, std::string>;

struct SynthOutput {
  EventLog log;                    // side E, users prefixed like ingested data
  std::vector<RawRecord> records;  // same events with raw ids, for CSV output
  TruthMap truth;
};

// Picks floor(f * |users|) base users uniformly at random, draws a check-in
// probability per selected user from Normal(p, sigma) clamped to [0, 1], and
// emits one event per base event with that probability, at a uniformly
// jittered time and inside the same region as the source event.
SynthOutput GenerateSynthetic(const EventLog& base, const SynthConfig& config);

constexpr std::string_view kSyntheticUserPrefix = "syn-";

struct BaseConfig {
  int users = 2000;
  int days = 10;
  double events_per_day = 5.0;
  int towers = 600;
  double area_m = 60000.0;
  double center_lat = 41.0;
  double center_lon = 29.0;
  double tower_radius = 1000.0;
  std::int64_t start_time = 1700000000;
  std::uint64_t seed = 7;
};

// Call-record style base data: towers scattered around a dense center, each
// user anchored at a home tower, a work tower and a few nearby haunts.
std::vector<RawRecord> GenerateBaseRecords(const BaseConfig& config);

}  // namespace stlink

#endif  // STLINK_SYNTH_H_
