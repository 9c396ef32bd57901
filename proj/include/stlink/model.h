// Domain types and event-pair predicates for spatio-temporal linkage.
//
// Everything in this header is a pure value or a pure function. Events carry
// a disk-shaped region (center + radius); distances are great-circle
// distances on a spherical earth.

#ifndef STLINK_MODEL_H_
#define STLINK_MODEL_H_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace stlink {

inline constexpr double kEarthRadiusMeters = 6371000.0;

// Tolerance used when comparing accumulated pair weights against integer
// thresholds (k, the per-place weight of 1).
inline constexpr double kWeightTolerance = 1e-9;

// Raised for malformed user input (bad config, bad CSV header, ...).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised for failures while a stage is running (I/O, corrupt index, ...).
class PipelineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Side : std::uint8_t { kI = 0, kE = 1 };

constexpr Side Opposite(Side side) {
  return side == Side::kI ? Side::kE : Side::kI;
}

constexpr std::string_view SideName(Side side) {
  return side == Side::kI ? "I" : "E";
}

Side ParseSide(std::string_view name);

struct Region {
  double lat = 0.0;
  double lon = 0.0;
  double radius = 0.0;  // meters
  std::optional<std::string> place_id;

  bool IsValid() const;
  friend bool operator==(const Region&, const Region&) = default;
};

struct Event {
  std::string user;  // side-prefixed, unique across both datasets
  Side side = Side::kI;
  std::int64_t time = 0;  // epoch seconds
  Region region;
  std::uint64_t seq = 0;  // per-ingestion discriminator

  friend bool operator==(const Event&, const Event&) = default;
};

struct Params {
  std::int64_t alpha = 1800;     // seconds
  double lambda = 42.0;          // meters / second
  int alibi_threshold = 0;       // a
  double k = 2.0;
  int l = 2;
  double min_cell_edge = 10000.0;  // meters
  double strip_fraction = 0.125;
  double place_bin_edge = 1000.0;  // meters
  bool weighted = true;

  // Throws InputError naming the first offending field.
  void Validate() const;
};

// Great-circle distance between two lat/lon points, in meters.
double HaversineMeters(double lat1, double lon1, double lat2, double lon2);

// Shortest distance between two disks; zero when they intersect.
double RegionDistance(const Region& a, const Region& b);

bool RegionsIntersect(const Region& a, const Region& b);

bool TemporallyClose(std::int64_t t1, std::int64_t t2, std::int64_t alpha);

// The following require events from opposite sides and throw
// std::invalid_argument otherwise.
bool CoOccurs(const Event& i, const Event& e, const Params& params);
bool RunawayPossible(const Event& i, const Event& e, double lambda);
bool IsAlibi(const Event& i, const Event& e, const Params& params);

// Weight of a co-occurring event pair given the number of distinct
// opposite-side users each event co-occurs with. Both counts must be >= 1.
double PairWeight(std::uint32_t count_i, std::uint32_t count_e);

}  // namespace stlink

#endif  // STLINK_MODEL_H_
