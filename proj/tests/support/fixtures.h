// Shared test inputs: seeded random single-cell instances, hand-built
// fixtures and a scratch-directory helper.

#ifndef STLINK_TESTS_SUPPORT_FIXTURES_H_
#define STLINK_TESTS_SUPPORT_FIXTURES_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "stlink/config.h"
#include "stlink/store.h"
#include "stlink/synth.h"

namespace stlink::testing {

struct InstanceShape {
  int max_users_per_side = 300;
  std::size_t max_events = 10000;
  double area_m = 30000.0;
  std::int64_t span_secs = 2 * 86400;
};

struct Instance {
  std::vector<RawRecord> records_i;
  std::vector<RawRecord> records_e;
  EventLog log_i;
  EventLog log_e;
  TruthMap truth;  // E raw id -> I raw id for users that shadow each other
};

// Random instance inside a small area: a pool of towers, I users moving
// between a few favorite towers, E users that either shadow an I user or
// move independently. Times sit on a coarse grid so alibis are common.
Instance RandomInstance(std::uint64_t seed, const InstanceShape& shape = {});

// Alibi at t=100 (I and E users far apart), co-occurrence at t=5000.
Instance ReverseScanFixture();

// Five events around one place: I1 co-occurs with E1 and E2; E1 co-occurs
// with I1, I2 and I3. Pair (I1, E1) then carries weight 1/(2 * 3).
Instance WeightFixture();

Instance FromRecords(std::vector<RawRecord> records_i, std::vector<RawRecord> records_e);

RawRecord Record(std::string user, std::int64_t time, double lat, double lon, double radius,
                 std::string place_id = "");

// Fresh empty directory under the system temp dir, removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag);
  ~ScratchDir();
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

void WriteCsv(const std::filesystem::path& path, const std::vector<RawRecord>& records);

// Config that keeps any test instance in one grid cell.
PipelineConfig SingleCellConfig(const std::filesystem::path& workdir);

}  // namespace stlink::testing

#endif  // STLINK_TESTS_SUPPORT_FIXTURES_H_
