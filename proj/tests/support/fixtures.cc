#include "support/fixtures.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include <unistd.h>

namespace stlink::testing {
namespace {

constexpr double kMetersPerDegree = kEarthRadiusMeters * std::numbers::pi / 180.0;
constexpr double kBaseLat = 45.0;
constexpr double kBaseLon = 7.0;

struct Point {
  double lat;
  double lon;
};

Point Offset(double x, double y) {
  return {kBaseLat + y / kMetersPerDegree,
          kBaseLon + x / (kMetersPerDegree * std::cos(kBaseLat * std::numbers::pi / 180.0))};
}

}  // namespace

RawRecord Record(std::string user, std::int64_t time, double lat, double lon, double radius,
                 std::string place_id) {
  RawRecord r;
  r.user = std::move(user);
  r.time = time;
  r.lat = lat;
  r.lon = lon;
  r.radius = radius;
  if (!place_id.empty()) r.place_id = std::move(place_id);
  return r;
}

Instance FromRecords(std::vector<RawRecord> records_i, std::vector<RawRecord> records_e) {
  Instance inst;
  inst.records_i = std::move(records_i);
  inst.records_e = std::move(records_e);
  inst.log_i = Ingest(inst.records_i, Side::kI, {}).log;
  inst.log_e = Ingest(inst.records_e, Side::kE, {}).log;
  return inst;
}

Instance RandomInstance(std::uint64_t seed, const InstanceShape& shape) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  const int towers = uniform_int(8, 40);
  std::vector<Point> tower_at;
  for (int t = 0; t < towers; ++t) {
    tower_at.push_back(Offset((unit(rng) - 0.5) * shape.area_m, (unit(rng) - 0.5) * shape.area_m));
  }
  const int users_i = uniform_int(2, shape.max_users_per_side);
  const int users_e = uniform_int(2, shape.max_users_per_side);
  const std::size_t budget = std::uniform_int_distribution<std::size_t>(
      static_cast<std::size_t>(users_i + users_e), shape.max_events)(rng);
  const double per_user = static_cast<double>(budget) / (users_i + users_e);
  const std::int64_t grid = std::vector<std::int64_t>{1, 30, 60, 300}[uniform_int(0, 3)];
  const double radius_lo = 50.0 + unit(rng) * 300.0;
  const double radius_hi = radius_lo + unit(rng) * 700.0;
  const double no_place_prob = unit(rng) * 0.5;

  auto snap = [&](std::int64_t t) { return std::max<std::int64_t>(0, t / grid * grid); };
  auto make_event = [&](const std::string& user, std::int64_t time, int tower) {
    const Point& p = tower_at[tower];
    const double jitter = unit(rng) * 200.0;
    const double bearing = unit(rng) * 2.0 * std::numbers::pi;
    const double lat = p.lat + jitter * std::cos(bearing) / kMetersPerDegree;
    const double lon =
        p.lon + jitter * std::sin(bearing) /
                    (kMetersPerDegree * std::cos(kBaseLat * std::numbers::pi / 180.0));
    const double radius = radius_lo + unit(rng) * (radius_hi - radius_lo);
    return Record(user, time, lat, lon, radius,
                  unit(rng) < no_place_prob ? "" : "t" + std::to_string(tower));
  };

  struct Trail {
    std::vector<std::pair<std::int64_t, int>> visits;
  };
  std::vector<Trail> trails(users_i);
  std::vector<RawRecord> records_i;
  std::vector<RawRecord> records_e;
  std::poisson_distribution<int> count_dist(std::max(1.0, per_user));
  for (int u = 0; u < users_i; ++u) {
    std::vector<int> favorites;
    for (int f = 0; f < 3; ++f) favorites.push_back(uniform_int(0, towers - 1));
    const int n = std::max(1, count_dist(rng));
    for (int e = 0; e < n; ++e) {
      const std::int64_t t = snap(static_cast<std::int64_t>(unit(rng) * shape.span_secs));
      const int tower = unit(rng) < 0.8 ? favorites[uniform_int(0, 2)] : uniform_int(0, towers - 1);
      trails[u].visits.emplace_back(t, tower);
      records_i.push_back(make_event("i" + std::to_string(u), t, tower));
    }
  }

  Instance inst;
  const double shadow_prob = unit(rng);
  for (int v = 0; v < users_e; ++v) {
    const std::string user = "e" + std::to_string(v);
    if (unit(rng) < shadow_prob) {
      const int source = uniform_int(0, users_i - 1);
      inst.truth[user] = "i" + std::to_string(source);
      const double keep = 0.2 + unit(rng) * 0.8;
      bool any = false;
      for (const auto& [t, tower] : trails[source].visits) {
        if (unit(rng) >= keep) continue;
        const std::int64_t shifted =
            snap(t + static_cast<std::int64_t>((unit(rng) - 0.5) * 1800.0));
        records_e.push_back(make_event(user, shifted, tower));
        any = true;
      }
      if (any) continue;
      inst.truth.erase(user);
    }
    const int n = std::max(1, count_dist(rng));
    for (int e = 0; e < n; ++e) {
      const std::int64_t t = snap(static_cast<std::int64_t>(unit(rng) * shape.span_secs));
      records_e.push_back(make_event(user, t, uniform_int(0, towers - 1)));
    }
  }
  // Trim to the event budget from the end of each list.
  while (records_i.size() + records_e.size() > shape.max_events) {
    if (records_i.size() > records_e.size()) {
      records_i.pop_back();
    } else {
      records_e.pop_back();
    }
  }
  Instance built = FromRecords(std::move(records_i), std::move(records_e));
  built.truth = std::move(inst.truth);
  return built;
}

Instance ReverseScanFixture() {
  const Point home = Offset(0.0, 0.0);
  const Point far = Offset(50000.0, 0.0);
  return FromRecords(
      {Record("alice", 100, home.lat, home.lon, 100.0), Record("alice", 5000, home.lat, home.lon, 100.0)},
      {Record("bob", 100, far.lat, far.lon, 100.0), Record("bob", 5000, home.lat, home.lon, 100.0)});
}

Instance WeightFixture() {
  const Point p = Offset(0.0, 0.0);
  const Point near = Offset(150.0, 0.0);
  const Point east = Offset(-150.0, 0.0);
  return FromRecords(
      {Record("i1", 1000, p.lat, p.lon, 100.0), Record("i2", 1000, near.lat, near.lon, 100.0),
       Record("i3", 1000, east.lat, east.lon, 100.0)},
      {Record("e1", 1000, p.lat, p.lon, 100.0), Record("e2", 1000, near.lat, near.lon, 60.0)});
}

ScratchDir::ScratchDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("stlink-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

ScratchDir::~ScratchDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

void WriteCsv(const std::filesystem::path& path, const std::vector<RawRecord>& records) {
  std::ofstream out(path, std::ios::trunc);
  WriteRecordsCsv(out, records);
}

PipelineConfig SingleCellConfig(const std::filesystem::path& workdir) {
  PipelineConfig config;
  config.workdir = workdir;
  config.params.min_cell_edge = 5'000'000.0;
  return config;
}

}  // namespace stlink::testing
