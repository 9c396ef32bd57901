#include "stlink/synth.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <unordered_map>

#include "stlink/spatial.h"

namespace stlink {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

LatLon Destination(double lat, double lon, double bearing, double distance) {
  const double delta = distance / kEarthRadiusMeters;
  const double phi1 = lat * kDegToRad;
  const double lam1 = lon * kDegToRad;
  const double phi2 = std::asin(std::sin(phi1) * std::cos(delta) +
                                std::cos(phi1) * std::sin(delta) * std::cos(bearing));
  const double lam2 =
      lam1 + std::atan2(std::sin(bearing) * std::sin(delta) * std::cos(phi1),
                        std::cos(delta) - std::sin(phi1) * std::sin(phi2));
  double out_lon = lam2 / kDegToRad;
  if (out_lon > 180.0) out_lon -= 360.0;
  if (out_lon < -180.0) out_lon += 360.0;
  return {phi2 / kDegToRad, out_lon};
}

std::string SyntheticId(std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06zu", n + 1);
  return std::string(kSyntheticUserPrefix) + buf;
}

}  // namespace

void SynthConfig::Validate() const {
  if (!(usage_ratio > 0.0 && usage_ratio <= 1.0)) throw InputError("usage ratio f must be in (0, 1]");
  if (!(checkin_prob_mean >= 0.0 && checkin_prob_mean <= 1.0)) {
    throw InputError("check-in probability p must be in [0, 1]");
  }
  if (!(stddev() >= 0.0)) throw InputError("check-in probability stddev must be >= 0");
  if (jitter_window < 0) throw InputError("jitter window must be >= 0");
  if (!(location_noise_prob >= 0.0 && location_noise_prob <= 1.0)) {
    throw InputError("location noise probability must be in [0, 1]");
  }
  if (!(location_noise_m >= 0.0)) throw InputError("location noise distance must be >= 0");
}

SynthOutput GenerateSynthetic(const EventLog& base, const SynthConfig& config) {
  config.Validate();
  if (base.events.empty()) throw InputError("base dataset is empty");

  std::vector<std::string> users;
  std::unordered_map<std::string, std::vector<const Event*>> by_user;
  for (const Event& ev : base.events) {
    auto& list = by_user[ev.user];
    if (list.empty()) users.push_back(ev.user);
    list.push_back(&ev);
  }
  std::sort(users.begin(), users.end());
  const auto selected_count =
      static_cast<std::size_t>(std::floor(config.usage_ratio * static_cast<double>(users.size())));
  if (selected_count < 1) {
    throw InputError("usage ratio selects no users (f * |users| < 1)");
  }

  std::mt19937_64 rng(config.seed);
  std::shuffle(users.begin(), users.end(), rng);
  users.resize(selected_count);

  std::normal_distribution<double> prob_dist(config.checkin_prob_mean, config.stddev());
  std::uniform_int_distribution<std::int64_t> jitter(-config.jitter_window, config.jitter_window);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SynthOutput out;
  out.log.side = Side::kE;
  std::uint64_t seq = 0;
  for (std::size_t n = 0; n < users.size(); ++n) {
    const std::string fresh = SyntheticId(n);
    const std::string prefixed = PrefixedUser(Side::kE, fresh);
    out.truth.emplace(fresh, std::string(RawUser(users[n])));
    const double p_user =
        config.stddev() > 0.0 ? std::clamp(prob_dist(rng), 0.0, 1.0) : config.checkin_prob_mean;
    for (const Event* src : by_user[users[n]]) {
      if (!(unit(rng) < p_user)) continue;
      Event ev;
      ev.user = prefixed;
      ev.side = Side::kE;
      ev.time = std::max<std::int64_t>(0, src->time + jitter(rng));
      ev.region = src->region;
      if (config.location_noise_prob > 0.0 && unit(rng) < config.location_noise_prob) {
        const LatLon moved = Destination(src->region.lat, src->region.lon,
                                         unit(rng) * 2.0 * std::numbers::pi,
                                         config.location_noise_m);
        ev.region.lat = moved.lat;
        ev.region.lon = moved.lon;
      }
      ev.seq = seq++;
      RawRecord rec;
      rec.user = fresh;
      rec.time = ev.time;
      rec.lat = ev.region.lat;
      rec.lon = ev.region.lon;
      rec.radius = ev.region.radius;
      rec.place_id = ev.region.place_id;
      out.records.push_back(std::move(rec));
      out.log.events.push_back(std::move(ev));
    }
  }
  out.log.record_count = out.log.events.size();
  std::sort(out.log.events.begin(), out.log.events.end(), EventOrder);
  return out;
}

std::vector<RawRecord> GenerateBaseRecords(const BaseConfig& config) {
  if (config.users < 1 || config.days < 1 || config.towers < 1) {
    throw InputError("base generator needs users, days and towers >= 1");
  }
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double meters_per_deg = kEarthRadiusMeters * kDegToRad;
  const double cos_lat = std::cos(config.center_lat * kDegToRad);
  const double half = config.area_m / 2.0;

  struct Tower {
    double x, y;
  };
  std::vector<Tower> towers;
  towers.reserve(config.towers);
  for (int t = 0; t < config.towers; ++t) {
    double x, y;
    if (unit(rng) < 0.6) {
      // Dense core.
      x = std::clamp(gauss(rng) * config.area_m / 8.0, -half, half);
      y = std::clamp(gauss(rng) * config.area_m / 8.0, -half, half);
    } else {
      x = (unit(rng) * 2.0 - 1.0) * half;
      y = (unit(rng) * 2.0 - 1.0) * half;
    }
    towers.push_back({x, y});
  }
  auto nearest_towers = [&](const Tower& from, double max_dist) {
    std::vector<int> out;
    for (int t = 0; t < config.towers; ++t) {
      if (std::hypot(towers[t].x - from.x, towers[t].y - from.y) <= max_dist) out.push_back(t);
    }
    return out;
  };
  std::uniform_int_distribution<int> any_tower(0, config.towers - 1);

  std::vector<RawRecord> out;
  const double mean_events = config.events_per_day * config.days;
  std::poisson_distribution<int> event_count(mean_events);
  for (int u = 0; u < config.users; ++u) {
    const int home = any_tower(rng);
    std::vector<int> near_home = nearest_towers(towers[home], 5000.0);
    std::vector<int> commute = nearest_towers(towers[home], 20000.0);
    const int work = commute[std::uniform_int_distribution<std::size_t>(0, commute.size() - 1)(rng)];
    std::vector<int> haunts;
    for (int h = 0; h < 3; ++h) {
      haunts.push_back(
          near_home[std::uniform_int_distribution<std::size_t>(0, near_home.size() - 1)(rng)]);
    }
    const std::string user = "u" + std::to_string(u);
    const int count = std::max(1, event_count(rng));
    for (int n = 0; n < count; ++n) {
      const int day = std::uniform_int_distribution<int>(0, config.days - 1)(rng);
      const double pick = unit(rng);
      int tower;
      double hour;
      if (pick < 0.45) {
        tower = home;
        hour = unit(rng) < 0.5 ? 18.0 + unit(rng) * 5.0 : 6.0 + unit(rng) * 3.0;
      } else if (pick < 0.8) {
        tower = work;
        hour = 9.0 + unit(rng) * 8.0;
      } else if (pick < 0.97) {
        tower = haunts[std::uniform_int_distribution<int>(0, 2)(rng)];
        hour = 8.0 + unit(rng) * 15.0;
      } else {
        tower = any_tower(rng);
        hour = unit(rng) * 24.0;
      }
      RawRecord rec;
      rec.user = user;
      rec.time = config.start_time + static_cast<std::int64_t>(day) * 86400 +
                 static_cast<std::int64_t>(hour * 3600.0);
      rec.lat = config.center_lat + towers[tower].y / meters_per_deg;
      rec.lon = config.center_lon + towers[tower].x / (meters_per_deg * cos_lat);
      rec.radius = config.tower_radius;
      rec.place_id = "t" + std::to_string(tower);
      out.push_back(std::move(rec));
    }
  }
  return out;
}

}  // namespace stlink
