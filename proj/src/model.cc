#include "stlink/model.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace stlink {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

void RequireOppositeSides(const Event& i, const Event& e) {
  if (i.side == e.side) {
    throw std::invalid_argument("event pair predicates need events from both sides (got two " +
                                std::string(SideName(i.side)) + " events)");
  }
}

}  // namespace

Side ParseSide(std::string_view name) {
  if (name == "I" || name == "i") return Side::kI;
  if (name == "E" || name == "e") return Side::kE;
  throw InputError("unknown dataset side '" + std::string(name) + "'");
}

bool Region::IsValid() const {
  return std::isfinite(lat) && std::isfinite(lon) && std::isfinite(radius) && lat >= -90.0 &&
         lat <= 90.0 && lon >= -180.0 && lon <= 180.0 && radius >= 0.0;
}

void Params::Validate() const {
  if (alpha <= 0) throw InputError("alpha-secs must be > 0");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InputError("lambda-mps must be > 0");
  if (alibi_threshold < 0) throw InputError("alibi-threshold must be >= 0");
  if (!(k > 0.0) || !std::isfinite(k)) throw InputError("k must be > 0");
  if (l < 1) throw InputError("l must be >= 1");
  if (k + kWeightTolerance < static_cast<double>(l)) throw InputError("k must be >= l");
  if (!(min_cell_edge > 0.0) || !std::isfinite(min_cell_edge)) {
    throw InputError("min-cell-edge-m must be > 0");
  }
  if (!(strip_fraction > 0.0 && strip_fraction < 0.5)) {
    throw InputError("strip-fraction must be in (0, 1/2)");
  }
  if (!(place_bin_edge > 0.0) || !std::isfinite(place_bin_edge)) {
    throw InputError("place-bin-edge-m must be > 0");
  }
}

double HaversineMeters(double lat1, double lon1, double lat2, double lon2) {
  const double phi1 = lat1 * kDegToRad;
  const double phi2 = lat2 * kDegToRad;
  const double dphi = (lat2 - lat1) * kDegToRad;
  const double dlambda = (lon2 - lon1) * kDegToRad;
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  h = std::min(1.0, std::max(0.0, h));
  return 2.0 * kEarthRadiusMeters * std::asin(std::sqrt(h));
}

double RegionDistance(const Region& a, const Region& b) {
  const double centers = HaversineMeters(a.lat, a.lon, b.lat, b.lon);
  return std::max(0.0, centers - (a.radius + b.radius));
}

bool RegionsIntersect(const Region& a, const Region& b) { return RegionDistance(a, b) == 0.0; }

bool TemporallyClose(std::int64_t t1, std::int64_t t2, std::int64_t alpha) {
  const std::int64_t dt = t1 > t2 ? t1 - t2 : t2 - t1;
  return dt <= alpha;
}

bool CoOccurs(const Event& i, const Event& e, const Params& params) {
  RequireOppositeSides(i, e);
  return TemporallyClose(i.time, e.time, params.alpha) && RegionsIntersect(i.region, e.region);
}

bool RunawayPossible(const Event& i, const Event& e, double lambda) {
  RequireOppositeSides(i, e);
  const std::int64_t dt = i.time > e.time ? i.time - e.time : e.time - i.time;
  return RegionDistance(i.region, e.region) <= lambda * static_cast<double>(dt);
}

bool IsAlibi(const Event& i, const Event& e, const Params& params) {
  RequireOppositeSides(i, e);
  if (!TemporallyClose(i.time, e.time, params.alpha)) return false;
  const double distance = RegionDistance(i.region, e.region);
  if (distance == 0.0) return false;
  const std::int64_t dt = i.time > e.time ? i.time - e.time : e.time - i.time;
  return distance > params.lambda * static_cast<double>(dt);
}

double PairWeight(std::uint32_t count_i, std::uint32_t count_e) {
  if (count_i == 0 || count_e == 0) {
    throw std::invalid_argument("pair weight needs match counts >= 1");
  }
  return 1.0 / (static_cast<double>(count_i) * static_cast<double>(count_e));
}

}  // namespace stlink
