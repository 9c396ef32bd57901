#include "stlink/spatial.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <stdexcept>
#include <unordered_set>

namespace stlink {
namespace {

constexpr double kMetersPerDegree = kEarthRadiusMeters * std::numbers::pi / 180.0;

}  // namespace

std::pair<double, double> GridTree::Project(double lat, double lon) const {
  return {(lon - origin_lon_) * kMetersPerDegree * cos_origin_,
          (lat - origin_lat_) * kMetersPerDegree};
}

std::pair<double, double> GridTree::Unproject(double x, double y) const {
  return {origin_lat_ + y / kMetersPerDegree,
          origin_lon_ + x / (kMetersPerDegree * cos_origin_)};
}

GridTree GridTree::Build(const std::vector<LatLon>& sample, double min_cell_edge) {
  if (sample.empty()) throw std::invalid_argument("grid sample is empty");
  if (!(min_cell_edge > 0.0)) throw std::invalid_argument("min_cell_edge must be > 0");

  GridTree tree;
  tree.min_cell_edge_ = min_cell_edge;
  double min_lat = 90.0, max_lat = -90.0, min_lon = 180.0, max_lon = -180.0;
  for (const LatLon& p : sample) {
    min_lat = std::min(min_lat, p.lat);
    max_lat = std::max(max_lat, p.lat);
    min_lon = std::min(min_lon, p.lon);
    max_lon = std::max(max_lon, p.lon);
  }
  tree.origin_lat_ = (min_lat + max_lat) / 2.0;
  tree.origin_lon_ = (min_lon + max_lon) / 2.0;
  tree.cos_origin_ = std::max(1e-6, std::cos(tree.origin_lat_ * std::numbers::pi / 180.0));

  std::vector<std::pair<double, double>> points;
  points.reserve(sample.size());
  for (const LatLon& p : sample) points.push_back(tree.Project(p.lat, p.lon));
  auto [x_lo, y_lo] = tree.Project(min_lat, min_lon);
  auto [x_hi, y_hi] = tree.Project(max_lat, max_lon);
  const double extent = std::max(x_hi - x_lo, y_hi - y_lo);
  double edge = min_cell_edge;
  while (edge < extent) edge *= 2.0;

  Node root;
  root.x0 = x_lo;
  root.y0 = y_lo;
  root.edge = edge;
  root.id = "r";
  tree.nodes_.push_back(root);
  tree.Split(0, points, 0, points.size());
  for (int n = 0; n < static_cast<int>(tree.nodes_.size()); ++n) {
    if (tree.nodes_[n].leaf()) tree.by_id_.emplace(tree.nodes_[n].id, n);
  }
  return tree;
}

void GridTree::Split(int node, std::vector<std::pair<double, double>>& points, std::size_t begin,
                     std::size_t end) {
  if (begin == end) return;
  const double edge = nodes_[node].edge;
  if (edge < 2.0 * min_cell_edge_) return;
  const double half = edge / 2.0;
  const double mx = nodes_[node].x0 + half;
  const double my = nodes_[node].y0 + half;
  auto quadrant = [&](const std::pair<double, double>& p) {
    return (p.first >= mx ? 1 : 0) + (p.second >= my ? 2 : 0);
  };
  std::stable_sort(points.begin() + begin, points.begin() + end,
                   [&](const auto& a, const auto& b) { return quadrant(a) < quadrant(b); });
  for (int q = 0; q < 4; ++q) {
    Node child;
    child.x0 = nodes_[node].x0 + ((q & 1) ? half : 0.0);
    child.y0 = nodes_[node].y0 + ((q & 2) ? half : 0.0);
    child.edge = half;
    child.id = nodes_[node].id + static_cast<char>('0' + q);
    nodes_[node].child[q] = static_cast<int>(nodes_.size());
    nodes_.push_back(std::move(child));
  }
  std::size_t lo = begin;
  for (int q = 0; q < 4; ++q) {
    std::size_t hi = lo;
    while (hi < end && quadrant(points[hi]) == q) ++hi;
    Split(nodes_[node].child[q], points, lo, hi);
    lo = hi;
  }
}

std::size_t GridTree::leaf_count() const { return by_id_.size(); }

std::vector<CellId> GridTree::Leaves() const {
  std::vector<CellId> out;
  out.reserve(by_id_.size());
  for (const auto& [id, node] : by_id_) out.push_back(id);
  return out;
}

const GridTree::Node& GridTree::NodeFor(const CellId& id) const {
  const auto it = by_id_.find(id);
  if (it == by_id_.end()) throw std::out_of_range("unknown grid cell " + id);
  return nodes_[it->second];
}

double GridTree::LeafEdge(const CellId& id) const { return NodeFor(id).edge; }

CellBounds GridTree::Bounds(const CellId& id) const {
  const Node& n = NodeFor(id);
  auto [lat0, lon0] = Unproject(n.x0, n.y0);
  auto [lat1, lon1] = Unproject(n.x0 + n.edge, n.y0 + n.edge);
  return {lat0, lon0, lat1, lon1};
}

int GridTree::LocateNode(double x, double y) const {
  int node = 0;
  while (!nodes_[node].leaf()) {
    const Node& n = nodes_[node];
    const double half = n.edge / 2.0;
    const int q = (x >= n.x0 + half ? 1 : 0) + (y >= n.y0 + half ? 2 : 0);
    node = n.child[q];
  }
  return node;
}

CellId GridTree::Locate(double lat, double lon, bool* outside) const {
  return CellsForPoint(lat, lon, 0.0, outside).front();
}

std::vector<CellId> GridTree::CellsForPoint(double lat, double lon, double strip_fraction,
                                            bool* outside) const {
  auto [x, y] = Project(lat, lon);
  const Node& root = nodes_[0];
  const double x_max = root.x0 + root.edge;
  const double y_max = root.y0 + root.edge;
  const bool out = x < root.x0 || y < root.y0 || x > x_max || y > y_max;
  if (outside) *outside = out;
  // The closed upper boundary belongs to the last cell.
  const double inner_x = std::nextafter(x_max, -std::numeric_limits<double>::infinity());
  const double inner_y = std::nextafter(y_max, -std::numeric_limits<double>::infinity());
  x = std::clamp(x, root.x0, inner_x);
  y = std::clamp(y, root.y0, inner_y);

  const int home = LocateNode(x, y);
  std::vector<CellId> cells{nodes_[home].id};
  if (strip_fraction <= 0.0) return cells;

  const Node& h = nodes_[home];
  const double strip = strip_fraction * min_cell_edge_;
  const double eps = 1e-6 * min_cell_edge_;
  const int dx = (x - h.x0 < strip) ? -1 : (h.x0 + h.edge - x < strip ? 1 : 0);
  const int dy = (y - h.y0 < strip) ? -1 : (h.y0 + h.edge - y < strip ? 1 : 0);
  auto probe = [&](int sx, int sy) {
    const double px = sx < 0 ? h.x0 - eps : (sx > 0 ? h.x0 + h.edge + eps : x);
    const double py = sy < 0 ? h.y0 - eps : (sy > 0 ? h.y0 + h.edge + eps : y);
    if (px < root.x0 || py < root.y0 || px >= x_max || py >= y_max) return;
    const CellId& id = nodes_[LocateNode(px, py)].id;
    if (std::find(cells.begin(), cells.end(), id) == cells.end()) cells.push_back(id);
  };
  if (dx != 0) probe(dx, 0);
  if (dy != 0) probe(0, dy);
  if (dx != 0 && dy != 0) probe(dx, dy);
  return cells;
}

GridTree BuildGrid(const EventLog& log_i, const EventLog& log_e, double min_cell_edge) {
  std::vector<LatLon> sample;
  sample.reserve(log_i.events.size() + log_e.events.size());
  for (const EventLog* log : {&log_i, &log_e}) {
    for (const Event& ev : log->events) sample.push_back({ev.region.lat, ev.region.lon});
  }
  return GridTree::Build(sample, min_cell_edge);
}

bool InBorderStrip(double x, double y, double edge, double strip) {
  return x < strip || y < strip || edge - x < strip || edge - y < strip;
}

CellCountResult CountUserCells(const GridTree& tree, const EventLog& log_i, const EventLog& log_e,
                               double strip_fraction) {
  CellCountResult result;
  for (const EventLog* log : {&log_i, &log_e}) {
    for (const Event& ev : log->events) {
      bool outside = false;
      auto& per_user = result.counts[ev.user];
      for (const CellId& cell : tree.CellsForEvent(ev, strip_fraction, &outside)) {
        ++per_user[cell];
      }
      if (outside) ++result.outside_events;
    }
  }
  return result;
}

CellAssignment DominatingGrids(const UserCellCounts& counts, double tie_epsilon) {
  CellAssignment out;
  for (const auto& [user, cells] : counts) {
    std::uint64_t best = 0;
    for (const auto& [cell, count] : cells) best = std::max(best, count);
    if (best == 0) continue;
    const double cutoff = (1.0 - tie_epsilon) * static_cast<double>(best);
    std::vector<CellId> chosen;
    for (const auto& [cell, count] : cells) {
      if (count == best || static_cast<double>(count) >= cutoff) chosen.push_back(cell);
    }
    out.emplace(user, std::move(chosen));
  }
  return out;
}

std::map<CellId, CellPartition> PartitionDatasets(const EventLog& log_i, const EventLog& log_e,
                                                  const CellAssignment& assignment) {
  std::map<CellId, CellPartition> out;
  for (const auto& [user, cells] : assignment) {
    for (const CellId& cell : cells) {
      CellPartition& part = out[cell];
      part.log_i.side = Side::kI;
      part.log_e.side = Side::kE;
    }
  }
  for (const EventLog* log : {&log_i, &log_e}) {
    for (const Event& ev : log->events) {
      const auto it = assignment.find(ev.user);
      if (it == assignment.end()) continue;
      for (const CellId& cell : it->second) {
        CellPartition& part = out[cell];
        (log->side == Side::kI ? part.log_i : part.log_e).events.push_back(ev);
      }
    }
  }
  for (auto& [cell, part] : out) {
    part.log_i.record_count = part.log_i.events.size();
    part.log_e.record_count = part.log_e.events.size();
  }
  return out;
}

std::uint64_t CountSpatialPairs(const CellAssignment& assignment) {
  std::map<CellId, std::vector<const std::string*>> e_users;
  for (const auto& [user, cells] : assignment) {
    if (user.rfind("E:", 0) != 0) continue;
    for (const CellId& cell : cells) e_users[cell].push_back(&user);
  }
  std::uint64_t total = 0;
  for (const auto& [user, cells] : assignment) {
    if (user.rfind("I:", 0) != 0) continue;
    if (cells.size() == 1) {
      const auto it = e_users.find(cells.front());
      if (it != e_users.end()) total += it->second.size();
      continue;
    }
    std::unordered_set<const std::string*> partners;
    for (const CellId& cell : cells) {
      const auto it = e_users.find(cell);
      if (it == e_users.end()) continue;
      partners.insert(it->second.begin(), it->second.end());
    }
    total += partners.size();
  }
  return total;
}

}  // namespace stlink
