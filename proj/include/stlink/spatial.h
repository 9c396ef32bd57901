// Coarse quad-tree partitioning and dominating-grid assignment.
//
// The tree lives in a local equirectangular plane anchored at the center of
// the sample's bounding box, so every cell is a lat/lon rectangle whose edge
// is measured in meters in that plane. The root is a square whose edge is
// min_cell_edge * 2^n, which makes every split leaf exactly
// min_cell_edge * 2^m for some m >= 0.

#ifndef STLINK_SPATIAL_H_
#define STLINK_SPATIAL_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "stlink/model.h"
#include "stlink/store.h"

namespace stlink {

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;
};

struct CellBounds {
  double min_lat = 0.0;
  double min_lon = 0.0;
  double max_lat = 0.0;
  double max_lon = 0.0;
};

// Cell ids are quadrant paths: "r" for the root, then one digit per level
// (0 = south-west, 1 = south-east, 2 = north-west, 3 = north-east).
using CellId = std::string;

class GridTree {
 public:
  // Splits a node while it holds at least one sample point and its children
  // would still be at least `min_cell_edge` wide. Throws std::invalid_argument
  // on an empty sample or a non-positive edge.
  static GridTree Build(const std::vector<LatLon>& sample, double min_cell_edge);

  double min_cell_edge() const { return min_cell_edge_; }
  std::size_t leaf_count() const;
  std::vector<CellId> Leaves() const;

  // Edge length of a leaf in meters.
  double LeafEdge(const CellId& id) const;
  CellBounds Bounds(const CellId& id) const;

  // Leaf containing the point. Points outside the root are clamped onto the
  // nearest boundary leaf; `outside` (if given) reports whether that happened.
  CellId Locate(double lat, double lon, bool* outside = nullptr) const;

  // Home leaf plus every adjacent leaf whose shared border lies within
  // strip_fraction * min_cell_edge of the point. At most four cells; the
  // home cell is always first.
  std::vector<CellId> CellsForPoint(double lat, double lon, double strip_fraction,
                                    bool* outside = nullptr) const;

  std::vector<CellId> CellsForEvent(const Event& ev, double strip_fraction,
                                    bool* outside = nullptr) const {
    return CellsForPoint(ev.region.lat, ev.region.lon, strip_fraction, outside);
  }

 private:
  struct Node {
    double x0 = 0.0;
    double y0 = 0.0;
    double edge = 0.0;
    int child[4] = {-1, -1, -1, -1};
    CellId id;
    bool leaf() const { return child[0] < 0; }
  };

  std::pair<double, double> Project(double lat, double lon) const;
  std::pair<double, double> Unproject(double x, double y) const;
  int LocateNode(double x, double y) const;
  const Node& NodeFor(const CellId& id) const;
  void Split(int node, std::vector<std::pair<double, double>>& points, std::size_t begin,
             std::size_t end);

  double min_cell_edge_ = 0.0;
  double origin_lat_ = 0.0;
  double origin_lon_ = 0.0;
  double cos_origin_ = 1.0;
  std::vector<Node> nodes_;
  std::map<CellId, int> by_id_;
};

GridTree BuildGrid(const EventLog& log_i, const EventLog& log_e, double min_cell_edge);

// True when a point at (x, y) inside a square cell [0, edge)^2 lies within
// `strip` of one of the cell's borders.
bool InBorderStrip(double x, double y, double edge, double strip);

using UserCellCounts = std::map<std::string, std::map<CellId, std::uint64_t>>;
using CellAssignment = std::map<std::string, std::vector<CellId>>;

struct CellCountResult {
  UserCellCounts counts;
  std::size_t outside_events = 0;
};

// First scan: per-user event counts per cell, with border-strip events also
// counted towards their neighboring cells.
CellCountResult CountUserCells(const GridTree& tree, const EventLog& log_i, const EventLog& log_e,
                               double strip_fraction);

// Argmax cell(s) per user; any cell with count >= (1 - tie_epsilon) * max is
// also kept. Users with no counts are absent.
CellAssignment DominatingGrids(const UserCellCounts& counts, double tie_epsilon = 0.0);

struct CellPartition {
  EventLog log_i;
  EventLog log_e;
};

// Second scan: for each cell, every event of every user dominated by it.
std::map<CellId, CellPartition> PartitionDatasets(const EventLog& log_i, const EventLog& log_e,
                                                  const CellAssignment& assignment);

// Number of distinct cross-side user pairs that share a dominating cell.
std::uint64_t CountSpatialPairs(const CellAssignment& assignment);

}  // namespace stlink

#endif  // STLINK_SPATIAL_H_
