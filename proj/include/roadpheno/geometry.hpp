#pragma once

// Planar geometry over one projected metric CRS. All coordinates are meters;
// nothing here reprojects. Bearings are degrees clockwise from north.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "roadpheno/util.hpp"

namespace roadpheno::geo {

struct GeoPoint {
  double x = 0.0;  // easting, m
  double y = 0.0;  // northing, m

  bool operator==(const GeoPoint&) const = default;
};

inline bool finite(const GeoPoint& p) {
  return std::isfinite(p.x) && std::isfinite(p.y);
}

inline double distance(const GeoPoint& a, const GeoPoint& b) {
  return std::hypot(b.x - a.x, b.y - a.y);
}

constexpr double kDegPerRad = 180.0 / M_PI;

// Bearing from prev to next, degrees clockwise from north in [0, 360).
// Coincident points have no direction; the caller falls back to the last
// valid bearing of the track.
inline double bearing(const GeoPoint& prev, const GeoPoint& next) {
  if (!finite(prev) || !finite(next))
    throw input_error("non-finite coordinates in bearing");
  double dx = next.x - prev.x;
  double dy = next.y - prev.y;
  if (dx == 0.0 && dy == 0.0)
    throw input_error("zero-length segment: bearing undefined");
  double deg = std::atan2(dx, dy) * kDegPerRad;
  if (deg < 0.0) deg += 360.0;
  if (deg >= 360.0) deg = 0.0;
  return deg;
}

enum class CameraSide { left, right };

inline std::string to_string(CameraSide side) {
  return side == CameraSide::left ? "left" : "right";
}

inline CameraSide camera_side_from_string(const std::string& s) {
  if (s == "left") return CameraSide::left;
  if (s == "right") return CameraSide::right;
  throw input_error("camera side must be 'left' or 'right', got '" + s + "'");
}

// Move p perpendicular to the driving direction: right of travel is
// heading+90, left is heading-90.
inline GeoPoint transpose_point(const GeoPoint& p, double heading_deg,
                                CameraSide side, double offset_m) {
  if (!finite(p) || !std::isfinite(heading_deg))
    throw input_error("non-finite inputs in transpose_point");
  if (!(offset_m > 0.0))
    throw input_error("transposition offset must be > 0");
  double perp = heading_deg + (side == CameraSide::right ? 90.0 : -90.0);
  double rad = perp / kDegPerRad;
  return {p.x + offset_m * std::sin(rad), p.y + offset_m * std::cos(rad)};
}

struct Ring {
  std::vector<GeoPoint> pts;  // closed: first == last not required
};

// Signed shoelace area; positive for counter-clockwise winding.
inline double signed_area(const Ring& ring) {
  const auto& v = ring.pts;
  if (v.size() < 3) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0, n = v.size(); i < n; ++i) {
    const GeoPoint& a = v[i];
    const GeoPoint& b = v[(i + 1) % n];
    acc += a.x * b.y - b.x * a.y;
  }
  return 0.5 * acc;
}

inline GeoPoint ring_centroid(const Ring& ring) {
  const auto& v = ring.pts;
  double a = signed_area(ring);
  if (a == 0.0) throw input_error("degenerate ring: zero area");
  double cx = 0.0, cy = 0.0;
  for (std::size_t i = 0, n = v.size(); i < n; ++i) {
    const GeoPoint& p = v[i];
    const GeoPoint& q = v[(i + 1) % n];
    double cross = p.x * q.y - q.x * p.y;
    cx += (p.x + q.x) * cross;
    cy += (p.y + q.y) * cross;
  }
  return {cx / (6.0 * a), cy / (6.0 * a)};
}

inline bool on_segment(const GeoPoint& p, const GeoPoint& a, const GeoPoint& b,
                       double eps = 1e-9) {
  double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
  double len = distance(a, b);
  if (len == 0.0) return distance(p, a) <= eps;
  if (std::fabs(cross) > eps * len) return false;
  double dot = (p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y);
  return dot >= -eps * len && dot <= len * len + eps * len;
}

// Ray casting with an explicit on-edge check first, so boundary points are
// classified inside regardless of the crossing parity.
inline bool ring_contains(const Ring& ring, const GeoPoint& p) {
  const auto& v = ring.pts;
  std::size_t n = v.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i)
    if (on_segment(p, v[i], v[(i + 1) % n])) return true;
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    bool crosses = (v[i].y > p.y) != (v[j].y > p.y);
    if (crosses) {
      double x_at =
          v[i].x + (p.y - v[i].y) / (v[j].y - v[i].y) * (v[j].x - v[i].x);
      if (p.x < x_at) inside = !inside;
    }
  }
  return inside;
}

struct BBox {
  double min_x = std::numeric_limits<double>::infinity();
  double min_y = std::numeric_limits<double>::infinity();
  double max_x = -std::numeric_limits<double>::infinity();
  double max_y = -std::numeric_limits<double>::infinity();

  void expand(const GeoPoint& p) {
    min_x = std::min(min_x, p.x);
    min_y = std::min(min_y, p.y);
    max_x = std::max(max_x, p.x);
    max_y = std::max(max_y, p.y);
  }
  bool contains(const GeoPoint& p) const {
    return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y;
  }
};

struct Polygon {
  Ring outer;
  std::vector<Ring> holes;

  BBox bbox() const {
    BBox b;
    for (const auto& p : outer.pts) b.expand(p);
    return b;
  }

  double area() const {
    double a = std::fabs(signed_area(outer));
    for (const auto& h : holes) a -= std::fabs(signed_area(h));
    return a;
  }

  // Boundary counts as inside, for outer ring and hole rims alike.
  bool contains(const GeoPoint& p) const {
    for (const auto& ring : holes) {
      const auto& v = ring.pts;
      for (std::size_t i = 0, n = v.size(); i < n; ++i)
        if (on_segment(p, v[i], v[(i + 1) % n])) return ring_contains(outer, p);
    }
    if (!ring_contains(outer, p)) return false;
    for (const auto& ring : holes)
      if (ring_contains(ring, p)) return false;
    return true;
  }

  // Area-weighted centroid with holes subtracted.
  GeoPoint centroid() const {
    double a_outer = std::fabs(signed_area(outer));
    if (a_outer == 0.0) throw input_error("degenerate polygon: zero area");
    GeoPoint c = ring_centroid(outer);
    double acc_a = a_outer;
    double cx = c.x * a_outer, cy = c.y * a_outer;
    for (const auto& h : holes) {
      double ah = std::fabs(signed_area(h));
      if (ah == 0.0) continue;
      GeoPoint ch = ring_centroid(h);
      cx -= ch.x * ah;
      cy -= ch.y * ah;
      acc_a -= ah;
    }
    if (acc_a <= 0.0) throw input_error("degenerate polygon: holes >= outer");
    return {cx / acc_a, cy / acc_a};
  }
};

struct Parcel {
  std::string parcel_id;
  Polygon polygon;
  std::string declared_crop;  // empty when absent

  void validate() const {
    if (parcel_id.empty()) throw input_error("parcel with empty parcel_id");
    for (const auto& p : polygon.outer.pts)
      if (!finite(p))
        throw input_error("parcel " + parcel_id + ": non-finite coordinate");
    if (polygon.outer.pts.size() < 3)
      throw input_error("parcel " + parcel_id + ": ring has < 3 points");
    if (!(polygon.area() > 0.0))
      throw input_error("parcel " + parcel_id + ": zero area");
  }
};

// Uniform grid over parcel bounding boxes. Read-only after build; lookups
// resolve overlap ties to the smallest-area parcel.
class ParcelIndex {
 public:
  explicit ParcelIndex(std::vector<Parcel> parcels)
      : parcels_(std::move(parcels)) {
    for (const auto& p : parcels_) p.validate();
    boxes_.reserve(parcels_.size());
    double sum_span = 0.0;
    for (const auto& p : parcels_) {
      BBox b = p.polygon.bbox();
      boxes_.push_back(b);
      world_.expand({b.min_x, b.min_y});
      world_.expand({b.max_x, b.max_y});
      sum_span += (b.max_x - b.min_x) + (b.max_y - b.min_y);
    }
    if (parcels_.empty()) return;
    double mean_span = sum_span / (2.0 * static_cast<double>(parcels_.size()));
    cell_ = std::max(mean_span, 1.0);
    nx_ = grid_extent(world_.max_x - world_.min_x);
    ny_ = grid_extent(world_.max_y - world_.min_y);
    cells_.resize(nx_ * ny_);
    for (std::size_t i = 0; i < parcels_.size(); ++i) {
      const BBox& b = boxes_[i];
      for (std::size_t gy = cell_of_y(b.min_y); gy <= cell_of_y(b.max_y); ++gy)
        for (std::size_t gx = cell_of_x(b.min_x); gx <= cell_of_x(b.max_x);
             ++gx)
          cells_[gy * nx_ + gx].push_back(i);
    }
  }

  std::size_t size() const { return parcels_.size(); }
  const Parcel& parcel(std::size_t i) const { return parcels_[i]; }

  const Parcel* find(const std::string& parcel_id) const {
    for (const auto& p : parcels_)
      if (p.parcel_id == parcel_id) return &p;
    return nullptr;
  }

  struct Hit {
    std::size_t index;
    bool overlap;  // more than one parcel contained the point
  };

  std::optional<Hit> locate(const GeoPoint& p) const {
    if (parcels_.empty() || !world_.contains(p)) return std::nullopt;
    const auto& cell = cells_[cell_of_y(p.y) * nx_ + cell_of_x(p.x)];
    std::size_t best = parcels_.size();
    double best_area = 0.0;
    int n_hits = 0;
    for (std::size_t i : cell) {
      if (!boxes_[i].contains(p)) continue;
      if (!parcels_[i].polygon.contains(p)) continue;
      ++n_hits;
      double a = parcels_[i].polygon.area();
      if (best == parcels_.size() || a < best_area ||
          (a == best_area && parcels_[i].parcel_id < parcels_[best].parcel_id))
        best = i, best_area = a;
    }
    if (best == parcels_.size()) return std::nullopt;
    return Hit{best, n_hits > 1};
  }

 private:
  std::size_t grid_extent(double span) const {
    return static_cast<std::size_t>(span / cell_) + 1;
  }
  std::size_t cell_of_x(double x) const {
    double g = (x - world_.min_x) / cell_;
    return std::min(static_cast<std::size_t>(std::max(g, 0.0)), nx_ - 1);
  }
  std::size_t cell_of_y(double y) const {
    double g = (y - world_.min_y) / cell_;
    return std::min(static_cast<std::size_t>(std::max(g, 0.0)), ny_ - 1);
  }

  std::vector<Parcel> parcels_;
  std::vector<BBox> boxes_;
  std::vector<std::vector<std::size_t>> cells_;
  BBox world_;
  double cell_ = 1.0;
  std::size_t nx_ = 1, ny_ = 1;
};

}  // namespace roadpheno::geo
