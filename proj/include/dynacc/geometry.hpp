#ifndef DYNACC_GEOMETRY_HPP
#define DYNACC_GEOMETRY_HPP

#include <string>
#include <vector>

namespace dynacc {

/// Planar point in a projected CRS, meters.
struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Open ring: consecutive vertices, last edge closes back to the first.
using Ring = std::vector<Point>;

/// One outer ring plus optional holes.
struct PolygonPart {
    Ring outer;
    std::vector<Ring> holes;
};

/// Polygon or MultiPolygon geometry.
struct Geometry {
    std::vector<PolygonPart> parts;
};

struct BBox {
    double min_x = 0, min_y = 0, max_x = 0, max_y = 0;
    bool contains(Point p) const {
        return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y;
    }
};

double ring_signed_area(const Ring& ring);

/// Even-odd containment over all rings (outer boundaries and holes alike).
bool contains(const Geometry& g, Point p);

BBox bounding_box(const Geometry& g);

/// Area-weighted centroid; holes subtract.
Point centroid(const Geometry& g);

/// A point guaranteed to lie inside the geometry. Falls back from the
/// centroid to a midpoint of the widest interior span on a horizontal scanline.
Point interior_point(const Geometry& g);

/// Throws Error naming `label` if a ring is degenerate, non-finite,
/// zero-area, or self-intersecting.
void validate_geometry(const Geometry& g, const std::string& label);

}  // namespace dynacc

#endif
