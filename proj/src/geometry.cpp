#include "dynacc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dynacc/util.hpp"

namespace dynacc {

namespace {

void for_each_ring(const Geometry& g, const std::function<void(const Ring&)>& fn) {
    for (const auto& part : g.parts) {
        fn(part.outer);
        for (const auto& h : part.holes) fn(h);
    }
}

bool ring_contains(const Ring& ring, Point p, bool& flip) {
    std::size_t n = ring.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point& a = ring[i];
        const Point& b = ring[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            double x_at = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < x_at) flip = !flip;
        }
    }
    return flip;
}

// Proper crossing test between segments ab and cd.
int orient(Point a, Point b, Point c) {
    double v = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    if (v > 0) return 1;
    if (v < 0) return -1;
    return 0;
}

bool segments_cross(Point a, Point b, Point c, Point d) {
    int o1 = orient(a, b, c);
    int o2 = orient(a, b, d);
    int o3 = orient(c, d, a);
    int o4 = orient(c, d, b);
    return o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0;
}

}  // namespace

double ring_signed_area(const Ring& ring) {
    double acc = 0.0;
    std::size_t n = ring.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        acc += ring[j].x * ring[i].y - ring[i].x * ring[j].y;
    }
    return 0.5 * acc;
}

bool contains(const Geometry& g, Point p) {
    bool in = false;
    for_each_ring(g, [&](const Ring& r) { ring_contains(r, p, in); });
    return in;
}

BBox bounding_box(const Geometry& g) {
    BBox box;
    box.min_x = box.min_y = std::numeric_limits<double>::infinity();
    box.max_x = box.max_y = -std::numeric_limits<double>::infinity();
    for_each_ring(g, [&](const Ring& r) {
        for (const Point& p : r) {
            box.min_x = std::min(box.min_x, p.x);
            box.max_x = std::max(box.max_x, p.x);
            box.min_y = std::min(box.min_y, p.y);
            box.max_y = std::max(box.max_y, p.y);
        }
    });
    return box;
}

Point centroid(const Geometry& g) {
    // Signed-area weighting over all rings; holes get negative weight.
    double wsum = 0.0, cx = 0.0, cy = 0.0;
    auto add_ring = [&](const Ring& ring, double sign) {
        double a = std::abs(ring_signed_area(ring)) * sign;
        std::size_t n = ring.size();
        double rx = 0.0, ry = 0.0;
        double a_signed = ring_signed_area(ring);
        if (a_signed == 0.0) return;
        for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
            double cross = ring[j].x * ring[i].y - ring[i].x * ring[j].y;
            rx += (ring[j].x + ring[i].x) * cross;
            ry += (ring[j].y + ring[i].y) * cross;
        }
        rx /= 6.0 * a_signed;
        ry /= 6.0 * a_signed;
        wsum += a;
        cx += rx * a;
        cy += ry * a;
    };
    for (const auto& part : g.parts) {
        add_ring(part.outer, 1.0);
        for (const auto& h : part.holes) add_ring(h, -1.0);
    }
    if (wsum == 0.0) throw Error("degenerate geometry: zero total area");
    return Point{cx / wsum, cy / wsum};
}

Point interior_point(const Geometry& g) {
    Point c = centroid(g);
    if (contains(g, c)) return c;
    BBox box = bounding_box(g);
    // Scan a horizontal line, take the midpoint of the widest inside interval.
    // Nudge the scan line when it hits vertices exactly.
    double y = c.y;
    for (int attempt = 0; attempt < 8; ++attempt) {
        std::vector<double> xs;
        for_each_ring(g, [&](const Ring& r) {
            std::size_t n = r.size();
            for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
                const Point& a = r[i];
                const Point& b = r[j];
                if ((a.y > y) != (b.y > y)) {
                    xs.push_back(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
                }
            }
        });
        std::sort(xs.begin(), xs.end());
        double best_w = -1.0, best_x = c.x;
        for (std::size_t i = 0; i + 1 < xs.size(); i += 2) {
            double w = xs[i + 1] - xs[i];
            if (w > best_w) {
                best_w = w;
                best_x = 0.5 * (xs[i] + xs[i + 1]);
            }
        }
        if (best_w > 0.0) {
            Point p{best_x, y};
            if (contains(g, p)) return p;
        }
        y = box.min_y + (box.max_y - box.min_y) * (0.5 + 0.37 * (attempt + 1)) / 4.0;
    }
    // Degenerate shapes: settle for a vertex.
    return g.parts.front().outer.front();
}

void validate_geometry(const Geometry& g, const std::string& label) {
    if (g.parts.empty()) throw Error("zone " + label + ": empty geometry");
    for_each_ring(g, [&](const Ring& r) {
        if (r.size() < 3) throw Error("zone " + label + ": ring with fewer than 3 vertices");
        for (const Point& p : r) {
            if (!std::isfinite(p.x) || !std::isfinite(p.y))
                throw Error("zone " + label + ": non-finite coordinate");
        }
        if (std::abs(ring_signed_area(r)) <= 0.0)
            throw Error("zone " + label + ": zero-area ring");
        std::size_t n = r.size();
        for (std::size_t i = 0; i < n; ++i) {
            Point a = r[i], b = r[(i + 1) % n];
            for (std::size_t k = i + 1; k < n; ++k) {
                // skip edges sharing a vertex with edge i
                if (k == i || (k + 1) % n == i || k == (i + 1) % n) continue;
                Point c = r[k], d = r[(k + 1) % n];
                if (segments_cross(a, b, c, d))
                    throw Error("zone " + label + ": self-intersecting ring");
            }
        }
    });
}

}  // namespace dynacc
