#ifndef DYNACC_ZONES_HPP
#define DYNACC_ZONES_HPP

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dynacc/geometry.hpp"
#include "dynacc/network.hpp"

namespace dynacc {

struct Zone {
    std::string id;
    Geometry geom;
    BBox bbox;
    Point centroid;                            // interior representative point
    std::uint32_t centroid_junction = 0;       // snapped network junction
    std::vector<std::uint32_t> junctions_inside;
    double self_time_min = 0.0;                // C_ii
    std::size_t n_sampled = 0;
};

/// Ordered zone list; the load order fixes all matrix indices.
class ZoneSystem {
public:
    std::vector<Zone> zones;

    std::size_t size() const { return zones.size(); }
    std::size_t index_of(const std::string& id) const;
    bool has(const std::string& id) const { return by_id_.count(id) != 0; }

    /// Zone containing the point, or npos.
    std::size_t locate(Point p) const;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    void rebuild_index();

private:
    std::unordered_map<std::string, std::size_t> by_id_;
};

/// Loads a GeoJSON FeatureCollection of polygons carrying a `zone_id`
/// property, computes centroids and snaps each to its nearest junction.
/// Zones whose snapped junction falls outside the polygon are kept, with a
/// warning.
ZoneSystem load_zones(const std::string& zone_file, const RoadNetwork& net, RunLog* log = nullptr);

/// Mean free-flow travel time (minutes) from a seeded sample of the zone's
/// interior junctions to the zone's centroid junction. The sample takes
/// ceil(fraction * n) junctions, at least one, without replacement, in an
/// order independent of how the node file listed them.
double self_potential_time(const RoadNetwork& net, const Zone& zone, double sample_fraction,
                           std::uint64_t seed, std::size_t* n_sampled = nullptr,
                           RunLog* log = nullptr);

/// Fills self_time_min for every zone. Per-zone seeds derive as
/// seed ^ zone_index so the result is identical for any worker count.
void compute_self_times(ZoneSystem& zs, const RoadNetwork& net, double sample_fraction,
                        std::uint64_t seed, int workers, RunLog* log = nullptr);

/// Door-to-door cost: half of each terminal zone's internal time around the
/// network time. Not applicable to the diagonal; use compose_cost_diag for
/// i == j.
inline double compose_cost(double c_ii, double c_ijt, double c_jj) {
    return 0.5 * c_ii + c_ijt + 0.5 * c_jj;
}

/// Intrazonal composed cost: the internal time itself.
inline double compose_cost_diag(double c_ii) { return c_ii; }

void write_self_times_csv(const std::string& path, const ZoneSystem& zs);

/// Writes the zone polygons as a GeoJSON FeatureCollection with `zone_id`
/// plus one numeric property per (name, per-zone values) pair. Non-finite
/// values serialize as null.
void write_zones_geojson(const std::string& path, const ZoneSystem& zs,
                         const std::vector<std::pair<std::string, std::vector<double>>>& props);

}  // namespace dynacc

#endif
