#ifndef DYNACC_ROUTING_HPP
#define DYNACC_ROUTING_HPP

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "dynacc/network.hpp"
#include "dynacc/zones.hpp"

namespace dynacc {

/// Analysis slots: [start, end) split into equal steps. The default covers
/// 07:00 to 24:00 in 15-minute slots, 68 of them.
struct TimeGrid {
    int start_s = 7 * 3600;
    int end_s = 24 * 3600;
    int step_s = 900;

    void validate() const;
    std::size_t n_slots() const { return static_cast<std::size_t>((end_s - start_s) / step_s); }
    double time_at(std::size_t slot) const { return start_s + static_cast<double>(slot) * step_s; }
    std::string label(std::size_t slot) const { return hhmm_label(start_s + static_cast<int>(slot) * step_s); }
    /// Slot containing a time of day, or npos when outside [start, end).
    std::size_t slot_of(int seconds_of_day) const;
    bool operator==(const TimeGrid&) const = default;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

enum class CubeIndexing { ByDeparture, ByArrival };

/// Zone-to-zone travel times in minutes per slot. Slot t means "departing at
/// t" or "arriving at t" depending on the indexing mode. Unreachable pairs
/// carry NaN, never a large stand-in number. Immutable once built.
struct TravelTimeCube {
    TimeGrid grid;
    std::size_t n_zones = 0;
    CubeIndexing indexing = CubeIndexing::ByDeparture;
    std::vector<double> values;  // [(origin * n_zones + dest) * n_slots + slot]

    static double unreachable() { return std::numeric_limits<double>::quiet_NaN(); }
    static bool is_unreachable(double v) { return std::isnan(v); }

    double& at(std::size_t o, std::size_t d, std::size_t slot) {
        return values[(o * n_zones + d) * grid.n_slots() + slot];
    }
    double at(std::size_t o, std::size_t d, std::size_t slot) const {
        return values[(o * n_zones + d) * grid.n_slots() + slot];
    }
};

/// Earliest arrival at every junction when leaving `origin` at
/// `departure_s`, label-setting under the FIFO traverse function.
/// Unreachable junctions hold kUnreachableSeconds.
std::vector<double> shortest_arrivals(const RoadNetwork& net, std::uint32_t origin,
                                      double departure_s);

/// One search per (origin zone, slot); values are centroid-to-centroid
/// network minutes, the diagonal holds each zone's internal time. Searches
/// run concurrently and assemble in fixed zone order, so the result does not
/// depend on the worker count.
TravelTimeCube build_departure_cube(const RoadNetwork& net, const ZoneSystem& zones,
                                    const TimeGrid& grid, int workers = 0,
                                    RunLog* log = nullptr);

/// Regroups a departure-indexed cube by arrival time: per OD pair the
/// (arrival, travel time) samples feed a shape-preserving cubic, evaluated
/// at every grid time. Queries before the first or after the last sampled
/// arrival clamp to that sample's value.
TravelTimeCube regroup_by_arrival(const TravelTimeCube& cube, RunLog* log = nullptr);

void write_cube_csv(const std::string& path, const TravelTimeCube& cube,
                    const ZoneSystem& zones);

}  // namespace dynacc

#endif
