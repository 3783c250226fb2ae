#ifndef DYNACC_ACCESSIBILITY_HPP
#define DYNACC_ACCESSIBILITY_HPP

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "dynacc/activity.hpp"
#include "dynacc/routing.hpp"
#include "dynacc/zones.hpp"

namespace dynacc {

/// The four cases of the decomposition. Reference holds both the masses and
/// the travel times at their all-day averages; the other three let one or
/// both vary over the day.
enum class Scenario {
    Reference,
    DynamicAccessibility,   // dynamic masses, dynamic times
    DynamicCongestion,      // static masses, dynamic times
    DynamicAttractiveness,  // dynamic masses, static times
};

const char* scenario_name(Scenario s);
Scenario scenario_from_name(const std::string& name);

/// Potential values per (scenario, zone, slot). Reference is slot-invariant
/// but stored expanded so every scenario exports the same way; the per-zone
/// reference vector is kept separately for ratio computations.
struct AccessibilityField {
    TimeGrid grid;
    std::size_t n_zones = 0;
    std::vector<std::string> zone_ids;
    std::map<Scenario, std::vector<double>> values;  // [zone * n_slots + slot]
    std::vector<double> reference;                   // [zone]

    bool has(Scenario s) const { return values.count(s) != 0; }
    double at(Scenario s, std::size_t zone, std::size_t slot) const {
        return values.at(s)[zone * grid.n_slots() + slot];
    }
};

/// Sum over destinations of mass * exp(alpha * cost). Costs are composed
/// door-to-door minutes; NaN marks an unreachable destination, which
/// contributes nothing. Infinite costs and non-finite masses are data
/// corruption, not unreachability, and raise an error.
double potential(const std::vector<double>& masses, const std::vector<double>& costs_min,
                 double alpha);

/// Per-pair mean travel time over the slots where the pair is reachable.
/// Pairs unreachable in every slot stay NaN. Row-major [origin * n + dest].
std::vector<double> average_times(const TravelTimeCube& cube);

/// Evaluates the requested scenarios on an arrival-indexed cube. Cube
/// diagonals already carry the internal times, so composition applies the
/// half-internal-time terms only off the diagonal.
AccessibilityField run_scenarios(const TravelTimeCube& cube, const ActivitySurface& surface,
                                 const ZoneSystem& zones, double alpha,
                                 const std::set<Scenario>& scenarios, std::size_t workers = 1,
                                 RunLog* log = nullptr);

void write_field_csv(const std::string& path, const AccessibilityField& field);

}  // namespace dynacc

#endif
