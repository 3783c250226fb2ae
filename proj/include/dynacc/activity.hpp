#ifndef DYNACC_ACTIVITY_HPP
#define DYNACC_ACTIVITY_HPP

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "dynacc/routing.hpp"
#include "dynacc/zones.hpp"

namespace dynacc {

/// One geolocated, timestamped, user-attributed observation, parsed into
/// calendar pieces. Timestamps are local wall time.
struct GeoEvent {
    std::string user_id;
    std::int64_t day = 0;   // days since epoch of the local calendar date
    int weekday = 0;        // 0 = Sunday .. 6 = Saturday
    int tod_s = 0;          // seconds of day
    double x = 0.0;
    double y = 0.0;
};

enum Weekday { kSunday = 0, kMonday, kTuesday, kWednesday, kThursday, kFriday, kSaturday };

/// Reasons rows get dropped during ingestion and zone assignment.
struct RejectsReport {
    std::map<std::string, std::int64_t> counts;
    void add(const std::string& reason) { ++counts[reason]; }
    std::int64_t total() const;
};

/// Normalized attractiveness masses per (zone, slot), raw counts kept
/// alongside. Every slot with observations sums to 100,000.
struct ActivitySurface {
    TimeGrid grid;
    std::size_t n_zones = 0;
    std::vector<double> mass;          // [zone * n_slots + slot]
    std::vector<std::int64_t> raw;     // same layout
    std::vector<std::size_t> zero_slots;

    double mass_at(std::size_t zone, std::size_t slot) const {
        return mass[zone * grid.n_slots() + slot];
    }
    std::int64_t raw_at(std::size_t zone, std::size_t slot) const {
        return raw[zone * grid.n_slots() + slot];
    }
};

constexpr double kMassTotal = 100000.0;

/// Parses `user_id,timestamp_iso8601_local,x,y`. Bad rows are skipped and
/// tallied in the rejects report.
std::vector<GeoEvent> load_events(const std::string& path, RejectsReport* rejects = nullptr);

/// Keeps events on the given weekdays whose time of day falls inside
/// [window.start, window.end).
std::vector<GeoEvent> filter_events(const std::vector<GeoEvent>& events,
                                    const std::set<int>& weekdays, const TimeGrid& window);

/// Distinct (user, calendar day) pairs per (zone, slot), summed over days.
/// A user posting five times in one zone-slot on one day counts once; the
/// same user on two days counts twice. Events outside every zone are
/// dropped into the rejects report.
std::vector<std::int64_t> count_unique_users(const std::vector<GeoEvent>& events,
                                             const ZoneSystem& zones, const TimeGrid& grid,
                                             RejectsReport* rejects = nullptr);

/// Per slot: mass = 100,000 * count / slot total. Slots with no users
/// anywhere stay all-zero and are listed in zero_slots.
ActivitySurface normalize(std::vector<std::int64_t> raw_counts, const TimeGrid& grid,
                          std::size_t n_zones, RunLog* log = nullptr);

/// Per-zone arithmetic mean of the masses over all slots.
std::vector<double> average_surface(const ActivitySurface& surface);

void write_surface_csv(const std::string& path, const ActivitySurface& surface,
                       const ZoneSystem& zones);

void write_rejects_csv(const std::string& path, const RejectsReport& rejects);

}  // namespace dynacc

#endif
