#include "dynacc/activity.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string_view>
#include <utility>

#include "dynacc/util.hpp"

namespace dynacc {

std::int64_t RejectsReport::total() const {
    std::int64_t t = 0;
    for (const auto& [reason, n] : counts) t += n;
    return t;
}

namespace {

// Accepts YYYY-MM-DD{T or space}HH:MM[:SS]. Returns false on anything else,
// including impossible calendar dates (2013-02-30) and clock fields out of
// range. Trailing zone designators are rejected: the feed is local wall time
// and an offset would mean the producer changed convention.
bool parse_timestamp(const std::string& text, std::int64_t* day, int* weekday, int* tod_s) {
    if (text.size() < 16) return false;
    const char* s = text.c_str();
    auto digits = [&](std::size_t pos, std::size_t n, int* out) {
        int v = 0;
        for (std::size_t i = pos; i < pos + n; ++i) {
            if (s[i] < '0' || s[i] > '9') return false;
            v = v * 10 + (s[i] - '0');
        }
        *out = v;
        return true;
    };
    int y, mo, d, h, mi, sec = 0;
    if (!digits(0, 4, &y) || s[4] != '-' || !digits(5, 2, &mo) || s[7] != '-' ||
        !digits(8, 2, &d))
        return false;
    if (s[10] != 'T' && s[10] != ' ') return false;
    if (!digits(11, 2, &h) || s[13] != ':' || !digits(14, 2, &mi)) return false;
    std::size_t end = 16;
    if (text.size() > 16 && s[16] == ':') {
        if (text.size() < 19 || !digits(17, 2, &sec)) return false;
        end = 19;
    }
    if (end != text.size()) return false;
    if (h > 23 || mi > 59 || sec > 59) return false;

    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{unsigned(mo)},
                                          std::chrono::day{unsigned(d)}};
    if (!ymd.ok()) return false;
    const std::chrono::sys_days sd{ymd};
    *day = sd.time_since_epoch().count();
    *weekday = int(std::chrono::weekday{sd}.c_encoding());
    *tod_s = h * 3600 + mi * 60 + sec;
    return true;
}

}  // namespace

std::vector<GeoEvent> load_events(const std::string& path, RejectsReport* rejects) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open events file: " + path);
    std::vector<GeoEvent> events;
    std::string line;
    if (!std::getline(in, line)) throw Error(path + ": empty events file");
    const auto header = split_csv_row(line);
    auto col = [&](const std::string& name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw Error(path + ": missing column '" + name + "'");
        return std::size_t(it - header.begin());
    };
    const std::size_t c_user = col("user_id");
    const std::size_t c_ts = col("timestamp_iso8601_local");
    const std::size_t c_x = col("x");
    const std::size_t c_y = col("y");

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto row = split_csv_row(line);
        if (row.size() != header.size() || row[c_user].empty()) {
            if (rejects) rejects->add("malformed_row");
            continue;
        }
        GeoEvent ev;
        ev.user_id = row[c_user];
        if (!parse_timestamp(row[c_ts], &ev.day, &ev.weekday, &ev.tod_s)) {
            if (rejects) rejects->add("unparseable_timestamp");
            continue;
        }
        try {
            ev.x = std::stod(row[c_x]);
            ev.y = std::stod(row[c_y]);
        } catch (const std::exception&) {
            if (rejects) rejects->add("non_finite_coordinates");
            continue;
        }
        if (!std::isfinite(ev.x) || !std::isfinite(ev.y)) {
            if (rejects) rejects->add("non_finite_coordinates");
            continue;
        }
        events.push_back(std::move(ev));
    }
    return events;
}

std::vector<GeoEvent> filter_events(const std::vector<GeoEvent>& events,
                                    const std::set<int>& weekdays, const TimeGrid& window) {
    std::vector<GeoEvent> kept;
    for (const auto& ev : events) {
        if (!weekdays.count(ev.weekday)) continue;
        if (ev.tod_s < window.start_s || ev.tod_s >= window.end_s) continue;
        kept.push_back(ev);
    }
    return kept;
}

std::vector<std::int64_t> count_unique_users(const std::vector<GeoEvent>& events,
                                             const ZoneSystem& zones, const TimeGrid& grid,
                                             RejectsReport* rejects) {
    const std::size_t slots = grid.n_slots();
    // Exact distinct (user, day) sets per cell. string_views alias the
    // event vector, which outlives this function body.
    std::vector<std::set<std::pair<std::string_view, std::int64_t>>> cells(zones.size() * slots);
    for (const auto& ev : events) {
        const std::size_t slot = grid.slot_of(ev.tod_s);
        if (slot == TimeGrid::npos) continue;
        const std::size_t z = zones.locate({ev.x, ev.y});
        if (z == ZoneSystem::npos) {
            if (rejects) rejects->add("outside_all_zones");
            continue;
        }
        cells[z * slots + slot].emplace(std::string_view(ev.user_id), ev.day);
    }
    std::vector<std::int64_t> counts(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) counts[i] = std::int64_t(cells[i].size());
    return counts;
}

ActivitySurface normalize(std::vector<std::int64_t> raw_counts, const TimeGrid& grid,
                          std::size_t n_zones, RunLog* log) {
    const std::size_t slots = grid.n_slots();
    if (raw_counts.size() != n_zones * slots)
        throw Error("normalize: raw count vector does not match zones x slots");
    ActivitySurface surface;
    surface.grid = grid;
    surface.n_zones = n_zones;
    surface.raw = std::move(raw_counts);
    surface.mass.assign(surface.raw.size(), 0.0);
    for (std::size_t k = 0; k < slots; ++k) {
        std::int64_t total = 0;
        for (std::size_t z = 0; z < n_zones; ++z) total += surface.raw[z * slots + k];
        if (total == 0) {
            surface.zero_slots.push_back(k);
            continue;
        }
        for (std::size_t z = 0; z < n_zones; ++z)
            surface.mass[z * slots + k] =
                kMassTotal * double(surface.raw[z * slots + k]) / double(total);
    }
    if (log && !surface.zero_slots.empty())
        log->warn("activity: " + std::to_string(surface.zero_slots.size()) +
                  " slot(s) have no observations anywhere; their masses stay zero");
    return surface;
}

std::vector<double> average_surface(const ActivitySurface& surface) {
    const std::size_t slots = surface.grid.n_slots();
    std::vector<double> avg(surface.n_zones, 0.0);
    for (std::size_t z = 0; z < surface.n_zones; ++z) {
        // deviations from the first slot, so a flat profile averages to
        // exactly its own value
        const double base = surface.mass_at(z, 0);
        double sum = 0.0;
        for (std::size_t k = 0; k < slots; ++k) sum += surface.mass_at(z, k) - base;
        avg[z] = base + sum / double(slots);
    }
    return avg;
}

void write_surface_csv(const std::string& path, const ActivitySurface& surface,
                       const ZoneSystem& zones) {
    if (zones.size() != surface.n_zones)
        throw Error("write_surface_csv: zone system does not match surface");
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw Error("cannot write " + path);
    std::fputs("zone_id,slot_start_hhmm,raw_count,mass\n", f);
    const std::size_t slots = surface.grid.n_slots();
    for (std::size_t z = 0; z < surface.n_zones; ++z) {
        for (std::size_t k = 0; k < slots; ++k) {
            std::fprintf(f, "%s,%s,%lld,%s\n", csv_field(zones.zones[z].id).c_str(),
                         surface.grid.label(k).c_str(), (long long)surface.raw_at(z, k),
                         fmt_double(surface.mass_at(z, k)).c_str());
        }
    }
    if (std::fclose(f) != 0) throw Error("error closing " + path);
}

void write_rejects_csv(const std::string& path, const RejectsReport& rejects) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw Error("cannot write " + path);
    std::fputs("reason,count\n", f);
    for (const auto& [reason, n] : rejects.counts)
        std::fprintf(f, "%s,%lld\n", csv_field(reason).c_str(), (long long)n);
    if (std::fclose(f) != 0) throw Error("error closing " + path);
}

}  // namespace dynacc
