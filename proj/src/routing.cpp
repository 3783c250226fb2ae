#include "dynacc/routing.hpp"

#include <atomic>
#include <cstdio>
#include <queue>

#include "dynacc/pchip.hpp"

namespace dynacc {

void TimeGrid::validate() const {
    if (step_s <= 0) throw Error("time grid: step must be positive");
    if (start_s < 0 || end_s > kSecondsPerDay) throw Error("time grid: outside a 24h day");
    if (start_s >= end_s) throw Error("time grid: start must be before end");
    if ((end_s - start_s) % step_s != 0)
        throw Error("time grid: span not divisible by step");
}

std::size_t TimeGrid::slot_of(int seconds_of_day) const {
    if (seconds_of_day < start_s || seconds_of_day >= end_s) return npos;
    return static_cast<std::size_t>((seconds_of_day - start_s) / step_s);
}

std::vector<double> shortest_arrivals(const RoadNetwork& net, std::uint32_t origin,
                                      double departure_s) {
    if (origin >= net.junctions.size()) throw Error("shortest_arrivals: origin not in network");
    std::vector<double> arrival(net.junctions.size(), kUnreachableSeconds);
    using Item = std::pair<double, std::uint32_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    arrival[origin] = departure_s;
    pq.emplace(departure_s, origin);
    while (!pq.empty()) {
        auto [t, u] = pq.top();
        pq.pop();
        if (t > arrival[u]) continue;
        for (std::uint32_t ai : net.outgoing(u)) {
            const Arc& a = net.arcs[ai];
            double exit = net.traverse(ai, t);
            if (exit < arrival[a.to]) {
                arrival[a.to] = exit;
                pq.emplace(exit, a.to);
            }
        }
    }
    return arrival;
}

TravelTimeCube build_departure_cube(const RoadNetwork& net, const ZoneSystem& zones,
                                    const TimeGrid& grid, int workers, RunLog* log) {
    grid.validate();
    TravelTimeCube cube;
    cube.grid = grid;
    cube.n_zones = zones.size();
    cube.indexing = CubeIndexing::ByDeparture;
    std::size_t slots = grid.n_slots();
    cube.values.assign(cube.n_zones * cube.n_zones * slots, TravelTimeCube::unreachable());

    std::atomic<std::size_t> unreachable_pairs{0};
    parallel_for(cube.n_zones * slots, workers, [&](std::size_t task) {
        std::size_t o = task / slots;
        std::size_t k = task % slots;
        double dep = grid.time_at(k);
        std::vector<double> arr = shortest_arrivals(net, zones.zones[o].centroid_junction, dep);
        for (std::size_t d = 0; d < cube.n_zones; ++d) {
            if (d == o) {
                cube.at(o, o, k) = zones.zones[o].self_time_min;
                continue;
            }
            double a = arr[zones.zones[d].centroid_junction];
            if (a == kUnreachableSeconds) {
                unreachable_pairs.fetch_add(1);
                continue;  // stays NaN
            }
            cube.at(o, d, k) = (a - dep) / 60.0;
        }
    });
    if (log && unreachable_pairs.load() > 0) {
        log->warn("departure cube: " + std::to_string(unreachable_pairs.load()) +
                  " unreachable (origin,dest,slot) entries");
    }
    return cube;
}

TravelTimeCube regroup_by_arrival(const TravelTimeCube& cube, RunLog* log) {
    if (cube.indexing != CubeIndexing::ByDeparture)
        throw Error("regroup_by_arrival: cube already arrival-indexed");
    TravelTimeCube out;
    out.grid = cube.grid;
    out.n_zones = cube.n_zones;
    out.indexing = CubeIndexing::ByArrival;
    std::size_t slots = cube.grid.n_slots();
    out.values.assign(cube.values.size(), TravelTimeCube::unreachable());

    std::size_t sparse_pairs = 0;
    std::vector<double> ax, ay;
    for (std::size_t o = 0; o < cube.n_zones; ++o) {
        for (std::size_t d = 0; d < cube.n_zones; ++d) {
            ax.clear();
            ay.clear();
            for (std::size_t k = 0; k < slots; ++k) {
                double tt = cube.at(o, d, k);
                if (TravelTimeCube::is_unreachable(tt)) continue;
                double arrival = cube.grid.time_at(k) + tt * 60.0;
                if (!ax.empty() && arrival <= ax.back() + 1e-9) {
                    if (arrival < ax.back() - 1e-9)
                        throw Error("regroup_by_arrival: arrival samples decrease for pair (" +
                                    std::to_string(o) + "," + std::to_string(d) +
                                    "), input violates FIFO");
                    // simultaneous arrivals: the later departure defines the
                    // travel time needed to arrive then
                    ay.back() = tt;
                    continue;
                }
                ax.push_back(arrival);
                ay.push_back(tt);
            }
            if (ax.empty()) continue;  // all slots unreachable
            if (ax.size() == 1) {
                ++sparse_pairs;
                for (std::size_t k = 0; k < slots; ++k) out.at(o, d, k) = ay.front();
                continue;
            }
            MonotoneCubic fit(ax, ay);
            for (std::size_t k = 0; k < slots; ++k) {
                out.at(o, d, k) = fit(cube.grid.time_at(k));
            }
        }
    }
    if (log && sparse_pairs > 0) {
        log->warn("arrival regrouping: " + std::to_string(sparse_pairs) +
                  " OD pairs had a single reachable sample; value copied to all slots");
    }
    return out;
}

void write_cube_csv(const std::string& path, const TravelTimeCube& cube,
                    const ZoneSystem& zones) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw Error("cannot write " + path);
    const char* mode = cube.indexing == CubeIndexing::ByDeparture ? "by_departure" : "by_arrival";
    std::string buf;
    buf.reserve(1 << 20);
    buf += "origin_zone,dest_zone,slot_start_hhmm,indexing_mode,travel_time_min\n";
    std::size_t slots = cube.grid.n_slots();
    for (std::size_t o = 0; o < cube.n_zones; ++o) {
        for (std::size_t d = 0; d < cube.n_zones; ++d) {
            for (std::size_t k = 0; k < slots; ++k) {
                double v = cube.at(o, d, k);
                buf += csv_field(zones.zones[o].id);
                buf += ',';
                buf += csv_field(zones.zones[d].id);
                buf += ',';
                buf += cube.grid.label(k);
                buf += ',';
                buf += mode;
                buf += ',';
                buf += TravelTimeCube::is_unreachable(v) ? "unreachable" : fmt_double(v);
                buf += '\n';
            }
            if (buf.size() > (1 << 20) - 4096) {
                std::fwrite(buf.data(), 1, buf.size(), f);
                buf.clear();
            }
        }
    }
    std::fwrite(buf.data(), 1, buf.size(), f);
    std::fclose(f);
}

}  // namespace dynacc
