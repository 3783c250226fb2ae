#include "dynacc/accessibility.hpp"

#include <cmath>
#include <cstdio>

#include "dynacc/util.hpp"

namespace dynacc {

const char* scenario_name(Scenario s) {
    switch (s) {
        case Scenario::Reference: return "reference";
        case Scenario::DynamicAccessibility: return "dynamic_accessibility";
        case Scenario::DynamicCongestion: return "dynamic_congestion";
        case Scenario::DynamicAttractiveness: return "dynamic_attractiveness";
    }
    return "?";
}

Scenario scenario_from_name(const std::string& name) {
    if (name == "reference") return Scenario::Reference;
    if (name == "dynamic_accessibility") return Scenario::DynamicAccessibility;
    if (name == "dynamic_congestion") return Scenario::DynamicCongestion;
    if (name == "dynamic_attractiveness") return Scenario::DynamicAttractiveness;
    throw Error("unknown scenario '" + name +
                "' (expected reference, dynamic_accessibility, dynamic_congestion or "
                "dynamic_attractiveness)");
}

double potential(const std::vector<double>& masses, const std::vector<double>& costs_min,
                 double alpha) {
    if (masses.size() != costs_min.size())
        throw Error("potential: mass and cost vectors differ in length");
    double p = 0.0;
    for (std::size_t j = 0; j < masses.size(); ++j) {
        const double c = costs_min[j];
        if (std::isnan(c)) continue;  // unreachable, contributes zero
        if (std::isinf(c))
            throw Error("potential: infinite cost at destination index " + std::to_string(j) +
                        " (unreachable destinations must be NaN)");
        if (!std::isfinite(masses[j]))
            throw Error("potential: non-finite mass at destination index " + std::to_string(j));
        p += masses[j] * std::exp(alpha * c);
    }
    return p;
}

std::vector<double> average_times(const TravelTimeCube& cube) {
    const std::size_t n = cube.n_zones;
    const std::size_t slots = cube.grid.n_slots();
    std::vector<double> avg(n * n, TravelTimeCube::unreachable());
    for (std::size_t o = 0; o < n; ++o) {
        for (std::size_t d = 0; d < n; ++d) {
            // Summing deviations from the first sample keeps the mean of a
            // constant series exactly that constant, which the scenario
            // degeneracy guarantees rely on.
            double base = 0.0, sum = 0.0;
            std::size_t reach = 0;
            for (std::size_t k = 0; k < slots; ++k) {
                const double tt = cube.at(o, d, k);
                if (TravelTimeCube::is_unreachable(tt)) continue;
                if (reach == 0) base = tt;
                sum += tt - base;
                ++reach;
            }
            if (reach) avg[o * n + d] = base + sum / double(reach);
        }
    }
    return avg;
}

AccessibilityField run_scenarios(const TravelTimeCube& cube, const ActivitySurface& surface,
                                 const ZoneSystem& zones, double alpha,
                                 const std::set<Scenario>& scenarios, std::size_t workers,
                                 RunLog* log) {
    if (cube.indexing != CubeIndexing::ByArrival)
        throw Error("run_scenarios: cube must be arrival-indexed (regroup it first)");
    const std::size_t n = zones.size();
    if (cube.n_zones != n)
        throw Error("run_scenarios: cube has " + std::to_string(cube.n_zones) +
                    " zones, zone system has " + std::to_string(n));
    if (surface.n_zones != n)
        throw Error("run_scenarios: surface has " + std::to_string(surface.n_zones) +
                    " zones, zone system has " + std::to_string(n));
    if (!(surface.grid == cube.grid))
        throw Error("run_scenarios: surface and cube are on different time grids");
    const std::size_t slots = cube.grid.n_slots();

    AccessibilityField field;
    field.grid = cube.grid;
    field.n_zones = n;
    field.zone_ids.reserve(n);
    for (const auto& z : zones.zones) field.zone_ids.push_back(z.id);
    for (Scenario s : scenarios) field.values[s].assign(n * slots, 0.0);
    field.reference.assign(n, 0.0);

    const std::vector<double> mean_time = average_times(cube);
    const std::vector<double> mean_mass = average_surface(surface);

    // Composed static costs per origin row; diagonal entries of the cube
    // already equal the internal time, so they pass through unchanged.
    auto composed_row_static = [&](std::size_t i) {
        std::vector<double> row(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double t = mean_time[i * n + j];
            row[j] = (i == j || std::isnan(t))
                         ? t
                         : compose_cost(zones.zones[i].self_time_min, t,
                                        zones.zones[j].self_time_min);
        }
        return row;
    };
    auto composed_row_at = [&](std::size_t i, std::size_t k) {
        std::vector<double> row(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double t = cube.at(i, j, k);
            row[j] = (i == j || std::isnan(t))
                         ? t
                         : compose_cost(zones.zones[i].self_time_min, t,
                                        zones.zones[j].self_time_min);
        }
        return row;
    };

    // Workers write disjoint [i * slots, (i + 1) * slots) ranges; grab the
    // destination buffers up front so the loop never touches the map.
    auto buffer = [&](Scenario s) -> double* {
        auto it = field.values.find(s);
        return it == field.values.end() ? nullptr : it->second.data();
    };
    double* out_ref = buffer(Scenario::Reference);
    double* out_acc = buffer(Scenario::DynamicAccessibility);
    double* out_con = buffer(Scenario::DynamicCongestion);
    double* out_att = buffer(Scenario::DynamicAttractiveness);

    auto run_origin = [&](std::size_t i) {
        const std::vector<double> static_costs = composed_row_static(i);
        const double ref = potential(mean_mass, static_costs, alpha);
        field.reference[i] = ref;
        if (out_ref)
            for (std::size_t k = 0; k < slots; ++k) out_ref[i * slots + k] = ref;
        if (!(out_acc || out_con || out_att)) return;

        std::vector<double> slot_mass(n);
        for (std::size_t k = 0; k < slots; ++k) {
            for (std::size_t j = 0; j < n; ++j) slot_mass[j] = surface.mass_at(j, k);
            if (out_att) out_att[i * slots + k] = potential(slot_mass, static_costs, alpha);
            if (out_acc || out_con) {
                const std::vector<double> dyn_costs = composed_row_at(i, k);
                if (out_acc) out_acc[i * slots + k] = potential(slot_mass, dyn_costs, alpha);
                if (out_con) out_con[i * slots + k] = potential(mean_mass, dyn_costs, alpha);
            }
        }
    };

    parallel_for(n, workers, [&](std::size_t i) {
        try {
            run_origin(i);
        } catch (const Error& e) {
            throw Error("origin zone " + zones.zones[i].id + ": " + e.what());
        }
    });

    if (log) {
        std::size_t isolated = 0;
        for (std::size_t i = 0; i < n; ++i) {
            bool any = false;
            for (std::size_t j = 0; j < n && !any; ++j)
                any = !std::isnan(mean_time[i * n + j]);
            if (!any) ++isolated;
        }
        if (isolated)
            log->warn("accessibility: " + std::to_string(isolated) +
                      " origin zone(s) reach no destination in any slot");
    }
    return field;
}

void write_field_csv(const std::string& path, const AccessibilityField& field) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw Error("cannot write " + path);
    std::fputs("zone_id,slot_start_hhmm,scenario,P\n", f);
    const std::size_t slots = field.grid.n_slots();
    for (const auto& [s, vals] : field.values) {
        for (std::size_t z = 0; z < field.n_zones; ++z) {
            for (std::size_t k = 0; k < slots; ++k) {
                std::fprintf(f, "%s,%s,%s,%s\n", csv_field(field.zone_ids[z]).c_str(),
                             field.grid.label(k).c_str(), scenario_name(s),
                             fmt_double(vals[z * slots + k]).c_str());
            }
        }
    }
    if (std::fclose(f) != 0) throw Error("error closing " + path);
}

}  // namespace dynacc
