#include "dynacc/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "dynacc/activity.hpp"
#include "dynacc/calibration.hpp"
#include "dynacc/network.hpp"
#include "dynacc/stats.hpp"
#include "dynacc/zones.hpp"

namespace fs = std::filesystem;

namespace dynacc {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t comma = s.find(',', pos);
        if (comma == std::string::npos) comma = s.size();
        const std::string item = trim(s.substr(pos, comma - pos));
        if (!item.empty()) out.push_back(item);
        pos = comma + 1;
    }
    return out;
}

double parse_number(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw Error("config: " + key + " is not a number: '" + value + "'");
    }
}

long parse_integer(const std::string& key, const std::string& value) {
    const double v = parse_number(key, value);
    if (v != std::floor(v)) throw Error("config: " + key + " must be an integer");
    return long(v);
}

std::string hex64(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// label like "0730"; also accepts "07:30"
int label_seconds(const std::string& label) {
    if (label.find(':') != std::string::npos) return parse_clock(label);
    if (label.size() != 4) throw Error("bad hhmm label '" + label + "'");
    return parse_clock(label.substr(0, 2) + ":" + label.substr(2, 2));
}

}  // namespace

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file: " + path);

    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw Error(path + ":" + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw Error(path + ":" + std::to_string(line_no) + ": empty key");
        if (!kv.emplace(key, value).second)
            throw Error(path + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }

    static const std::set<std::string> known = {
        "nodes",        "arcs",          "profiles",          "zones",
        "events",       "trips",         "output_dir",        "grid_start",
        "grid_end",     "grid_step_s",   "max_frc",           "sample_fraction",
        "seed",         "alpha",         "scenarios",         "workers",
        "timezone",     "geojson_slots", "calibrate_tol",     "calibrate_max_iter"};
    for (const auto& [k, v] : kv)
        if (!known.count(k)) throw Error("config: unknown key '" + k + "'");

    RunConfig cfg;
    cfg.config_path = path;
    const fs::path parent = fs::path(path).parent_path();
    cfg.base_dir = parent.empty() ? std::string(".") : parent.string();

    auto has = [&](const char* k) { return kv.count(k) != 0; };
    auto get = [&](const char* k) { return kv.at(k); };
    auto resolve = [&](const std::string& rel) {
        if (rel.empty() || fs::path(rel).is_absolute()) return rel;
        return cfg.base_dir + "/" + rel;
    };
    auto required = [&](const char* k) {
        if (!has(k) || trim(get(k)).empty()) throw Error(std::string("config: missing key '") + k + "'");
        return get(k);
    };

    cfg.nodes_file = resolve(required("nodes"));
    cfg.arcs_file = resolve(required("arcs"));
    cfg.profiles_file = resolve(required("profiles"));
    cfg.zones_file = resolve(required("zones"));
    cfg.events_file = resolve(required("events"));
    if (has("trips")) cfg.trips_file = resolve(get("trips"));
    cfg.output_dir = resolve(required("output_dir"));

    cfg.grid.start_s = has("grid_start") ? parse_clock(get("grid_start")) : 7 * 3600;
    cfg.grid.end_s = has("grid_end") ? parse_clock(get("grid_end")) : 24 * 3600;
    cfg.grid.step_s = has("grid_step_s") ? int(parse_integer("grid_step_s", get("grid_step_s")))
                                         : 900;
    cfg.grid.validate();

    if (has("max_frc")) {
        cfg.max_frc = int(parse_integer("max_frc", get("max_frc")));
        if (cfg.max_frc < 0 || cfg.max_frc > 7) throw Error("config: max_frc must be in 0..7");
    }
    if (has("sample_fraction")) {
        cfg.sample_fraction = parse_number("sample_fraction", get("sample_fraction"));
        if (!(cfg.sample_fraction > 0.0) || cfg.sample_fraction > 1.0)
            throw Error("config: sample_fraction must be in (0, 1]");
    }
    if (has("seed")) {
        const long s = parse_integer("seed", get("seed"));
        if (s < 0) throw Error("config: seed must be >= 0");
        cfg.seed = std::uint64_t(s);
    }
    if (has("workers")) {
        const long w = parse_integer("workers", get("workers"));
        if (w < 0) throw Error("config: workers must be >= 0 (0 = hardware)");
        cfg.workers = int(w);
    }
    if (has("timezone")) cfg.timezone = get("timezone");

    const std::string alpha_text = required("alpha");
    if (alpha_text == "calibrate") {
        cfg.calibrate = true;
        if (cfg.trips_file.empty())
            throw Error("config: alpha = calibrate needs a trips file");
    } else {
        cfg.alpha = parse_number("alpha", alpha_text);
        if (!(cfg.alpha < 0.0))
            throw Error("config: alpha must be negative (distance decay), or 'calibrate'");
    }
    if (has("calibrate_tol")) {
        cfg.calibrate_tol = parse_number("calibrate_tol", get("calibrate_tol"));
        if (!(cfg.calibrate_tol > 0.0)) throw Error("config: calibrate_tol must be positive");
    }
    if (has("calibrate_max_iter")) {
        cfg.calibrate_max_iter = int(parse_integer("calibrate_max_iter", get("calibrate_max_iter")));
        if (cfg.calibrate_max_iter < 1) throw Error("config: calibrate_max_iter must be >= 1");
    }

    if (has("scenarios")) {
        for (const std::string& name : split_list(get("scenarios")))
            cfg.scenarios.insert(scenario_from_name(name));
        if (cfg.scenarios.empty()) throw Error("config: scenarios list is empty");
    } else {
        cfg.scenarios = {Scenario::Reference, Scenario::DynamicAccessibility,
                         Scenario::DynamicCongestion, Scenario::DynamicAttractiveness};
    }
    // Every summary is a comparison against the reference, so it is always
    // computed even when not listed.
    cfg.scenarios.insert(Scenario::Reference);

    if (has("geojson_slots")) {
        for (const std::string& label : split_list(get("geojson_slots")))
            cfg.geojson_slots.push_back(hhmm_label(label_seconds(label)));
    }
    return cfg;
}

ValidationReport cmd_validate(const RunConfig& cfg) {
    ValidationReport rep;
    auto file_readable = [&](const char* role, const std::string& path) {
        if (path.empty()) return false;
        std::ifstream in(path);
        if (!in) {
            rep.failures.push_back(std::string(role) + ": cannot open " + path);
            return false;
        }
        return true;
    };

    const bool nodes_ok = file_readable("nodes", cfg.nodes_file);
    const bool arcs_ok = file_readable("arcs", cfg.arcs_file);
    const bool profiles_ok = file_readable("profiles", cfg.profiles_file);
    const bool zones_ok = file_readable("zones", cfg.zones_file);
    const bool events_ok = file_readable("events", cfg.events_file);
    bool trips_ok = true;
    if (!cfg.trips_file.empty()) trips_ok = file_readable("trips", cfg.trips_file);

    RoadNetwork net;
    bool net_loaded = false;
    if (nodes_ok && arcs_ok && profiles_ok) {
        try {
            net = load_network(cfg.nodes_file, cfg.arcs_file, cfg.profiles_file);
            net = net.filter_by_frc(cfg.max_frc);
            net_loaded = true;
        } catch (const Error& e) {
            rep.failures.push_back(std::string("network: ") + e.what());
        }
    }
    if (zones_ok) {
        if (net_loaded) {
            try {
                RunLog quiet;
                load_zones(cfg.zones_file, net, &quiet);
            } catch (const Error& e) {
                rep.failures.push_back(std::string("zones: ") + e.what());
            }
        } else {
            rep.failures.push_back("zones: skipped (network failed to load)");
        }
    }
    if (events_ok) {
        try {
            RejectsReport rejects;
            load_events(cfg.events_file, &rejects);
        } catch (const Error& e) {
            rep.failures.push_back(std::string("events: ") + e.what());
        }
    }
    if (trips_ok && !cfg.trips_file.empty()) {
        try {
            load_trips_csv(cfg.trips_file);
        } catch (const Error& e) {
            rep.failures.push_back(std::string("trips: ") + e.what());
        }
    }
    for (const std::string& label : cfg.geojson_slots) {
        bool found = false;
        for (std::size_t k = 0; k < cfg.grid.n_slots() && !found; ++k)
            found = cfg.grid.label(k) == label;
        if (!found)
            rep.failures.push_back("config: geojson_slots entry '" + label +
                                   "' is not a slot start on the configured grid");
    }
    return rep;
}

namespace {

std::string sanitize_filename(const std::string& s) {
    std::string out = s;
    for (char& c : out)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
    return out;
}

}  // namespace

void cmd_run(const RunConfig& cfg, RunLog* log) {
    RunLog fallback;
    if (!log) log = &fallback;
    fs::create_directories(cfg.output_dir);

    std::vector<std::string> artifacts;  // relative names, write order
    auto apath = [&](const std::string& name) { return cfg.output_dir + "/" + name; };

    nlohmann::json timings = nlohmann::json::array();
    std::chrono::steady_clock::time_point stage_t0;
    auto tic = [&] { stage_t0 = std::chrono::steady_clock::now(); };
    auto toc = [&](const char* stage) {
        const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - stage_t0)
                            .count();
        timings.push_back({{"stage", stage}, {"ms", ms}});
    };

    try {
        tic();
        RoadNetwork net = load_network(cfg.nodes_file, cfg.arcs_file, cfg.profiles_file);
        net = net.filter_by_frc(cfg.max_frc);
        toc("network");

        tic();
        ZoneSystem zs = load_zones(cfg.zones_file, net, log);
        toc("zones");

        tic();
        compute_self_times(zs, net, cfg.sample_fraction, cfg.seed, cfg.workers, log);
        write_self_times_csv(apath("self_times.csv"), zs);
        artifacts.push_back("self_times.csv");
        toc("self_times");

        tic();
        TravelTimeCube dcube = build_departure_cube(net, zs, cfg.grid, cfg.workers, log);
        write_cube_csv(apath("cube_departure.csv"), dcube, zs);
        artifacts.push_back("cube_departure.csv");
        toc("departure_cube");

        tic();
        TravelTimeCube acube = regroup_by_arrival(dcube, log);
        write_cube_csv(apath("cube_arrival.csv"), acube, zs);
        artifacts.push_back("cube_arrival.csv");
        toc("arrival_cube");

        tic();
        RejectsReport rejects;
        const std::vector<GeoEvent> events = load_events(cfg.events_file, &rejects);
        const std::vector<GeoEvent> kept =
            filter_events(events, {kTuesday, kWednesday, kThursday}, cfg.grid);
        std::vector<std::int64_t> raw = count_unique_users(kept, zs, cfg.grid, &rejects);
        const ActivitySurface surface = normalize(std::move(raw), cfg.grid, zs.size(), log);
        write_surface_csv(apath("surface.csv"), surface, zs);
        artifacts.push_back("surface.csv");
        write_rejects_csv(apath("event_rejects.csv"), rejects);
        artifacts.push_back("event_rejects.csv");
        toc("surface");

        tic();
        double alpha = cfg.alpha;
        std::string alpha_source = "fixed";
        if (cfg.calibrate) {
            const TripTable trips = load_trips_csv(cfg.trips_file, zs);
            const std::size_t n = zs.size();
            std::vector<double> costs = average_times(acube);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    double& c = costs[i * n + j];
                    if (i != j && !std::isnan(c))
                        c = compose_cost(zs.zones[i].self_time_min, c, zs.zones[j].self_time_min);
                }
            const double target = observed_mean_cost(trips, costs, log);
            CalibrationOptions copts;
            copts.tol = cfg.calibrate_tol;
            copts.max_iter = cfg.calibrate_max_iter;
            const CalibrationResult cres =
                calibrate_alpha(trips.origins, trips.dests, costs, target, copts);
            write_calibration_json(apath("calibration.json"), cres);
            artifacts.push_back("calibration.json");
            if (!cres.converged)
                throw Error("calibration did not converge in " +
                            std::to_string(cfg.calibrate_max_iter) +
                            " evaluations; trace is in calibration.json");
            alpha = cres.alpha;
            alpha_source = "calibrated";
        }
        toc("alpha");

        tic();
        const AccessibilityField field =
            run_scenarios(acube, surface, zs, alpha, cfg.scenarios, cfg.workers, log);
        write_field_csv(apath("field.csv"), field);
        artifacts.push_back("field.csv");
        toc("scenarios");

        tic();
        write_summary_csv(apath("summary.csv"), field);
        artifacts.push_back("summary.csv");
        write_zone_cv_csv(apath("zone_cv.csv"), field);
        artifacts.push_back("zone_cv.csv");

        std::vector<std::pair<std::string, std::vector<double>>> cv_props;
        for (const auto& [s, vals] : field.values) {
            (void)vals;
            cv_props.emplace_back(std::string("cv_") + scenario_name(s), zone_cv_series(field, s));
        }
        write_zones_geojson(apath("zone_cv.geojson"), zs, cv_props);
        artifacts.push_back("zone_cv.geojson");

        std::vector<std::string> slot_labels = cfg.geojson_slots;
        if (slot_labels.empty()) slot_labels.push_back(cfg.grid.label(0));
        for (const std::string& label : slot_labels) {
            std::size_t slot = TimeGrid::npos;
            for (std::size_t k = 0; k < cfg.grid.n_slots(); ++k)
                if (cfg.grid.label(k) == label) {
                    slot = k;
                    break;
                }
            if (slot == TimeGrid::npos)
                throw Error("geojson_slots entry '" + label +
                            "' is not a slot start on the configured grid");
            for (const auto& [s, vals] : field.values) {
                std::vector<double> p(field.n_zones);
                for (std::size_t z = 0; z < field.n_zones; ++z)
                    p[z] = vals[z * cfg.grid.n_slots() + slot];
                const std::string name =
                    std::string("field_") + scenario_name(s) + "_" + label + ".geojson";
                write_zones_geojson(apath(name), zs, {{"P", p}});
                artifacts.push_back(name);
            }
        }
        toc("exports");

        // manifest: hashes, counts, timings; excluded from data_hash since
        // timings differ run to run
        std::uint64_t config_hash = fnv1a64_file(cfg.config_path);
        for (const std::string& f :
             {cfg.nodes_file, cfg.arcs_file, cfg.profiles_file, cfg.zones_file, cfg.events_file})
            config_hash = fnv1a64_file(f, config_hash);
        if (!cfg.trips_file.empty()) config_hash = fnv1a64_file(cfg.trips_file, config_hash);
        std::uint64_t data_hash = kFnvOffset;
        for (const std::string& name : artifacts) data_hash = fnv1a64_file(apath(name), data_hash);

        nlohmann::json manifest;
        manifest["version"] = "0.1.0";
        manifest["config_hash"] = hex64(config_hash);
        manifest["data_hash"] = hex64(data_hash);
        manifest["seed"] = cfg.seed;
        manifest["timezone"] = cfg.timezone;
        manifest["workers"] = cfg.workers;
        manifest["grid"] = {{"start", hhmm_label(cfg.grid.start_s)},
                            {"end", hhmm_label(cfg.grid.end_s)},
                            {"step_s", cfg.grid.step_s},
                            {"slots", cfg.grid.n_slots()}};
        manifest["alpha"] = {{"value", alpha}, {"source", alpha_source}};
        manifest["counts"] = {{"junctions", net.junctions.size()},
                              {"arcs", net.arcs.size()},
                              {"zones", zs.size()},
                              {"events_parsed", events.size()},
                              {"events_kept", kept.size()},
                              {"rejects", rejects.counts}};
        manifest["timings_ms"] = timings;
        manifest["warnings"] = log->warnings;
        manifest["artifacts"] = artifacts;
        std::ofstream mf(apath("manifest.json"), std::ios::binary);
        if (!mf) throw Error("cannot write " + apath("manifest.json"));
        mf << manifest.dump(1) << '\n';
    } catch (const Error& e) {
        const std::string failed_dir = apath("failed");
        fs::create_directories(failed_dir);
        for (const std::string& name : artifacts) {
            std::error_code ec;
            fs::rename(apath(name), failed_dir + "/" + name, ec);
        }
        std::ofstream ef(failed_dir + "/error.txt", std::ios::binary);
        ef << e.what() << '\n';
        throw;
    }
}

AccessibilityField read_field_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open field export: " + path);
    std::string line;
    if (!std::getline(in, line)) throw Error(path + ": empty field export");
    if (trim(line) != "zone_id,slot_start_hhmm,scenario,P")
        throw Error(path + ": unexpected header '" + line + "'");

    struct Row {
        std::string zone, label;
        Scenario scenario;
        double p;
    };
    std::vector<Row> rows;
    std::set<int> slot_seconds;
    std::vector<std::string> zone_order;
    std::set<std::string> zone_seen;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_csv_row(line);
        if (f.size() != 4) throw Error(path + ":" + std::to_string(line_no) + ": wrong field count");
        Row r;
        r.zone = f[0];
        r.label = f[1];
        r.scenario = scenario_from_name(f[2]);
        try {
            r.p = std::stod(f[3]);
        } catch (const std::exception&) {
            throw Error(path + ":" + std::to_string(line_no) + ": P is not a number");
        }
        slot_seconds.insert(label_seconds(r.label));
        if (zone_seen.insert(r.zone).second) zone_order.push_back(r.zone);
        rows.push_back(std::move(r));
    }
    if (rows.empty()) throw Error(path + ": no data rows");

    const std::vector<int> starts(slot_seconds.begin(), slot_seconds.end());
    AccessibilityField field;
    if (starts.size() < 2)
        throw Error(path + ": cannot infer the slot grid from a single slot label");
    const int step = starts[1] - starts[0];
    for (std::size_t k = 1; k < starts.size(); ++k)
        if (starts[k] - starts[k - 1] != step)
            throw Error(path + ": slot labels are not a uniform grid");
    field.grid.start_s = starts.front();
    field.grid.end_s = starts.back() + step;
    field.grid.step_s = step;
    field.grid.validate();

    field.n_zones = zone_order.size();
    field.zone_ids = zone_order;
    std::map<std::string, std::size_t> zindex;
    for (std::size_t i = 0; i < zone_order.size(); ++i) zindex[zone_order[i]] = i;

    const std::size_t slots = field.grid.n_slots();
    std::map<Scenario, std::size_t> filled;
    for (const Row& r : rows) {
        auto [it, inserted] = field.values.try_emplace(r.scenario);
        if (inserted) it->second.assign(field.n_zones * slots, 0.0);
        const std::size_t k = std::size_t(std::lower_bound(starts.begin(), starts.end(),
                                                           label_seconds(r.label)) -
                                          starts.begin());
        it->second[zindex.at(r.zone) * slots + k] = r.p;
        ++filled[r.scenario];
    }
    for (const auto& [s, count] : filled)
        if (count != field.n_zones * slots)
            throw Error(path + ": scenario " + scenario_name(s) + " has " + std::to_string(count) +
                        " rows, expected " + std::to_string(field.n_zones * slots));

    field.reference.assign(field.n_zones, 0.0);
    if (field.has(Scenario::Reference))
        for (std::size_t z = 0; z < field.n_zones; ++z)
            field.reference[z] = field.at(Scenario::Reference, z, 0);
    return field;
}

std::string cmd_profile(const RunConfig& cfg, const std::string& zone_id) {
    const AccessibilityField field = read_field_csv(cfg.output_dir + "/field.csv");
    std::size_t zi = field.n_zones;
    for (std::size_t i = 0; i < field.n_zones; ++i)
        if (field.zone_ids[i] == zone_id) {
            zi = i;
            break;
        }
    if (zi == field.n_zones) {
        std::vector<std::string> ids = field.zone_ids;
        std::sort(ids.begin(), ids.end());
        std::string list;
        for (const std::string& id : ids) {
            if (!list.empty()) list += ", ";
            list += id;
        }
        throw Error("unknown zone id '" + zone_id + "'; valid ids: " + list);
    }

    const std::string out_path =
        cfg.output_dir + "/profile_" + sanitize_filename(zone_id) + ".csv";
    std::FILE* f = std::fopen(out_path.c_str(), "wb");
    if (!f) throw Error("cannot write " + out_path);
    std::fputs(
        "slot_start_hhmm,reference,dynamic_accessibility,dynamic_congestion,"
        "dynamic_attractiveness\n",
        f);
    const Scenario order[4] = {Scenario::Reference, Scenario::DynamicAccessibility,
                               Scenario::DynamicCongestion, Scenario::DynamicAttractiveness};
    for (std::size_t k = 0; k < field.grid.n_slots(); ++k) {
        std::fprintf(f, "%s", field.grid.label(k).c_str());
        for (Scenario s : order) {
            if (field.has(s))
                std::fprintf(f, ",%s", fmt_double(field.at(s, zi, k)).c_str());
            else
                std::fputs(",", f);
        }
        std::fputs("\n", f);
    }
    if (std::fclose(f) != 0) throw Error("error closing " + out_path);
    return out_path;
}

void cmd_stats_recompute(const RunConfig& cfg) {
    const AccessibilityField field = read_field_csv(cfg.output_dir + "/field.csv");
    write_summary_csv(cfg.output_dir + "/summary.csv", field);
    write_zone_cv_csv(cfg.output_dir + "/zone_cv.csv", field);
}

}  // namespace dynacc
