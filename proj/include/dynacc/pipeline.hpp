#ifndef DYNACC_PIPELINE_HPP
#define DYNACC_PIPELINE_HPP

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "dynacc/accessibility.hpp"
#include "dynacc/routing.hpp"
#include "dynacc/util.hpp"

namespace dynacc {

/// Declarative run description, read from a `key = value` file. Relative
/// paths resolve against the config file's directory. Exactly one of a
/// numeric `alpha` or `alpha = calibrate` must be given; the latter needs a
/// trips file.
struct RunConfig {
    std::string config_path;
    std::string base_dir;

    std::string nodes_file;
    std::string arcs_file;
    std::string profiles_file;
    std::string zones_file;
    std::string events_file;
    std::string trips_file;  // optional unless calibrating
    std::string output_dir;

    TimeGrid grid;
    int max_frc = 7;
    double sample_fraction = 0.25;
    std::uint64_t seed = 42;
    int workers = 1;
    std::string timezone = "local";

    bool calibrate = false;
    double alpha = 0.0;
    double calibrate_tol = 1e-4;
    int calibrate_max_iter = 50;

    std::set<Scenario> scenarios;
    std::vector<std::string> geojson_slots;  // hhmm labels; empty = first slot

    static RunConfig load(const std::string& path);
};

struct ValidationReport {
    std::vector<std::string> failures;
    bool ok() const { return failures.empty(); }
};

/// Schema and referential checks on every configured input, without
/// building cubes. Each failure is one line naming the file and reason.
ValidationReport cmd_validate(const RunConfig& cfg);

/// Full pipeline: network, zones, self times, cubes, surface, alpha,
/// scenarios, statistics, exports, manifest. On a hard error the artifacts
/// written so far move under `<output_dir>/failed/` together with the error
/// text, and the error is rethrown for the caller to turn into an exit
/// code.
void cmd_run(const RunConfig& cfg, RunLog* log = nullptr);

/// Pivots one zone's slice of the field export into a per-slot CSV with one
/// column per scenario; returns the written path.
std::string cmd_profile(const RunConfig& cfg, const std::string& zone_id);

/// Rebuilds summary.csv and zone_cv.csv from an existing field.csv.
void cmd_stats_recompute(const RunConfig& cfg);

/// Reads a field export back into memory (slots inferred from the labels).
AccessibilityField read_field_csv(const std::string& path);

}  // namespace dynacc

#endif
