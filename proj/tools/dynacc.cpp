#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "dynacc/calibration.hpp"
#include "dynacc/pipeline.hpp"
#include "dynacc/util.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

struct GridOverride {
    std::string start, end;
    int step_s = 0;
};

void apply_overrides(dynacc::RunConfig* cfg, const GridOverride& grid, int workers,
                     const std::string& out_dir) {
    if (!grid.start.empty()) cfg->grid.start_s = dynacc::parse_clock(grid.start);
    if (!grid.end.empty()) cfg->grid.end_s = dynacc::parse_clock(grid.end);
    if (grid.step_s > 0) cfg->grid.step_s = grid.step_s;
    cfg->grid.validate();
    if (workers >= 0) cfg->workers = workers;
    if (!out_dir.empty()) cfg->output_dir = out_dir;
}

int do_validate(const std::string& config_path) {
    dynacc::RunConfig cfg;
    try {
        cfg = dynacc::RunConfig::load(config_path);
    } catch (const dynacc::Error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitValidation;
    }
    const dynacc::ValidationReport rep = dynacc::cmd_validate(cfg);
    if (!rep.ok()) {
        for (const std::string& f : rep.failures) std::fprintf(stderr, "FAIL %s\n", f.c_str());
        std::fprintf(stderr, "%zu validation failure(s)\n", rep.failures.size());
        return kExitValidation;
    }
    std::printf("OK\n");
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Time-of-day potential accessibility over a road network"};
    app.require_subcommand(1);

    std::string config_path;
    GridOverride grid;
    int workers = -1;
    std::string out_dir;
    std::string zone_id;

    auto add_common = [&](CLI::App* cmd, bool with_overrides) {
        cmd->add_option("config", config_path, "run configuration file")->required();
        if (with_overrides) {
            cmd->add_option("--grid-start", grid.start, "override grid start (HH:MM)");
            cmd->add_option("--grid-end", grid.end, "override grid end (HH:MM)");
            cmd->add_option("--grid-step-s", grid.step_s, "override slot length in seconds");
            cmd->add_option("--workers", workers, "override worker count (0 = hardware)");
            cmd->add_option("--out", out_dir, "override output directory");
        }
    };

    CLI::App* c_validate = app.add_subcommand("validate", "check all inputs without computing");
    add_common(c_validate, false);

    CLI::App* c_run = app.add_subcommand("run", "run the full pipeline");
    add_common(c_run, true);

    CLI::App* c_profile =
        app.add_subcommand("profile", "per-slot scenario values for one zone");
    add_common(c_profile, false);
    c_profile->add_option("--zone", zone_id, "zone id")->required();

    CLI::App* c_stats =
        app.add_subcommand("stats", "recompute summary tables from an existing field export");
    add_common(c_stats, false);

    std::string trips_path, costs_path, marginals_path, result_path = "calibration.json";
    double target = 0.0;
    bool has_target = false;
    double tol = 1e-4;
    int max_iter = 50;
    CLI::App* c_cal = app.add_subcommand("calibrate", "calibrate alpha from observed trips");
    c_cal->add_option("--costs", costs_path, "cost matrix CSV (origin_zone,dest_zone,cost_min)")
        ->required();
    c_cal->add_option("--trips", trips_path, "trip matrix CSV (origin_zone,dest_zone,trips)");
    c_cal->add_option("--marginals", marginals_path, "marginals CSV (zone_id,origins,dests)");
    c_cal->add_option("--target", target, "observed mean cost in minutes")
        ->check(CLI::PositiveNumber);
    c_cal->add_option("--out", result_path, "result JSON path");
    c_cal->add_option("--tol", tol, "relative tolerance on the mean cost");
    c_cal->add_option("--max-iter", max_iter, "evaluation budget");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }
    has_target = c_cal->count("--target") > 0;

    try {
        if (*c_validate) return do_validate(config_path);

        if (*c_run) {
            dynacc::RunConfig cfg;
            try {
                cfg = dynacc::RunConfig::load(config_path);
                apply_overrides(&cfg, grid, workers, out_dir);
            } catch (const dynacc::Error& e) {
                std::fprintf(stderr, "config error: %s\n", e.what());
                return kExitValidation;
            }
            const dynacc::ValidationReport rep = dynacc::cmd_validate(cfg);
            if (!rep.ok()) {
                for (const std::string& f : rep.failures)
                    std::fprintf(stderr, "FAIL %s\n", f.c_str());
                return kExitValidation;
            }
            dynacc::RunLog log;
            dynacc::cmd_run(cfg, &log);
            for (const std::string& w : log.warnings)
                std::fprintf(stderr, "warning: %s\n", w.c_str());
            std::printf("wrote %s\n", cfg.output_dir.c_str());
            return kExitOk;
        }

        if (*c_profile) {
            dynacc::RunConfig cfg;
            try {
                cfg = dynacc::RunConfig::load(config_path);
            } catch (const dynacc::Error& e) {
                std::fprintf(stderr, "config error: %s\n", e.what());
                return kExitValidation;
            }
            const std::string path = dynacc::cmd_profile(cfg, zone_id);
            std::printf("wrote %s\n", path.c_str());
            return kExitOk;
        }

        if (*c_stats) {
            dynacc::RunConfig cfg;
            try {
                cfg = dynacc::RunConfig::load(config_path);
            } catch (const dynacc::Error& e) {
                std::fprintf(stderr, "config error: %s\n", e.what());
                return kExitValidation;
            }
            dynacc::cmd_stats_recompute(cfg);
            std::printf("wrote %s/summary.csv and %s/zone_cv.csv\n", cfg.output_dir.c_str(),
                        cfg.output_dir.c_str());
            return kExitOk;
        }

        if (*c_cal) {
            if (trips_path.empty() == marginals_path.empty()) {
                std::fprintf(stderr, "calibrate needs exactly one of --trips or --marginals\n");
                return kExitValidation;
            }
            if (!marginals_path.empty() && !has_target) {
                std::fprintf(stderr, "--marginals needs --target (no trip matrix to average)\n");
                return kExitValidation;
            }
            dynacc::CalibrationOptions opts;
            opts.tol = tol;
            opts.max_iter = max_iter;
            dynacc::RunLog log;

            std::vector<std::string> ids;
            std::vector<double> origins, dests, costs;
            double target_mean = target;
            if (!trips_path.empty()) {
                const dynacc::TripTable trips = dynacc::load_trips_csv(trips_path);
                ids = trips.zone_ids;
                origins = trips.origins;
                dests = trips.dests;
                costs = dynacc::load_costs_csv(costs_path, ids);
                if (!has_target) target_mean = dynacc::observed_mean_cost(trips, costs, &log);
            } else {
                dynacc::Marginals m = dynacc::load_marginals_csv(marginals_path);
                ids = std::move(m.zone_ids);
                origins = std::move(m.origins);
                dests = std::move(m.dests);
                costs = dynacc::load_costs_csv(costs_path, ids);
            }
            const dynacc::CalibrationResult res =
                dynacc::calibrate_alpha(origins, dests, costs, target_mean, opts);
            dynacc::write_calibration_json(result_path, res);
            for (const std::string& w : log.warnings)
                std::fprintf(stderr, "warning: %s\n", w.c_str());
            std::printf("alpha = %s (%s after %zu evaluations), wrote %s\n",
                        dynacc::fmt_double(res.alpha).c_str(),
                        res.converged ? "converged" : "NOT converged", res.trace.size(),
                        result_path.c_str());
            return res.converged ? kExitOk : kExitRuntime;
        }
    } catch (const dynacc::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return kExitRuntime;
    }
    return kExitOk;
}
