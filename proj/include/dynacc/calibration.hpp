#ifndef DYNACC_CALIBRATION_HPP
#define DYNACC_CALIBRATION_HPP

#include <string>
#include <utility>
#include <vector>

#include "dynacc/util.hpp"
#include "dynacc/zones.hpp"

namespace dynacc {

struct CalibrationOptions {
    double tol = 1e-4;        // on |mean - target| / target
    int max_iter = 50;        // gravity evaluations, counting the first
    double ipf_tol = 1e-8;    // relative marginal residual
    int ipf_max_sweeps = 1000;
};

struct CalibrationResult {
    double alpha = 0.0;
    bool converged = false;
    // every (alpha, modeled mean cost) evaluated, in order
    std::vector<std::pair<double, double>> trace;
};

/// Observed trips aggregated to the zone index used by the cost matrix.
struct TripTable {
    std::vector<std::string> zone_ids;
    std::vector<double> trips;    // [origin * n + dest]
    std::vector<double> origins;  // row sums
    std::vector<double> dests;    // column sums
    double total = 0.0;
};

/// Mean trip cost of the doubly-constrained gravity model
/// T_ij = A_i O_i B_j D_j exp(alpha * c_ij), balanced by iterative
/// proportional fitting. NaN costs mark unreachable pairs and get zero
/// trips; a positive marginal whose whole row or column is unreachable
/// cannot balance and raises an error, as does non-convergence.
double gravity_mean_cost(const std::vector<double>& origins, const std::vector<double>& dests,
                         const std::vector<double>& costs_min, double alpha,
                         const CalibrationOptions& opts = {});

/// Hyman's method: alpha_1 = -1/target, alpha_2 = alpha_1 * mean_1 / target,
/// then secant steps on the modeled mean, stopping at relative tolerance.
/// A target the model cannot reach (costs carry no signal, or the target
/// lies outside the attainable mean range) raises an "uncalibratable
/// target" error; running out of iterations returns converged = false with
/// the trace intact.
CalibrationResult calibrate_alpha(const std::vector<double>& origins,
                                  const std::vector<double>& dests,
                                  const std::vector<double>& costs_min, double target_mean_min,
                                  const CalibrationOptions& opts = {});

/// Reads `origin_zone,dest_zone,trips`; the zone universe is the sorted set
/// of ids appearing in the file.
TripTable load_trips_csv(const std::string& path);

/// Same, but on the given zone system's index; unknown ids are an error.
TripTable load_trips_csv(const std::string& path, const ZoneSystem& zones);

/// Reads `origin_zone,dest_zone,cost_min` into a full matrix over zone_ids.
/// Pairs absent from the file, or marked "unreachable", stay NaN.
std::vector<double> load_costs_csv(const std::string& path,
                                   const std::vector<std::string>& zone_ids);

/// Trip-end totals without a full matrix, for calibrating against an
/// externally known mean cost.
struct Marginals {
    std::vector<std::string> zone_ids;
    std::vector<double> origins;
    std::vector<double> dests;
};

/// Reads `zone_id,origins,dests`; ids must be unique.
Marginals load_marginals_csv(const std::string& path);

/// Trip-weighted mean of finite-cost pairs. Positive trips on unreachable
/// pairs are dropped from the average (reported via log); an all-unreachable
/// table is an error.
double observed_mean_cost(const TripTable& table, const std::vector<double>& costs_min,
                          RunLog* log = nullptr);

void write_calibration_json(const std::string& path, const CalibrationResult& result);

}  // namespace dynacc

#endif
