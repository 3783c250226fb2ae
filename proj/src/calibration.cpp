#include "dynacc/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include <json.hpp>

namespace dynacc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_margins(const std::vector<double>& origins, const std::vector<double>& dests,
                   const std::vector<double>& costs) {
    const std::size_t n = origins.size();
    if (dests.size() != n) throw Error("gravity: origin and destination marginals differ in length");
    if (costs.size() != n * n) throw Error("gravity: cost matrix does not match marginals");
    double so = 0.0, sd = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(origins[i]) || origins[i] < 0.0)
            throw Error("gravity: origin marginal " + std::to_string(i) + " is negative or non-finite");
        if (!std::isfinite(dests[i]) || dests[i] < 0.0)
            throw Error("gravity: destination marginal " + std::to_string(i) + " is negative or non-finite");
        so += origins[i];
        sd += dests[i];
    }
    if (so <= 0.0) throw Error("gravity: no trips in the marginals");
    if (std::fabs(so - sd) > 1e-9 * std::max(so, sd))
        throw Error("gravity: origin total " + fmt_double(so) + " != destination total " +
                    fmt_double(sd) + "; a doubly constrained model needs equal totals");
    for (double c : costs)
        if (std::isinf(c))
            throw Error("gravity: infinite cost in matrix (unreachable pairs must be NaN)");
}

}  // namespace

double gravity_mean_cost(const std::vector<double>& origins, const std::vector<double>& dests,
                         const std::vector<double>& costs_min, double alpha,
                         const CalibrationOptions& opts) {
    if (!std::isfinite(alpha)) throw Error("gravity: alpha must be finite");
    check_margins(origins, dests, costs_min);
    const std::size_t n = origins.size();

    // Deterrence factors, shifted so the largest exponent is zero. The
    // shift cancels in the balanced model and keeps exp() out of overflow.
    double shift = kNaN;
    for (double c : costs_min) {
        if (std::isnan(c)) continue;
        const double v = alpha * c;
        if (std::isnan(shift) || v > shift) shift = v;
    }
    if (std::isnan(shift)) throw Error("gravity: every pair is unreachable");
    std::vector<double> f(n * n, 0.0);
    for (std::size_t i = 0; i < n * n; ++i)
        if (!std::isnan(costs_min[i])) f[i] = std::exp(alpha * costs_min[i] - shift);

    std::vector<double> a(n, 1.0), b(n, 1.0);
    double resid = 0.0;
    for (int sweep = 0; sweep < opts.ipf_max_sweeps; ++sweep) {
        for (std::size_t i = 0; i < n; ++i) {
            if (origins[i] == 0.0) {
                a[i] = 0.0;
                continue;
            }
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += b[j] * f[i * n + j];
            if (s <= 0.0)
                throw Error("gravity: origin row " + std::to_string(i) +
                            " has positive trips but no reachable destination");
            a[i] = origins[i] / s;
        }
        for (std::size_t j = 0; j < n; ++j) {
            if (dests[j] == 0.0) {
                b[j] = 0.0;
                continue;
            }
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += a[i] * f[i * n + j];
            if (s <= 0.0)
                throw Error("gravity: destination column " + std::to_string(j) +
                            " has positive trips but no reachable origin");
            b[j] = dests[j] / s;
        }
        // Columns are exact right after the b-update; convergence is the
        // worst row drift.
        resid = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < n; ++j) row += a[i] * b[j] * f[i * n + j];
            resid = std::max(resid, std::fabs(row - origins[i]) / std::max(1.0, origins[i]));
        }
        if (resid <= opts.ipf_tol) {
            double num = 0.0, den = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    const double t = a[i] * b[j] * f[i * n + j];
                    if (t == 0.0) continue;
                    num += t * costs_min[i * n + j];
                    den += t;
                }
            }
            if (den <= 0.0) throw Error("gravity: balanced model carries no trips");
            return num / den;
        }
    }
    throw Error("gravity: balancing did not converge in " + std::to_string(opts.ipf_max_sweeps) +
                " sweeps (residual " + fmt_double(resid) + ")");
}

CalibrationResult calibrate_alpha(const std::vector<double>& origins,
                                  const std::vector<double>& dests,
                                  const std::vector<double>& costs_min, double target_mean_min,
                                  const CalibrationOptions& opts) {
    if (!(target_mean_min > 0.0) || !std::isfinite(target_mean_min))
        throw Error("calibrate_alpha: target mean cost must be positive and finite");
    if (opts.max_iter < 1) throw Error("calibrate_alpha: max_iter must be at least 1");

    CalibrationResult res;
    auto eval = [&](double alpha) {
        const double mean = gravity_mean_cost(origins, dests, costs_min, alpha, opts);
        res.trace.emplace_back(alpha, mean);
        return mean;
    };
    auto close = [&](double mean) {
        return std::fabs(mean - target_mean_min) / target_mean_min <= opts.tol;
    };

    double a_prev = -1.0 / target_mean_min;
    double c_prev = eval(a_prev);
    res.alpha = a_prev;
    if (close(c_prev)) {
        res.converged = true;
        return res;
    }
    if (int(res.trace.size()) >= opts.max_iter) return res;

    double a_cur = a_prev * c_prev / target_mean_min;
    if (!(a_cur < 0.0)) a_cur = a_prev / 2.0;
    double c_cur = eval(a_cur);
    res.alpha = a_cur;

    while (!close(c_cur) && int(res.trace.size()) < opts.max_iter) {
        if (std::fabs(c_cur - c_prev) <= 1e-12 * std::max(1.0, std::fabs(c_cur)))
            throw Error("calibrate_alpha: uncalibratable target; modeled mean cost is stuck at " +
                        fmt_double(c_cur) + " min while the target is " +
                        fmt_double(target_mean_min) + " min");
        double a_next = ((target_mean_min - c_prev) * a_cur - (target_mean_min - c_cur) * a_prev) /
                        (c_cur - c_prev);
        // The decay parameter must stay negative; a secant overshoot into
        // the nonnegative half-line backs off toward zero instead.
        if (!std::isfinite(a_next) || a_next >= 0.0) a_next = a_cur / 2.0;
        a_prev = a_cur;
        c_prev = c_cur;
        a_cur = a_next;
        c_cur = eval(a_cur);
        res.alpha = a_cur;
    }
    res.converged = close(c_cur);
    return res;
}

namespace {

struct TripRow {
    std::string o, d;
    double trips;
};

std::vector<TripRow> read_trip_rows(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open trips file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw Error(path + ": empty trips file");
    const auto header = split_csv_row(line);
    auto col = [&](const std::string& name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw Error(path + ": missing column '" + name + "'");
        return std::size_t(it - header.begin());
    };
    const std::size_t c_o = col("origin_zone"), c_d = col("dest_zone"), c_t = col("trips");
    std::vector<TripRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto row = split_csv_row(line);
        if (row.size() != header.size())
            throw Error(path + ":" + std::to_string(line_no) + ": wrong field count");
        double t;
        try {
            t = std::stod(row[c_t]);
        } catch (const std::exception&) {
            throw Error(path + ":" + std::to_string(line_no) + ": trips is not a number");
        }
        if (!std::isfinite(t) || t < 0.0)
            throw Error(path + ":" + std::to_string(line_no) + ": trips must be >= 0 and finite");
        rows.push_back({row[c_o], row[c_d], t});
    }
    return rows;
}

TripTable assemble(const std::string& path, const std::vector<TripRow>& rows,
                   std::vector<std::string> ids,
                   const std::map<std::string, std::size_t>& index) {
    const std::size_t n = ids.size();
    TripTable t;
    t.zone_ids = std::move(ids);
    t.trips.assign(n * n, 0.0);
    t.origins.assign(n, 0.0);
    t.dests.assign(n, 0.0);
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& r : rows) {
        const auto io = index.find(r.o);
        const auto id = index.find(r.d);
        if (io == index.end()) throw Error(path + ": unknown origin zone '" + r.o + "'");
        if (id == index.end()) throw Error(path + ": unknown destination zone '" + r.d + "'");
        if (!seen.emplace(io->second, id->second).second)
            throw Error(path + ": duplicate pair " + r.o + " -> " + r.d);
        t.trips[io->second * n + id->second] = r.trips;
        t.origins[io->second] += r.trips;
        t.dests[id->second] += r.trips;
        t.total += r.trips;
    }
    if (t.total <= 0.0) throw Error(path + ": no trips");
    return t;
}

}  // namespace

TripTable load_trips_csv(const std::string& path) {
    const auto rows = read_trip_rows(path);
    std::set<std::string> id_set;
    for (const auto& r : rows) {
        id_set.insert(r.o);
        id_set.insert(r.d);
    }
    std::vector<std::string> ids(id_set.begin(), id_set.end());
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < ids.size(); ++i) index[ids[i]] = i;
    return assemble(path, rows, std::move(ids), index);
}

TripTable load_trips_csv(const std::string& path, const ZoneSystem& zones) {
    const auto rows = read_trip_rows(path);
    std::vector<std::string> ids;
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < zones.size(); ++i) {
        ids.push_back(zones.zones[i].id);
        index[zones.zones[i].id] = i;
    }
    return assemble(path, rows, std::move(ids), index);
}

std::vector<double> load_costs_csv(const std::string& path,
                                   const std::vector<std::string>& zone_ids) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open costs file: " + path);
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < zone_ids.size(); ++i) index[zone_ids[i]] = i;
    const std::size_t n = zone_ids.size();
    std::vector<double> costs(n * n, kNaN);

    std::string line;
    if (!std::getline(in, line)) throw Error(path + ": empty costs file");
    const auto header = split_csv_row(line);
    auto col = [&](const std::string& name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw Error(path + ": missing column '" + name + "'");
        return std::size_t(it - header.begin());
    };
    const std::size_t c_o = col("origin_zone"), c_d = col("dest_zone"), c_c = col("cost_min");
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto row = split_csv_row(line);
        if (row.size() != header.size())
            throw Error(path + ":" + std::to_string(line_no) + ": wrong field count");
        const auto io = index.find(row[c_o]);
        const auto id = index.find(row[c_d]);
        if (io == index.end()) throw Error(path + ":" + std::to_string(line_no) +
                                           ": unknown origin zone '" + row[c_o] + "'");
        if (id == index.end()) throw Error(path + ":" + std::to_string(line_no) +
                                           ": unknown destination zone '" + row[c_d] + "'");
        if (row[c_c] == "unreachable") continue;
        double c;
        try {
            c = std::stod(row[c_c]);
        } catch (const std::exception&) {
            throw Error(path + ":" + std::to_string(line_no) + ": cost is not a number");
        }
        if (std::isinf(c))
            throw Error(path + ":" + std::to_string(line_no) +
                        ": use the literal 'unreachable' instead of infinity");
        costs[io->second * n + id->second] = c;
    }
    return costs;
}

Marginals load_marginals_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open marginals file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw Error(path + ": empty marginals file");
    const auto header = split_csv_row(line);
    auto col = [&](const std::string& name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw Error(path + ": missing column '" + name + "'");
        return std::size_t(it - header.begin());
    };
    const std::size_t c_z = col("zone_id"), c_o = col("origins"), c_d = col("dests");
    Marginals m;
    std::set<std::string> seen;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto row = split_csv_row(line);
        if (row.size() != header.size())
            throw Error(path + ":" + std::to_string(line_no) + ": wrong field count");
        if (!seen.insert(row[c_z]).second)
            throw Error(path + ":" + std::to_string(line_no) + ": duplicate zone '" + row[c_z] +
                        "'");
        double o, d;
        try {
            o = std::stod(row[c_o]);
            d = std::stod(row[c_d]);
        } catch (const std::exception&) {
            throw Error(path + ":" + std::to_string(line_no) + ": marginal is not a number");
        }
        if (!std::isfinite(o) || o < 0.0 || !std::isfinite(d) || d < 0.0)
            throw Error(path + ":" + std::to_string(line_no) + ": marginals must be >= 0");
        m.zone_ids.push_back(row[c_z]);
        m.origins.push_back(o);
        m.dests.push_back(d);
    }
    if (m.zone_ids.empty()) throw Error(path + ": no marginal rows");
    return m;
}

double observed_mean_cost(const TripTable& table, const std::vector<double>& costs_min,
                          RunLog* log) {
    const std::size_t n = table.zone_ids.size();
    if (costs_min.size() != n * n)
        throw Error("observed_mean_cost: cost matrix does not match the trip table");
    double num = 0.0, den = 0.0, dropped = 0.0;
    for (std::size_t i = 0; i < n * n; ++i) {
        if (table.trips[i] == 0.0) continue;
        if (std::isnan(costs_min[i])) {
            dropped += table.trips[i];
            continue;
        }
        num += table.trips[i] * costs_min[i];
        den += table.trips[i];
    }
    if (den <= 0.0)
        throw Error("observed_mean_cost: every observed trip is on an unreachable pair");
    if (dropped > 0.0 && log)
        log->warn("calibration: " + fmt_double(dropped) +
                  " observed trips on unreachable pairs were excluded from the mean cost");
    return num / den;
}

void write_calibration_json(const std::string& path, const CalibrationResult& result) {
    nlohmann::json j;
    j["alpha"] = result.alpha;
    j["converged"] = result.converged;
    auto trace = nlohmann::json::array();
    for (const auto& [alpha, mean] : result.trace)
        trace.push_back({{"alpha", alpha}, {"mean_cost_min", mean}});
    j["trace"] = std::move(trace);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << j.dump(1) << '\n';
}

}  // namespace dynacc
