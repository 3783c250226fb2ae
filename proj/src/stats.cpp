#include "dynacc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "dynacc/util.hpp"

namespace dynacc {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

SummaryRow summarize_values(const std::string& label, std::vector<double> values) {
    if (values.empty()) throw Error("summarize: empty value set for " + label);
    for (double v : values)
        if (!std::isfinite(v)) throw Error("summarize: non-finite value in " + label);
    std::sort(values.begin(), values.end());

    SummaryRow row;
    row.label = label;
    row.n = values.size();
    row.min = values.front();
    row.max = values.back();
    double sum = 0.0;
    for (double v : values) sum += v;
    row.mean = sum / double(row.n);
    double ss = 0.0;
    for (double v : values) ss += (v - row.mean) * (v - row.mean);
    row.sd = std::sqrt(ss / double(row.n));
    if (row.mean > 0.0) {
        row.cv = 100.0 * row.sd / row.mean;
        row.cv_defined = true;
    } else {
        row.cv = kNaN;
        row.cv_defined = false;
    }
    return row;
}

SummaryRow summarize_across_zones(const AccessibilityField& field, Scenario s, std::size_t slot) {
    if (!field.has(s))
        throw Error(std::string("summarize_across_zones: field has no scenario ") +
                    scenario_name(s));
    if (slot >= field.grid.n_slots())
        throw Error("summarize_across_zones: slot out of range");
    std::vector<double> vals(field.n_zones);
    for (std::size_t z = 0; z < field.n_zones; ++z) vals[z] = field.at(s, z, slot);
    return summarize_values(std::string(scenario_name(s)) + "@" + field.grid.label(slot),
                            std::move(vals));
}

double cv_over_time(const AccessibilityField& field, Scenario s, std::size_t zone) {
    const std::size_t slots = field.grid.n_slots();
    if (slots < 2) throw Error("cv_over_time: needs at least two slots");
    if (!field.has(s))
        throw Error(std::string("cv_over_time: field has no scenario ") + scenario_name(s));
    if (zone >= field.n_zones) throw Error("cv_over_time: zone index out of range");
    std::vector<double> series(slots);
    for (std::size_t k = 0; k < slots; ++k) series[k] = field.at(s, zone, k);
    const SummaryRow row = summarize_values("zone series", std::move(series));
    return row.cv_defined ? row.cv : kNaN;
}

std::vector<double> zone_cv_series(const AccessibilityField& field, Scenario s) {
    std::vector<double> out(field.n_zones);
    for (std::size_t z = 0; z < field.n_zones; ++z) out[z] = cv_over_time(field, s, z);
    return out;
}

namespace {

void set_ratio(double dyn, double ref, double* out, bool* defined) {
    if (ref != 0.0 && std::isfinite(dyn) && std::isfinite(ref)) {
        *out = dyn / ref;
        *defined = true;
    } else {
        *out = kNaN;
        *defined = false;
    }
}

}  // namespace

RatioRow ratios_vs_reference(const SummaryRow& dyn, const SummaryRow& ref) {
    if (dyn.n != ref.n)
        throw Error("ratios_vs_reference: rows summarize different zone populations (" +
                    std::to_string(dyn.n) + " vs " + std::to_string(ref.n) + ")");
    RatioRow r;
    set_ratio(dyn.min, ref.min, &r.min, &r.min_defined);
    set_ratio(dyn.max, ref.max, &r.max, &r.max_defined);
    set_ratio(dyn.mean, ref.mean, &r.mean, &r.mean_defined);
    set_ratio(dyn.sd, ref.sd, &r.sd, &r.sd_defined);
    if (dyn.cv_defined && ref.cv_defined)
        set_ratio(dyn.cv, ref.cv, &r.cv, &r.cv_defined);
    else
        r.cv = kNaN;
    return r;
}

namespace {

std::string opt(double v, bool defined) { return defined ? fmt_double(v) : std::string(); }

}  // namespace

void write_summary_csv(const std::string& path, const AccessibilityField& field) {
    if (!field.has(Scenario::Reference))
        throw Error("write_summary_csv: field must contain the reference scenario");
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw Error("cannot write " + path);
    std::fputs(
        "scenario,slot_start_hhmm,n,min,max,mean,sd,cv,"
        "ratio_min,ratio_max,ratio_mean,ratio_sd,ratio_cv\n",
        f);
    // Reference is slot-invariant; one row stands for the whole day.
    const SummaryRow ref = summarize_across_zones(field, Scenario::Reference, 0);
    std::fprintf(f, "reference,all,%zu,%s,%s,%s,%s,%s,,,,,\n", ref.n, fmt_double(ref.min).c_str(),
                 fmt_double(ref.max).c_str(), fmt_double(ref.mean).c_str(),
                 fmt_double(ref.sd).c_str(), opt(ref.cv, ref.cv_defined).c_str());
    const std::size_t slots = field.grid.n_slots();
    for (const auto& [s, vals] : field.values) {
        (void)vals;
        if (s == Scenario::Reference) continue;
        for (std::size_t k = 0; k < slots; ++k) {
            const SummaryRow row = summarize_across_zones(field, s, k);
            const RatioRow r = ratios_vs_reference(row, ref);
            std::fprintf(f, "%s,%s,%zu,%s,%s,%s,%s,%s,%s,%s,%s,%s,%s\n", scenario_name(s),
                         field.grid.label(k).c_str(), row.n, fmt_double(row.min).c_str(),
                         fmt_double(row.max).c_str(), fmt_double(row.mean).c_str(),
                         fmt_double(row.sd).c_str(), opt(row.cv, row.cv_defined).c_str(),
                         opt(r.min, r.min_defined).c_str(), opt(r.max, r.max_defined).c_str(),
                         opt(r.mean, r.mean_defined).c_str(), opt(r.sd, r.sd_defined).c_str(),
                         opt(r.cv, r.cv_defined).c_str());
        }
    }
    if (std::fclose(f) != 0) throw Error("error closing " + path);
}

void write_zone_cv_csv(const std::string& path, const AccessibilityField& field) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw Error("cannot write " + path);
    std::fputs("zone_id,scenario,cv_percent\n", f);
    for (const auto& [s, vals] : field.values) {
        (void)vals;
        const std::vector<double> cvs = zone_cv_series(field, s);
        for (std::size_t z = 0; z < field.n_zones; ++z) {
            std::fprintf(f, "%s,%s,%s\n", csv_field(field.zone_ids[z]).c_str(), scenario_name(s),
                         std::isnan(cvs[z]) ? "" : fmt_double(cvs[z]).c_str());
        }
    }
    if (std::fclose(f) != 0) throw Error("error closing " + path);
}

}  // namespace dynacc
