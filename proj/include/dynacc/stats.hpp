#ifndef DYNACC_STATS_HPP
#define DYNACC_STATS_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "dynacc/accessibility.hpp"

namespace dynacc {

/// Descriptive summary of one value set. sd is the population standard
/// deviation (divide by n). cv is in percent and only defined for a
/// positive mean.
struct SummaryRow {
    std::string label;
    std::size_t n = 0;
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double sd = 0.0;
    double cv = 0.0;
    bool cv_defined = false;
};

/// Element-wise scenario/reference ratios. A ratio is undefined when the
/// reference entry is zero (or either cv is undefined); undefined entries
/// are NaN with the flag cleared.
struct RatioRow {
    double min = 0.0, max = 0.0, mean = 0.0, sd = 0.0, cv = 0.0;
    bool min_defined = false, max_defined = false, mean_defined = false, sd_defined = false,
         cv_defined = false;
};

/// Values are accumulated in sorted order, so the summary is exactly
/// invariant under permutation of the input.
SummaryRow summarize_values(const std::string& label, std::vector<double> values);

SummaryRow summarize_across_zones(const AccessibilityField& field, Scenario s, std::size_t slot);

/// Percent CV of one zone's value series over the day. Needs at least two
/// slots; a zero mean yields NaN (undefined, flagged by the caller's use).
double cv_over_time(const AccessibilityField& field, Scenario s, std::size_t zone);

/// Per-zone cv_over_time for a whole scenario; NaN where undefined.
std::vector<double> zone_cv_series(const AccessibilityField& field, Scenario s);

RatioRow ratios_vs_reference(const SummaryRow& dyn, const SummaryRow& ref);

/// One row per (scenario, slot) with ratios against the reference summary;
/// the reference itself appears once with slot "all" and empty ratio cells.
void write_summary_csv(const std::string& path, const AccessibilityField& field);

void write_zone_cv_csv(const std::string& path, const AccessibilityField& field);

}  // namespace dynacc

#endif
