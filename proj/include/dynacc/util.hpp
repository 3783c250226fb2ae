#ifndef DYNACC_UTIL_HPP
#define DYNACC_UTIL_HPP

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dynacc {

/// Error raised by loaders, builders and the calibration routines.
/// Messages carry file/line context where one exists.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Collects non-fatal warnings emitted while loading or computing.
struct RunLog {
    std::vector<std::string> warnings;
    void warn(std::string msg) { warnings.push_back(std::move(msg)); }
    std::size_t count() const { return warnings.size(); }
};

// ---- time-of-day helpers ----------------------------------------------------

constexpr int kSecondsPerDay = 86400;
constexpr int kProfileSlotSeconds = 300;
constexpr int kProfileSlots = 288;

/// Parses "HH:MM" or "HH:MM:SS" into seconds of day. "24:00" maps to 86400.
int parse_clock(const std::string& text);

/// Formats seconds-of-day as a four-digit "hhmm" label (e.g. 27000 -> "0730").
std::string hhmm_label(int seconds_of_day);

// ---- CSV --------------------------------------------------------------------

/// Splits one CSV line. Handles double-quoted fields with "" escapes.
std::vector<std::string> split_csv_row(const std::string& line);

/// Quotes a value for CSV output only when it needs quoting.
std::string csv_field(const std::string& value);

/// Formats a double with enough digits to round-trip through text.
std::string fmt_double(double v);

// ---- hashing ----------------------------------------------------------------

constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = kFnvOffset);

/// Hashes a file's contents. Throws Error if the file cannot be read.
std::uint64_t fnv1a64_file(const std::string& path, std::uint64_t h = kFnvOffset);

// ---- deterministic random helpers -------------------------------------------

/// Uniform integer in [0, n) drawn from the engine's standardized output
/// stream. std::uniform_int_distribution is implementation-defined, so it
/// cannot be used where cross-run reproducibility is part of the contract.
std::uint64_t bounded_rand(std::mt19937_64& rng, std::uint64_t n);

// ---- parallel map ------------------------------------------------------------

/// Runs fn(0..n-1) on `workers` threads (0 = hardware concurrency).
/// Tasks must write to disjoint state; scheduling order is unspecified.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

// ---- misc --------------------------------------------------------------------

std::string read_file(const std::string& path);

}  // namespace dynacc

#endif
