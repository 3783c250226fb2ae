#include "dynacc/util.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace dynacc {

int parse_clock(const std::string& text) {
    int h = 0, m = 0, s = 0;
    char extra = 0;
    int fields = std::sscanf(text.c_str(), "%d:%d:%d%c", &h, &m, &s, &extra);
    if (fields == 4 || fields < 2) {
        fields = std::sscanf(text.c_str(), "%d:%d%c", &h, &m, &extra);
        if (fields != 2) throw Error("bad clock value '" + text + "' (expected HH:MM or HH:MM:SS)");
        s = 0;
    }
    if (h < 0 || h > 24 || m < 0 || m > 59 || s < 0 || s > 59)
        throw Error("bad clock value '" + text + "'");
    int total = h * 3600 + m * 60 + s;
    if (total > kSecondsPerDay) throw Error("clock value '" + text + "' past 24:00");
    return total;
}

std::string hhmm_label(int seconds_of_day) {
    int h = seconds_of_day / 3600;
    int m = (seconds_of_day % 3600) / 60;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%02d%02d", h, m);
    return buf;
}

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c == '\r') {
            // tolerate CRLF
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::string csv_field(const std::string& value) {
    if (value.find_first_of(",\"\n") == std::string::npos) return value;
    std::string out = "\"";
    for (char c : value) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

std::string fmt_double(double v) {
    if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    char buf[40];
    // Shortest text that parses back to the same double; plain decimal
    // notation inside the range our quantities live in, scientific outside.
    const double a = std::fabs(v);
    std::to_chars_result r{};
    if (a != 0.0 && (a < 1e-4 || a >= 1e16))
        r = std::to_chars(buf, buf + sizeof buf, v);
    else
        r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
    return std::string(buf, r.ptr);
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t fnv1a64_file(const std::string& path, std::uint64_t h) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read file: " + path);
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        h = fnv1a64(std::string_view(buf, static_cast<std::size_t>(in.gcount())), h);
    }
    return h;
}

std::uint64_t bounded_rand(std::mt19937_64& rng, std::uint64_t n) {
    if (n == 0) throw Error("bounded_rand: empty range");
    // rejection sampling keeps the draw unbiased
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
        v = rng();
    } while (v >= limit);
    return v % n;
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    if (workers == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::atomic<bool> failed{false};
    std::string first_error;
    std::mutex err_mutex;
    auto body = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n || failed.load()) return;
            try {
                fn(i);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lk(err_mutex);
                if (!failed.exchange(true)) first_error = e.what();
                return;
            }
        }
    };
    int spawn = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
    pool.reserve(spawn);
    for (int t = 0; t < spawn; ++t) pool.emplace_back(body);
    for (auto& th : pool) th.join();
    if (failed.load()) throw Error(first_error);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace dynacc
