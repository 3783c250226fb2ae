#include "dynacc/synth.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "dynacc/util.hpp"

namespace dynacc {

namespace {

std::string node_id(int r, int c) { return "n" + std::to_string(r) + "_" + std::to_string(c); }

std::string zone_id(int br, int bc) { return "z" + std::to_string(br) + "_" + std::to_string(bc); }

struct EdgeKind {
    double kmh;
    int frc;
    bool profiled;
};

}  // namespace

void write_grid_city(const std::string& dir, const GridCityParams& p) {
    if (p.rows < 2 || p.cols < 2) throw Error("grid city: need at least a 2x2 lattice");
    if (p.zone_rows < 1 || p.zone_cols < 1 || p.rows % p.zone_rows != 0 ||
        p.cols % p.zone_cols != 0)
        throw Error("grid city: zone grid must evenly divide the junction grid");
    const int block_r = p.rows / p.zone_rows;
    const int block_c = p.cols / p.zone_cols;
    const double s = p.spacing_m;

    // nodes
    {
        std::ofstream out(dir + "/nodes.csv", std::ios::binary);
        if (!out) throw Error("cannot write " + dir + "/nodes.csv");
        out << "node_id,x,y\n";
        for (int r = 0; r < p.rows; ++r)
            for (int c = 0; c < p.cols; ++c)
                out << node_id(r, c) << ',' << fmt_double(c * s) << ',' << fmt_double(r * s)
                    << '\n';
    }

    // arcs: both directions of every lattice edge
    const int alley_row = p.rows / 2;
    const std::set<int> alley_cols = {p.cols / 4, (3 * p.cols) / 4};
    auto classify = [&](int r1, int c1, int r2, int c2) -> EdgeKind {
        const bool horizontal = (r1 == r2);
        if (horizontal && r1 == alley_row && alley_cols.count(std::min(c1, c2)))
            return {p.alley_kmh, 7, false};
        const bool boundary_h =
            horizontal && (r1 == 0 || r1 == p.rows - 1);
        const bool boundary_v =
            !horizontal && (c1 == 0 || c1 == p.cols - 1);
        if (boundary_h || boundary_v) return {p.ring_kmh, 0, true};
        return {p.street_kmh, 6, true};
    };
    {
        std::ofstream out(dir + "/arcs.csv", std::ios::binary);
        if (!out) throw Error("cannot write " + dir + "/arcs.csv");
        out << "arc_id,from,to,length_m,freeflow_kmh,frc,profile_id\n";
        auto emit_pair = [&](int r1, int c1, int r2, int c2) {
            const EdgeKind k = classify(r1, c1, r2, c2);
            const std::string profile = k.profiled ? "peak" : "";
            const std::string a = node_id(r1, c1), b = node_id(r2, c2);
            out << "e_" << a << "_" << b << ',' << a << ',' << b << ',' << fmt_double(s) << ','
                << fmt_double(k.kmh) << ',' << k.frc << ',' << profile << '\n';
            out << "e_" << b << "_" << a << ',' << b << ',' << a << ',' << fmt_double(s) << ','
                << fmt_double(k.kmh) << ',' << k.frc << ',' << profile << '\n';
        };
        for (int r = 0; r < p.rows; ++r)
            for (int c = 0; c + 1 < p.cols; ++c) emit_pair(r, c, r, c + 1);
        for (int r = 0; r + 1 < p.rows; ++r)
            for (int c = 0; c < p.cols; ++c) emit_pair(r, c, r + 1, c);
    }

    // speed profile: full day of 5-minute slots
    {
        std::ofstream out(dir + "/profiles.csv", std::ios::binary);
        if (!out) throw Error("cannot write " + dir + "/profiles.csv");
        out << "profile_id,slot,factor\n";
        for (int slot = 0; slot < kProfileSlots; ++slot) {
            const int t = slot * kProfileSlotSeconds;
            const bool peak = !p.degenerate && t >= p.peak_start_s && t < p.peak_end_s;
            out << "peak," << slot << ',' << fmt_double(peak ? p.peak_factor : 1.0) << '\n';
        }
    }

    // zones: one rectangle per block, 100 m margin around the block's
    // junctions, which leaves a strip of no-zone land between blocks
    const double margin = 100.0;
    auto zone_rect = [&](int br, int bc, double* x0, double* y0, double* x1, double* y1) {
        *x0 = bc * block_c * s - margin;
        *x1 = (bc * block_c + block_c - 1) * s + margin;
        *y0 = br * block_r * s - margin;
        *y1 = (br * block_r + block_r - 1) * s + margin;
    };
    {
        std::ofstream out(dir + "/zones.geojson", std::ios::binary);
        if (!out) throw Error("cannot write " + dir + "/zones.geojson");
        out << "{\"type\":\"FeatureCollection\",\"features\":[\n";
        bool first = true;
        for (int br = 0; br < p.zone_rows; ++br) {
            for (int bc = 0; bc < p.zone_cols; ++bc) {
                double x0, y0, x1, y1;
                zone_rect(br, bc, &x0, &y0, &x1, &y1);
                if (!first) out << ",\n";
                first = false;
                out << "{\"type\":\"Feature\",\"properties\":{\"zone_id\":\"" << zone_id(br, bc)
                    << "\"},\"geometry\":{\"type\":\"Polygon\",\"coordinates\":[[[" << fmt_double(x0)
                    << ',' << fmt_double(y0) << "],[" << fmt_double(x1) << ',' << fmt_double(y0)
                    << "],[" << fmt_double(x1) << ',' << fmt_double(y1) << "],[" << fmt_double(x0)
                    << ',' << fmt_double(y1) << "],[" << fmt_double(x0) << ',' << fmt_double(y0)
                    << "]]]}}";
            }
        }
        out << "\n]}\n";
    }

    // events
    {
        std::ofstream out(dir + "/events.csv", std::ios::binary);
        if (!out) throw Error("cannot write " + dir + "/events.csv");
        out << "user_id,timestamp_iso8601_local,x,y\n";
        auto stamp = [](const char* date, int tod) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%sT%02d:%02d:%02d", date, tod / 3600,
                          (tod / 60) % 60, tod % 60);
            return std::string(buf);
        };
        const int n_zones = p.zone_rows * p.zone_cols;
        auto zone_center = [&](int z, double* x, double* y) {
            double x0, y0, x1, y1;
            zone_rect(z / p.zone_cols, z % p.zone_cols, &x0, &y0, &x1, &y1);
            *x = 0.5 * (x0 + x1);
            *y = 0.5 * (y0 + y1);
        };
        if (p.degenerate) {
            // same user set in every zone and every slot of one Tuesday
            for (int z = 0; z < n_zones; ++z) {
                double x, y;
                zone_center(z, &x, &y);
                for (int u = 0; u < 3; ++u) {
                    for (int tod = 7 * 3600; tod < 24 * 3600; tod += 900) {
                        out << "u" << z << "_" << u << ',' << stamp("2013-01-01", tod) << ','
                            << fmt_double(x) << ',' << fmt_double(y) << '\n';
                    }
                }
            }
        } else {
            // 2013-01-01 was a Tuesday; the last two dates fall outside the
            // kept weekdays and must end up filtered
            const char* dates[6] = {"2013-01-01", "2013-01-02", "2013-01-03",
                                    "2013-01-08", "2013-01-04", "2013-01-07"};
            std::mt19937_64 rng(p.seed);
            for (int u = 0; u < p.n_users; ++u) {
                const int home = int(bounded_rand(rng, std::uint64_t(n_zones)));
                double cx, cy;
                zone_center(home, &cx, &cy);
                const int n_posts = 2 + int(bounded_rand(rng, 5));
                for (int e = 0; e < n_posts; ++e) {
                    const char* date = dates[bounded_rand(rng, 6)];
                    // minute resolution, starting at 05:00 so a share of
                    // posts precedes the analysis window
                    const int tod = 5 * 3600 + 60 * int(bounded_rand(rng, 19 * 60));
                    double x = cx, y = cy;
                    if (bounded_rand(rng, 16) == 0) {
                        x = -10.0 * s;  // off the map entirely
                        y = -10.0 * s;
                    } else {
                        const double span = 0.3 * std::min(block_r, block_c) * s;
                        x = cx + (double(bounded_rand(rng, 2001)) - 1000.0) / 1000.0 * span;
                        y = cy + (double(bounded_rand(rng, 2001)) - 1000.0) / 1000.0 * span;
                    }
                    out << "u" << u << ',' << stamp(date, tod) << ',' << fmt_double(x) << ','
                        << fmt_double(y) << '\n';
                }
            }
            // one sweep user covering every slot on a kept day, so no slot
            // is ever empty
            double x, y;
            zone_center(0, &x, &y);
            for (int tod = 7 * 3600; tod < 24 * 3600; tod += 900)
                out << "usweep," << stamp("2013-01-01", tod) << ',' << fmt_double(x) << ','
                    << fmt_double(y) << '\n';
            // two broken rows the loader must reject
            out << "ubad,2013-13-41T99:99:00," << fmt_double(x) << ',' << fmt_double(y) << '\n';
            out << "ubad2,2013-01-01T12:00:00,not_a_number," << fmt_double(y) << '\n';
        }
    }

    // trips: distance decay on straight-line distance between zone centers
    {
        std::ofstream out(dir + "/trips.csv", std::ios::binary);
        if (!out) throw Error("cannot write " + dir + "/trips.csv");
        out << "origin_zone,dest_zone,trips\n";
        const int n_zones = p.zone_rows * p.zone_cols;
        auto center = [&](int z, double* x, double* y) {
            double x0, y0, x1, y1;
            zone_rect(z / p.zone_cols, z % p.zone_cols, &x0, &y0, &x1, &y1);
            *x = 0.5 * (x0 + x1);
            *y = 0.5 * (y0 + y1);
        };
        for (int o = 0; o < n_zones; ++o) {
            double ox, oy;
            center(o, &ox, &oy);
            for (int d = 0; d < n_zones; ++d) {
                double dx, dy;
                center(d, &dx, &dy);
                const double km = std::hypot(dx - ox, dy - oy) / 1000.0;
                const double t = std::max(1.0, std::round(500.0 * std::exp(-0.5 * km)));
                out << zone_id(o / p.zone_cols, o % p.zone_cols) << ','
                    << zone_id(d / p.zone_cols, d % p.zone_cols) << ',' << fmt_double(t) << '\n';
            }
        }
    }

    // run configs
    auto write_config = [&](const std::string& name, const std::string& alpha) {
        std::ofstream out(dir + "/" + name, std::ios::binary);
        if (!out) throw Error("cannot write " + dir + "/" + name);
        out << "nodes = nodes.csv\n"
               "arcs = arcs.csv\n"
               "profiles = profiles.csv\n"
               "zones = zones.geojson\n"
               "events = events.csv\n"
               "trips = trips.csv\n"
               "output_dir = out\n"
               "grid_start = 07:00\n"
               "grid_end = 24:00\n"
               "grid_step_s = 900\n"
               "max_frc = 7\n"
               "sample_fraction = 0.25\n"
            << "seed = " << p.seed << "\n"
            << "alpha = " << alpha << "\n"
            << "scenarios = reference,dynamic_accessibility,dynamic_congestion,"
               "dynamic_attractiveness\n"
               "workers = 4\n"
               "timezone = Europe/Madrid\n";
    };
    write_config("config.cfg", "-0.12957849");
    write_config("config_calibrate.cfg", "calibrate");
}

}  // namespace dynacc
