#ifndef TESTS_SUPPORT_HELPERS_HPP
#define TESTS_SUPPORT_HELPERS_HPP

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynacc/network.hpp"
#include "dynacc/util.hpp"

namespace testsupport {

/// Scratch directory removed on destruction.
struct TempDir {
    std::string path;
    TempDir() {
        std::string tmpl =
            (std::filesystem::temp_directory_path() / "dynacc_test_XXXXXX").string();
        std::vector<char> buf(tmpl.begin(), tmpl.end());
        buf.push_back('\0');
        if (!mkdtemp(buf.data())) throw std::runtime_error("mkdtemp failed");
        path = buf.data();
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return path + "/" + name; }
};

inline void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

/// Builds a RoadNetwork directly in memory, skipping the CSV loaders.
struct NetBuilder {
    dynacc::RoadNetwork net;
    std::map<std::string, std::int32_t> profile_index;

    NetBuilder& junction(const std::string& id, double x, double y) {
        net.junctions.push_back({id, x, y});
        return *this;
    }

    /// Profile with one factor everywhere, optionally overridden on
    /// [from_s, to_s).
    NetBuilder& profile(const std::string& id, double base, double factor = 1.0,
                        int from_s = 0, int to_s = 0) {
        dynacc::SpeedProfile p;
        p.id = id;
        for (int slot = 0; slot < dynacc::kProfileSlots; ++slot) {
            const int t = slot * dynacc::kProfileSlotSeconds;
            p.factors[slot] = (t >= from_s && t < to_s) ? factor : base;
        }
        profile_index[id] = std::int32_t(net.profiles.size());
        net.profiles.push_back(std::move(p));
        return *this;
    }

    /// Profile from an explicit 288-slot factor vector.
    NetBuilder& profile_slots(const std::string& id, const std::vector<double>& factors) {
        dynacc::SpeedProfile p;
        p.id = id;
        for (int slot = 0; slot < dynacc::kProfileSlots; ++slot)
            p.factors[slot] = factors.at(std::size_t(slot));
        profile_index[id] = std::int32_t(net.profiles.size());
        net.profiles.push_back(std::move(p));
        return *this;
    }

    NetBuilder& arc(const std::string& id, const std::string& from, const std::string& to,
                    double length_m, double kmh, int frc = 6,
                    const std::string& profile_id = "") {
        dynacc::Arc a;
        a.id = id;
        a.from = find_junction(from);
        a.to = find_junction(to);
        a.length_m = length_m;
        a.freeflow_kmh = kmh;
        a.frc = frc;
        a.profile = profile_id.empty() ? -1 : profile_index.at(profile_id);
        net.arcs.push_back(std::move(a));
        return *this;
    }

    dynacc::RoadNetwork build() {
        net.rebuild_indexes();
        return std::move(net);
    }

private:
    std::uint32_t find_junction(const std::string& id) const {
        for (std::size_t i = 0; i < net.junctions.size(); ++i)
            if (net.junctions[i].id == id) return std::uint32_t(i);
        throw std::runtime_error("NetBuilder: unknown junction " + id);
    }
};

/// One rectangular GeoJSON feature carrying a zone_id property.
inline std::string geojson_rect(const std::string& id, double x0, double y0, double x1,
                                double y1) {
    auto n = [](double v) { return dynacc::fmt_double(v); };
    return "{\"type\":\"Feature\",\"properties\":{\"zone_id\":\"" + id +
           "\"},\"geometry\":{\"type\":\"Polygon\",\"coordinates\":[[[" + n(x0) + "," + n(y0) +
           "],[" + n(x1) + "," + n(y0) + "],[" + n(x1) + "," + n(y1) + "],[" + n(x0) + "," +
           n(y1) + "],[" + n(x0) + "," + n(y0) + "]]]}}";
}

inline std::string geojson_collection(const std::vector<std::string>& features) {
    std::string out = "{\"type\":\"FeatureCollection\",\"features\":[";
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (i) out += ',';
        out += features[i];
    }
    out += "]}";
    return out;
}

/// Earliest arrivals by exhaustive enumeration of all simple paths. Makes
/// no assumption beyond the traverse function itself, so it is a fair
/// optimality oracle for the label-setting search.
inline std::vector<double> oracle_earliest_arrivals(const dynacc::RoadNetwork& net,
                                                    std::uint32_t origin, double departure_s) {
    const std::size_t n = net.junctions.size();
    std::vector<double> best(n, dynacc::kUnreachableSeconds);
    std::vector<char> on_path(n, 0);
    best[origin] = departure_s;

    struct Dfs {
        const dynacc::RoadNetwork& net;
        std::vector<double>& best;
        std::vector<char>& on_path;
        void run(std::uint32_t u, double t) {
            if (t < best[u]) best[u] = t;
            on_path[u] = 1;
            for (std::uint32_t arc : net.outgoing(u)) {
                const std::uint32_t v = net.arcs[arc].to;
                if (on_path[v]) continue;
                run(v, net.traverse(arc, t));
            }
            on_path[u] = 0;
        }
    } dfs{net, best, on_path};
    dfs.run(origin, departure_s);
    return best;
}

/// Deterministic random digraph for oracle comparisons. Arcs may be
/// parallel; a random subset carries a random (bounded) speed profile.
inline dynacc::RoadNetwork random_network(std::mt19937_64& rng, int n_nodes, int n_arcs) {
    using dynacc::bounded_rand;
    NetBuilder b;
    for (int i = 0; i < n_nodes; ++i)
        b.junction("j" + std::to_string(i), double(i % 4) * 1000.0, double(i / 4) * 1000.0);
    const int n_profiles = 1 + int(bounded_rand(rng, 3));
    for (int p = 0; p < n_profiles; ++p) {
        std::vector<double> factors(dynacc::kProfileSlots);
        for (double& f : factors) f = 0.3 + 0.005 * double(bounded_rand(rng, 241));  // 0.3..1.5
        b.profile_slots("p" + std::to_string(p), factors);
    }
    int made = 0;
    while (made < n_arcs) {
        const int u = int(bounded_rand(rng, std::uint64_t(n_nodes)));
        const int v = int(bounded_rand(rng, std::uint64_t(n_nodes)));
        if (u == v) continue;
        const double len = 100.0 + double(bounded_rand(rng, 2901));
        const double kmh = 20.0 + double(bounded_rand(rng, 81));
        std::string prof;
        if (bounded_rand(rng, 3) != 0) prof = "p" + std::to_string(bounded_rand(rng, std::uint64_t(n_profiles)));
        b.arc("a" + std::to_string(made), "j" + std::to_string(u), "j" + std::to_string(v), len,
              kmh, 6, prof);
        ++made;
    }
    return b.build();
}

}  // namespace testsupport

#endif
