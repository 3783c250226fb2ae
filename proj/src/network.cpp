#include "dynacc/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>

namespace dynacc {

namespace {

const double kKmhToMs = 1000.0 / 3600.0;

struct CsvReader {
    std::ifstream in;
    std::string path;
    long line_no = 0;
    std::unordered_map<std::string, std::size_t> columns;

    CsvReader(const std::string& file, const std::vector<std::string>& required)
        : in(file), path(file) {
        if (!in) throw Error("cannot open " + file);
        std::string header;
        if (!std::getline(in, header)) throw Error(file + ": empty file, header row required");
        ++line_no;
        auto names = split_csv_row(header);
        for (std::size_t i = 0; i < names.size(); ++i) columns[names[i]] = i;
        for (const auto& col : required) {
            if (!columns.count(col))
                throw Error(file + ": missing required column '" + col + "'");
        }
    }

    bool next(std::vector<std::string>& row) {
        std::string line;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty() || line == "\r") continue;
            row = split_csv_row(line);
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw Error(path + ":" + std::to_string(line_no) + ": " + what);
    }

    const std::string& field(const std::vector<std::string>& row, const std::string& col) const {
        std::size_t i = columns.at(col);
        if (i >= row.size()) fail("missing field '" + col + "'");
        return row[i];
    }

    double num(const std::vector<std::string>& row, const std::string& col) const {
        const std::string& s = field(row, col);
        try {
            std::size_t used = 0;
            double v = std::stod(s, &used);
            if (used != s.size()) fail("malformed number '" + s + "' in column " + col);
            return v;
        } catch (const Error&) {
            throw;
        } catch (...) {
            fail("malformed number '" + s + "' in column " + col);
        }
    }
};

}  // namespace

std::uint32_t RoadNetwork::junction_index(const std::string& id) const {
    auto it = junction_by_id_.find(id);
    if (it == junction_by_id_.end()) throw Error("unknown junction id: " + id);
    return it->second;
}

void RoadNetwork::rebuild_indexes() {
    junction_by_id_.clear();
    junction_by_id_.reserve(junctions.size());
    for (std::uint32_t i = 0; i < junctions.size(); ++i) {
        if (!junction_by_id_.emplace(junctions[i].id, i).second)
            throw Error("duplicate junction id: " + junctions[i].id);
    }
    out_arcs_.assign(junctions.size(), {});
    in_arcs_.assign(junctions.size(), {});
    for (std::uint32_t a = 0; a < arcs.size(); ++a) {
        out_arcs_[arcs[a].from].push_back(a);
        in_arcs_[arcs[a].to].push_back(a);
    }
}

double RoadNetwork::arc_speed(std::uint32_t arc, double clock_s) const {
    const Arc& e = arcs[arc];
    if (e.profile < 0) return e.freeflow_kmh;
    int slot = static_cast<int>(clock_s / kProfileSlotSeconds) % kProfileSlots;
    return e.freeflow_kmh * profiles[e.profile].factors[slot];
}

double RoadNetwork::traverse(std::uint32_t arc, double entry_s) const {
    const Arc& e = arcs[arc];
    const double ff_ms = e.freeflow_kmh * kKmhToMs;
    if (e.profile < 0) return entry_s + e.length_m / ff_ms;

    const auto& factors = profiles[e.profile].factors;
    double t = entry_s;
    double remaining = e.length_m;
    for (;;) {
        double k = std::floor(t / kProfileSlotSeconds);
        int slot = static_cast<int>(std::fmod(k, kProfileSlots));
        if (slot < 0) slot += kProfileSlots;
        double v = ff_ms * factors[slot];
        double boundary = (k + 1.0) * kProfileSlotSeconds;
        double step = v * (boundary - t);
        if (remaining <= step) return t + remaining / v;
        remaining -= step;
        t = boundary;
    }
}

RoadNetwork RoadNetwork::filter_by_frc(int max_frc) const {
    if (max_frc < 0 || max_frc > 7) throw Error("max_frc must be in [0,7]");
    RoadNetwork out;
    out.profiles = profiles;
    std::vector<bool> keep_junction(junctions.size(), false);
    for (const Arc& a : arcs) {
        if (a.frc <= max_frc) {
            keep_junction[a.from] = true;
            keep_junction[a.to] = true;
        }
    }
    std::vector<std::uint32_t> remap(junctions.size(), 0);
    for (std::uint32_t i = 0; i < junctions.size(); ++i) {
        if (keep_junction[i]) {
            remap[i] = static_cast<std::uint32_t>(out.junctions.size());
            out.junctions.push_back(junctions[i]);
        }
    }
    for (const Arc& a : arcs) {
        if (a.frc > max_frc) continue;
        Arc copy = a;
        copy.from = remap[a.from];
        copy.to = remap[a.to];
        out.arcs.push_back(copy);
    }
    if (out.arcs.empty())
        throw Error("FRC filter at max_frc=" + std::to_string(max_frc) + " removed every arc");
    out.rebuild_indexes();
    return out;
}

RoadNetwork load_network(const std::string& node_file,
                         const std::string& arc_file,
                         const std::string& profile_file) {
    RoadNetwork net;

    {
        CsvReader r(node_file, {"node_id", "x", "y"});
        std::vector<std::string> row;
        while (r.next(row)) {
            Junction j;
            j.id = r.field(row, "node_id");
            if (j.id.empty()) r.fail("empty node_id");
            j.x = r.num(row, "x");
            j.y = r.num(row, "y");
            if (!std::isfinite(j.x) || !std::isfinite(j.y))
                r.fail("non-finite coordinate for node " + j.id);
            net.junctions.push_back(std::move(j));
        }
    }
    if (net.junctions.empty()) throw Error(node_file + ": no junctions");

    std::unordered_map<std::string, std::uint32_t> node_ix;
    for (std::uint32_t i = 0; i < net.junctions.size(); ++i) {
        if (!node_ix.emplace(net.junctions[i].id, i).second)
            throw Error(node_file + ": duplicate node_id " + net.junctions[i].id);
    }

    std::unordered_map<std::string, std::int32_t> profile_ix;
    {
        CsvReader r(profile_file, {"profile_id", "slot", "factor"});
        std::vector<std::string> row;
        std::unordered_map<std::string, std::vector<bool>> seen;
        while (r.next(row)) {
            const std::string& pid = r.field(row, "profile_id");
            if (pid.empty()) r.fail("empty profile_id");
            double slot_v = r.num(row, "slot");
            int slot = static_cast<int>(slot_v);
            if (slot != slot_v || slot < 0 || slot >= kProfileSlots)
                r.fail("slot must be an integer in [0,287], got '" + r.field(row, "slot") + "'");
            double factor = r.num(row, "factor");
            if (!(factor > 0.0)) r.fail("profile " + pid + ": factor must be > 0");
            if (factor > 2.0)
                r.fail("profile " + pid + ": factor " + fmt_double(factor) +
                       " above 2.0, looks like a unit error");
            auto it = profile_ix.find(pid);
            if (it == profile_ix.end()) {
                it = profile_ix.emplace(pid, static_cast<std::int32_t>(net.profiles.size())).first;
                net.profiles.push_back(SpeedProfile{pid, {}});
                seen[pid].assign(kProfileSlots, false);
            }
            auto& mask = seen[pid];
            if (mask[slot]) r.fail("profile " + pid + ": duplicate slot " + std::to_string(slot));
            mask[slot] = true;
            net.profiles[it->second].factors[slot] = factor;
        }
        for (const auto& [pid, mask] : seen) {
            long filled = std::count(mask.begin(), mask.end(), true);
            if (filled != kProfileSlots)
                throw Error(profile_file + ": profile " + pid + " has " + std::to_string(filled) +
                            " slots, expected 288");
        }
    }

    {
        CsvReader r(arc_file,
                    {"arc_id", "from", "to", "length_m", "freeflow_kmh", "frc", "profile_id"});
        std::vector<std::string> row;
        std::unordered_map<std::string, bool> arc_ids;
        while (r.next(row)) {
            Arc a;
            a.id = r.field(row, "arc_id");
            if (a.id.empty()) r.fail("empty arc_id");
            if (arc_ids.count(a.id)) r.fail("duplicate arc_id " + a.id);
            arc_ids[a.id] = true;
            const std::string& from_id = r.field(row, "from");
            const std::string& to_id = r.field(row, "to");
            auto f = node_ix.find(from_id);
            if (f == node_ix.end()) r.fail("arc " + a.id + " references missing node " + from_id);
            auto t = node_ix.find(to_id);
            if (t == node_ix.end()) r.fail("arc " + a.id + " references missing node " + to_id);
            a.from = f->second;
            a.to = t->second;
            a.length_m = r.num(row, "length_m");
            if (!(a.length_m > 0.0)) r.fail("arc " + a.id + ": length_m must be > 0");
            a.freeflow_kmh = r.num(row, "freeflow_kmh");
            if (!(a.freeflow_kmh > 0.0)) r.fail("arc " + a.id + ": freeflow_kmh must be > 0");
            double frc_v = r.num(row, "frc");
            a.frc = static_cast<int>(frc_v);
            if (a.frc != frc_v || a.frc < 0 || a.frc > 7)
                r.fail("arc " + a.id + ": frc must be an integer in [0,7]");
            const std::string& pid = r.field(row, "profile_id");
            if (!pid.empty()) {
                auto p = profile_ix.find(pid);
                if (p == profile_ix.end())
                    r.fail("arc " + a.id + " references missing profile " + pid);
                a.profile = p->second;
            }
            net.arcs.push_back(std::move(a));
        }
    }

    net.rebuild_indexes();
    return net;
}

std::vector<double> freeflow_seconds(const RoadNetwork& net, std::uint32_t origin, bool reverse) {
    std::vector<double> dist(net.junctions.size(), kUnreachableSeconds);
    using Item = std::pair<double, std::uint32_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    dist[origin] = 0.0;
    pq.emplace(0.0, origin);
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (d > dist[u]) continue;
        const auto& edges = reverse ? net.incoming(u) : net.outgoing(u);
        for (std::uint32_t ai : edges) {
            const Arc& a = net.arcs[ai];
            std::uint32_t v = reverse ? a.from : a.to;
            double nd = d + a.length_m / (a.freeflow_kmh * kKmhToMs);
            if (nd < dist[v]) {
                dist[v] = nd;
                pq.emplace(nd, v);
            }
        }
    }
    return dist;
}

}  // namespace dynacc
