#include "dynacc/zones.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace dynacc {

namespace {

Ring parse_ring(const nlohmann::json& coords, const std::string& label) {
    Ring ring;
    for (const auto& pt : coords) {
        if (!pt.is_array() || pt.size() < 2)
            throw Error("zone " + label + ": malformed coordinate");
        ring.push_back(Point{pt[0].get<double>(), pt[1].get<double>()});
    }
    // GeoJSON rings repeat the first vertex; store them open.
    if (ring.size() >= 2 && ring.front().x == ring.back().x && ring.front().y == ring.back().y)
        ring.pop_back();
    return ring;
}

PolygonPart parse_polygon(const nlohmann::json& coords, const std::string& label) {
    PolygonPart part;
    if (!coords.is_array() || coords.empty())
        throw Error("zone " + label + ": polygon without rings");
    part.outer = parse_ring(coords[0], label);
    for (std::size_t i = 1; i < coords.size(); ++i)
        part.holes.push_back(parse_ring(coords[i], label));
    return part;
}

}  // namespace

std::size_t ZoneSystem::index_of(const std::string& id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) throw Error("unknown zone id: " + id);
    return it->second;
}

std::size_t ZoneSystem::locate(Point p) const {
    for (std::size_t i = 0; i < zones.size(); ++i) {
        if (!zones[i].bbox.contains(p)) continue;
        if (contains(zones[i].geom, p)) return i;
    }
    return npos;
}

void ZoneSystem::rebuild_index() {
    by_id_.clear();
    for (std::size_t i = 0; i < zones.size(); ++i) {
        if (!by_id_.emplace(zones[i].id, i).second)
            throw Error("duplicate zone id: " + zones[i].id);
    }
}

ZoneSystem load_zones(const std::string& zone_file, const RoadNetwork& net, RunLog* log) {
    std::ifstream in(zone_file);
    if (!in) throw Error("cannot open " + zone_file);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw Error(zone_file + ": invalid JSON: " + e.what());
    }
    if (!doc.contains("features") || !doc["features"].is_array() || doc["features"].empty())
        throw Error(zone_file + ": expected a non-empty FeatureCollection");

    ZoneSystem zs;
    for (const auto& feature : doc["features"]) {
        Zone z;
        if (!feature.contains("properties") || !feature["properties"].contains("zone_id"))
            throw Error(zone_file + ": feature without zone_id property");
        const auto& zid = feature["properties"]["zone_id"];
        z.id = zid.is_string() ? zid.get<std::string>() : zid.dump();
        if (!feature.contains("geometry") || feature["geometry"].is_null())
            throw Error("zone " + z.id + ": missing geometry");
        const auto& geom = feature["geometry"];
        std::string type = geom.value("type", "");
        if (type == "Polygon") {
            z.geom.parts.push_back(parse_polygon(geom["coordinates"], z.id));
        } else if (type == "MultiPolygon") {
            for (const auto& poly : geom["coordinates"])
                z.geom.parts.push_back(parse_polygon(poly, z.id));
        } else {
            throw Error("zone " + z.id + ": unsupported geometry type '" + type + "'");
        }
        validate_geometry(z.geom, z.id);
        z.bbox = bounding_box(z.geom);
        z.centroid = interior_point(z.geom);

        // nearest junction, ties broken by id for load-order independence
        double best_d = std::numeric_limits<double>::infinity();
        std::uint32_t best_j = 0;
        for (std::uint32_t j = 0; j < net.junctions.size(); ++j) {
            double dx = net.junctions[j].x - z.centroid.x;
            double dy = net.junctions[j].y - z.centroid.y;
            double d = dx * dx + dy * dy;
            if (d < best_d ||
                (d == best_d && net.junctions[j].id < net.junctions[best_j].id)) {
                best_d = d;
                best_j = j;
            }
        }
        z.centroid_junction = best_j;

        for (std::uint32_t j = 0; j < net.junctions.size(); ++j) {
            if (!z.bbox.contains(Point{net.junctions[j].x, net.junctions[j].y})) continue;
            if (contains(z.geom, Point{net.junctions[j].x, net.junctions[j].y}))
                z.junctions_inside.push_back(j);
        }

        if (log && !contains(z.geom, Point{net.junctions[best_j].x, net.junctions[best_j].y})) {
            log->warn("zone " + z.id + ": centroid snapped to junction " +
                      net.junctions[best_j].id + " outside the zone polygon");
        }
        zs.zones.push_back(std::move(z));
    }
    zs.rebuild_index();
    return zs;
}

double self_potential_time(const RoadNetwork& net, const Zone& zone, double sample_fraction,
                           std::uint64_t seed, std::size_t* n_sampled, RunLog* log) {
    if (n_sampled) *n_sampled = 0;
    if (zone.junctions_inside.empty()) {
        if (log) log->warn("zone " + zone.id + ": no junctions inside polygon, self time set to 0");
        return 0.0;
    }
    // canonical candidate order: sort by junction id, not load order
    std::vector<std::uint32_t> candidates = zone.junctions_inside;
    std::sort(candidates.begin(), candidates.end(),
              [&](std::uint32_t a, std::uint32_t b) {
                  return net.junctions[a].id < net.junctions[b].id;
              });
    std::size_t n = candidates.size();
    std::size_t k = static_cast<std::size_t>(std::ceil(sample_fraction * static_cast<double>(n)));
    k = std::min(std::max<std::size_t>(k, 1), n);

    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + bounded_rand(rng, n - i);
        std::swap(candidates[i], candidates[j]);
    }

    std::vector<double> to_centroid = freeflow_seconds(net, zone.centroid_junction, true);
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < k; ++i) {
        double t = to_centroid[candidates[i]];
        if (t == kUnreachableSeconds) {
            if (log)
                log->warn("zone " + zone.id + ": sampled junction " +
                          net.junctions[candidates[i]].id + " cannot reach the centroid junction");
            continue;
        }
        sum += t;
        ++used;
    }
    if (n_sampled) *n_sampled = used;
    if (used == 0) {
        if (log) log->warn("zone " + zone.id + ": no sampled junction reaches the centroid");
        return 0.0;
    }
    return sum / static_cast<double>(used) / 60.0;
}

void compute_self_times(ZoneSystem& zs, const RoadNetwork& net, double sample_fraction,
                        std::uint64_t seed, int workers, RunLog* log) {
    std::vector<RunLog> local_logs(zs.size());
    parallel_for(zs.size(), workers, [&](std::size_t i) {
        Zone& z = zs.zones[i];
        z.self_time_min = self_potential_time(net, z, sample_fraction,
                                              seed ^ static_cast<std::uint64_t>(i),
                                              &z.n_sampled, &local_logs[i]);
    });
    if (log) {
        for (auto& l : local_logs)
            for (auto& w : l.warnings) log->warn(std::move(w));
    }
}

void write_self_times_csv(const std::string& path, const ZoneSystem& zs) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << "zone_id,self_time_min,n_sampled\n";
    for (const Zone& z : zs.zones) {
        out << csv_field(z.id) << ',' << fmt_double(z.self_time_min) << ',' << z.n_sampled
            << '\n';
    }
}

namespace {

nlohmann::json ring_to_json(const Ring& ring) {
    auto arr = nlohmann::json::array();
    for (const Point& p : ring) arr.push_back({p.x, p.y});
    if (!ring.empty()) arr.push_back({ring.front().x, ring.front().y});  // close the ring
    return arr;
}

nlohmann::json geometry_to_json(const Geometry& geom) {
    nlohmann::json g;
    auto part_to_json = [](const PolygonPart& part) {
        auto rings = nlohmann::json::array();
        rings.push_back(ring_to_json(part.outer));
        for (const Ring& h : part.holes) rings.push_back(ring_to_json(h));
        return rings;
    };
    if (geom.parts.size() == 1) {
        g["type"] = "Polygon";
        g["coordinates"] = part_to_json(geom.parts.front());
    } else {
        g["type"] = "MultiPolygon";
        auto polys = nlohmann::json::array();
        for (const PolygonPart& part : geom.parts) polys.push_back(part_to_json(part));
        g["coordinates"] = polys;
    }
    return g;
}

}  // namespace

void write_zones_geojson(const std::string& path, const ZoneSystem& zs,
                         const std::vector<std::pair<std::string, std::vector<double>>>& props) {
    for (const auto& [name, vals] : props)
        if (vals.size() != zs.size())
            throw Error("write_zones_geojson: property '" + name + "' has " +
                        std::to_string(vals.size()) + " values for " + std::to_string(zs.size()) +
                        " zones");
    nlohmann::json fc;
    fc["type"] = "FeatureCollection";
    auto features = nlohmann::json::array();
    for (std::size_t i = 0; i < zs.size(); ++i) {
        const Zone& z = zs.zones[i];
        nlohmann::json f;
        f["type"] = "Feature";
        f["geometry"] = geometry_to_json(z.geom);
        f["properties"]["zone_id"] = z.id;
        for (const auto& [name, vals] : props) {
            if (std::isfinite(vals[i]))
                f["properties"][name] = vals[i];
            else
                f["properties"][name] = nullptr;
        }
        features.push_back(std::move(f));
    }
    fc["features"] = std::move(features);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << fc.dump(1) << '\n';
}

}  // namespace dynacc
