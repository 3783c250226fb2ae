#ifndef DYNACC_NETWORK_HPP
#define DYNACC_NETWORK_HPP

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "dynacc/util.hpp"

namespace dynacc {

struct Junction {
    std::string id;
    double x = 0.0;
    double y = 0.0;
};

struct Arc {
    std::string id;
    std::uint32_t from = 0;
    std::uint32_t to = 0;
    double length_m = 0.0;
    double freeflow_kmh = 0.0;
    int frc = 0;
    std::int32_t profile = -1;  // index into RoadNetwork::profiles, -1 = none
};

/// Daily speed schedule: one factor per 5-minute slot, fraction of free flow.
struct SpeedProfile {
    std::string id;
    std::array<double, kProfileSlots> factors{};
};

/// Directed road graph with historical speed profiles. Immutable after load;
/// all traversal queries are pure and safe for concurrent readers.
class RoadNetwork {
public:
    std::vector<Junction> junctions;
    std::vector<Arc> arcs;
    std::vector<SpeedProfile> profiles;

    std::uint32_t junction_index(const std::string& id) const;
    bool has_junction(const std::string& id) const { return junction_by_id_.count(id) != 0; }

    /// Outgoing arc indices of a junction.
    const std::vector<std::uint32_t>& outgoing(std::uint32_t junction) const {
        return out_arcs_[junction];
    }
    const std::vector<std::uint32_t>& incoming(std::uint32_t junction) const {
        return in_arcs_[junction];
    }

    /// Speed on `arc` at a wall-clock instant, km/h. Arcs without a profile
    /// run at free flow around the clock.
    double arc_speed(std::uint32_t arc, double clock_s) const;

    /// Exit time for a vehicle entering `arc` at absolute time `entry_s`.
    /// The current slot's speed applies to every vehicle on the arc, so the
    /// position integrates piecewise linearly and switches speed at each
    /// 5-minute boundary. Profiles repeat daily for journeys past midnight.
    double traverse(std::uint32_t arc, double entry_s) const;

    /// Copy with arcs of class > max_frc removed and junctions left isolated
    /// dropped. Throws if nothing routable remains.
    RoadNetwork filter_by_frc(int max_frc) const;

    void rebuild_indexes();

private:
    std::unordered_map<std::string, std::uint32_t> junction_by_id_;
    std::vector<std::vector<std::uint32_t>> out_arcs_;
    std::vector<std::vector<std::uint32_t>> in_arcs_;
};

/// Reads the three CSV inputs and links them. Arcs without a profile_id keep
/// an implicit constant factor of 1.0. All referential problems are hard
/// errors naming the offending row.
RoadNetwork load_network(const std::string& node_file,
                         const std::string& arc_file,
                         const std::string& profile_file);

constexpr double kUnreachableSeconds = std::numeric_limits<double>::infinity();

/// Static one-to-all free-flow travel times in seconds (profiles ignored).
/// With reverse = true the search runs on the transposed graph, i.e. it
/// returns times *towards* `origin`.
std::vector<double> freeflow_seconds(const RoadNetwork& net, std::uint32_t origin,
                                     bool reverse = false);

}  // namespace dynacc

#endif
