#ifndef DYNACC_SYNTH_HPP
#define DYNACC_SYNTH_HPP

#include <cstdint>
#include <string>

namespace dynacc {

/// Parameters for the synthetic grid city. Junctions form a rows x cols
/// lattice; zones tile it in zone_rows x zone_cols rectangular blocks, so
/// zone_rows must divide rows and zone_cols must divide cols. The perimeter
/// is a ring road (frc 0), two short mid-row links are alleys (frc 7) and
/// everything else is an ordinary street (frc 6). Streets and the ring
/// carry a shared speed profile that drops to peak_factor during the
/// morning peak; alleys have none.
struct GridCityParams {
    int rows = 10;
    int cols = 10;
    double spacing_m = 500.0;
    int zone_rows = 5;
    int zone_cols = 5;
    double street_kmh = 50.0;
    double ring_kmh = 90.0;
    double alley_kmh = 20.0;
    double peak_factor = 0.5;
    int peak_start_s = 8 * 3600;
    int peak_end_s = 9 * 3600 + 1800;
    int n_users = 120;
    std::uint64_t seed = 42;
    // Degenerate mode: flat profiles and a perfectly uniform event pattern,
    // so every slot looks like every other.
    bool degenerate = false;
};

/// Writes nodes.csv, arcs.csv, profiles.csv, zones.geojson, events.csv,
/// trips.csv and two run configs (config.cfg with a fixed alpha,
/// config_calibrate.cfg calibrating it) into dir, which must exist.
void write_grid_city(const std::string& dir, const GridCityParams& params);

}  // namespace dynacc

#endif
