// SPDX-License-Identifier: Apache-2.0
//
// Antenna radiation diagrams (MSI-style horizontal/vertical planes) and
// their application to an isotropic path-loss field.
#pragma once

#include <array>
#include <filesystem>
#include <string>

#include "rcov/propagation.hpp"
#include "rcov/raster.hpp"

namespace rcov {

/// Per-degree attenuation patterns, dB relative to the main lobe. Sample 0
/// of each plane is the main-lobe reference and is 0 after normalization.
struct AntennaDiagram {
    std::string name;
    double gain_dbi = 0.0;
    std::array<double, 360> horizontal{}; // clockwise from beam direction
    std::array<double, 360> vertical{};   // degrees of depression from beam axis

    /// Linear interpolation between integer-degree samples, wrapping at 360.
    static double sample(const std::array<double, 360>& plane, double angle_deg);
    double horizontal_at(double angle_deg) const { return sample(horizontal, angle_deg); }
    double vertical_at(double angle_deg) const { return sample(vertical, angle_deg); }

    static AntennaDiagram isotropic(std::string name = "isotropic", double gain_dbi = 0.0);
};

struct AntennaMount {
    double azimuth_deg = 0.0;   // clockwise from north
    double mech_tilt_deg = 0.0; // positive = downtilt
    double elec_tilt_deg = 0.0; // positive = downtilt
    double height_agl_m = 0.0;
    double total_tilt_deg() const { return mech_tilt_deg + elec_tilt_deg; }
};

double wrap360(double deg);

/// Loads an MSI-style diagram: NAME <id>, GAIN <float> dBi, HORIZONTAL 360
/// followed by 360 "<deg> <att_db>" lines, VERTICAL 360 likewise. Each plane
/// is normalized by subtracting its minimum; a diagram whose main lobe is
/// not at 0 degrees after normalization is rejected.
AntennaDiagram load_diagram(const std::filesystem::path& path);

/// Horizontal and vertical lookup angles for a receiver as seen from a
/// mounted antenna. Heights are absolute elevations of the antenna tip and
/// the receiver point. Vertical angle is depression minus total downtilt,
/// wrapped to [0, 360) for table lookup.
struct LookupAngles {
    double horizontal_deg = 0.0;
    double vertical_deg = 0.0;
};
LookupAngles angles_to(const GeoPoint& tx, double tx_total_height_m, const GeoPoint& rx,
                       double rx_total_height_m, const AntennaMount& mount);

/// Applies gain and pattern attenuation to an isotropic field:
/// loss' = loss - gain + horizontal[h] + vertical[v], sentinel cells
/// unchanged. For the transmitter's own cell (zero horizontal distance) the
/// bearing is taken as 0 and the depression as 90 degrees.
PathLossField apply_antenna(const PathLossField& field, const SubGrid& dem,
                            const AntennaDiagram& diagram, const AntennaMount& mount,
                            CellIndex tx_cell, double tx_height_agl_m, double rx_height_m);

} // namespace rcov
