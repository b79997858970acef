// SPDX-License-Identifier: Apache-2.0

#include "rcov/antenna.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace rcov {

double wrap360(double deg) {
    double w = std::fmod(deg, 360.0);
    if (w < 0) w += 360.0;
    return w == 360.0 ? 0.0 : w;
}

double AntennaDiagram::sample(const std::array<double, 360>& plane, double angle_deg) {
    const double a = wrap360(angle_deg);
    const auto i = static_cast<std::size_t>(a);
    const double frac = a - static_cast<double>(i);
    return plane[i] * (1.0 - frac) + plane[(i + 1) % 360] * frac;
}

AntennaDiagram AntennaDiagram::isotropic(std::string name, double gain_dbi) {
    AntennaDiagram d;
    d.name = std::move(name);
    d.gain_dbi = gain_dbi;
    return d;
}

namespace {

void normalize_plane(std::array<double, 360>& plane, const char* which,
                     const std::string& file) {
    const double lo = *std::min_element(plane.begin(), plane.end());
    for (double& v : plane) v -= lo;
    if (plane[0] != 0.0)
        throw ParseError("antenna diagram " + file + ": " + which +
                         " main lobe is not at 0 degrees");
}

} // namespace

AntennaDiagram load_diagram(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open antenna diagram: " + path.string());

    AntennaDiagram d;
    bool have_name = false, have_gain = false, have_h = false, have_v = false;
    std::string line;
    std::size_t lineno = 0;

    auto read_plane = [&](std::array<double, 360>& plane, const std::string& block,
                          std::size_t declared) {
        if (declared != 360)
            throw ParseError("antenna diagram " + path.string() + ": " + block +
                             " block declares " + std::to_string(declared) +
                             " samples, expected 360");
        for (std::size_t i = 0; i < 360; ++i) {
            if (!std::getline(in, line))
                throw ParseError("antenna diagram " + path.string() + ": " + block +
                                 " block ends after " + std::to_string(i) +
                                 " of 360 samples");
            ++lineno;
            std::istringstream ls(line);
            long deg;
            double att;
            if (!(ls >> deg >> att) || deg != static_cast<long>(i))
                throw ParseError("antenna diagram " + path.string() + ": " + block +
                                 " block line " + std::to_string(lineno) +
                                 ": expected '" + std::to_string(i) + " <att_db>'");
            plane[i] = att;
        }
    };

    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        if (key == "NAME") {
            ls >> d.name;
            have_name = true;
        } else if (key == "GAIN") {
            if (!(ls >> d.gain_dbi))
                throw ParseError("antenna diagram " + path.string() + ": bad GAIN line");
            have_gain = true;
        } else if (key == "HORIZONTAL") {
            std::size_t n = 0;
            ls >> n;
            read_plane(d.horizontal, "HORIZONTAL", n);
            have_h = true;
        } else if (key == "VERTICAL") {
            std::size_t n = 0;
            ls >> n;
            read_plane(d.vertical, "VERTICAL", n);
            have_v = true;
        }
        // Unknown keys (FREQUENCY, POLARIZATION, ...) are ignored.
    }
    if (!have_name) throw ParseError("antenna diagram " + path.string() + ": missing NAME");
    if (!have_gain) throw ParseError("antenna diagram " + path.string() + ": missing GAIN");
    if (!have_h)
        throw ParseError("antenna diagram " + path.string() + ": missing HORIZONTAL block");
    if (!have_v)
        throw ParseError("antenna diagram " + path.string() + ": missing VERTICAL block");

    normalize_plane(d.horizontal, "HORIZONTAL", path.string());
    normalize_plane(d.vertical, "VERTICAL", path.string());
    return d;
}

LookupAngles angles_to(const GeoPoint& tx, double tx_total_height_m, const GeoPoint& rx,
                       double rx_total_height_m, const AntennaMount& mount) {
    const double de = rx.easting - tx.easting;
    const double dn = rx.northing - tx.northing;
    const double horiz = std::hypot(de, dn);
    if (horiz == 0.0) throw DomainError("angles_to: coincident points");

    constexpr double rad2deg = 180.0 / std::numbers::pi;
    const double bearing = wrap360(std::atan2(de, dn) * rad2deg);
    const double depression = std::atan2(tx_total_height_m - rx_total_height_m, horiz) * rad2deg;
    return {wrap360(bearing - mount.azimuth_deg),
            wrap360(depression - mount.total_tilt_deg())};
}

PathLossField apply_antenna(const PathLossField& field, const SubGrid& dem,
                            const AntennaDiagram& diagram, const AntennaMount& mount,
                            CellIndex tx_cell, double tx_height_agl_m, double rx_height_m) {
    const GridHeader& h = dem.grid.header;
    if (field.nrows() != h.nrows || field.ncols() != h.ncols ||
        !(field.parent_offset == dem.parent_offset))
        throw DomainError("apply_antenna: field and DEM sub-grid differ");
    if (!h.in_bounds(tx_cell.row, tx_cell.col))
        throw DomainError("apply_antenna: transmitter cell outside the sub-grid");

    const GeoPoint tx_pt = h.cell_center(tx_cell.row, tx_cell.col);
    const double z_tx = dem.grid(tx_cell.row, tx_cell.col) + tx_height_agl_m;

    PathLossField out = field;
    for (Eigen::Index r = 0; r < h.nrows; ++r) {
        for (Eigen::Index c = 0; c < h.ncols; ++c) {
            const double loss = field.loss_db(r, c);
            if (field.is_nodata(loss)) continue;

            LookupAngles angles;
            if (r == tx_cell.row && c == tx_cell.col) {
                angles = {wrap360(-mount.azimuth_deg), wrap360(90.0 - mount.total_tilt_deg())};
            } else {
                const double z_rx = dem.grid(r, c) + rx_height_m;
                angles = angles_to(tx_pt, z_tx, h.cell_center(r, c), z_rx, mount);
            }
            out.loss_db(r, c) =
                quantize_db(loss - diagram.gain_dbi + diagram.horizontal_at(angles.horizontal_deg) +
                            diagram.vertical_at(angles.vertical_deg));
        }
    }
    return out;
}

} // namespace rcov
