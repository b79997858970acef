// SPDX-License-Identifier: Apache-2.0

#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace rcov::testsupport {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Center {
    double x, y;
};

Center center_of(const GridHeader& h, Eigen::Index r, Eigen::Index c) {
    return {h.xll + (static_cast<double>(c) + 0.5) * h.cellsize,
            h.yll + (static_cast<double>(h.nrows - r) - 0.5) * h.cellsize};
}

struct Obstacle {
    double dist_m;
    double height_m;
    double worst; // largest clearance violation seen for this cell
    Eigen::Index row, col;
};

/// Shared sampling walk of the documented lattice; returns the obstacles of
/// the tx->target ray (empty = LOS).
std::vector<Obstacle> walk_obstacles(const SubGrid& dem, CellIndex tx_cell, double tx_height_m,
                                     double rx_height_m, double f_mhz,
                                     double clearance_fraction, Eigen::Index r,
                                     Eigen::Index c) {
    const GridHeader& h = dem.grid.header;
    const Center tx = center_of(h, tx_cell.row, tx_cell.col);
    const Center rx = center_of(h, r, c);
    const double dx = rx.x - tx.x;
    const double dy = rx.y - tx.y;
    const double horiz = std::hypot(dx, dy);
    const double z_tx = dem.grid(tx_cell.row, tx_cell.col) + tx_height_m;
    const double z_rx = dem.grid(r, c) + rx_height_m;
    const double d3 = std::hypot(horiz, z_rx - z_tx);
    const double lambda = 299.792458 / f_mhz;
    const auto n = static_cast<long>(std::ceil(horiz / (0.1 * h.cellsize)));

    std::vector<Obstacle> obstacles;
    for (long k = 1; k < n; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(n);
        const double px = tx.x + t * dx;
        const double py = tx.y + t * dy;
        const auto col = static_cast<Eigen::Index>(std::floor((px - h.xll) / h.cellsize));
        const auto row =
            h.nrows - 1 - static_cast<Eigen::Index>(std::floor((py - h.yll) / h.cellsize));
        if (row == tx_cell.row && col == tx_cell.col) continue;
        if (row == r && col == c) continue;
        const double terrain = dem.grid(row, col);
        if (terrain == h.nodata) continue;

        const double d1 = t * d3;
        const double d2 = d3 - d1;
        const double fresnel = std::sqrt(lambda * d1 * d2 / (d1 + d2));
        const double clearance = z_tx + t * (z_rx - z_tx) - clearance_fraction * fresnel;
        if (terrain <= clearance) continue;

        const double worst = terrain - clearance;
        bool found = false;
        for (Obstacle& o : obstacles) {
            if (o.row == row && o.col == col) {
                found = true;
                if (worst > o.worst) {
                    o.worst = worst;
                    o.dist_m = d1;
                    o.height_m = terrain;
                }
                break;
            }
        }
        if (!found) obstacles.push_back({d1, terrain, worst, row, col});
    }
    return obstacles;
}

} // namespace

BoolGrid los_oracle(const SubGrid& dem, CellIndex tx_cell, double tx_height_m,
                    double rx_height_m, double f_mhz, double clearance_fraction) {
    const GridHeader& h = dem.grid.header;
    BoolGrid nlos = BoolGrid::Zero(h.nrows, h.ncols);
    for (Eigen::Index r = 0; r < h.nrows; ++r) {
        for (Eigen::Index c = 0; c < h.ncols; ++c) {
            if (r == tx_cell.row && c == tx_cell.col) continue;
            if (dem.grid(r, c) == h.nodata) continue;
            if (!walk_obstacles(dem, tx_cell, tx_height_m, rx_height_m, f_mhz,
                                clearance_fraction, r, c)
                     .empty())
                nlos(r, c) = 1;
        }
    }
    return nlos;
}

std::optional<double> cell_loss_oracle(const SubGrid& dem, const SubGrid& clutter,
                                       const TransmitterConfig& tx,
                                       const AntennaDiagram& diagram,
                                       const ClutterLossTable& clut_table,
                                       const PropagationParams& params, Eigen::Index r,
                                       Eigen::Index c) {
    const GridHeader& h = dem.grid.header;
    const double ground = dem.grid(r, c);
    if (ground == h.nodata) return std::nullopt;

    const CellIndex tx_cell = h.cell_at(tx.position);
    const Center txc = center_of(h, tx_cell.row, tx_cell.col);
    const Center rxc = center_of(h, r, c);
    const double de = rxc.x - txc.x;
    const double dn = rxc.y - txc.y;
    const double horiz = std::hypot(de, dn);
    if (horiz > tx.radius_km * 1000.0) return std::nullopt;

    const double z_tx = dem.grid(tx_cell.row, tx_cell.col) + tx.height_agl_m;
    const double z_rx = ground + params.rx_height_m;
    const double d3 = std::hypot(horiz, z_rx - z_tx);
    const double d_km = std::max(d3, h.cellsize) / 1000.0;
    const double f = tx.frequency_mhz;

    const double l0 = 32.45 + 20.0 * std::log10(d_km) + 20.0 * std::log10(f);

    double branch;
    const auto obstacles =
        (r == tx_cell.row && c == tx_cell.col)
            ? std::vector<Obstacle>{}
            : walk_obstacles(dem, tx_cell, tx.height_agl_m, params.rx_height_m, f,
                             params.fresnel_clearance_fraction, r, c);
    if (obstacles.empty()) {
        branch = 42.64 + 26.0 * std::log10(d_km) + 20.0 * std::log10(f);
    } else {
        double l_msd = 0.0;
        for (const Obstacle& o : obstacles) {
            const double sight = z_tx + (z_rx - z_tx) * (o.dist_m / d3);
            const double r1 = std::sqrt((299.792458 / f) * o.dist_m * (d3 - o.dist_m) / d3);
            const double v = (o.height_m - sight) * std::sqrt(2.0) / r1;
            if (v > -0.7)
                l_msd += 6.9 + 20.0 * std::log10(std::sqrt((v - 0.1) * (v - 0.1) + 1.0) + v - 0.1);
        }
        const double dh = params.roof_height_m - params.rx_height_m;
        double l_rts = 0.0;
        if (dh > 0)
            l_rts = -16.9 - 10.0 * std::log10(params.street_width_m) + 10.0 * std::log10(f) +
                    20.0 * std::log10(dh) + (4.0 - 0.114 * (90.0 - 55.0));
        branch = std::max(0.0, l_rts + l_msd);
    }

    const double clut_val = clutter.grid(r, c);
    const double l_clut = clut_val == h.nodata ? 0.0 : clut_table.loss_db(clut_val);

    const double iso = std::round((l0 + l_clut + branch) * 1e6) / 1e6;

    // Antenna influence: bearing clockwise from north, depression positive
    // downward, tx cell convention bearing=0 / depression=90.
    double bearing, depression;
    if (r == tx_cell.row && c == tx_cell.col) {
        bearing = 0.0;
        depression = 90.0;
    } else {
        bearing = std::atan2(de, dn) * 180.0 / kPi;
        if (bearing < 0) bearing += 360.0;
        depression = std::atan2(z_tx - z_rx, horiz) * 180.0 / kPi;
    }
    auto wrap = [](double a) {
        double w = std::fmod(a, 360.0);
        if (w < 0) w += 360.0;
        return w == 360.0 ? 0.0 : w;
    };
    const double ha = wrap(bearing - tx.mount.azimuth_deg);
    const double va = wrap(depression - (tx.mount.mech_tilt_deg + tx.mount.elec_tilt_deg));
    auto interp = [](const std::array<double, 360>& plane, double a) {
        const auto i = static_cast<std::size_t>(a);
        const double frac = a - static_cast<double>(i);
        return plane[i] * (1.0 - frac) + plane[(i + 1) % 360] * frac;
    };
    const double with_antenna =
        iso - diagram.gain_dbi + interp(diagram.horizontal, ha) + interp(diagram.vertical, va);
    return std::round(with_antenna * 1e6) / 1e6;
}

CoverageRaster aggregate_oracle(
    const std::vector<std::pair<TransmitterConfig, PathLossField>>& fields,
    const GridHeader& extent) {
    CoverageRaster out;
    out.header = extent;
    out.values.setConstant(extent.nrows, extent.ncols, extent.nodata);
    for (Eigen::Index r = 0; r < extent.nrows; ++r) {
        for (Eigen::Index c = 0; c < extent.ncols; ++c) {
            double best = extent.nodata;
            bool covered = false;
            for (const auto& [tx, field] : fields) {
                const Eigen::Index lr = r - field.parent_offset.row;
                const Eigen::Index lc = c - field.parent_offset.col;
                if (lr < 0 || lc < 0 || lr >= field.nrows() || lc >= field.ncols()) continue;
                const double loss = field.loss_db(lr, lc);
                if (loss == field.nodata) continue;
                const double rx = tx.power_dbm - loss;
                if (!covered || rx > best) {
                    best = rx;
                    covered = true;
                }
            }
            if (covered) out.values(r, c) = best;
        }
    }
    return out;
}

} // namespace rcov::testsupport
