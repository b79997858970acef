// SPDX-License-Identifier: Apache-2.0

#include "rcov/propagation.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>

namespace rcov {

double free_space_loss(double d_km, double f_mhz) {
    if (!(d_km > 0) || !(f_mhz > 0))
        throw DomainError("free_space_loss: distance and frequency must be > 0");
    return 32.45 + 20.0 * std::log10(d_km) + 20.0 * std::log10(f_mhz);
}

double los_loss(double d_km, double f_mhz) {
    if (!(d_km > 0) || !(f_mhz > 0))
        throw DomainError("los_loss: distance and frequency must be > 0");
    return 42.64 + 26.0 * std::log10(d_km) + 20.0 * std::log10(f_mhz);
}

double knife_edge_loss(double v) {
    if (v <= -0.7) return 0.0;
    return 6.9 + 20.0 * std::log10(std::sqrt((v - 0.1) * (v - 0.1) + 1.0) + v - 0.1);
}

double rooftop_to_street_loss(double f_mhz, const PropagationParams& params) {
    const double dh = params.roof_height_m - params.rx_height_m;
    if (dh <= 0) return 0.0;
    // Street-orientation term of the standard formula evaluated at 90 deg.
    const double l_ori = 4.0 - 0.114 * (90.0 - 55.0);
    return -16.9 - 10.0 * std::log10(params.street_width_m) + 10.0 * std::log10(f_mhz) +
           20.0 * std::log10(dh) + l_ori;
}

double nlos_loss(std::span<const ProfilePoint> profile, std::span<const std::size_t> obstacles,
                 double d_km, double f_mhz, const PropagationParams& params) {
    if (obstacles.empty())
        throw DomainError("nlos_loss: empty obstacle list (use los_loss for LOS cells)");
    if (profile.size() < 3)
        throw DomainError("nlos_loss: profile must hold endpoints and at least one obstacle");
    if (!(d_km > 0) || !(f_mhz > 0))
        throw DomainError("nlos_loss: distance and frequency must be > 0");

    const ProfilePoint& tx = profile.front();
    const ProfilePoint& rx = profile.back();
    const double total = rx.distance_m - tx.distance_m;
    if (!(total > 0)) throw DomainError("nlos_loss: non-increasing profile distances");

    const double lambda = wavelength_m(f_mhz);
    const double slope = (rx.height_m - tx.height_m) / total;

    double l_msd = 0.0;
    for (std::size_t idx : obstacles) {
        if (idx == 0 || idx + 1 >= profile.size())
            throw DomainError("nlos_loss: obstacle index must be interior to the profile");
        const double d1 = profile[idx].distance_m - tx.distance_m;
        const double d2 = total - d1;
        if (!(d1 > 0) || !(d2 > 0))
            throw DomainError("nlos_loss: obstacle outside the open tx-rx interval");
        const double sightline = tx.height_m + slope * d1;
        const double excess = profile[idx].height_m - sightline;
        const double v = excess * std::sqrt(2.0) / fresnel_radius_m(lambda, d1, d2);
        l_msd += knife_edge_loss(v);
    }
    return std::max(0.0, rooftop_to_street_loss(f_mhz, params) + l_msd);
}

LosMask line_of_sight(const SubGrid& dem, CellIndex tx_cell, double tx_height_m,
                      double rx_height_m, double f_mhz, double fresnel_clearance_fraction) {
    const GridHeader& h = dem.grid.header;
    if (!h.in_bounds(tx_cell.row, tx_cell.col))
        throw DomainError("line_of_sight: transmitter cell outside the sub-grid");
    if (dem.grid.is_nodata_at(tx_cell.row, tx_cell.col))
        throw DomainError("line_of_sight: transmitter on nodata terrain");
    if (!(f_mhz > 0)) throw DomainError("line_of_sight: frequency must be > 0");

    LosMask mask;
    mask.nlos.setZero(h.nrows, h.ncols);
    mask.obstacles.assign(static_cast<std::size_t>(h.nrows * h.ncols), {});

    const GeoPoint tx_pt = h.cell_center(tx_cell.row, tx_cell.col);
    const double z_tx = dem.grid(tx_cell.row, tx_cell.col) + tx_height_m;
    const double lambda = wavelength_m(f_mhz);
    const double step = kLosSampleStepFraction * h.cellsize;

    struct Hit {
        CellIndex cell;
        double violation;
        ObstacleSample sample;
    };
    std::vector<Hit> hits;

    for (Eigen::Index r = 0; r < h.nrows; ++r) {
        for (Eigen::Index c = 0; c < h.ncols; ++c) {
            if (r == tx_cell.row && c == tx_cell.col) continue;
            if (dem.grid.is_nodata_at(r, c)) continue;

            const GeoPoint rx_pt = h.cell_center(r, c);
            const double dx = rx_pt.easting - tx_pt.easting;
            const double dy = rx_pt.northing - tx_pt.northing;
            const double horiz = std::hypot(dx, dy);
            const double z_rx = dem.grid(r, c) + rx_height_m;
            const double d3 = std::hypot(horiz, z_rx - z_tx);
            const auto nsteps = static_cast<long>(std::ceil(horiz / step));

            hits.clear();
            for (long k = 1; k < nsteps; ++k) {
                const double t = static_cast<double>(k) / static_cast<double>(nsteps);
                const GeoPoint p{tx_pt.easting + t * dx, tx_pt.northing + t * dy};
                const CellIndex cell = h.cell_at(p);
                if (cell == tx_cell || (cell.row == r && cell.col == c)) continue;
                const double terrain = dem.grid(cell.row, cell.col);
                if (dem.grid.is_nodata(terrain)) continue;
                const double d1 = t * d3;
                const double r1 = fresnel_radius_m(lambda, d1, d3 - d1);
                const double clearance =
                    z_tx + t * (z_rx - z_tx) - fresnel_clearance_fraction * r1;
                if (terrain <= clearance) continue;

                const double violation = terrain - clearance;
                auto it = std::find_if(hits.begin(), hits.end(),
                                       [&](const Hit& o) { return o.cell == cell; });
                if (it == hits.end()) {
                    hits.push_back({cell, violation, {d1, terrain, cell}});
                } else if (violation > it->violation) {
                    it->violation = violation;
                    it->sample = {d1, terrain, cell};
                }
            }
            if (!hits.empty()) {
                mask.nlos(r, c) = 1;
                auto& out = mask.obstacles[static_cast<std::size_t>(r * h.ncols + c)];
                out.reserve(hits.size());
                for (const Hit& o : hits) out.push_back(o.sample);
            }
        }
    }
    return mask;
}

ClutterLossTable ClutterLossTable::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open clutter-loss table: " + path.string());
    ClutterLossTable table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        long code;
        double loss;
        if (!(ls >> code)) continue; // blank or comment-only line
        if (!(ls >> loss))
            throw ParseError("clutter-loss table " + path.string() + ": line " +
                             std::to_string(lineno) + ": expected 'code loss_db'");
        table.set(code, loss);
    }
    return table;
}

PathLossField path_loss_field(const SubGrid& dem, const SubGrid& clutter, const LosMask& los,
                              CellIndex tx_cell, double tx_height_agl_m, double f_mhz,
                              double radius_m, const ClutterLossTable& clut_table,
                              const PropagationParams& params) {
    const GridHeader& h = dem.grid.header;
    if (clutter.grid.header != h || !(clutter.parent_offset == dem.parent_offset))
        throw DomainError("path_loss_field: DEM and clutter sub-grids differ");
    if (los.nlos.rows() != h.nrows || los.nlos.cols() != h.ncols)
        throw DomainError("path_loss_field: LOS mask shape mismatch");
    if (!h.in_bounds(tx_cell.row, tx_cell.col))
        throw DomainError("path_loss_field: transmitter cell outside the sub-grid");
    if (dem.grid.is_nodata_at(tx_cell.row, tx_cell.col))
        throw DomainError("path_loss_field: transmitter on nodata terrain");

    PathLossField field;
    field.parent_offset = dem.parent_offset;
    field.nodata = h.nodata;
    field.loss_db.setConstant(h.nrows, h.ncols, h.nodata);

    const GeoPoint tx_pt = h.cell_center(tx_cell.row, tx_cell.col);
    const double z_tx = dem.grid(tx_cell.row, tx_cell.col) + tx_height_agl_m;
    const double min_d_m = kMinPathDistanceCells * h.cellsize;

    std::vector<ProfilePoint> profile;
    std::vector<std::size_t> obstacle_idx;

    for (Eigen::Index r = 0; r < h.nrows; ++r) {
        for (Eigen::Index c = 0; c < h.ncols; ++c) {
            const double ground = dem.grid(r, c);
            if (dem.grid.is_nodata(ground)) continue;

            const GeoPoint pt = h.cell_center(r, c);
            const double horiz = std::hypot(pt.easting - tx_pt.easting,
                                            pt.northing - tx_pt.northing);
            if (horiz > radius_m) continue;

            const double z_rx = ground + params.rx_height_m;
            const double d3 = std::hypot(horiz, z_rx - z_tx);
            const double d_km = std::max(d3, min_d_m) / 1000.0;

            double branch;
            if (!los.is_nlos(r, c)) {
                branch = los_loss(d_km, f_mhz);
            } else {
                const auto& obs = los.obstacles_at(r, c);
                profile.clear();
                obstacle_idx.clear();
                profile.push_back({0.0, z_tx});
                for (std::size_t i = 0; i < obs.size(); ++i) {
                    profile.push_back({obs[i].distance_m, obs[i].height_m});
                    obstacle_idx.push_back(i + 1);
                }
                profile.push_back({d3, z_rx});
                branch = nlos_loss(profile, obstacle_idx, d_km, f_mhz, params);
            }

            // Clutter nodata contributes no extra loss.
            const double clut_value = clutter.grid(r, c);
            const double l_clut =
                clutter.grid.is_nodata(clut_value) ? 0.0 : clut_table.loss_db(clut_value);

            field.loss_db(r, c) = quantize_db(free_space_loss(d_km, f_mhz) + l_clut + branch);
        }
    }
    return field;
}

} // namespace rcov
