// SPDX-License-Identifier: Apache-2.0
//
// Terrain-aware COST-231 Walfisch-Ikegami path loss.
//
// Total loss per receiver cell is the literal sum
//     PL(d) = L0(d) + L_CLUT + { PL_LOS(d)  |  PL_NLOS(d) }
// with L0 the free-space term, L_CLUT a per-cell clutter correction, and the
// branch chosen by a terrain line-of-sight test against the first Fresnel
// zone. Note the L0 term is always added, in addition to the LOS/NLOS branch;
// standard Walfisch-Ikegami treats the two as alternatives, so absolute
// levels from this model need calibration before comparison with other tools.
#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <unordered_map>
#include <vector>

#include "rcov/raster.hpp"

namespace rcov {

/// Rounds to the 6-decimal lattice used by the result store's row format.
/// Field values are produced pre-rounded so a store round trip (print with
/// "%.6f", parse back) reproduces the exact same double.
inline double quantize_db(double x) { return std::round(x * 1e6) / 1e6; }

inline double wavelength_m(double f_mhz) { return 299.792458 / f_mhz; }

/// Radius of the first Fresnel zone at partial distances d1, d2 (meters).
inline double fresnel_radius_m(double lambda_m, double d1_m, double d2_m) {
    return std::sqrt(lambda_m * d1_m * d2_m / (d1_m + d2_m));
}

struct PropagationParams {
    double frequency_mhz = 1843.0;
    double rx_height_m = 1.5;
    double radius_m = 20000.0;
    double roof_height_m = 15.0;
    double street_width_m = 25.0;
    double building_separation_m = 50.0; // kept for configuration compatibility;
                                         // unused by the knife-edge NLOS sum
    /// Fraction of the first Fresnel radius that must be clear for LOS.
    double fresnel_clearance_fraction = 1.0;

    /// Model validity window for the frequency, MHz.
    static constexpr double kMinFrequencyMhz = 800.0;
    static constexpr double kMaxFrequencyMhz = 2600.0;

    bool positive() const {
        return frequency_mhz > 0 && rx_height_m > 0 && radius_m > 0 && roof_height_m > 0 &&
               street_width_m > 0 && building_separation_m > 0 &&
               fresnel_clearance_fraction > 0;
    }
    bool frequency_in_window() const {
        return frequency_mhz >= kMinFrequencyMhz && frequency_mhz <= kMaxFrequencyMhz;
    }
};

/// Fraction of a cell edge between successive ray samples in the LOS walk.
inline constexpr double kLosSampleStepFraction = 0.1;

/// 3D distances shorter than one cell edge are clamped up to it before the
/// loss terms are evaluated; closer geometry is below grid resolution and
/// would drive Eq-style log terms negative.
inline constexpr double kMinPathDistanceCells = 1.0;

/// Free-space attenuation, dB. d in kilometers, f in MHz.
double free_space_loss(double d_km, double f_mhz);

/// Line-of-sight branch attenuation, dB. d in kilometers, f in MHz.
double los_loss(double d_km, double f_mhz);

/// Knife-edge diffraction loss for dimensionless parameter v, dB.
/// Approximation 6.9 + 20*log10(sqrt((v-0.1)^2+1) + v - 0.1) for v > -0.7,
/// zero otherwise.
double knife_edge_loss(double v);

struct ObstacleSample {
    double distance_m = 0.0; // along the tx->rx path (3D parametrization)
    double height_m = 0.0;   // terrain height of the obstructing cell
    CellIndex cell;          // sub-grid coordinates
};

/// Per-cell LOS/NLOS flags over a sub-grid plus, for NLOS cells, the
/// obstructing cells in walk order (transmitter's own cell is always LOS).
struct LosMask {
    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> nlos;
    std::vector<std::vector<ObstacleSample>> obstacles; // nrows*ncols entries, row-major

    bool is_nlos(Eigen::Index r, Eigen::Index c) const { return nlos(r, c) != 0; }
    const std::vector<ObstacleSample>& obstacles_at(Eigen::Index r, Eigen::Index c) const {
        return obstacles[static_cast<std::size_t>(r * nlos.cols() + c)];
    }
};

/// Walks the ray from the transmitter cell to every cell of the sub-grid,
/// sampling the terrain profile at steps of kLosSampleStepFraction of a cell
/// edge (sample k of n lies at parameter k/n; each sample is attributed to
/// the cell containing it, floor convention; samples in the endpoint cells
/// are skipped). A cell is an obstacle if any of its samples rises above the
/// sightline lowered by the clearance fraction of the first Fresnel radius.
LosMask line_of_sight(const SubGrid& dem, CellIndex tx_cell, double tx_height_m,
                      double rx_height_m, double f_mhz,
                      double fresnel_clearance_fraction = 1.0);

struct ProfilePoint {
    double distance_m = 0.0;
    double height_m = 0.0;
};

/// NLOS branch: rooftop-to-street term plus the sum of per-obstacle
/// knife-edge losses. The profile's first and last entries are the
/// transmitter antenna tip and the receiver point; they define the sightline
/// against which obstacle excess heights are measured. Obstacle indices must
/// be strictly interior. Result clamped at 0 dB.
double nlos_loss(std::span<const ProfilePoint> profile, std::span<const std::size_t> obstacles,
                 double d_km, double f_mhz, const PropagationParams& params);

/// Rooftop-to-street diffraction term at perpendicular street incidence.
double rooftop_to_street_loss(double f_mhz, const PropagationParams& params);

/// Maps clutter category codes to signal loss in dB. Unknown codes map to 0.
class ClutterLossTable {
  public:
    ClutterLossTable() = default;
    static ClutterLossTable from_file(const std::filesystem::path& path);

    void set(long code, double loss_db) { losses_[code] = loss_db; }
    double loss_db(double raster_value) const {
        const auto it = losses_.find(static_cast<long>(raster_value));
        return it == losses_.end() ? 0.0 : it->second;
    }
    const std::unordered_map<long, double>& entries() const { return losses_; }

  private:
    std::unordered_map<long, double> losses_;
};

/// Per-transmitter path-loss values aligned with a sub-grid. Cells beyond
/// the circular radius or over nodata terrain carry the nodata sentinel.
/// Non-sentinel values are pre-rounded with quantize_db.
struct PathLossField {
    CellIndex parent_offset;
    double nodata = -9999.0;
    GridValues loss_db;

    Eigen::Index nrows() const { return loss_db.rows(); }
    Eigen::Index ncols() const { return loss_db.cols(); }
    bool is_nodata(double v) const { return v == nodata; }
};

/// Isotropic path loss over the sub-grid: for every cell with center within
/// the circular radius, PL = L0 + L_CLUT + (LOS | NLOS branch) with d the 3D
/// antenna-to-receiver distance.
PathLossField path_loss_field(const SubGrid& dem, const SubGrid& clutter, const LosMask& los,
                              CellIndex tx_cell, double tx_height_agl_m, double f_mhz,
                              double radius_m, const ClutterLossTable& clut_table,
                              const PropagationParams& params);

} // namespace rcov
