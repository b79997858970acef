// SPDX-License-Identifier: Apache-2.0
//
// Independent reference implementations used to cross-check the engine:
// straight-line scalar code, no shared helpers with the library beyond the
// documented grid/walk conventions.
#pragma once

#include <Eigen/Core>
#include <optional>

#include "rcov/antenna.hpp"
#include "rcov/engine.hpp"
#include "rcov/propagation.hpp"
#include "rcov/raster.hpp"

namespace rcov::testsupport {

using BoolGrid = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Dense ray-sampling LOS oracle: for every cell, samples the tx->cell ray
/// at parameters k/n (n = ceil(horiz / (cellsize/10))), attributes each
/// sample to the cell containing it, and flags NLOS when any intermediate
/// sample's terrain rises above the Fresnel-lowered sightline. 1 = NLOS.
BoolGrid los_oracle(const SubGrid& dem, CellIndex tx_cell, double tx_height_m,
                    double rx_height_m, double f_mhz, double clearance_fraction);

/// Full per-cell scalar recomputation of the pipeline (isotropic loss plus
/// antenna influence), nullopt for cells outside radius or over nodata.
std::optional<double> cell_loss_oracle(const SubGrid& dem, const SubGrid& clutter,
                                       const TransmitterConfig& tx,
                                       const AntennaDiagram& diagram,
                                       const ClutterLossTable& clut_table,
                                       const PropagationParams& params, Eigen::Index r,
                                       Eigen::Index c);

/// Brute-force best-server scan over all (cell, transmitter) pairs.
CoverageRaster aggregate_oracle(
    const std::vector<std::pair<TransmitterConfig, PathLossField>>& fields,
    const GridHeader& extent);

} // namespace rcov::testsupport
