// SPDX-License-Identifier: Apache-2.0
//
// Serial end-to-end coverage pipeline: per-transmitter prediction
// (sub-grid extraction, LOS, path loss, antenna influence) and best-server
// aggregation over the master extent.
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rcov/antenna.hpp"
#include "rcov/propagation.hpp"
#include "rcov/raster.hpp"

namespace rcov {

struct TransmitterConfig {
    std::string id;
    GeoPoint position;
    double height_agl_m = 30.0;
    double power_dbm = 43.0;
    double frequency_mhz = 0.0; // 0 = take the global default at load time
    double radius_km = 0.0;
    AntennaMount mount;
    std::string diagram_id;
};

/// Antenna diagrams indexed by id.
class DiagramSet {
  public:
    void add(AntennaDiagram d) { diagrams_[d.name] = std::move(d); }
    const AntennaDiagram& at(const std::string& id) const;
    bool contains(const std::string& id) const { return diagrams_.count(id) != 0; }
    const std::map<std::string, AntennaDiagram>& all() const { return diagrams_; }
    /// Loads every *.msi file in a directory; diagram id = NAME field.
    static DiagramSet from_directory(const std::filesystem::path& dir);

  private:
    std::map<std::string, AntennaDiagram> diagrams_;
};

/// CSV columns: id,easting,northing,height_agl_m,power_dbm,frequency_mhz,
/// radius_km,azimuth_deg,mech_tilt_deg,elec_tilt_deg,diagram_id.
/// Empty frequency/radius cells take the values from `defaults`.
std::vector<TransmitterConfig> load_transmitters_csv(const std::filesystem::path& path,
                                                     const PropagationParams& defaults);

/// Received signal strength, dBm.
inline double received_power(double power_dbm, double loss_db) { return power_dbm - loss_db; }

/// Per-transmitter prediction on pre-cut sub-grids (the unit of work a
/// worker executes). Stages run in fixed order: LOS, path loss, antenna.
PathLossField predict_on_subgrids(const SubGrid& dem, const SubGrid& clutter,
                                  const TransmitterConfig& tx, const AntennaDiagram& diagram,
                                  const ClutterLossTable& clut_table,
                                  const PropagationParams& params);

/// Full per-transmitter prediction from the master grids.
PathLossField predict_transmitter(const RasterGrid& dem, const RasterGrid& clutter,
                                  const TransmitterConfig& tx, const AntennaDiagram& diagram,
                                  const ClutterLossTable& clut_table,
                                  const PropagationParams& params);

/// Best-server aggregation: per master cell, maximum received power over all
/// fields covering it; uncovered cells carry the sentinel.
CoverageRaster aggregate(
    const std::vector<std::pair<TransmitterConfig, PathLossField>>& fields,
    const GridHeader& extent);

/// Folds one field into a running best-server raster (same arithmetic as
/// aggregate; used by the parallel master for continuous aggregation).
void aggregate_into(CoverageRaster& acc, const TransmitterConfig& tx,
                    const PathLossField& field);

CoverageRaster predict_serial(const RasterGrid& dem, const RasterGrid& clutter,
                              const std::vector<TransmitterConfig>& txs,
                              const DiagramSet& diagrams, const ClutterLossTable& clut_table,
                              const PropagationParams& params);

/// DEM and clutter must share extent and resolution.
void require_aligned(const RasterGrid& dem, const RasterGrid& clutter);

} // namespace rcov
