// SPDX-License-Identifier: Apache-2.0

#include "rcov/engine.hpp"

#include <fstream>
#include <sstream>

namespace rcov {

const AntennaDiagram& DiagramSet::at(const std::string& id) const {
    const auto it = diagrams_.find(id);
    if (it == diagrams_.end()) throw DomainError("unknown antenna diagram id: " + id);
    return it->second;
}

DiagramSet DiagramSet::from_directory(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
        throw IoError("antenna diagram directory not found: " + dir.string());
    DiagramSet set;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() == ".msi") set.add(load_diagram(entry.path()));
    }
    return set;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) {
        // Trim surrounding whitespace and a trailing CR.
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

double parse_field(const std::string& s, const char* name, std::size_t lineno) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("transmitter CSV line " + std::to_string(lineno) + ": bad " +
                         std::string(name) + " value '" + s + "'");
    }
}

} // namespace

std::vector<TransmitterConfig> load_transmitters_csv(const std::filesystem::path& path,
                                                     const PropagationParams& defaults) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open transmitter CSV: " + path.string());

    static const std::vector<std::string> kHeader = {
        "id",           "easting",       "northing",     "height_agl_m",
        "power_dbm",    "frequency_mhz", "radius_km",    "azimuth_deg",
        "mech_tilt_deg", "elec_tilt_deg", "diagram_id"};

    std::string line;
    if (!std::getline(in, line)) throw ParseError("transmitter CSV is empty: " + path.string());
    if (split_csv_line(line) != kHeader)
        throw ParseError("transmitter CSV header mismatch in " + path.string());

    std::vector<TransmitterConfig> txs;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != kHeader.size())
            throw ParseError("transmitter CSV line " + std::to_string(lineno) + ": expected " +
                             std::to_string(kHeader.size()) + " columns, found " +
                             std::to_string(cells.size()));
        TransmitterConfig tx;
        tx.id = cells[0];
        if (tx.id.empty())
            throw ParseError("transmitter CSV line " + std::to_string(lineno) + ": empty id");
        tx.position.easting = parse_field(cells[1], "easting", lineno);
        tx.position.northing = parse_field(cells[2], "northing", lineno);
        tx.height_agl_m = parse_field(cells[3], "height_agl_m", lineno);
        tx.power_dbm = parse_field(cells[4], "power_dbm", lineno);
        tx.frequency_mhz = cells[5].empty() ? defaults.frequency_mhz
                                            : parse_field(cells[5], "frequency_mhz", lineno);
        tx.radius_km = cells[6].empty() ? defaults.radius_m / 1000.0
                                        : parse_field(cells[6], "radius_km", lineno);
        tx.mount.azimuth_deg = parse_field(cells[7], "azimuth_deg", lineno);
        tx.mount.mech_tilt_deg = parse_field(cells[8], "mech_tilt_deg", lineno);
        tx.mount.elec_tilt_deg = parse_field(cells[9], "elec_tilt_deg", lineno);
        tx.mount.height_agl_m = tx.height_agl_m;
        tx.diagram_id = cells[10];
        if (!(tx.radius_km > 0))
            throw ParseError("transmitter CSV line " + std::to_string(lineno) +
                             ": radius_km must be > 0");
        txs.push_back(std::move(tx));
    }
    return txs;
}

void require_aligned(const RasterGrid& dem, const RasterGrid& clutter) {
    const GridHeader &a = dem.header, &b = clutter.header;
    if (a.ncols != b.ncols || a.nrows != b.nrows || a.xll != b.xll || a.yll != b.yll ||
        a.cellsize != b.cellsize)
        throw DomainError("DEM and clutter rasters must share extent and resolution");
}

PathLossField predict_on_subgrids(const SubGrid& dem, const SubGrid& clutter,
                                  const TransmitterConfig& tx, const AntennaDiagram& diagram,
                                  const ClutterLossTable& clut_table,
                                  const PropagationParams& params) {
    const CellIndex local = dem.grid.header.cell_at(tx.position);
    const LosMask los = line_of_sight(dem, local, tx.height_agl_m, params.rx_height_m,
                                      tx.frequency_mhz, params.fresnel_clearance_fraction);
    const PathLossField iso =
        path_loss_field(dem, clutter, los, local, tx.height_agl_m, tx.frequency_mhz,
                        tx.radius_km * 1000.0, clut_table, params);
    return apply_antenna(iso, dem, diagram, tx.mount, local, tx.height_agl_m,
                         params.rx_height_m);
}

PathLossField predict_transmitter(const RasterGrid& dem, const RasterGrid& clutter,
                                  const TransmitterConfig& tx, const AntennaDiagram& diagram,
                                  const ClutterLossTable& clut_table,
                                  const PropagationParams& params) {
    require_aligned(dem, clutter);
    if (!dem.header.contains(tx.position))
        throw DomainError("transmitter " + tx.id + " lies outside the master extent");
    const double radius_m = tx.radius_km * 1000.0;
    const SubGrid dem_sub = extract_subgrid(dem, tx.position, radius_m);
    const SubGrid clut_sub = extract_subgrid(clutter, tx.position, radius_m);
    return predict_on_subgrids(dem_sub, clut_sub, tx, diagram, clut_table, params);
}

void aggregate_into(CoverageRaster& acc, const TransmitterConfig& tx,
                    const PathLossField& field) {
    const GridHeader& ext = acc.header;
    if (field.parent_offset.row < 0 || field.parent_offset.col < 0 ||
        field.parent_offset.row + field.nrows() > ext.nrows ||
        field.parent_offset.col + field.ncols() > ext.ncols)
        throw DomainError("aggregate: field for " + tx.id + " exceeds the master extent");

    for (Eigen::Index r = 0; r < field.nrows(); ++r) {
        for (Eigen::Index c = 0; c < field.ncols(); ++c) {
            const double loss = field.loss_db(r, c);
            if (field.is_nodata(loss)) continue;
            const double rx = received_power(tx.power_dbm, loss);
            double& cell =
                acc.values(field.parent_offset.row + r, field.parent_offset.col + c);
            if (acc.is_nodata(cell) || rx > cell) cell = rx;
        }
    }
}

CoverageRaster aggregate(
    const std::vector<std::pair<TransmitterConfig, PathLossField>>& fields,
    const GridHeader& extent) {
    CoverageRaster out;
    out.header = extent;
    out.values.setConstant(extent.nrows, extent.ncols, extent.nodata);
    for (const auto& [tx, field] : fields) aggregate_into(out, tx, field);
    return out;
}

CoverageRaster predict_serial(const RasterGrid& dem, const RasterGrid& clutter,
                              const std::vector<TransmitterConfig>& txs,
                              const DiagramSet& diagrams, const ClutterLossTable& clut_table,
                              const PropagationParams& params) {
    require_aligned(dem, clutter);
    CoverageRaster out;
    out.header = dem.header;
    out.values.setConstant(dem.nrows(), dem.ncols(), dem.header.nodata);
    for (const TransmitterConfig& tx : txs) {
        const PathLossField field =
            predict_transmitter(dem, clutter, tx, diagrams.at(tx.diagram_id), clut_table, params);
        aggregate_into(out, tx, field);
    }
    return out;
}

} // namespace rcov
