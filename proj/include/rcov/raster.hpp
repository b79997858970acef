// SPDX-License-Identifier: Apache-2.0
//
// Georeferenced regular square grids and ESRI ASCII grid I/O.
//
// Grids are stored row-major with row 0 as the northernmost row. Cell
// geolocation is computed from the header, never stored per cell:
//   easting(c)  = xll + (c + 0.5) * cellsize
//   northing(r) = yll + (nrows - r - 0.5) * cellsize
#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>

#include "rcov/errors.hpp"

namespace rcov {

using GridValues =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct GeoPoint {
    double easting = 0.0;
    double northing = 0.0;
};

struct CellIndex {
    Eigen::Index row = 0;
    Eigen::Index col = 0;
    bool operator==(const CellIndex&) const = default;
};

/// Header of a georeferenced grid; shared by full rasters and the wire
/// protocol, which ships extents without values.
struct GridHeader {
    Eigen::Index ncols = 0;
    Eigen::Index nrows = 0;
    double xll = 0.0;      // easting of the lower-left corner, meters
    double yll = 0.0;      // northing of the lower-left corner, meters
    double cellsize = 0.0; // meters per cell edge
    double nodata = -9999.0;

    bool operator==(const GridHeader&) const = default;

    GeoPoint cell_center(Eigen::Index r, Eigen::Index c) const {
        return {xll + (static_cast<double>(c) + 0.5) * cellsize,
                yll + (static_cast<double>(nrows - r) - 0.5) * cellsize};
    }
    /// Cell containing a point; points on a gridline belong to the
    /// higher-index cell along the axis (floor convention).
    CellIndex cell_at(const GeoPoint& p) const {
        const auto c = static_cast<Eigen::Index>(std::floor((p.easting - xll) / cellsize));
        const auto from_bottom =
            static_cast<Eigen::Index>(std::floor((p.northing - yll) / cellsize));
        return {nrows - 1 - from_bottom, c};
    }
    bool contains(const GeoPoint& p) const {
        const double w = static_cast<double>(ncols) * cellsize;
        const double h = static_cast<double>(nrows) * cellsize;
        return p.easting >= xll && p.easting < xll + w && p.northing >= yll &&
               p.northing < yll + h;
    }
    bool in_bounds(Eigen::Index r, Eigen::Index c) const {
        return r >= 0 && r < nrows && c >= 0 && c < ncols;
    }
};

struct RasterGrid {
    GridHeader header;
    GridValues values; // nrows x ncols, row 0 = northernmost

    Eigen::Index nrows() const { return header.nrows; }
    Eigen::Index ncols() const { return header.ncols; }
    double operator()(Eigen::Index r, Eigen::Index c) const { return values(r, c); }
    bool is_nodata(double v) const { return v == header.nodata; }
    bool is_nodata_at(Eigen::Index r, Eigen::Index c) const {
        return values(r, c) == header.nodata;
    }
};

/// A rectangular window of a master grid. `parent_offset` maps local cell
/// (r, c) to master cell (parent_offset.row + r, parent_offset.col + c);
/// the window's header is re-anchored so its own geolocation is exact.
struct SubGrid {
    CellIndex parent_offset;
    RasterGrid grid;
};

/// Best-server received signal strength over the full master extent, dBm.
using CoverageRaster = RasterGrid;

RasterGrid load_ascii_grid(const std::filesystem::path& path);
void write_ascii_grid(const RasterGrid& grid, const std::filesystem::path& path);

/// Axis-aligned bounding square of `radius` around `center`: all cells whose
/// center lies within `radius` of `center` along either axis, clamped to the
/// map borders. The cell containing `center` is always included.
SubGrid extract_subgrid(const RasterGrid& master, const GeoPoint& center, double radius_m);

} // namespace rcov
