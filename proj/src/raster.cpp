// SPDX-License-Identifier: Apache-2.0

#include "rcov/raster.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace rcov {
namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

} // namespace

RasterGrid load_ascii_grid(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open raster file: " + path.string());

    GridHeader h;
    bool have_ncols = false, have_nrows = false, have_xll = false, have_yll = false,
         have_cell = false;

    // Header: key/value lines until the first token that parses as a number.
    // Keys are case-insensitive; NODATA_value is optional (default -9999).
    std::string key;
    while (in >> key) {
        const std::string k = lower(key);
        double first_value;
        if (std::istringstream(k) >> first_value) {
            // Start of the body; push the token back via seek.
            in.seekg(-static_cast<std::streamoff>(key.size()), std::ios_base::cur);
            break;
        }
        double v;
        if (!(in >> v)) throw ParseError("raster header: missing value for key '" + key + "'");
        if (k == "ncols") {
            h.ncols = static_cast<Eigen::Index>(v);
            have_ncols = true;
        } else if (k == "nrows") {
            h.nrows = static_cast<Eigen::Index>(v);
            have_nrows = true;
        } else if (k == "xllcorner") {
            h.xll = v;
            have_xll = true;
        } else if (k == "yllcorner") {
            h.yll = v;
            have_yll = true;
        } else if (k == "cellsize") {
            h.cellsize = v;
            have_cell = true;
        } else if (k == "nodata_value") {
            h.nodata = v;
        } else {
            throw ParseError("raster header: unknown key '" + key + "'");
        }
    }
    if (!have_ncols) throw ParseError("raster header: missing key 'ncols'");
    if (!have_nrows) throw ParseError("raster header: missing key 'nrows'");
    if (!have_xll) throw ParseError("raster header: missing key 'xllcorner'");
    if (!have_yll) throw ParseError("raster header: missing key 'yllcorner'");
    if (!have_cell) throw ParseError("raster header: missing key 'cellsize'");
    if (h.ncols < 1 || h.nrows < 1) throw ParseError("raster header: ncols/nrows must be >= 1");
    if (!(h.cellsize > 0)) throw ParseError("raster header: cellsize must be > 0");

    RasterGrid g;
    g.header = h;
    g.values.resize(h.nrows, h.ncols);

    const Eigen::Index expected = h.nrows * h.ncols;
    Eigen::Index count = 0;
    double v;
    while (count < expected && (in >> v)) {
        g.values(count / h.ncols, count % h.ncols) = v;
        ++count;
    }
    if (count < expected) {
        throw ParseError("raster body: expected " + std::to_string(expected) +
                         " values, found " + std::to_string(count));
    }
    if (in >> v) {
        throw ParseError("raster body: expected " + std::to_string(expected) +
                         " values, found more");
    }
    return g;
}

void write_ascii_grid(const RasterGrid& grid, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open raster file for writing: " + path.string());

    char buf[64];
    auto fmt = [&buf](double v) {
        std::snprintf(buf, sizeof buf, "%.6f", v);
        return std::string(buf);
    };

    out << "ncols " << grid.ncols() << "\n";
    out << "nrows " << grid.nrows() << "\n";
    out << "xllcorner " << fmt(grid.header.xll) << "\n";
    out << "yllcorner " << fmt(grid.header.yll) << "\n";
    out << "cellsize " << fmt(grid.header.cellsize) << "\n";
    out << "NODATA_value " << fmt(grid.header.nodata) << "\n";
    for (Eigen::Index r = 0; r < grid.nrows(); ++r) {
        for (Eigen::Index c = 0; c < grid.ncols(); ++c) {
            if (c) out << ' ';
            out << fmt(grid.values(r, c));
        }
        out << "\n";
    }
    if (!out) throw IoError("write failed: " + path.string());
}

SubGrid extract_subgrid(const RasterGrid& master, const GeoPoint& center, double radius_m) {
    const GridHeader& h = master.header;
    if (!h.contains(center))
        throw DomainError("extract_subgrid: center outside master extent");
    if (!(radius_m > 0)) throw DomainError("extract_subgrid: radius must be > 0");

    const CellIndex cc = h.cell_at(center);

    // Cells whose center lies within radius along each axis.
    auto c_lo = static_cast<Eigen::Index>(
        std::ceil((center.easting - radius_m - h.xll) / h.cellsize - 0.5));
    auto c_hi = static_cast<Eigen::Index>(
        std::floor((center.easting + radius_m - h.xll) / h.cellsize - 0.5));
    // Row centers: northing(r) = yll + (nrows - r - 0.5) * cellsize.
    auto r_lo = static_cast<Eigen::Index>(std::ceil(
        static_cast<double>(h.nrows) - 0.5 - (center.northing + radius_m - h.yll) / h.cellsize));
    auto r_hi = static_cast<Eigen::Index>(std::floor(
        static_cast<double>(h.nrows) - 0.5 - (center.northing - radius_m - h.yll) / h.cellsize));

    c_lo = std::min(c_lo, cc.col);
    c_hi = std::max(c_hi, cc.col);
    r_lo = std::min(r_lo, cc.row);
    r_hi = std::max(r_hi, cc.row);

    c_lo = std::max<Eigen::Index>(c_lo, 0);
    r_lo = std::max<Eigen::Index>(r_lo, 0);
    c_hi = std::min(c_hi, h.ncols - 1);
    r_hi = std::min(r_hi, h.nrows - 1);

    const Eigen::Index nr = r_hi - r_lo + 1;
    const Eigen::Index nc = c_hi - c_lo + 1;

    SubGrid sub;
    sub.parent_offset = {r_lo, c_lo};
    sub.grid.header.ncols = nc;
    sub.grid.header.nrows = nr;
    sub.grid.header.cellsize = h.cellsize;
    sub.grid.header.nodata = h.nodata;
    sub.grid.header.xll = h.xll + static_cast<double>(c_lo) * h.cellsize;
    sub.grid.header.yll = h.yll + static_cast<double>(h.nrows - r_lo - nr) * h.cellsize;
    sub.grid.values = master.values.block(r_lo, c_lo, nr, nc);
    return sub;
}

} // namespace rcov
