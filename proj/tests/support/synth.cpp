// SPDX-License-Identifier: Apache-2.0

#include "support/synth.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace rcov::testsupport {

namespace {

GridHeader make_header(Eigen::Index nrows, Eigen::Index ncols, double cellsize) {
    GridHeader h;
    h.nrows = nrows;
    h.ncols = ncols;
    h.cellsize = cellsize;
    h.xll = kFixtureXll;
    h.yll = kFixtureYll;
    h.nodata = -9999.0;
    return h;
}

} // namespace

RasterGrid flat_dem(Eigen::Index nrows, Eigen::Index ncols, double elevation_m,
                    double cellsize) {
    RasterGrid g;
    g.header = make_header(nrows, ncols, cellsize);
    g.values.setConstant(nrows, ncols, elevation_m);
    return g;
}

RasterGrid hilly_dem(Eigen::Index nrows, Eigen::Index ncols, double base_m, double amplitude_m,
                     std::uint64_t seed, double cellsize) {
    RasterGrid g = flat_dem(nrows, ncols, base_m, cellsize);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const int nbumps = 6;
    for (int b = 0; b < nbumps; ++b) {
        const double cr = unit(rng) * static_cast<double>(nrows);
        const double cc = unit(rng) * static_cast<double>(ncols);
        const double sigma = (0.08 + 0.12 * unit(rng)) * static_cast<double>(std::max(nrows, ncols));
        const double height = (0.3 + 0.7 * unit(rng)) * amplitude_m;
        for (Eigen::Index r = 0; r < nrows; ++r) {
            for (Eigen::Index c = 0; c < ncols; ++c) {
                const double dr = (static_cast<double>(r) - cr) / sigma;
                const double dc = (static_cast<double>(c) - cc) / sigma;
                g.values(r, c) += height * std::exp(-(dr * dr + dc * dc));
            }
        }
    }
    // Values on the centi-meter lattice keep the ASCII fixtures short.
    for (Eigen::Index i = 0; i < g.values.size(); ++i)
        g.values.data()[i] = std::round(g.values.data()[i] * 100.0) / 100.0;
    return g;
}

RasterGrid random_dem(Eigen::Index nrows, Eigen::Index ncols, double base_m, double amplitude_m,
                      std::mt19937_64& rng, double cellsize) {
    RasterGrid g = flat_dem(nrows, ncols, base_m, cellsize);
    std::uniform_real_distribution<double> dist(0.0, amplitude_m);
    for (Eigen::Index i = 0; i < g.values.size(); ++i) g.values.data()[i] = base_m + dist(rng);
    return g;
}

RasterGrid patchy_clutter(const GridHeader& extent, int ncodes, std::uint64_t seed) {
    RasterGrid g;
    g.header = extent;
    g.values.resize(extent.nrows, extent.ncols);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> code(1, ncodes);
    const Eigen::Index patch = 4;
    for (Eigen::Index r = 0; r < extent.nrows; r += patch) {
        for (Eigen::Index c = 0; c < extent.ncols; c += patch) {
            const double v = static_cast<double>(code(rng));
            for (Eigen::Index rr = r; rr < std::min(r + patch, extent.nrows); ++rr)
                for (Eigen::Index cc = c; cc < std::min(c + patch, extent.ncols); ++cc)
                    g.values(rr, cc) = v;
        }
    }
    return g;
}

ClutterLossTable fixture_clutter_losses() {
    ClutterLossTable t;
    t.set(1, 0.0);  // open land
    t.set(2, 3.0);  // sparse vegetation
    t.set(3, 6.5);  // forest
    t.set(4, 12.0); // urban
    return t;
}

AntennaDiagram omni_diagram(double gain_dbi) {
    AntennaDiagram d = AntennaDiagram::isotropic("omni", gain_dbi);
    return d;
}

AntennaDiagram sector_diagram(double gain_dbi) {
    AntennaDiagram d;
    d.name = "sector65";
    d.gain_dbi = gain_dbi;
    for (int a = 0; a < 360; ++a) {
        const double off = a <= 180 ? a : 360 - a;
        d.horizontal[static_cast<std::size_t>(a)] =
            std::min(25.0, 12.0 * (off / 65.0) * (off / 65.0));
        d.vertical[static_cast<std::size_t>(a)] =
            std::min(30.0, 12.0 * (off / 10.0) * (off / 10.0));
    }
    d.horizontal[0] = 0.0;
    d.vertical[0] = 0.0;
    return d;
}

void write_diagram(const AntennaDiagram& d, const std::filesystem::path& path) {
    std::ofstream out(path);
    char buf[64];
    out << "NAME " << d.name << "\n";
    std::snprintf(buf, sizeof buf, "%.2f", d.gain_dbi);
    out << "GAIN " << buf << " dBi\n";
    out << "HORIZONTAL 360\n";
    for (int a = 0; a < 360; ++a) {
        std::snprintf(buf, sizeof buf, "%d %.2f", a, d.horizontal[static_cast<std::size_t>(a)]);
        out << buf << "\n";
    }
    out << "VERTICAL 360\n";
    for (int a = 0; a < 360; ++a) {
        std::snprintf(buf, sizeof buf, "%d %.2f", a, d.vertical[static_cast<std::size_t>(a)]);
        out << buf << "\n";
    }
}

void write_transmitters_csv(const std::vector<TransmitterConfig>& txs,
                            const std::filesystem::path& path) {
    std::ofstream out(path);
    out << "id,easting,northing,height_agl_m,power_dbm,frequency_mhz,radius_km,azimuth_deg,"
           "mech_tilt_deg,elec_tilt_deg,diagram_id\n";
    char buf[256];
    for (const TransmitterConfig& tx : txs) {
        std::snprintf(buf, sizeof buf, "%s,%.2f,%.2f,%.2f,%.2f,%.2f,%.4f,%.2f,%.2f,%.2f,%s\n",
                      tx.id.c_str(), tx.position.easting, tx.position.northing, tx.height_agl_m,
                      tx.power_dbm, tx.frequency_mhz, tx.radius_km, tx.mount.azimuth_deg,
                      tx.mount.mech_tilt_deg, tx.mount.elec_tilt_deg, tx.diagram_id.c_str());
        out << buf;
    }
}

std::vector<TransmitterConfig> fixture_network(const GridHeader& extent, int count,
                                               double radius_km, double frequency_mhz) {
    std::vector<TransmitterConfig> txs;
    txs.reserve(static_cast<std::size_t>(count));
    std::mt19937_64 rng(0xc0ffee + static_cast<std::uint64_t>(count));
    std::uniform_real_distribution<double> unit(0.15, 0.85);

    const double width = static_cast<double>(extent.ncols) * extent.cellsize;
    const double height = static_cast<double>(extent.nrows) * extent.cellsize;
    for (int i = 0; i < count; ++i) {
        TransmitterConfig tx;
        tx.id = "tx" + std::to_string(i);
        tx.position.easting = extent.xll + std::round(unit(rng) * width * 100.0) / 100.0;
        tx.position.northing = extent.yll + std::round(unit(rng) * height * 100.0) / 100.0;
        tx.height_agl_m = (i % 3 == 0) ? 25.0 : 32.0;
        tx.power_dbm = 43.0 + (i % 4);
        tx.frequency_mhz = frequency_mhz;
        tx.radius_km = radius_km;
        tx.mount.azimuth_deg = static_cast<double>((i * 105) % 360);
        tx.mount.mech_tilt_deg = (i % 2) ? 2.0 : 0.0;
        tx.mount.elec_tilt_deg = (i % 3) ? 1.0 : 0.0;
        tx.mount.height_agl_m = tx.height_agl_m;
        tx.diagram_id = (i % 2) ? "sector65" : "omni";
        txs.push_back(std::move(tx));
    }
    return txs;
}

PropagationParams fixture_params(double frequency_mhz) {
    PropagationParams p;
    p.frequency_mhz = frequency_mhz;
    p.rx_height_m = 1.5;
    p.radius_m = 1000.0;
    return p;
}

} // namespace rcov::testsupport
