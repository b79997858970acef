// SPDX-License-Identifier: Apache-2.0
//
// Deterministic synthetic fixtures: terrain, clutter, antenna diagrams and
// transmitter layouts used by the unit, acceptance, and CLI test suites.
#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "rcov/engine.hpp"
#include "rcov/raster.hpp"

namespace rcov::testsupport {

inline constexpr double kFixtureXll = 500000.0; // planar national-grid-like origin
inline constexpr double kFixtureYll = 100000.0;
inline constexpr double kFixtureCellsize = 25.0; // meters per cell edge

RasterGrid flat_dem(Eigen::Index nrows, Eigen::Index ncols, double elevation_m,
                    double cellsize = kFixtureCellsize);

/// Smooth deterministic hills: a fixed sum of gaussian bumps scaled by
/// `amplitude_m` over a `base_m` plain.
RasterGrid hilly_dem(Eigen::Index nrows, Eigen::Index ncols, double base_m, double amplitude_m,
                     std::uint64_t seed, double cellsize = kFixtureCellsize);

/// Uniform random terrain in [base, base+amplitude); every cell independent.
RasterGrid random_dem(Eigen::Index nrows, Eigen::Index ncols, double base_m, double amplitude_m,
                      std::mt19937_64& rng, double cellsize = kFixtureCellsize);

/// Clutter categories 1..ncodes in deterministic patches aligned with the
/// given extent.
RasterGrid patchy_clutter(const GridHeader& extent, int ncodes, std::uint64_t seed);

ClutterLossTable fixture_clutter_losses();

AntennaDiagram omni_diagram(double gain_dbi = 2.15);
/// 65-degree sector pattern: parabolic roll-off, 25 dB side/back floor in
/// the horizontal plane, 30 dB floor in the vertical plane.
AntennaDiagram sector_diagram(double gain_dbi = 18.0);

void write_diagram(const AntennaDiagram& d, const std::filesystem::path& path);
void write_transmitters_csv(const std::vector<TransmitterConfig>& txs,
                            const std::filesystem::path& path);

/// `count` transmitters spread deterministically over the interior of the
/// extent, alternating omni and sector diagrams with varied mounts.
std::vector<TransmitterConfig> fixture_network(const GridHeader& extent, int count,
                                               double radius_km, double frequency_mhz);

PropagationParams fixture_params(double frequency_mhz = 1843.0);

} // namespace rcov::testsupport
