// SPDX-License-Identifier: Apache-2.0
//
// Pluggable result store: one plain-text table of path-loss rows per
// transmitter, committed atomically. The default backend is a directory per
// run with one file per table; distinct transmitters may be written
// concurrently, and readers only ever see committed tables.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rcov/engine.hpp"
#include "rcov/propagation.hpp"
#include "rcov/raster.hpp"

namespace rcov {

/// On-disk layout: <run_dir>/<tx_id>.tsv, row = "easting\tnorthing\tloss_db\n"
/// with 6 decimal digits. Commit is write-to-temp-then-link, so a table is
/// invisible until complete and duplicate commits surface as conflicts.
class ResultStore {
  public:
    explicit ResultStore(std::filesystem::path run_dir, double inject_latency_s = 0.0);

    /// Serializes every non-sentinel cell of the field as one row, using the
    /// master extent to geolocate cells. Throws StoreConflictError if a table
    /// for tx_id is already committed.
    void put_table(const std::string& tx_id, const PathLossField& field,
                   const GridHeader& extent) const;

    std::vector<std::string> table_ids() const;

    struct Row {
        double easting;
        double northing;
        double loss_db;
    };
    std::vector<Row> read_table(const std::string& tx_id) const;

    /// Aggregation scan over all committed tables: equivalent to
    /// engine::aggregate over the deserialized fields.
    CoverageRaster scan_max(const std::vector<TransmitterConfig>& tx_configs,
                            const GridHeader& extent) const;

    const std::filesystem::path& dir() const { return dir_; }

  private:
    std::filesystem::path dir_;
    double inject_latency_s_;
};

/// Runs W concurrent writers of K tables each against a fresh store while a
/// reader polls for partially visible tables; returns the violation list
/// (empty on success).
std::vector<std::string> concurrent_write_stress(const std::filesystem::path& run_dir,
                                                 int workers, int tables_per_worker);

} // namespace rcov
