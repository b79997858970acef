// SPDX-License-Identifier: Apache-2.0
//
// Timing harness: wall-clock scaling sweeps over (mode, worker count) with
// the speedup and parallel-efficiency metrics. Wall clock is measured from
// master start to master end; the reported time per configuration is the
// best of the repetitions (median alongside).
#pragma once

#include <filesystem>
#include <vector>

#include "rcov/runtime.hpp"

namespace rcov {

struct RunRecord {
    RunMode mode = RunMode::MW;
    int workers = 1; // NP
    int tx_count = 0;
    double wall_clock_s = 0.0;
};

/// S(NP) = base wall clock / run wall clock. The base case is the parallel
/// implementation on one worker of the same mode and instance, never the
/// serial engine.
double speedup(const RunRecord& base, const RunRecord& run);

/// E(NP) = S(NP) / NP.
double efficiency(double speedup_value, int np);

struct SweepRow {
    RunMode mode = RunMode::MW;
    int np = 1;
    int tx = 0;
    double best_s = 0.0;
    double median_s = 0.0;
    double speedup = 0.0;
    double efficiency = 0.0;
    double gain_pct = 0.0; // (MW - MWD)/MW * 100 at this NP; NaN if undefined
};

struct ScalingReport {
    std::vector<SweepRow> rows;
    const SweepRow* find(RunMode mode, int np) const;
};

struct SweepOptions {
    std::vector<RunMode> modes{RunMode::MW, RunMode::MWD};
    std::vector<int> np_list{1, 2, 4, 8};
    int repetitions = 1;
    double master_delay_s = 0.0;
    double link_delay_s = 0.0;
    double persist_latency_s = 0.0;
    /// Weak scaling: transmitters per worker (0 = strong scaling with the
    /// instance's full transmitter list at every NP).
    int weak_tx_per_np = 0;
    /// Root directory for per-run MWD stores.
    std::filesystem::path store_root;
};

/// Runs repetitions x |modes| x |np_list| local runs and assembles the
/// metric table. Requires NP=1 in np_list for the speedup base.
ScalingReport scaling_sweep(const RasterGrid& dem, const RasterGrid& clutter,
                            const std::vector<TransmitterConfig>& txs,
                            const DiagramSet& diagrams, const ClutterLossTable& clut_table,
                            const PropagationParams& params, const SweepOptions& opts);

/// TSV columns: mode, np, tx, best_s, median_s, speedup, efficiency, gain_pct.
void write_report_tsv(const ScalingReport& report, const std::filesystem::path& path);
ScalingReport read_report_tsv(const std::filesystem::path& path);

} // namespace rcov
