// SPDX-License-Identifier: Apache-2.0
//
// Master-worker execution of the coverage engine with two strategies:
//
//   MW  — workers return each path-loss field to the master, which folds it
//         into a running best-server raster as results arrive;
//   MWD — workers persist each field to the result store from an overlapped
//         writer task (one in flight per worker) and the master aggregates
//         once, by scanning the store, after every worker has stopped.
//
// The control protocol pairs every worker Idle with exactly one master
// reply: KeepAlive (an Assignment follows) while transmitters remain, Stop
// otherwise. The run ends when every worker has been stopped.
#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rcov/engine.hpp"
#include "rcov/protocol.hpp"
#include "rcov/store.hpp"
#include "rcov/transport.hpp"

namespace rcov {

struct TraceEvent {
    enum class Dir { MasterToWorker, WorkerToMaster };
    Dir dir;
    int worker;
    MsgTag tag;
    std::string tx_id; // set for Assignment and Result events
};
using RunTrace = std::vector<TraceEvent>;

/// Verifies the pairing discipline on a finished run's trace, per worker:
/// #Idle == #KeepAlive + #Stop; exactly one Stop, and it is the final
/// master-to-worker message; every KeepAlive is followed by exactly one
/// Assignment. Returns the violation list (empty = pass).
std::vector<std::string> pair_audit(const RunTrace& trace);

struct MasterOptions {
    RunMode mode = RunMode::MW;
    /// Injected per-Result master service time, seconds (bench knob).
    double master_delay_s = 0.0;
    /// Injected per-message transport delay, seconds; applied to master
    /// sends and shipped to workers for theirs.
    double link_delay_s = 0.0;
    /// Injected store write latency, seconds; shipped to workers (MWD).
    double persist_latency_s = 0.0;
    /// Result store directory; required in MWD mode.
    std::filesystem::path store_dir;
};

struct MasterOutcome {
    CoverageRaster raster;
    RunTrace trace;
    double wall_s = 0.0; // master start to master end, aggregation included
};

/// Drives the full run against already-connected workers. Output is
/// bit-identical to predict_serial on the same inputs in both modes.
MasterOutcome master_run(const RasterGrid& dem, const RasterGrid& clutter,
                         const std::vector<TransmitterConfig>& txs, const DiagramSet& diagrams,
                         const ClutterLossTable& clut_table, const PropagationParams& params,
                         MasterLinks& links, const MasterOptions& opts);

struct WorkerTaskStats {
    std::string tx_id;
    std::chrono::steady_clock::time_point compute_start;
    std::chrono::steady_clock::time_point compute_end;
    std::chrono::steady_clock::time_point persist_start; // MWD only
    std::chrono::steady_clock::time_point persist_end;   // MWD only
    bool persisted = false;
};

struct WorkerStats {
    std::vector<WorkerTaskStats> tasks;
    double wall_s = 0.0;
};

/// Runs the worker loop until Stop: receive the broadcast metadata, then
/// alternate Idle and the master's reply. Each assignment is computed with
/// predict_on_subgrids; in MW mode the field is sent back, in MWD mode it is
/// handed to the persistence task (which runs concurrently with the next
/// computation) and the next Idle goes out immediately. On Stop the worker
/// drains any in-flight persistence before returning.
WorkerStats worker_run(Connection& conn,
                       const std::optional<std::filesystem::path>& store_dir);

/// Runs a master plus `workers` in-process worker threads over the channel
/// transport. The worker store directory (MWD) is taken from opts.store_dir.
MasterOutcome run_local(const RasterGrid& dem, const RasterGrid& clutter,
                        const std::vector<TransmitterConfig>& txs, const DiagramSet& diagrams,
                        const ClutterLossTable& clut_table, const PropagationParams& params,
                        int workers, const MasterOptions& opts,
                        std::vector<WorkerStats>* worker_stats = nullptr);

} // namespace rcov
