// SPDX-License-Identifier: Apache-2.0

#include "rcov/runtime.hpp"

#include <condition_variable>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

namespace rcov {

namespace {

using Clock = std::chrono::steady_clock;

void sleep_s(double seconds) {
    if (seconds > 0) std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
}

std::string describe(const TraceEvent& e) {
    return std::string(e.dir == TraceEvent::Dir::MasterToWorker ? "M->W" : "W->M") + " worker " +
           std::to_string(e.worker) + " " + to_string(e.tag);
}

} // namespace

std::vector<std::string> pair_audit(const RunTrace& trace) {
    std::vector<std::string> violations;

    std::map<int, std::vector<std::size_t>> to_worker, from_worker;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const TraceEvent& e = trace[i];
        (e.dir == TraceEvent::Dir::MasterToWorker ? to_worker : from_worker)[e.worker].push_back(i);
    }

    std::map<int, bool> seen;
    for (const auto& [w, _] : to_worker) seen[w] = true;
    for (const auto& [w, _] : from_worker) seen[w] = true;

    for (const auto& [w, _] : seen) {
        std::size_t idles = 0, keepalives = 0, stops = 0;
        for (std::size_t i : from_worker[w])
            if (trace[i].tag == MsgTag::Idle) ++idles;

        const auto& outs = to_worker[w];
        std::size_t last_stop = 0;
        for (std::size_t pos = 0; pos < outs.size(); ++pos) {
            const TraceEvent& e = trace[outs[pos]];
            switch (e.tag) {
            case MsgTag::KeepAlive:
                ++keepalives;
                if (pos + 1 >= outs.size() || trace[outs[pos + 1]].tag != MsgTag::Assignment)
                    violations.push_back("message " + std::to_string(outs[pos]) + " (" +
                                         describe(e) + "): KeepAlive not followed by an Assignment");
                break;
            case MsgTag::Assignment:
                if (pos == 0 || trace[outs[pos - 1]].tag != MsgTag::KeepAlive)
                    violations.push_back("message " + std::to_string(outs[pos]) + " (" +
                                         describe(e) + "): Assignment without a preceding KeepAlive");
                break;
            case MsgTag::Stop:
                ++stops;
                last_stop = pos;
                break;
            default:
                break;
            }
        }

        if (idles != keepalives + stops)
            violations.push_back("worker " + std::to_string(w) + ": " + std::to_string(idles) +
                                 " Idle vs " + std::to_string(keepalives + stops) +
                                 " KeepAlive+Stop replies");
        if (stops != 1)
            violations.push_back("worker " + std::to_string(w) + ": expected exactly one Stop, saw " +
                                 std::to_string(stops));
        else if (last_stop + 1 != outs.size())
            violations.push_back("worker " + std::to_string(w) +
                                 ": Stop is not the final master-to-worker message");
    }
    return violations;
}

// ---------------------------------------------------------------------------
// Master
// ---------------------------------------------------------------------------

MasterOutcome master_run(const RasterGrid& dem, const RasterGrid& clutter,
                         const std::vector<TransmitterConfig>& txs, const DiagramSet& diagrams,
                         const ClutterLossTable& clut_table, const PropagationParams& params,
                         MasterLinks& links, const MasterOptions& opts) {
    require_aligned(dem, clutter);
    for (const TransmitterConfig& tx : txs) {
        diagrams.at(tx.diagram_id); // resolvable before any work is shipped
        if (!dem.header.contains(tx.position))
            throw DomainError("transmitter " + tx.id + " lies outside the master extent");
    }
    if (opts.mode == RunMode::MWD && opts.store_dir.empty())
        throw DomainError("MWD mode requires a store directory");

    const auto t0 = Clock::now();
    const int nworkers = links.worker_count();
    if (nworkers < 1) throw DomainError("master_run: at least one worker is required");
    links.set_send_delay(opts.link_delay_s);

    MasterOutcome out;
    out.raster.header = dem.header;
    out.raster.values.setConstant(dem.nrows(), dem.ncols(), dem.header.nodata);

    MetadataMsg meta;
    meta.mode = opts.mode;
    meta.params = params;
    for (const auto& [code, loss] : clut_table.entries()) meta.clutter_losses.emplace_back(code, loss);
    std::sort(meta.clutter_losses.begin(), meta.clutter_losses.end());
    for (const auto& [id, diagram] : diagrams.all()) meta.diagrams.push_back(diagram);
    meta.extent = dem.header;
    meta.persist_latency_s = opts.persist_latency_s;
    meta.link_delay_s = opts.link_delay_s;

    auto send_traced = [&](int w, const Message& msg, const std::string& tx_id = {}) {
        out.trace.push_back({TraceEvent::Dir::MasterToWorker, w, tag_of(msg), tx_id});
        links.send(w, msg);
    };

    for (int w = 0; w < nworkers; ++w) {
        meta.worker_id = static_cast<std::uint32_t>(w);
        send_traced(w, meta);
    }

    std::map<std::string, const TransmitterConfig*> tx_by_id;
    for (const TransmitterConfig& tx : txs) {
        if (!tx_by_id.emplace(tx.id, &tx).second)
            throw DomainError("duplicate transmitter id: " + tx.id);
    }

    std::size_t next_tx = 0;
    int stopped = 0;
    std::vector<bool> worker_stopped(static_cast<std::size_t>(nworkers), false);

    while (stopped < nworkers) {
        MasterLinks::Incoming in = links.recv_any();
        if (!in.msg) {
            if (in.worker >= 0 && worker_stopped[static_cast<std::size_t>(in.worker)])
                continue; // orderly departure after Stop
            throw ConnectError("worker " + std::to_string(in.worker) + " vanished mid-run");
        }
        const Message& msg = *in.msg;
        out.trace.push_back({TraceEvent::Dir::WorkerToMaster, in.worker, tag_of(msg),
                             std::holds_alternative<ResultMsg>(msg)
                                 ? std::get<ResultMsg>(msg).tx_id
                                 : std::string{}});

        if (const auto* idle = std::get_if<IdleMsg>(&msg)) {
            if (static_cast<int>(idle->worker_id) != in.worker)
                throw ProtocolError("Idle from worker " + std::to_string(in.worker) +
                                    " carries id " + std::to_string(idle->worker_id));
            if (next_tx < txs.size()) {
                const TransmitterConfig& tx = txs[next_tx++];
                send_traced(in.worker, KeepAliveMsg{});
                // Lazy decomposition: sub-grids are cut per assignment.
                AssignmentMsg assign;
                assign.tx = tx;
                assign.dem_sub = extract_subgrid(dem, tx.position, tx.radius_km * 1000.0);
                assign.clutter_sub = extract_subgrid(clutter, tx.position, tx.radius_km * 1000.0);
                send_traced(in.worker, std::move(assign), tx.id);
            } else {
                send_traced(in.worker, StopMsg{});
                worker_stopped[static_cast<std::size_t>(in.worker)] = true;
                ++stopped;
            }
        } else if (const auto* result = std::get_if<ResultMsg>(&msg)) {
            if (opts.mode != RunMode::MW)
                throw ProtocolError("Result message received in MWD mode");
            const auto it = tx_by_id.find(result->tx_id);
            if (it == tx_by_id.end())
                throw ProtocolError("Result for unknown transmitter " + result->tx_id);
            sleep_s(opts.master_delay_s); // injected service time per result
            aggregate_into(out.raster, *it->second, result->field);
        } else {
            throw ProtocolError(std::string("unexpected ") + to_string(tag_of(msg)) +
                                " message at the master");
        }
    }

    if (opts.mode == RunMode::MWD) {
        const ResultStore store(opts.store_dir);
        out.raster = store.scan_max(txs, dem.header);
    }

    out.wall_s = std::chrono::duration<double>(Clock::now() - t0).count();
    return out;
}

// ---------------------------------------------------------------------------
// Worker
// ---------------------------------------------------------------------------

namespace {

/// Overlapped result-dump task: one persistence in flight per worker. A
/// second completed result blocks in submit() until the previous persist
/// finishes; drain() blocks until the slot is empty and surfaces any error.
class PersistSlot {
  public:
    PersistSlot(const ResultStore& store, const GridHeader& extent, WorkerStats& stats)
        : store_(store), extent_(extent), stats_(stats) {
        thread_ = std::thread([this] { loop(); });
    }

    ~PersistSlot() {
        {
            std::lock_guard lk(mu_);
            shutdown_ = true;
            cv_.notify_all();
        }
        thread_.join();
    }

    void submit(std::string tx_id, PathLossField field, std::size_t task_index) {
        std::unique_lock lk(mu_);
        cv_.wait(lk, [&] { return !pending_ && !in_flight_; });
        rethrow_locked();
        pending_ = Job{std::move(tx_id), std::move(field), task_index};
        cv_.notify_all();
    }

    void drain() {
        std::unique_lock lk(mu_);
        cv_.wait(lk, [&] { return !pending_ && !in_flight_; });
        rethrow_locked();
    }

  private:
    struct Job {
        std::string tx_id;
        PathLossField field;
        std::size_t task_index;
    };

    void rethrow_locked() {
        if (error_) {
            auto e = error_;
            error_ = nullptr;
            std::rethrow_exception(e);
        }
    }

    void loop() {
        std::unique_lock lk(mu_);
        while (true) {
            cv_.wait(lk, [&] { return pending_.has_value() || shutdown_; });
            if (!pending_) return;
            Job job = std::move(*pending_);
            pending_.reset();
            in_flight_ = true;
            lk.unlock();

            auto& task = stats_.tasks[job.task_index];
            task.persist_start = Clock::now();
            std::exception_ptr err;
            try {
                store_.put_table(job.tx_id, job.field, extent_);
            } catch (...) {
                err = std::current_exception();
            }
            task.persist_end = Clock::now();
            task.persisted = true;

            lk.lock();
            in_flight_ = false;
            if (err && !error_) error_ = err;
            cv_.notify_all();
        }
    }

    const ResultStore& store_;
    GridHeader extent_;
    WorkerStats& stats_;
    std::thread thread_;
    std::mutex mu_;
    std::condition_variable cv_;
    std::optional<Job> pending_;
    bool in_flight_ = false;
    bool shutdown_ = false;
    std::exception_ptr error_;
};

} // namespace

WorkerStats worker_run(Connection& conn,
                       const std::optional<std::filesystem::path>& store_dir) {
    const auto t0 = Clock::now();
    WorkerStats stats;

    Message first = conn.recv();
    const auto* meta = std::get_if<MetadataMsg>(&first);
    if (!meta) throw ProtocolError("worker expected Metadata as the first message");
    conn.set_send_delay(meta->link_delay_s);

    ClutterLossTable clut_table;
    for (const auto& [code, loss] : meta->clutter_losses) clut_table.set(code, loss);
    DiagramSet diagrams;
    for (const AntennaDiagram& d : meta->diagrams) diagrams.add(d);

    std::optional<ResultStore> store;
    std::optional<PersistSlot> persist;
    if (meta->mode == RunMode::MWD) {
        if (!store_dir) throw DomainError("worker in MWD mode requires a store directory");
        store.emplace(*store_dir, meta->persist_latency_s);
        persist.emplace(*store, meta->extent, stats);
    }

    while (true) {
        conn.send(IdleMsg{meta->worker_id});
        Message reply = conn.recv();
        if (std::holds_alternative<StopMsg>(reply)) {
            if (persist) persist->drain(); // wait for the result-dump task
            break;
        }
        if (!std::holds_alternative<KeepAliveMsg>(reply))
            throw ProtocolError(std::string("worker expected KeepAlive or Stop, got ") +
                                to_string(tag_of(reply)));

        Message work = conn.recv();
        auto* assign = std::get_if<AssignmentMsg>(&work);
        if (!assign)
            throw ProtocolError(std::string("worker expected Assignment after KeepAlive, got ") +
                                to_string(tag_of(work)));

        stats.tasks.push_back({});
        const std::size_t task_index = stats.tasks.size() - 1;
        stats.tasks[task_index].tx_id = assign->tx.id;
        stats.tasks[task_index].compute_start = Clock::now();
        PathLossField field =
            predict_on_subgrids(assign->dem_sub, assign->clutter_sub, assign->tx,
                                diagrams.at(assign->tx.diagram_id), clut_table, meta->params);
        stats.tasks[task_index].compute_end = Clock::now();

        if (meta->mode == RunMode::MW) {
            conn.send(ResultMsg{assign->tx.id, std::move(field)});
        } else {
            persist->submit(assign->tx.id, std::move(field), task_index);
        }
    }

    stats.wall_s = std::chrono::duration<double>(Clock::now() - t0).count();
    return stats;
}

// ---------------------------------------------------------------------------
// Local cluster
// ---------------------------------------------------------------------------

MasterOutcome run_local(const RasterGrid& dem, const RasterGrid& clutter,
                        const std::vector<TransmitterConfig>& txs, const DiagramSet& diagrams,
                        const ClutterLossTable& clut_table, const PropagationParams& params,
                        int workers, const MasterOptions& opts,
                        std::vector<WorkerStats>* worker_stats) {
    if (workers < 1) throw DomainError("run_local: at least one worker is required");

    ChannelHub hub(workers);
    std::vector<WorkerStats> stats(static_cast<std::size_t>(workers));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(workers));

    std::optional<std::filesystem::path> store_dir;
    if (opts.mode == RunMode::MWD) store_dir = opts.store_dir;

    for (int i = 0; i < workers; ++i) {
        threads.emplace_back([&, i] {
            Connection& conn = hub.worker_connection(i);
            try {
                stats[static_cast<std::size_t>(i)] = worker_run(conn, store_dir);
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
            conn.close();
        });
    }

    MasterOutcome outcome;
    std::exception_ptr master_error;
    try {
        outcome = master_run(dem, clutter, txs, diagrams, clut_table, params,
                             hub.master_links(), opts);
    } catch (...) {
        master_error = std::current_exception();
        // Unblock any worker still waiting on the master before joining.
        for (int i = 0; i < workers; ++i) {
            try {
                hub.master_links().send(i, StopMsg{});
            } catch (...) {
            }
        }
    }
    for (auto& t : threads) t.join();

    if (master_error) std::rethrow_exception(master_error);
    for (const auto& err : errors)
        if (err) std::rethrow_exception(err);

    if (worker_stats) *worker_stats = std::move(stats);
    return outcome;
}

} // namespace rcov
