// SPDX-License-Identifier: Apache-2.0
//
// rcov — terrain-based radio-coverage prediction with a serial engine and a
// distributed master-worker runtime (MW and MWD strategies).
//
// Exit codes: 0 success, 2 configuration/parse error, 3 connectivity error,
// 4 runtime failure.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "rcov/bench.hpp"
#include "rcov/engine.hpp"
#include "rcov/runtime.hpp"
#include "rcov/store.hpp"
#include "rcov/transport.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitConnect = 3;
constexpr int kExitRuntime = 4;

struct InputPaths {
    std::string dem, clutter, clutter_losses, transmitters, diagrams;
};

struct LoadedInputs {
    rcov::RasterGrid dem;
    rcov::RasterGrid clutter;
    rcov::ClutterLossTable clut_table;
    rcov::DiagramSet diagrams;
    std::vector<rcov::TransmitterConfig> txs;
};

void add_input_options(CLI::App& cmd, InputPaths& paths) {
    cmd.add_option("--dem", paths.dem, "DEM raster (ESRI ASCII grid)")->required();
    cmd.add_option("--clutter", paths.clutter, "clutter raster (ESRI ASCII grid)")->required();
    cmd.add_option("--clutter-losses", paths.clutter_losses,
                   "clutter code -> loss table (text)")
        ->required();
    cmd.add_option("--transmitters", paths.transmitters, "transmitter CSV")->required();
    cmd.add_option("--diagrams", paths.diagrams, "antenna diagram directory (*.msi)")->required();
}

void add_param_options(CLI::App& cmd, rcov::PropagationParams& params) {
    cmd.add_option("--frequency-mhz", params.frequency_mhz,
                   "default frequency, MHz (per-transmitter CSV values override)");
    cmd.add_option("--rx-height-m", params.rx_height_m, "receiver height above ground, m");
    cmd.add_option("--radius-km", params.radius_m,
                   "default transmission radius, km (per-transmitter CSV values override)")
        ->transform([](std::string s) {
            return std::to_string(std::stod(s) * 1000.0);
        });
    cmd.add_option("--roof-height-m", params.roof_height_m, "mean building height, m");
    cmd.add_option("--street-width-m", params.street_width_m, "street width, m");
    cmd.add_option("--building-separation-m", params.building_separation_m,
                   "building separation, m");
    cmd.add_option("--fresnel-fraction", params.fresnel_clearance_fraction,
                   "fraction of the first Fresnel zone required clear for LOS");
}

void require_file(const std::string& path, const char* what) {
    if (!fs::exists(path))
        throw rcov::IoError(std::string(what) + " not found: " + path);
}

LoadedInputs load_inputs(const InputPaths& paths, const rcov::PropagationParams& params) {
    require_file(paths.dem, "DEM raster");
    require_file(paths.clutter, "clutter raster");
    require_file(paths.clutter_losses, "clutter-loss table");
    require_file(paths.transmitters, "transmitter CSV");

    LoadedInputs in;
    in.dem = rcov::load_ascii_grid(paths.dem);
    in.clutter = rcov::load_ascii_grid(paths.clutter);
    rcov::require_aligned(in.dem, in.clutter);
    in.clut_table = rcov::ClutterLossTable::from_file(paths.clutter_losses);
    in.diagrams = rcov::DiagramSet::from_directory(paths.diagrams);
    in.txs = rcov::load_transmitters_csv(paths.transmitters, params);

    for (const rcov::TransmitterConfig& tx : in.txs) {
        if (!in.diagrams.contains(tx.diagram_id))
            throw rcov::DomainError("transmitter " + tx.id + " references unknown diagram '" +
                                    tx.diagram_id + "'");
        if (tx.frequency_mhz < rcov::PropagationParams::kMinFrequencyMhz ||
            tx.frequency_mhz > rcov::PropagationParams::kMaxFrequencyMhz)
            std::cerr << "warning: transmitter " << tx.id << " frequency "
                      << tx.frequency_mhz << " MHz is outside the model window [800, 2600]\n";
    }
    return in;
}

std::vector<rcov::Endpoint> parse_endpoint_list(const std::string& list) {
    std::vector<rcov::Endpoint> endpoints;
    std::size_t start = 0;
    while (start <= list.size()) {
        const std::size_t comma = list.find(',', start);
        const std::string item =
            list.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        if (!item.empty()) endpoints.push_back(rcov::parse_endpoint(item));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (endpoints.empty())
        throw rcov::DomainError("empty worker endpoint list");
    return endpoints;
}

int classify(const std::exception& e) {
    if (dynamic_cast<const rcov::ConnectError*>(&e)) return kExitConnect;
    if (dynamic_cast<const rcov::ParseError*>(&e) || dynamic_cast<const rcov::DomainError*>(&e) ||
        dynamic_cast<const rcov::IoError*>(&e))
        return kExitConfig;
    return kExitRuntime;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"terrain-based radio-coverage prediction (serial and master-worker)"};
    app.require_subcommand(1);

    rcov::PropagationParams params;

    // predict-serial --------------------------------------------------------
    InputPaths serial_paths;
    std::string serial_output;
    CLI::App* serial = app.add_subcommand("predict-serial", "single-process coverage prediction");
    add_input_options(*serial, serial_paths);
    add_param_options(*serial, params);
    serial->add_option("--output", serial_output, "output coverage raster")->required();

    // predict-parallel ------------------------------------------------------
    InputPaths par_paths;
    std::string par_output, par_mode = "mw", par_workers, par_store_dir;
    int par_local_workers = 0;
    double inject_master_ms = 0, inject_link_ms = 0, inject_persist_ms = 0;
    int dial_timeout_ms = 10000;
    CLI::App* parallel =
        app.add_subcommand("predict-parallel", "master-worker coverage prediction");
    add_input_options(*parallel, par_paths);
    add_param_options(*parallel, params);
    parallel->add_option("--output", par_output, "output coverage raster")->required();
    parallel->add_option("--mode", par_mode, "strategy: mw or mwd")
        ->check(CLI::IsMember({"mw", "mwd"}));
    parallel->add_option("--workers", par_workers,
                         "remote worker endpoints host:port[,host:port...]");
    parallel->add_option("--local-workers", par_local_workers,
                         "spawn N in-process workers over the channel transport");
    parallel->add_option("--store-dir", par_store_dir, "result store directory (MWD)");
    parallel->add_option("--inject-master-delay-ms", inject_master_ms,
                         "injected master service time per result");
    parallel->add_option("--inject-link-delay-ms", inject_link_ms,
                         "injected per-message transport delay");
    parallel->add_option("--inject-persist-latency-ms", inject_persist_ms,
                         "injected store write latency");
    parallel->add_option("--dial-timeout-ms", dial_timeout_ms,
                         "per-endpoint connect deadline");

    // worker ----------------------------------------------------------------
    std::string worker_listen, worker_store_dir;
    int accept_timeout_ms = 30000;
    CLI::App* worker = app.add_subcommand("worker", "coverage worker process");
    worker->add_option("--listen", worker_listen, "endpoint to listen on (host:port)")
        ->required();
    worker->add_option("--store-dir", worker_store_dir, "result store directory (MWD)");
    worker->add_option("--accept-timeout-ms", accept_timeout_ms,
                       "how long to wait for the master");

    // bench -----------------------------------------------------------------
    InputPaths bench_paths;
    std::string bench_report = "report.tsv", bench_modes = "mw,mwd", bench_np = "1,2,4,8";
    std::string bench_store_root;
    int bench_reps = 1, weak_tx_per_np = 0;
    CLI::App* bench = app.add_subcommand("bench", "scaling sweep harness");
    add_input_options(*bench, bench_paths);
    add_param_options(*bench, params);
    bench->add_option("--report", bench_report, "output TSV report path");
    bench->add_option("--modes", bench_modes, "comma-separated modes to sweep");
    bench->add_option("--np-list", bench_np, "comma-separated worker counts (must include 1)");
    bench->add_option("--repetitions", bench_reps, "runs per configuration");
    bench->add_option("--store-root", bench_store_root, "root directory for MWD run stores");
    bench->add_option("--weak-tx-per-np", weak_tx_per_np,
                      "weak scaling: transmitters per worker (0 = strong scaling)");
    bench->add_option("--inject-master-delay-ms", inject_master_ms,
                      "injected master service time per result");
    bench->add_option("--inject-link-delay-ms", inject_link_ms,
                      "injected per-message transport delay");
    bench->add_option("--inject-persist-latency-ms", inject_persist_ms,
                      "injected store write latency");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*serial) {
            const LoadedInputs in = load_inputs(serial_paths, params);
            const rcov::CoverageRaster raster = rcov::predict_serial(
                in.dem, in.clutter, in.txs, in.diagrams, in.clut_table, params);
            rcov::write_ascii_grid(raster, serial_output);
            std::cout << "coverage written to " << serial_output << " (" << in.txs.size()
                      << " transmitters)\n";
            return kExitOk;
        }

        if (*parallel) {
            const rcov::RunMode mode = rcov::run_mode_from_string(par_mode);
            if (mode == rcov::RunMode::MWD && par_store_dir.empty())
                throw rcov::DomainError("--mode mwd requires --store-dir");
            if ((par_local_workers > 0) == !par_workers.empty())
                throw rcov::DomainError("choose exactly one of --workers or --local-workers");

            const LoadedInputs in = load_inputs(par_paths, params);
            rcov::MasterOptions opts;
            opts.mode = mode;
            opts.master_delay_s = inject_master_ms / 1000.0;
            opts.link_delay_s = inject_link_ms / 1000.0;
            opts.persist_latency_s = inject_persist_ms / 1000.0;
            opts.store_dir = par_store_dir;

            rcov::MasterOutcome outcome;
            if (par_local_workers > 0) {
                outcome = rcov::run_local(in.dem, in.clutter, in.txs, in.diagrams,
                                          in.clut_table, params, par_local_workers, opts);
            } else {
                const auto endpoints = parse_endpoint_list(par_workers);
                const auto links = rcov::dial_workers(
                    endpoints, std::chrono::milliseconds(dial_timeout_ms));
                outcome = rcov::master_run(in.dem, in.clutter, in.txs, in.diagrams,
                                           in.clut_table, params, *links, opts);
            }
            rcov::write_ascii_grid(outcome.raster, par_output);
            std::cout << "coverage written to " << par_output << " (mode " << par_mode << ", "
                      << in.txs.size() << " transmitters, wall " << outcome.wall_s << " s)\n";
            return kExitOk;
        }

        if (*worker) {
            const rcov::Endpoint ep = rcov::parse_endpoint(worker_listen);
            const auto conn =
                rcov::listen_for_master(ep, std::chrono::milliseconds(accept_timeout_ms));
            std::optional<fs::path> store_dir;
            if (!worker_store_dir.empty()) store_dir = worker_store_dir;
            const rcov::WorkerStats stats = rcov::worker_run(*conn, store_dir);
            conn->close();
            std::cout << "worker done: " << stats.tasks.size() << " assignments in "
                      << stats.wall_s << " s\n";
            return kExitOk;
        }

        if (*bench) {
            const LoadedInputs in = load_inputs(bench_paths, params);
            rcov::SweepOptions opts;
            opts.modes.clear();
            for (const auto& m : CLI::detail::split(bench_modes, ','))
                opts.modes.push_back(rcov::run_mode_from_string(m));
            opts.np_list.clear();
            for (const auto& n : CLI::detail::split(bench_np, ','))
                opts.np_list.push_back(std::stoi(n));
            opts.repetitions = bench_reps;
            opts.master_delay_s = inject_master_ms / 1000.0;
            opts.link_delay_s = inject_link_ms / 1000.0;
            opts.persist_latency_s = inject_persist_ms / 1000.0;
            opts.weak_tx_per_np = weak_tx_per_np;
            opts.store_root = bench_store_root.empty() ? fs::path("bench_stores")
                                                       : fs::path(bench_store_root);

            const rcov::ScalingReport report = rcov::scaling_sweep(
                in.dem, in.clutter, in.txs, in.diagrams, in.clut_table, params, opts);
            rcov::write_report_tsv(report, bench_report);

            std::printf("%-4s %4s %5s %10s %10s %8s %10s %9s\n", "mode", "np", "tx", "best_s",
                        "median_s", "speedup", "efficiency", "gain_pct");
            for (const rcov::SweepRow& r : report.rows)
                std::printf("%-4s %4d %5d %10.3f %10.3f %8.3f %10.3f %9.2f\n",
                            rcov::to_string(r.mode), r.np, r.tx, r.best_s, r.median_s,
                            r.speedup, r.efficiency, r.gain_pct);
            std::cout << "report written to " << bench_report << "\n";
            return kExitOk;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return classify(e);
    }
    return kExitOk;
}
