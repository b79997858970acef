// SPDX-License-Identifier: Apache-2.0

#include "rcov/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace rcov {

double speedup(const RunRecord& base, const RunRecord& run) {
    if (base.workers != 1) throw DomainError("speedup: base case must be the NP=1 run");
    if (base.mode != run.mode || base.tx_count != run.tx_count)
        throw DomainError("speedup: base and run must share mode and problem instance");
    if (!(base.wall_clock_s > 0) || !(run.wall_clock_s > 0))
        throw DomainError("speedup: wall-clock times must be > 0");
    return base.wall_clock_s / run.wall_clock_s;
}

double efficiency(double speedup_value, int np) {
    if (np < 1) throw DomainError("efficiency: NP must be >= 1");
    return speedup_value / static_cast<double>(np);
}

const SweepRow* ScalingReport::find(RunMode mode, int np) const {
    for (const SweepRow& row : rows)
        if (row.mode == mode && row.np == np) return &row;
    return nullptr;
}

namespace {

std::vector<TransmitterConfig> weak_instance(const std::vector<TransmitterConfig>& txs,
                                             int count) {
    if (txs.empty()) throw DomainError("weak scaling requires a nonempty transmitter list");
    std::vector<TransmitterConfig> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        TransmitterConfig tx = txs[static_cast<std::size_t>(i) % txs.size()];
        if (static_cast<std::size_t>(i) >= txs.size())
            tx.id += "~" + std::to_string(i / static_cast<int>(txs.size()));
        out.push_back(std::move(tx));
    }
    return out;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

ScalingReport scaling_sweep(const RasterGrid& dem, const RasterGrid& clutter,
                            const std::vector<TransmitterConfig>& txs,
                            const DiagramSet& diagrams, const ClutterLossTable& clut_table,
                            const PropagationParams& params, const SweepOptions& opts) {
    if (opts.repetitions < 1) throw DomainError("scaling_sweep: repetitions must be >= 1");
    if (std::find(opts.np_list.begin(), opts.np_list.end(), 1) == opts.np_list.end())
        throw DomainError("scaling_sweep: np_list must contain 1 (the speedup base)");

    ScalingReport report;
    for (RunMode mode : opts.modes) {
        for (int np : opts.np_list) {
            const std::vector<TransmitterConfig> instance =
                opts.weak_tx_per_np > 0 ? weak_instance(txs, opts.weak_tx_per_np * np) : txs;

            std::vector<double> walls;
            walls.reserve(static_cast<std::size_t>(opts.repetitions));
            for (int rep = 0; rep < opts.repetitions; ++rep) {
                MasterOptions mo;
                mo.mode = mode;
                mo.master_delay_s = opts.master_delay_s;
                mo.link_delay_s = opts.link_delay_s;
                mo.persist_latency_s = opts.persist_latency_s;
                if (mode == RunMode::MWD) {
                    if (opts.store_root.empty())
                        throw DomainError("scaling_sweep: MWD mode requires store_root");
                    mo.store_dir = opts.store_root /
                                   ("run_" + std::string(to_string(mode)) + "_np" +
                                    std::to_string(np) + "_rep" + std::to_string(rep));
                    std::filesystem::remove_all(mo.store_dir);
                }
                const MasterOutcome outcome = run_local(dem, clutter, instance, diagrams,
                                                        clut_table, params, np, mo);
                walls.push_back(outcome.wall_s);
            }

            SweepRow row;
            row.mode = mode;
            row.np = np;
            row.tx = static_cast<int>(instance.size());
            row.best_s = *std::min_element(walls.begin(), walls.end());
            row.median_s = median(walls);
            report.rows.push_back(row);
        }
    }

    for (SweepRow& row : report.rows) {
        const SweepRow* base = report.find(row.mode, 1);
        const RunRecord base_rec{base->mode, 1, base->tx, base->best_s};
        const RunRecord run_rec{row.mode, row.np, row.tx, row.best_s};
        row.speedup = speedup(base_rec, run_rec);
        row.efficiency = efficiency(row.speedup, row.np);
    }
    for (SweepRow& row : report.rows) {
        const SweepRow* mw = report.find(RunMode::MW, row.np);
        const SweepRow* mwd = report.find(RunMode::MWD, row.np);
        row.gain_pct = (mw && mwd) ? (mw->best_s - mwd->best_s) / mw->best_s * 100.0
                                   : std::numeric_limits<double>::quiet_NaN();
    }
    return report;
}

void write_report_tsv(const ScalingReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open report for writing: " + path.string());
    out << "mode\tnp\ttx\tbest_s\tmedian_s\tspeedup\tefficiency\tgain_pct\n";
    char buf[256];
    for (const SweepRow& r : report.rows) {
        std::snprintf(buf, sizeof buf, "%s\t%d\t%d\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f\n",
                      to_string(r.mode), r.np, r.tx, r.best_s, r.median_s, r.speedup,
                      r.efficiency, r.gain_pct);
        out << buf;
    }
    if (!out) throw IoError("report write failed: " + path.string());
}

ScalingReport read_report_tsv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open report: " + path.string());
    std::string line;
    if (!std::getline(in, line) ||
        line != "mode\tnp\ttx\tbest_s\tmedian_s\tspeedup\tefficiency\tgain_pct")
        throw ParseError("report header mismatch in " + path.string());

    ScalingReport report;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string mode, gain;
        SweepRow r;
        if (!(ls >> mode >> r.np >> r.tx >> r.best_s >> r.median_s >> r.speedup >>
              r.efficiency >> gain))
            throw ParseError("bad report row at line " + std::to_string(lineno) + " of " +
                             path.string());
        r.mode = run_mode_from_string(mode);
        r.gain_pct = std::stod(gain); // stod accepts "nan" where stream >> does not
        report.rows.push_back(r);
    }
    return report;
}

} // namespace rcov
