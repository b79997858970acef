// SPDX-License-Identifier: Apache-2.0

#include "rcov/store.hpp"

#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

namespace rcov {

namespace fs = std::filesystem;

ResultStore::ResultStore(fs::path run_dir, double inject_latency_s)
    : dir_(std::move(run_dir)), inject_latency_s_(inject_latency_s) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec && !fs::is_directory(dir_))
        throw StoreError("cannot create store directory " + dir_.string() + ": " + ec.message());
}

void ResultStore::put_table(const std::string& tx_id, const PathLossField& field,
                            const GridHeader& extent) const {
    const fs::path final_path = dir_ / (tx_id + ".tsv");
    if (fs::exists(final_path))
        throw StoreConflictError("table already committed for transmitter " + tx_id);

    if (inject_latency_s_ > 0)
        std::this_thread::sleep_for(std::chrono::duration<double>(inject_latency_s_));

    static std::atomic<unsigned> counter{0};
    const fs::path tmp_path =
        dir_ / ("." + tx_id + ".tmp." + std::to_string(::getpid()) + "." +
                std::to_string(counter.fetch_add(1)));

    {
        std::ofstream out(tmp_path);
        if (!out) throw StoreError("cannot open temporary table file " + tmp_path.string());
        char buf[128];
        for (Eigen::Index r = 0; r < field.nrows(); ++r) {
            for (Eigen::Index c = 0; c < field.ncols(); ++c) {
                const double loss = field.loss_db(r, c);
                if (field.is_nodata(loss)) continue;
                const GeoPoint center = extent.cell_center(field.parent_offset.row + r,
                                                           field.parent_offset.col + c);
                std::snprintf(buf, sizeof buf, "%.6f\t%.6f\t%.6f\n", center.easting,
                              center.northing, loss);
                out << buf;
            }
        }
        if (!out) throw StoreError("write failed for table " + tmp_path.string());
    }

    // link() publishes the complete file and fails on an existing target, so
    // concurrent duplicate commits resolve to exactly one winner.
    if (::link(tmp_path.c_str(), final_path.c_str()) != 0) {
        const int err = errno;
        std::error_code ec;
        fs::remove(tmp_path, ec);
        if (err == EEXIST)
            throw StoreConflictError("table already committed for transmitter " + tx_id);
        throw StoreError("cannot commit table for " + tx_id + ": " + std::strerror(err));
    }
    std::error_code ec;
    fs::remove(tmp_path, ec);
}

std::vector<std::string> ResultStore::table_ids() const {
    std::vector<std::string> ids;
    for (const auto& entry : fs::directory_iterator(dir_)) {
        const fs::path& p = entry.path();
        if (p.extension() == ".tsv" && !p.filename().string().starts_with("."))
            ids.push_back(p.stem().string());
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

std::vector<ResultStore::Row> ResultStore::read_table(const std::string& tx_id) const {
    const fs::path path = dir_ / (tx_id + ".tsv");
    std::ifstream in(path);
    if (!in) throw StoreError("no committed table for transmitter " + tx_id);
    std::vector<Row> rows;
    Row row;
    while (in >> row.easting >> row.northing >> row.loss_db) rows.push_back(row);
    if (!in.eof())
        throw StoreError("malformed row in table " + path.string() + " near row " +
                         std::to_string(rows.size() + 1));
    return rows;
}

CoverageRaster ResultStore::scan_max(const std::vector<TransmitterConfig>& tx_configs,
                                     const GridHeader& extent) const {
    CoverageRaster out;
    out.header = extent;
    out.values.setConstant(extent.nrows, extent.ncols, extent.nodata);

    for (const std::string& id : table_ids()) {
        const TransmitterConfig* tx = nullptr;
        for (const TransmitterConfig& cand : tx_configs)
            if (cand.id == id) {
                tx = &cand;
                break;
            }
        if (!tx) throw DomainError("store table for unknown transmitter id: " + id);

        for (const Row& row : read_table(id)) {
            const CellIndex cell = extent.cell_at({row.easting, row.northing});
            if (!extent.in_bounds(cell.row, cell.col))
                throw DomainError("store row outside the master extent in table " + id);
            const double rx = received_power(tx->power_dbm, row.loss_db);
            double& v = out.values(cell.row, cell.col);
            if (out.is_nodata(v) || rx > v) v = rx;
        }
    }
    return out;
}

std::vector<std::string> concurrent_write_stress(const fs::path& run_dir, int workers,
                                                 int tables_per_worker) {
    const ResultStore store(run_dir);
    std::vector<std::string> violations;

    // One small field shared by all writers; ids are distinct per table.
    GridHeader extent{4, 4, 0.0, 0.0, 25.0, -9999.0};
    PathLossField field;
    field.parent_offset = {0, 0};
    field.nodata = extent.nodata;
    field.loss_db.setConstant(4, 4, 100.0);
    const std::size_t expect_rows = 16;

    std::atomic<bool> done{false};
    std::vector<std::string> reader_violations;
    std::thread reader([&] {
        while (!done.load()) {
            for (const std::string& id : store.table_ids()) {
                try {
                    if (store.read_table(id).size() != expect_rows) {
                        reader_violations.push_back("partial table visible: " + id);
                        return;
                    }
                } catch (const std::exception& e) {
                    reader_violations.push_back(std::string("reader failure: ") + e.what());
                    return;
                }
            }
            std::this_thread::yield();
        }
    });

    std::vector<std::thread> writers;
    std::vector<std::string> writer_errors(static_cast<std::size_t>(workers));
    writers.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        writers.emplace_back([&, w] {
            try {
                for (int k = 0; k < tables_per_worker; ++k)
                    store.put_table("tx_w" + std::to_string(w) + "_k" + std::to_string(k),
                                    field, extent);
            } catch (const std::exception& e) {
                writer_errors[static_cast<std::size_t>(w)] = e.what();
            }
        });
    }
    for (auto& t : writers) t.join();
    done.store(true);
    reader.join();

    for (const std::string& err : writer_errors)
        if (!err.empty()) violations.push_back("writer failure: " + err);
    violations.insert(violations.end(), reader_violations.begin(), reader_violations.end());

    const auto ids = store.table_ids();
    const auto expected = static_cast<std::size_t>(workers) *
                          static_cast<std::size_t>(tables_per_worker);
    if (ids.size() != expected)
        violations.push_back("expected " + std::to_string(expected) + " tables, found " +
                             std::to_string(ids.size()));
    for (const std::string& id : ids) {
        try {
            if (store.read_table(id).size() != expect_rows)
                violations.push_back("incomplete table: " + id);
        } catch (const std::exception& e) {
            violations.push_back(std::string("audit failure: ") + e.what());
        }
    }
    return violations;
}

} // namespace rcov
