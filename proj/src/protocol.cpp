// SPDX-License-Identifier: Apache-2.0

#include "rcov/protocol.hpp"

#include <bit>
#include <cstring>

namespace rcov {

const char* to_string(RunMode mode) { return mode == RunMode::MW ? "mw" : "mwd"; }

RunMode run_mode_from_string(const std::string& s) {
    if (s == "mw" || s == "MW") return RunMode::MW;
    if (s == "mwd" || s == "MWD") return RunMode::MWD;
    throw DomainError("unknown run mode '" + s + "' (expected mw or mwd)");
}

const char* to_string(MsgTag tag) {
    switch (tag) {
    case MsgTag::Metadata: return "Metadata";
    case MsgTag::Idle: return "Idle";
    case MsgTag::KeepAlive: return "KeepAlive";
    case MsgTag::Assignment: return "Assignment";
    case MsgTag::Result: return "Result";
    case MsgTag::Stop: return "Stop";
    }
    return "?";
}

MsgTag tag_of(const Message& msg) {
    return std::visit(
        [](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, MetadataMsg>) return MsgTag::Metadata;
            else if constexpr (std::is_same_v<T, IdleMsg>) return MsgTag::Idle;
            else if constexpr (std::is_same_v<T, KeepAliveMsg>) return MsgTag::KeepAlive;
            else if constexpr (std::is_same_v<T, AssignmentMsg>) return MsgTag::Assignment;
            else if constexpr (std::is_same_v<T, ResultMsg>) return MsgTag::Result;
            else return MsgTag::Stop;
        },
        msg);
}

namespace {

class ByteWriter {
  public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        buf_.insert(buf_.end(), s.begin(), s.end());
    }
    std::vector<std::uint8_t> take() { return std::move(buf_); }

  private:
    std::vector<std::uint8_t> buf_;
};

class ByteReader {
  public:
    ByteReader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}

    std::uint8_t u8() {
        need(1);
        return data_[pos_++];
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_++]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_++]) << (8 * i);
        return v;
    }
    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() {
        const std::uint32_t n = u32();
        need(n);
        std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
        pos_ += n;
        return s;
    }
    void done() const {
        if (pos_ != size_) throw ProtocolError("message payload has trailing bytes");
    }

  private:
    void need(std::size_t n) const {
        if (pos_ + n > size_) throw ProtocolError("message payload truncated");
    }
    const std::uint8_t* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
};

void put_header(ByteWriter& w, const GridHeader& h) {
    w.u32(static_cast<std::uint32_t>(h.ncols));
    w.u32(static_cast<std::uint32_t>(h.nrows));
    w.f64(h.xll);
    w.f64(h.yll);
    w.f64(h.cellsize);
    w.f64(h.nodata);
}

GridHeader get_header(ByteReader& r) {
    GridHeader h;
    h.ncols = static_cast<Eigen::Index>(r.u32());
    h.nrows = static_cast<Eigen::Index>(r.u32());
    h.xll = r.f64();
    h.yll = r.f64();
    h.cellsize = r.f64();
    h.nodata = r.f64();
    return h;
}

void put_values(ByteWriter& w, const GridValues& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) w.f64(m.data()[i]);
}

GridValues get_values(ByteReader& r, Eigen::Index rows, Eigen::Index cols) {
    GridValues m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = r.f64();
    return m;
}

void put_subgrid(ByteWriter& w, const SubGrid& s) {
    w.u32(static_cast<std::uint32_t>(s.parent_offset.row));
    w.u32(static_cast<std::uint32_t>(s.parent_offset.col));
    put_header(w, s.grid.header);
    put_values(w, s.grid.values);
}

SubGrid get_subgrid(ByteReader& r) {
    SubGrid s;
    s.parent_offset.row = static_cast<Eigen::Index>(r.u32());
    s.parent_offset.col = static_cast<Eigen::Index>(r.u32());
    s.grid.header = get_header(r);
    s.grid.values = get_values(r, s.grid.header.nrows, s.grid.header.ncols);
    return s;
}

void put_diagram(ByteWriter& w, const AntennaDiagram& d) {
    w.str(d.name);
    w.f64(d.gain_dbi);
    for (double v : d.horizontal) w.f64(v);
    for (double v : d.vertical) w.f64(v);
}

AntennaDiagram get_diagram(ByteReader& r) {
    AntennaDiagram d;
    d.name = r.str();
    d.gain_dbi = r.f64();
    for (double& v : d.horizontal) v = r.f64();
    for (double& v : d.vertical) v = r.f64();
    return d;
}

void put_params(ByteWriter& w, const PropagationParams& p) {
    w.f64(p.frequency_mhz);
    w.f64(p.rx_height_m);
    w.f64(p.radius_m);
    w.f64(p.roof_height_m);
    w.f64(p.street_width_m);
    w.f64(p.building_separation_m);
    w.f64(p.fresnel_clearance_fraction);
}

PropagationParams get_params(ByteReader& r) {
    PropagationParams p;
    p.frequency_mhz = r.f64();
    p.rx_height_m = r.f64();
    p.radius_m = r.f64();
    p.roof_height_m = r.f64();
    p.street_width_m = r.f64();
    p.building_separation_m = r.f64();
    p.fresnel_clearance_fraction = r.f64();
    return p;
}

void put_tx(ByteWriter& w, const TransmitterConfig& tx) {
    w.str(tx.id);
    w.f64(tx.position.easting);
    w.f64(tx.position.northing);
    w.f64(tx.height_agl_m);
    w.f64(tx.power_dbm);
    w.f64(tx.frequency_mhz);
    w.f64(tx.radius_km);
    w.f64(tx.mount.azimuth_deg);
    w.f64(tx.mount.mech_tilt_deg);
    w.f64(tx.mount.elec_tilt_deg);
    w.str(tx.diagram_id);
}

TransmitterConfig get_tx(ByteReader& r) {
    TransmitterConfig tx;
    tx.id = r.str();
    tx.position.easting = r.f64();
    tx.position.northing = r.f64();
    tx.height_agl_m = r.f64();
    tx.power_dbm = r.f64();
    tx.frequency_mhz = r.f64();
    tx.radius_km = r.f64();
    tx.mount.azimuth_deg = r.f64();
    tx.mount.mech_tilt_deg = r.f64();
    tx.mount.elec_tilt_deg = r.f64();
    tx.mount.height_agl_m = tx.height_agl_m;
    tx.diagram_id = r.str();
    return tx;
}

} // namespace

std::vector<std::uint8_t> encode_message(const Message& msg) {
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(tag_of(msg)));
    std::visit(
        [&w](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, MetadataMsg>) {
                w.u32(m.worker_id);
                w.u8(static_cast<std::uint8_t>(m.mode));
                put_params(w, m.params);
                w.u32(static_cast<std::uint32_t>(m.clutter_losses.size()));
                for (const auto& [code, loss] : m.clutter_losses) {
                    w.i64(code);
                    w.f64(loss);
                }
                w.u32(static_cast<std::uint32_t>(m.diagrams.size()));
                for (const AntennaDiagram& d : m.diagrams) put_diagram(w, d);
                put_header(w, m.extent);
                w.f64(m.persist_latency_s);
                w.f64(m.link_delay_s);
            } else if constexpr (std::is_same_v<T, IdleMsg>) {
                w.u32(m.worker_id);
            } else if constexpr (std::is_same_v<T, AssignmentMsg>) {
                put_tx(w, m.tx);
                put_subgrid(w, m.dem_sub);
                put_subgrid(w, m.clutter_sub);
            } else if constexpr (std::is_same_v<T, ResultMsg>) {
                w.str(m.tx_id);
                w.u32(static_cast<std::uint32_t>(m.field.parent_offset.row));
                w.u32(static_cast<std::uint32_t>(m.field.parent_offset.col));
                w.u32(static_cast<std::uint32_t>(m.field.loss_db.rows()));
                w.u32(static_cast<std::uint32_t>(m.field.loss_db.cols()));
                w.f64(m.field.nodata);
                put_values(w, m.field.loss_db);
            } else {
                (void)m; // KeepAlive and Stop carry no payload
            }
        },
        msg);
    return w.take();
}

Message decode_message(const std::uint8_t* data, std::size_t size) {
    ByteReader r(data, size);
    const auto tag = static_cast<MsgTag>(r.u8());
    Message out;
    switch (tag) {
    case MsgTag::Metadata: {
        MetadataMsg m;
        m.worker_id = r.u32();
        m.mode = static_cast<RunMode>(r.u8());
        m.params = get_params(r);
        const std::uint32_t nclut = r.u32();
        m.clutter_losses.reserve(nclut);
        for (std::uint32_t i = 0; i < nclut; ++i) {
            const long code = static_cast<long>(r.i64());
            const double loss = r.f64();
            m.clutter_losses.emplace_back(code, loss);
        }
        const std::uint32_t ndiag = r.u32();
        m.diagrams.reserve(ndiag);
        for (std::uint32_t i = 0; i < ndiag; ++i) m.diagrams.push_back(get_diagram(r));
        m.extent = get_header(r);
        m.persist_latency_s = r.f64();
        m.link_delay_s = r.f64();
        out = std::move(m);
        break;
    }
    case MsgTag::Idle: {
        IdleMsg m;
        m.worker_id = r.u32();
        out = m;
        break;
    }
    case MsgTag::KeepAlive:
        out = KeepAliveMsg{};
        break;
    case MsgTag::Assignment: {
        AssignmentMsg m;
        m.tx = get_tx(r);
        m.dem_sub = get_subgrid(r);
        m.clutter_sub = get_subgrid(r);
        out = std::move(m);
        break;
    }
    case MsgTag::Result: {
        ResultMsg m;
        m.tx_id = r.str();
        m.field.parent_offset.row = static_cast<Eigen::Index>(r.u32());
        m.field.parent_offset.col = static_cast<Eigen::Index>(r.u32());
        const auto rows = static_cast<Eigen::Index>(r.u32());
        const auto cols = static_cast<Eigen::Index>(r.u32());
        m.field.nodata = r.f64();
        m.field.loss_db = get_values(r, rows, cols);
        out = std::move(m);
        break;
    }
    case MsgTag::Stop:
        out = StopMsg{};
        break;
    default:
        throw ProtocolError("unknown message tag " + std::to_string(static_cast<int>(tag)));
    }
    r.done();
    return out;
}

} // namespace rcov
