// SPDX-License-Identifier: Apache-2.0
//
// Master/worker control and data messages with a framed binary encoding.
//
// Frame layout: 4-byte little-endian payload length, then the payload. The
// payload starts with a 1-byte message tag followed by the fields of that
// message in a fixed order; integers are little-endian, floats are 64-bit
// IEEE-754 in little-endian byte order, strings are a u32 length plus bytes.
#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "rcov/engine.hpp"
#include "rcov/propagation.hpp"
#include "rcov/raster.hpp"

namespace rcov {

enum class RunMode : std::uint8_t { MW = 0, MWD = 1 };

const char* to_string(RunMode mode);
RunMode run_mode_from_string(const std::string& s);

enum class MsgTag : std::uint8_t {
    Metadata = 1,
    Idle = 2,
    KeepAlive = 3,
    Assignment = 4,
    Result = 5,
    Stop = 6,
};

const char* to_string(MsgTag tag);

/// Run-wide configuration delivered to every worker before any assignment.
/// Carries the master-assigned worker id the worker echoes in Idle messages.
struct MetadataMsg {
    std::uint32_t worker_id = 0;
    RunMode mode = RunMode::MW;
    PropagationParams params;
    std::vector<std::pair<long, double>> clutter_losses; // sorted by code
    std::vector<AntennaDiagram> diagrams;
    GridHeader extent;
    double persist_latency_s = 0.0; // injected store latency (bench knob)
    double link_delay_s = 0.0;      // injected per-message transport delay
};

struct IdleMsg {
    std::uint32_t worker_id = 0;
};

struct KeepAliveMsg {};

struct AssignmentMsg {
    TransmitterConfig tx;
    SubGrid dem_sub;
    SubGrid clutter_sub;
};

struct ResultMsg {
    std::string tx_id;
    PathLossField field;
};

struct StopMsg {};

using Message = std::variant<MetadataMsg, IdleMsg, KeepAliveMsg, AssignmentMsg, ResultMsg, StopMsg>;

MsgTag tag_of(const Message& msg);

/// Tag byte plus payload (the content of one frame).
std::vector<std::uint8_t> encode_message(const Message& msg);
Message decode_message(const std::uint8_t* data, std::size_t size);

} // namespace rcov
