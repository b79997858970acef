// SPDX-License-Identifier: Apache-2.0
//
// Two interchangeable transports behind one message interface: in-process
// channels for deterministic tests and local runs, and length-prefixed
// binary frames over TCP for multi-host runs. An injectable per-message
// send delay emulates a saturated link.
#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "rcov/protocol.hpp"

namespace rcov {

/// Worker-side bidirectional message stream to the master.
class Connection {
  public:
    virtual ~Connection() = default;
    virtual void send(const Message& msg) = 0;
    /// Blocks for the next message; throws ConnectError if the peer is gone.
    virtual Message recv() = 0;
    /// Announces departure to the master side (idempotent).
    virtual void close() = 0;

    void set_send_delay(double seconds) { send_delay_s_ = seconds; }

  protected:
    void apply_send_delay() const;
    double send_delay_s_ = 0.0;
};

/// Master-side fan-in over all workers. recv_any returns nullopt as the
/// message when a worker disconnects.
class MasterLinks {
  public:
    struct Incoming {
        int worker = -1;
        std::optional<Message> msg; // nullopt = worker disconnected
    };

    virtual ~MasterLinks() = default;
    virtual int worker_count() const = 0;
    virtual void send(int worker, const Message& msg) = 0;
    virtual Incoming recv_any() = 0;

    void set_send_delay(double seconds) { send_delay_s_ = seconds; }

  protected:
    void apply_send_delay() const;
    double send_delay_s_ = 0.0;
};

/// In-process hub wiring one master to N workers over lock-protected queues.
class ChannelHub {
  public:
    explicit ChannelHub(int workers);
    ~ChannelHub();

    MasterLinks& master_links();
    /// Connection object for worker i; valid for the hub's lifetime.
    Connection& worker_connection(int i);

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct Endpoint {
    std::string host;
    std::uint16_t port = 0;
};
Endpoint parse_endpoint(const std::string& s);

/// Worker side: bind and listen on `endpoint`, accept exactly one master
/// connection. Throws ConnectError on bind failure or accept timeout.
std::unique_ptr<Connection> listen_for_master(const Endpoint& endpoint,
                                              std::chrono::milliseconds accept_timeout);

/// Master side: dial every worker endpoint (retrying until the per-endpoint
/// deadline); throws ConnectError listing the unreachable endpoints.
std::unique_ptr<MasterLinks> dial_workers(const std::vector<Endpoint>& endpoints,
                                          std::chrono::milliseconds dial_timeout);

} // namespace rcov
