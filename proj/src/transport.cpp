// SPDX-License-Identifier: Apache-2.0

#include "rcov/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <thread>

namespace rcov {

void Connection::apply_send_delay() const {
    if (send_delay_s_ > 0)
        std::this_thread::sleep_for(std::chrono::duration<double>(send_delay_s_));
}

void MasterLinks::apply_send_delay() const {
    if (send_delay_s_ > 0)
        std::this_thread::sleep_for(std::chrono::duration<double>(send_delay_s_));
}

// ---------------------------------------------------------------------------
// In-process channel transport
// ---------------------------------------------------------------------------

namespace {

struct InboxEntry {
    int worker;
    std::optional<Message> msg;
};

struct SharedState {
    std::mutex mu;
    std::condition_variable cv;
    std::deque<InboxEntry> master_inbox;
    std::vector<std::deque<Message>> worker_inbox;
    std::vector<std::condition_variable> worker_cv;

    explicit SharedState(int n) : worker_inbox(static_cast<std::size_t>(n)), worker_cv(static_cast<std::size_t>(n)) {}
};

class ChannelConnection final : public Connection {
  public:
    ChannelConnection(SharedState& state, int id) : state_(state), id_(id) {}

    void send(const Message& msg) override {
        apply_send_delay();
        std::lock_guard lk(state_.mu);
        state_.master_inbox.push_back({id_, msg});
        state_.cv.notify_all();
    }

    Message recv() override {
        std::unique_lock lk(state_.mu);
        auto& inbox = state_.worker_inbox[static_cast<std::size_t>(id_)];
        state_.worker_cv[static_cast<std::size_t>(id_)].wait(lk, [&] { return !inbox.empty(); });
        Message msg = std::move(inbox.front());
        inbox.pop_front();
        return msg;
    }

    void close() override {
        if (closed_.exchange(true)) return;
        std::lock_guard lk(state_.mu);
        state_.master_inbox.push_back({id_, std::nullopt});
        state_.cv.notify_all();
    }

  private:
    SharedState& state_;
    int id_;
    std::atomic<bool> closed_{false};
};

class ChannelMasterLinks final : public MasterLinks {
  public:
    explicit ChannelMasterLinks(SharedState& state, int n) : state_(state), n_(n) {}

    int worker_count() const override { return n_; }

    void send(int worker, const Message& msg) override {
        apply_send_delay();
        std::lock_guard lk(state_.mu);
        state_.worker_inbox[static_cast<std::size_t>(worker)].push_back(msg);
        state_.worker_cv[static_cast<std::size_t>(worker)].notify_all();
    }

    Incoming recv_any() override {
        std::unique_lock lk(state_.mu);
        state_.cv.wait(lk, [&] { return !state_.master_inbox.empty(); });
        InboxEntry e = std::move(state_.master_inbox.front());
        state_.master_inbox.pop_front();
        return {e.worker, std::move(e.msg)};
    }

  private:
    SharedState& state_;
    int n_;
};

} // namespace

struct ChannelHub::Impl {
    SharedState state;
    ChannelMasterLinks master;
    std::vector<ChannelConnection> connections;

    explicit Impl(int n) : state(n), master(state, n) {
        connections.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) connections.emplace_back(state, i);
    }
};

ChannelHub::ChannelHub(int workers) : impl_(std::make_unique<Impl>(workers)) {}
ChannelHub::~ChannelHub() = default;
MasterLinks& ChannelHub::master_links() { return impl_->master; }
Connection& ChannelHub::worker_connection(int i) {
    return impl_->connections.at(static_cast<std::size_t>(i));
}

// ---------------------------------------------------------------------------
// TCP transport: 4-byte little-endian frame length + payload
// ---------------------------------------------------------------------------

namespace {

void write_all(int fd, const std::uint8_t* data, std::size_t size) {
    std::size_t off = 0;
    while (off < size) {
        const ssize_t n = ::send(fd, data + off, size - off, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw ConnectError(std::string("socket write failed: ") + std::strerror(errno));
        }
        off += static_cast<std::size_t>(n);
    }
}

bool read_all(int fd, std::uint8_t* data, std::size_t size) {
    std::size_t off = 0;
    while (off < size) {
        const ssize_t n = ::recv(fd, data + off, size - off, 0);
        if (n == 0) return false; // orderly shutdown
        if (n < 0) {
            if (errno == EINTR) continue;
            throw ConnectError(std::string("socket read failed: ") + std::strerror(errno));
        }
        off += static_cast<std::size_t>(n);
    }
    return true;
}

void send_frame(int fd, const Message& msg) {
    const std::vector<std::uint8_t> payload = encode_message(msg);
    std::uint8_t len[4];
    const auto size = static_cast<std::uint32_t>(payload.size());
    for (int i = 0; i < 4; ++i) len[i] = static_cast<std::uint8_t>(size >> (8 * i));
    write_all(fd, len, 4);
    write_all(fd, payload.data(), payload.size());
}

std::optional<Message> recv_frame(int fd) {
    std::uint8_t len[4];
    if (!read_all(fd, len, 4)) return std::nullopt;
    std::uint32_t size = 0;
    for (int i = 0; i < 4; ++i) size |= static_cast<std::uint32_t>(len[i]) << (8 * i);
    std::vector<std::uint8_t> payload(size);
    if (!read_all(fd, payload.data(), size)) throw ConnectError("peer closed mid-frame");
    return decode_message(payload.data(), payload.size());
}

class SocketGuard {
  public:
    explicit SocketGuard(int fd = -1) : fd_(fd) {}
    ~SocketGuard() { reset(); }
    SocketGuard(SocketGuard&& o) noexcept : fd_(o.release()) {}
    SocketGuard& operator=(SocketGuard&& o) noexcept {
        reset();
        fd_ = o.release();
        return *this;
    }
    int get() const { return fd_; }
    int release() {
        int fd = fd_;
        fd_ = -1;
        return fd;
    }
    void reset() {
        if (fd_ >= 0) ::close(fd_);
        fd_ = -1;
    }

  private:
    int fd_;
};

class TcpConnection final : public Connection {
  public:
    explicit TcpConnection(SocketGuard fd) : fd_(std::move(fd)) {}

    void send(const Message& msg) override {
        apply_send_delay();
        std::lock_guard lk(send_mu_);
        send_frame(fd_.get(), msg);
    }

    Message recv() override {
        auto msg = recv_frame(fd_.get());
        if (!msg) throw ConnectError("master closed the connection");
        return std::move(*msg);
    }

    void close() override { fd_.reset(); }

  private:
    SocketGuard fd_;
    std::mutex send_mu_;
};

/// Master side over sockets: one reader thread per worker feeds a shared
/// inbox; sends write directly under a per-connection lock.
class TcpMasterLinks final : public MasterLinks {
  public:
    explicit TcpMasterLinks(std::vector<SocketGuard> fds)
        : fds_(std::move(fds)), send_mu_(std::make_unique<std::mutex[]>(fds_.size())) {
        for (std::size_t i = 0; i < fds_.size(); ++i) {
            readers_.emplace_back([this, i] { reader_loop(static_cast<int>(i)); });
        }
    }

    ~TcpMasterLinks() override {
        for (auto& fd : fds_)
            if (fd.get() >= 0) ::shutdown(fd.get(), SHUT_RDWR); // unblocks readers
        for (auto& t : readers_)
            if (t.joinable()) t.join();
    }

    int worker_count() const override { return static_cast<int>(fds_.size()); }

    void send(int worker, const Message& msg) override {
        apply_send_delay();
        std::lock_guard lk(send_mu_[static_cast<std::size_t>(worker)]);
        send_frame(fds_[static_cast<std::size_t>(worker)].get(), msg);
    }

    Incoming recv_any() override {
        std::unique_lock lk(mu_);
        cv_.wait(lk, [&] { return !inbox_.empty(); });
        InboxEntry e = std::move(inbox_.front());
        inbox_.pop_front();
        return {e.worker, std::move(e.msg)};
    }

  private:
    void reader_loop(int worker) {
        try {
            while (true) {
                auto msg = recv_frame(fds_[static_cast<std::size_t>(worker)].get());
                std::lock_guard lk(mu_);
                const bool eof = !msg.has_value();
                inbox_.push_back({worker, std::move(msg)});
                cv_.notify_all();
                if (eof) return;
            }
        } catch (const std::exception&) {
            std::lock_guard lk(mu_);
            inbox_.push_back({worker, std::nullopt});
            cv_.notify_all();
        }
    }

    std::vector<SocketGuard> fds_;
    std::unique_ptr<std::mutex[]> send_mu_;
    std::mutex mu_;
    std::condition_variable cv_;
    std::deque<InboxEntry> inbox_;
    std::vector<std::thread> readers_;
};

sockaddr_in resolve(const Endpoint& ep) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(ep.port);
    if (::inet_pton(AF_INET, ep.host.c_str(), &addr.sin_addr) == 1) return addr;
    hostent* he = ::gethostbyname(ep.host.c_str());
    if (!he || he->h_addrtype != AF_INET)
        throw ConnectError("cannot resolve host " + ep.host);
    std::memcpy(&addr.sin_addr, he->h_addr, sizeof(addr.sin_addr));
    return addr;
}

} // namespace

Endpoint parse_endpoint(const std::string& s) {
    const auto colon = s.rfind(':');
    if (colon == std::string::npos || colon + 1 >= s.size())
        throw DomainError("endpoint must be host:port, got '" + s + "'");
    Endpoint ep;
    ep.host = s.substr(0, colon);
    const std::string port_str = s.substr(colon + 1);
    try {
        const unsigned long port = std::stoul(port_str);
        if (port == 0 || port > 65535) throw std::out_of_range(port_str);
        ep.port = static_cast<std::uint16_t>(port);
    } catch (const std::exception&) {
        throw DomainError("bad port in endpoint '" + s + "'");
    }
    return ep;
}

std::unique_ptr<Connection> listen_for_master(const Endpoint& endpoint,
                                              std::chrono::milliseconds accept_timeout) {
    SocketGuard listener(::socket(AF_INET, SOCK_STREAM, 0));
    if (listener.get() < 0)
        throw ConnectError(std::string("cannot create socket: ") + std::strerror(errno));
    const int one = 1;
    ::setsockopt(listener.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr = resolve(endpoint);
    if (::bind(listener.get(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
        throw ConnectError("cannot bind " + endpoint.host + ":" + std::to_string(endpoint.port) +
                           ": " + std::strerror(errno));
    if (::listen(listener.get(), 1) != 0)
        throw ConnectError(std::string("listen failed: ") + std::strerror(errno));

    pollfd pfd{listener.get(), POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(accept_timeout.count()));
    if (ready <= 0)
        throw ConnectError("no master connected to " + endpoint.host + ":" +
                           std::to_string(endpoint.port) + " within the accept timeout");
    SocketGuard conn(::accept(listener.get(), nullptr, nullptr));
    if (conn.get() < 0)
        throw ConnectError(std::string("accept failed: ") + std::strerror(errno));
    const int nd = 1;
    ::setsockopt(conn.get(), IPPROTO_TCP, TCP_NODELAY, &nd, sizeof nd);
    return std::make_unique<TcpConnection>(std::move(conn));
}

std::unique_ptr<MasterLinks> dial_workers(const std::vector<Endpoint>& endpoints,
                                          std::chrono::milliseconds dial_timeout) {
    std::vector<SocketGuard> fds;
    std::string failures;
    for (const Endpoint& ep : endpoints) {
        const auto deadline = std::chrono::steady_clock::now() + dial_timeout;
        SocketGuard fd;
        while (true) {
            fd = SocketGuard(::socket(AF_INET, SOCK_STREAM, 0));
            if (fd.get() < 0)
                throw ConnectError(std::string("cannot create socket: ") + std::strerror(errno));
            sockaddr_in addr = resolve(ep);
            if (::connect(fd.get(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0) break;
            fd.reset();
            if (std::chrono::steady_clock::now() >= deadline) break;
            std::this_thread::sleep_for(std::chrono::milliseconds(50));
        }
        if (fd.get() < 0) {
            failures += (failures.empty() ? "" : ", ") + ep.host + ":" + std::to_string(ep.port);
            continue;
        }
        const int nd = 1;
        ::setsockopt(fd.get(), IPPROTO_TCP, TCP_NODELAY, &nd, sizeof nd);
        fds.push_back(std::move(fd));
    }
    if (!failures.empty())
        throw ConnectError("unreachable worker endpoints: " + failures);
    return std::make_unique<TcpMasterLinks>(std::move(fds));
}

} // namespace rcov
