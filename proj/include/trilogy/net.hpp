#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "trilogy/protocol.hpp"

namespace trilogy::agentbus {

struct Address {
    std::string host;
    std::uint16_t port = 0;

    std::string to_string() const { return host + ":" + std::to_string(port); }
};

// "host:port"; throws InvalidInput if the port is missing or malformed.
Address parse_address(const std::string& s);

// Move-only connected socket with buffered line reads.
class TcpStream {
public:
    TcpStream() = default;
    explicit TcpStream(int fd) : fd_(fd) {}
    TcpStream(TcpStream&& other) noexcept;
    TcpStream& operator=(TcpStream&& other) noexcept;
    TcpStream(const TcpStream&) = delete;
    TcpStream& operator=(const TcpStream&) = delete;
    ~TcpStream();

    static TcpStream connect(const Address& address);

    // Reads up to and including the next LF; the LF is stripped. Returns
    // false on clean end of stream. Throws NetError on socket errors and
    // receive timeouts.
    bool read_line(std::string& line);
    void write_all(std::string_view data);
    void set_receive_timeout(std::chrono::milliseconds timeout);

    // Wakes any blocked reader; safe from another thread.
    void shutdown() noexcept;
    bool valid() const { return fd_ >= 0; }

private:
    int fd_ = -1;
    std::string buffer_;
};

class TcpListener {
public:
    TcpListener() = default;
    TcpListener(TcpListener&& other) noexcept;
    TcpListener& operator=(TcpListener&& other) noexcept;
    TcpListener(const TcpListener&) = delete;
    TcpListener& operator=(const TcpListener&) = delete;
    ~TcpListener();

    // Port 0 binds an ephemeral port; address() reports the real one.
    static TcpListener bind(const Address& address);

    // Waits up to timeout; empty on timeout or after close().
    std::optional<TcpStream> accept(std::chrono::milliseconds timeout);
    void close() noexcept;

    const Address& address() const { return address_; }
    bool valid() const { return fd_ >= 0; }

private:
    int fd_ = -1;
    Address address_;
};

// Serialized writer for one connection, shared between the reader thread
// that spawned it and whatever handler stashed it for a later reply.
class MessageSink {
public:
    explicit MessageSink(std::shared_ptr<TcpStream> stream) : stream_(std::move(stream)) {}

    // False if the peer is gone; never throws.
    bool try_send(const Message& message) noexcept;

private:
    std::shared_ptr<TcpStream> stream_;
    std::mutex mutex_;
};

// Runs tasks strictly one at a time in arrival order: the agent inbox.
class AgentLoop {
public:
    AgentLoop() = default;
    ~AgentLoop();

    void start();
    void stop();  // drains queued tasks, then joins
    void post(std::function<void()> task);

private:
    void run();

    std::deque<std::function<void()>> tasks_;
    std::mutex mutex_;
    std::condition_variable cv_;
    std::thread thread_;
    bool running_ = false;
    bool stopping_ = false;
};

// Accepts connections and feeds each decoded line to the handler (called
// on the connection's reader thread). Undecodable lines get a
// SERVICE_ERROR reply and the connection stays open.
class LineServer {
public:
    using Handler = std::function<void(const Message&, std::shared_ptr<MessageSink>)>;

    LineServer(TcpListener listener, std::string server_name, Handler handler);
    ~LineServer();

    void start();
    void stop();
    const Address& address() const { return listener_.address(); }

private:
    struct Connection {
        std::shared_ptr<TcpStream> stream;
        std::thread reader;
        std::atomic<bool> done{false};
    };

    void accept_loop();
    void reader_loop(const std::shared_ptr<Connection>& conn);

    TcpListener listener_;
    std::string server_name_;
    Handler handler_;
    std::thread accept_thread_;
    std::atomic<bool> stopping_{false};
    std::mutex connections_mutex_;
    std::vector<std::shared_ptr<Connection>> connections_;
};

}  // namespace trilogy::agentbus
