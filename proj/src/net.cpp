#include "trilogy/net.hpp"

#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "trilogy/errors.hpp"

namespace trilogy::agentbus {

Address parse_address(const std::string& s) {
    std::size_t colon = s.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 >= s.size())
        throw InvalidInput("address must be host:port, got \"" + s + "\"");
    Address a;
    a.host = s.substr(0, colon);
    try {
        std::size_t consumed = 0;
        int port = std::stoi(s.substr(colon + 1), &consumed);
        if (consumed != s.size() - colon - 1 || port < 0 || port > 65535)
            throw InvalidInput("");
        a.port = static_cast<std::uint16_t>(port);
    } catch (const std::logic_error&) {
        throw InvalidInput("bad port in address \"" + s + "\"");
    }
    return a;
}

namespace {

[[noreturn]] void throw_errno(const std::string& what) {
    throw NetError(what + ": " + std::strerror(errno));
}

struct AddrInfo {
    addrinfo* head = nullptr;
    ~AddrInfo() {
        if (head) freeaddrinfo(head);
    }
};

}  // namespace

TcpStream::TcpStream(TcpStream&& other) noexcept
    : fd_(other.fd_), buffer_(std::move(other.buffer_)) {
    other.fd_ = -1;
}

TcpStream& TcpStream::operator=(TcpStream&& other) noexcept {
    if (this != &other) {
        if (fd_ >= 0) ::close(fd_);
        fd_ = other.fd_;
        buffer_ = std::move(other.buffer_);
        other.fd_ = -1;
    }
    return *this;
}

TcpStream::~TcpStream() {
    if (fd_ >= 0) ::close(fd_);
}

TcpStream TcpStream::connect(const Address& address) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    AddrInfo result;
    std::string port = std::to_string(address.port);
    int rc = getaddrinfo(address.host.c_str(), port.c_str(), &hints, &result.head);
    if (rc != 0)
        throw NetError("cannot resolve " + address.to_string() + ": " + gai_strerror(rc));

    int last_errno = 0;
    for (addrinfo* ai = result.head; ai; ai = ai->ai_next) {
        int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) {
            last_errno = errno;
            continue;
        }
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
            int one = 1;
            setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
            return TcpStream(fd);
        }
        last_errno = errno;
        ::close(fd);
    }
    throw NetError("cannot connect to " + address.to_string() + ": " +
                   std::strerror(last_errno));
}

bool TcpStream::read_line(std::string& line) {
    while (true) {
        std::size_t lf = buffer_.find('\n');
        if (lf != std::string::npos) {
            line.assign(buffer_, 0, lf);
            buffer_.erase(0, lf + 1);
            return true;
        }
        char chunk[4096];
        ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
        if (n > 0) {
            buffer_.append(chunk, static_cast<std::size_t>(n));
            continue;
        }
        if (n == 0) {
            if (buffer_.empty()) return false;
            // Peer closed mid-line; hand over what arrived.
            line = std::move(buffer_);
            buffer_.clear();
            return true;
        }
        if (errno == EINTR) continue;
        if (errno == EAGAIN || errno == EWOULDBLOCK) throw NetError("receive timed out");
        throw_errno("recv failed");
    }
}

void TcpStream::write_all(std::string_view data) {
    std::size_t sent = 0;
    while (sent < data.size()) {
        ssize_t n = ::send(fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw_errno("send failed");
        }
        sent += static_cast<std::size_t>(n);
    }
}

void TcpStream::set_receive_timeout(std::chrono::milliseconds timeout) {
    timeval tv{};
    tv.tv_sec = static_cast<time_t>(timeout.count() / 1000);
    tv.tv_usec = static_cast<suseconds_t>((timeout.count() % 1000) * 1000);
    setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
}

void TcpStream::shutdown() noexcept {
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

TcpListener::TcpListener(TcpListener&& other) noexcept
    : fd_(other.fd_), address_(std::move(other.address_)) {
    other.fd_ = -1;
}

TcpListener& TcpListener::operator=(TcpListener&& other) noexcept {
    if (this != &other) {
        if (fd_ >= 0) ::close(fd_);
        fd_ = other.fd_;
        address_ = std::move(other.address_);
        other.fd_ = -1;
    }
    return *this;
}

TcpListener::~TcpListener() { close(); }

void TcpListener::close() noexcept {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

TcpListener TcpListener::bind(const Address& address) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    hints.ai_flags = AI_PASSIVE;
    AddrInfo result;
    std::string port = std::to_string(address.port);
    int rc = getaddrinfo(address.host.empty() ? nullptr : address.host.c_str(), port.c_str(),
                         &hints, &result.head);
    if (rc != 0)
        throw NetError("cannot resolve " + address.to_string() + ": " + gai_strerror(rc));

    int fd = ::socket(result.head->ai_family, result.head->ai_socktype,
                      result.head->ai_protocol);
    if (fd < 0) throw_errno("socket failed");
    int one = 1;
    setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(fd, result.head->ai_addr, result.head->ai_addrlen) != 0) {
        int saved = errno;
        ::close(fd);
        errno = saved;
        throw_errno("cannot bind " + address.to_string());
    }
    if (::listen(fd, 64) != 0) {
        int saved = errno;
        ::close(fd);
        errno = saved;
        throw_errno("listen failed");
    }

    TcpListener listener;
    listener.fd_ = fd;
    sockaddr_in bound{};
    socklen_t len = sizeof(bound);
    if (getsockname(fd, reinterpret_cast<sockaddr*>(&bound), &len) == 0)
        listener.address_ = Address{address.host.empty() ? "127.0.0.1" : address.host,
                                    ntohs(bound.sin_port)};
    else
        listener.address_ = address;
    return listener;
}

std::optional<TcpStream> TcpListener::accept(std::chrono::milliseconds timeout) {
    if (fd_ < 0) return std::nullopt;
    pollfd pfd{fd_, POLLIN, 0};
    int rc = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
    if (rc <= 0) return std::nullopt;
    int conn = ::accept(fd_, nullptr, nullptr);
    if (conn < 0) return std::nullopt;
    int one = 1;
    setsockopt(conn, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    return TcpStream(conn);
}

bool MessageSink::try_send(const Message& message) noexcept {
    try {
        std::string line = encode(message);
        std::lock_guard lock(mutex_);
        stream_->write_all(line);
        return true;
    } catch (const std::exception&) {
        return false;
    }
}

AgentLoop::~AgentLoop() { stop(); }

void AgentLoop::start() {
    std::lock_guard lock(mutex_);
    if (running_) return;
    running_ = true;
    stopping_ = false;
    thread_ = std::thread([this] { run(); });
}

void AgentLoop::stop() {
    {
        std::lock_guard lock(mutex_);
        if (!running_) return;
        stopping_ = true;
    }
    cv_.notify_all();
    if (thread_.joinable()) thread_.join();
    std::lock_guard lock(mutex_);
    running_ = false;
}

void AgentLoop::post(std::function<void()> task) {
    {
        std::lock_guard lock(mutex_);
        tasks_.push_back(std::move(task));
    }
    cv_.notify_all();
}

void AgentLoop::run() {
    while (true) {
        std::function<void()> task;
        {
            std::unique_lock lock(mutex_);
            cv_.wait(lock, [this] { return stopping_ || !tasks_.empty(); });
            if (tasks_.empty()) return;  // stopping and drained
            task = std::move(tasks_.front());
            tasks_.pop_front();
        }
        task();
    }
}

LineServer::LineServer(TcpListener listener, std::string server_name, Handler handler)
    : listener_(std::move(listener)),
      server_name_(std::move(server_name)),
      handler_(std::move(handler)) {}

LineServer::~LineServer() { stop(); }

void LineServer::start() {
    stopping_ = false;
    accept_thread_ = std::thread([this] { accept_loop(); });
}

void LineServer::stop() {
    if (stopping_.exchange(true)) {
        if (accept_thread_.joinable()) accept_thread_.join();
        return;
    }
    listener_.close();
    if (accept_thread_.joinable()) accept_thread_.join();
    std::vector<std::shared_ptr<Connection>> connections;
    {
        std::lock_guard lock(connections_mutex_);
        connections.swap(connections_);
    }
    for (const auto& conn : connections) {
        conn->stream->shutdown();
        if (conn->reader.joinable()) conn->reader.join();
    }
}

void LineServer::accept_loop() {
    while (!stopping_) {
        std::optional<TcpStream> stream = listener_.accept(std::chrono::milliseconds(200));
        // Reap connections whose reader already finished.
        {
            std::lock_guard lock(connections_mutex_);
            for (auto it = connections_.begin(); it != connections_.end();) {
                if ((*it)->done) {
                    if ((*it)->reader.joinable()) (*it)->reader.join();
                    it = connections_.erase(it);
                } else {
                    ++it;
                }
            }
        }
        if (!stream) continue;
        auto conn = std::make_shared<Connection>();
        conn->stream = std::make_shared<TcpStream>(std::move(*stream));
        conn->reader = std::thread([this, conn] { reader_loop(conn); });
        std::lock_guard lock(connections_mutex_);
        connections_.push_back(conn);
    }
}

void LineServer::reader_loop(const std::shared_ptr<Connection>& conn) {
    auto sink = std::make_shared<MessageSink>(conn->stream);
    std::string line;
    while (!stopping_) {
        try {
            if (!conn->stream->read_line(line)) break;
        } catch (const NetError&) {
            break;
        }
        if (line.empty()) continue;
        try {
            Message message = decode(line);
            handler_(message, sink);
        } catch (const ProtocolError& e) {
            Message reply;
            reply.id = next_message_id();
            reply.type = MessageType::ServiceError;
            reply.sender = server_name_;
            reply.body = {{"reason", e.what()}, {"failure_class", kFailBadInput}};
            sink->try_send(reply);
        }
    }
    conn->done = true;
}

}  // namespace trilogy::agentbus
