#pragma once

#include <stdexcept>
#include <string>

namespace trilogy {

// Base for everything this project throws. Catching trilogy::Error at the
// CLI boundary maps to exit code 2 unless a more specific class applies.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Caller handed us bad data: malformed input, violated precondition,
// out-of-bounds value. Maps to exit code 1 at the CLI.
class InvalidInput : public Error {
public:
    explicit InvalidInput(const std::string& what) : Error(what) {}
};

// Filesystem trouble: unreadable directory, unwritable file.
class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(what) {}
};

// Socket-level trouble: connection refused, timeout, peer hung up.
class NetError : public Error {
public:
    explicit NetError(const std::string& what) : Error(what) {}
};

// A line arrived on the wire that does not decode as a protocol message.
class ProtocolError : public Error {
public:
    explicit ProtocolError(const std::string& what) : Error(what) {}
};

}  // namespace trilogy
