#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace zmix {

/// Simulation time. One tick is nominally one millisecond.
using Tick = std::uint64_t;
using TxId = std::uint64_t;

inline constexpr std::uint64_t kZatoshiPerZec = 100'000'000;

/// Non-negative integer value in zatoshi. Arithmetic is exact and never wraps.
class Amount {
public:
    constexpr Amount() = default;
    constexpr explicit Amount(std::uint64_t zatoshi) : zatoshi_(zatoshi) {}

    static Amount from_zec(double zec);

    constexpr std::uint64_t zatoshi() const { return zatoshi_; }
    constexpr bool is_zero() const { return zatoshi_ == 0; }
    double zec() const { return static_cast<double>(zatoshi_) / static_cast<double>(kZatoshiPerZec); }

    Amount& operator+=(Amount o);
    Amount& operator-=(Amount o);
    friend Amount operator+(Amount a, Amount b) { return a += b; }
    friend Amount operator-(Amount a, Amount b) { return a -= b; }

    constexpr auto operator<=>(const Amount&) const = default;

private:
    std::uint64_t zatoshi_ = 0;
};

/// Network address of a user machine, a mix, or the P2P cloud itself.
struct NetAddr {
    std::uint64_t value = 0;
    constexpr auto operator<=>(const NetAddr&) const = default;
};

/// Sink address used when a mix exit hands a transaction to the P2P network.
inline constexpr NetAddr kP2PNetwork{0};

enum class ErrorCode {
    SchedulingInPast,
    TransactionRejected,
    EmptyCascade,
    InsufficientCascades,
    AmountTooSmall,
    UnknownTxId,
    MismatchedBaseline,
    ConfigInvalid,
    Malformed,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

} // namespace zmix

template <>
struct std::hash<zmix::Amount> {
    std::size_t operator()(zmix::Amount a) const noexcept { return std::hash<std::uint64_t>{}(a.zatoshi()); }
};

template <>
struct std::hash<zmix::NetAddr> {
    std::size_t operator()(zmix::NetAddr a) const noexcept { return std::hash<std::uint64_t>{}(a.value); }
};
