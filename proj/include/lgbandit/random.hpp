#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace lgb {

// Seed derivation and random streams.
//
// Every stream in the harness is derived from a master seed plus a tuple of
// identifiers, so that results never depend on the order in which streams are
// consumed or on thread scheduling.

std::uint64_t splitmix64(std::uint64_t x);

/// FNV-1a hash of a short tag, used to name streams ("spec", "state", ...).
std::uint64_t stream_tag(std::string_view name);

/// Mixes the parts into a single 64-bit seed.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> parts);

/// Standard normal draw that is a pure function of (key, a, b).
double counter_normal(std::uint64_t key, std::uint64_t a, std::uint64_t b);

/// Sequential stream. Normal draws use Box-Muller on the raw 64-bit output so
/// sequences are identical across standard library implementations.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on the open interval (0, 1).
    double uniform();

    double normal();

    /// Uniform index in [0, n).
    std::size_t index(std::size_t n);

    friend bool operator==(const RandomStream&, const RandomStream&) = default;

private:
    std::mt19937_64 engine_;
};

}  // namespace lgb
