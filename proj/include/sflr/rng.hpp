#pragma once

#include <array>
#include <cstdint>

namespace sflr {

/// Counter-based Philox4x32-10 generator.
///
/// The output is a pure function of (key, stream, block index), so any number
/// of independent streams can be derived from one master seed without shared
/// state.  Replicated Monte-Carlo runs assign stream ids by replication index,
/// which makes results independent of thread scheduling.
class Philox4x32 {
public:
    Philox4x32(std::uint64_t key, std::uint64_t stream);

    std::uint32_t next_u32();
    std::uint64_t next_u64();

    /// Uniform double in the open interval (0, 1): 53 random bits, offset by
    /// half an ulp so 0 and 1 are never returned (safe under log()).
    double next_uniform();

private:
    void refill();

    std::array<std::uint32_t, 4> counter_;
    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> buffer_;
    int pos_;
};

/// Standard-normal stream: Box-Muller transform over a Philox stream.
/// Both variates of each pair are consumed (the second is cached).
class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint64_t stream);

    double next();

    /// Direct access to the underlying uniform stream.
    double uniform();

private:
    Philox4x32 gen_;
    double cached_;
    bool has_cached_;
};

}  // namespace sflr
