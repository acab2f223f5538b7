#include "sflr/rng.hpp"

#include <cmath>

namespace sflr {

namespace {

constexpr std::uint32_t kMult0 = 0xD2511F53u;
constexpr std::uint32_t kMult1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void philox_round(std::array<std::uint32_t, 4>& ctr,
                         const std::array<std::uint32_t, 2>& key) {
    const std::uint64_t prod0 = static_cast<std::uint64_t>(kMult0) * ctr[0];
    const std::uint64_t prod1 = static_cast<std::uint64_t>(kMult1) * ctr[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(prod0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(prod0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(prod1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(prod1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

}  // namespace

Philox4x32::Philox4x32(std::uint64_t key, std::uint64_t stream)
    : counter_{0u, 0u,
               static_cast<std::uint32_t>(stream),
               static_cast<std::uint32_t>(stream >> 32)},
      key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)},
      buffer_{},
      pos_(4) {}

void Philox4x32::refill() {
    std::array<std::uint32_t, 4> ctr = counter_;
    std::array<std::uint32_t, 2> key = key_;
    for (int round = 0; round < 10; ++round) {
        philox_round(ctr, key);
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    buffer_ = ctr;
    pos_ = 0;
    // 64-bit block index in the low counter words; the stream id stays in the
    // high words so distinct streams never collide.
    if (++counter_[0] == 0u) ++counter_[1];
}

std::uint32_t Philox4x32::next_u32() {
    if (pos_ >= 4) refill();
    return buffer_[static_cast<std::size_t>(pos_++)];
}

std::uint64_t Philox4x32::next_u64() {
    const std::uint64_t lo = next_u32();
    const std::uint64_t hi = next_u32();
    return (hi << 32) | lo;
}

double Philox4x32::next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

NormalStream::NormalStream(std::uint64_t seed, std::uint64_t stream)
    : gen_(seed, stream), cached_(0.0), has_cached_(false) {}

double NormalStream::next() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_;
    }
    const double u1 = gen_.next_uniform();
    const double u2 = gen_.next_uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    cached_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
}

double NormalStream::uniform() { return gen_.next_uniform(); }

}  // namespace sflr
