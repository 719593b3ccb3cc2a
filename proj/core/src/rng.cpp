#include "qpc/rng.hpp"

namespace qpc {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;  // golden ratio
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;  // sqrt(3) - 1

inline void philox_round(std::array<std::uint32_t, 4>& x,
                         const std::array<std::uint32_t, 2>& k) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * x[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * x[2];
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    x = {hi1 ^ x[1] ^ k[0], lo1, hi0 ^ x[3] ^ k[1], lo0};
}

inline std::array<std::uint32_t, 4> philox10(std::array<std::uint32_t, 4> ctr,
                                             std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        philox_round(ctr, key);
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
    key_ = {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    counter_ = {0, 0, static_cast<std::uint32_t>(stream),
                static_cast<std::uint32_t>(stream >> 32)};
}

void Rng::advance_counter() {
    if (++counter_[0] == 0) ++counter_[1];
}

void Rng::refill() {
    block_ = philox10(counter_, key_);
    advance_counter();
    block_pos_ = 0;
}

std::uint32_t Rng::next_u32() {
    if (block_pos_ >= 4) refill();
    return block_[block_pos_++];
}

std::uint64_t Rng::next_u64() {
    const std::uint64_t hi = next_u32();
    const std::uint64_t lo = next_u32();
    return (hi << 32) | lo;
}

double Rng::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::uniform_below(std::uint64_t n) {
    if (n <= 1) return 0;
    // rejection sampling on the top of the range keeps the draw unbiased
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n + 1) % n;
    std::uint64_t v;
    do {
        v = next_u64();
    } while (v > limit);
    return v % n;
}

Rng Rng::split(std::uint64_t child_index) const {
    // One Philox evaluation keyed off the parent identity yields the child
    // key and stream; the child counter restarts at zero.
    std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(child_index),
        static_cast<std::uint32_t>(child_index >> 32),
        counter_[2] ^ 0x5DEECE66u,
        counter_[3] ^ 0x0BADC0DEu,
    };
    const auto out = philox10(ctr, key_);
    Rng child;
    child.key_ = {out[0], out[1]};
    child.counter_ = {0, 0, out[2], out[3]};
    return child;
}

std::uint64_t Rng::stream_tag() const {
    const auto out = philox10({0x7A67u, 0, counter_[2], counter_[3]}, key_);
    return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

}  // namespace qpc
