#pragma once

#include <array>
#include <cstdint>

namespace qpc {

/// Counter-based pseudo-random generator (Philox-4x32-10).
///
/// Every stream is identified by a (seed, stream) key pair and advances a
/// 128-bit counter, so streams derived from the same seed never overlap and
/// the bit sequence is identical on every platform. Deriving child streams
/// with split() is cheap and deterministic, which is what the experiment
/// drivers use to hand each simulation instance its own generator.
class Rng {
public:
    Rng() : Rng(0, 0) {}
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint32_t next_u32();
    std::uint64_t next_u64();

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01();

    /// Unbiased integer in [0, n); n must be >= 1.
    std::uint64_t uniform_below(std::uint64_t n);

    /// Independent child stream. Children of distinct indices, and the
    /// parent itself, produce non-overlapping sequences.
    Rng split(std::uint64_t child_index) const;

    /// Stable 64-bit tag for this stream, usable as a derived seed.
    std::uint64_t stream_tag() const;

private:
    std::array<std::uint32_t, 2> key_{};
    std::array<std::uint32_t, 4> counter_{};
    std::array<std::uint32_t, 4> block_{};
    int block_pos_ = 4;  // forces refill on first draw

    void advance_counter();
    void refill();
};

}  // namespace qpc
