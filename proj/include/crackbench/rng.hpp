#pragma once

// Deterministic random streams.
//
// Every stream is derived from a 64-bit master seed and a text label:
//
//   state0 = mix64(seed ^ fnv1a64(label))
//
// and advanced with the SplitMix64 step (Steele, Lea, Flood 2014):
//
//   state += 0x9e3779b97f4a7c15
//   z = state
//   z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9
//   z = (z ^ (z >> 27)) * 0x94d049bb133111eb
//   out = z ^ (z >> 31)
//
// mix64 is the same finalizer applied once. Nothing here depends on the
// platform's <random> engines or distributions, so sequences are identical
// on every compiler and architecture.

#include <cstdint>
#include <string>
#include <string_view>

namespace crackbench {

struct Seed {
    std::uint64_t value = 0;

    friend bool operator==(Seed, Seed) = default;
};

std::uint64_t fnv1a64(std::string_view bytes) noexcept;

// The SplitMix64 output finalizer.
std::uint64_t mix64(std::uint64_t z) noexcept;

class RandomStream {
public:
    // Raw SplitMix64 stream starting at `state`. Prefer derive_stream.
    explicit RandomStream(std::uint64_t state, std::string origin = {})
        : state_(state), origin_(std::move(origin)) {}

    std::uint64_t next_u64() noexcept;

    // Uniform in [0, 1) with 53 bits of resolution. Advances the state once.
    double next_uniform() noexcept;

    // Uniform integer in [lo, hi], unbiased (rejection sampling).
    // Throws InvalidArgument when lo > hi.
    std::int64_t next_int_range(std::int64_t lo, std::int64_t hi);

    // True with probability p (p clamped to [0, 1]).
    bool next_bernoulli(double p) noexcept;

    std::uint64_t state() const noexcept { return state_; }
    const std::string& origin() const noexcept { return origin_; }

private:
    std::uint64_t state_;
    std::string origin_;
};

// Throws InvalidArgument on an empty label.
RandomStream derive_stream(Seed seed, std::string_view label);

}  // namespace crackbench
