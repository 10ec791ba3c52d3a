#include "crackbench/rng.hpp"

#include <limits>

#include "crackbench/error.hpp"

namespace crackbench {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t RandomStream::next_u64() noexcept {
    state_ += kGolden;
    return mix64(state_);
}

double RandomStream::next_uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::int64_t RandomStream::next_int_range(std::int64_t lo, std::int64_t hi) {
    if (lo > hi) {
        throw InvalidArgument("invalid-range: lo > hi in next_int_range");
    }
    const std::uint64_t span =
        static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
    if (span == 0) {  // the full 64-bit range
        return static_cast<std::int64_t>(next_u64());
    }
    // Reject the low (2^64 mod span) values so every residue is equally likely.
    const std::uint64_t threshold = (0 - span) % span;
    std::uint64_t x = next_u64();
    while (x < threshold) {
        x = next_u64();
    }
    return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + x % span);
}

bool RandomStream::next_bernoulli(double p) noexcept {
    return next_uniform() < p;
}

RandomStream derive_stream(Seed seed, std::string_view label) {
    if (label.empty()) {
        throw InvalidArgument("derive_stream: label must be non-empty");
    }
    return RandomStream(mix64(seed.value ^ fnv1a64(label)), std::string(label));
}

}  // namespace crackbench
