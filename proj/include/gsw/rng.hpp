#pragma once

#include <cstddef>
#include <cstdint>

namespace gsw {

// Counter-based random stream. The sequence is a pure function of
// (seed, stream): stream k of a run with seed s always produces the same
// draws, independent of any other stream. This is what makes replicate-level
// parallelism and trace replay deterministic.
//
// Draw order contract for the walk: one next_index() per pivot (re)selection,
// then one next_double() per step-size sign choice. Other consumers document
// their own order next to the sampling loop.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream)
        : key_(derive_key(seed, stream)) {}

    std::uint64_t next_u64() {
        return mix64(key_ + (++counter_) * 0x9e3779b97f4a7c15ULL);
    }

    // Uniform on [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform on (0, 1]; safe as a log() argument.
    double next_open_double() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // Uniform on {0, ..., k-1}. Consumes exactly one draw; the O(k/2^53)
    // selection bias is far below every statistical tolerance in this
    // project and keeps stream consumption fixed per call.
    std::size_t next_index(std::size_t k) {
        std::size_t i = static_cast<std::size_t>(next_double() * static_cast<double>(k));
        return i < k ? i : k - 1;
    }

    // Standard normal via Box-Muller; consumes exactly two draws.
    double next_normal();

    std::uint64_t key() const { return key_; }

private:
    static std::uint64_t mix64(std::uint64_t x) {
        x ^= x >> 30;
        x *= 0xbf58476d1ce4e5b9ULL;
        x ^= x >> 27;
        x *= 0x94d049bb133111ebULL;
        x ^= x >> 31;
        return x;
    }

    static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t a = mix64(seed + 0x9e3779b97f4a7c15ULL);
        std::uint64_t b = mix64(stream + 0xd1b54a32d192ed03ULL);
        return mix64(a ^ (b + 0x8cb92ba72f3d8dd7ULL));
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace gsw
