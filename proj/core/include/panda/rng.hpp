#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace panda {

/// 64-bit FNV-1a over raw bytes, continuing from `state`.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state = 0xcbf29ce484222325ull) noexcept;

/// Seed for one synthetic copy: FNV-1a-64 over global_seed (8 bytes, little
/// endian), the image id bytes, then copy_index (8 bytes, little endian).
std::uint64_t sample_seed(std::uint64_t global_seed, std::string_view image_id, std::uint64_t copy_index) noexcept;

/// Deterministic random stream. The engine is std::mt19937_64, whose output
/// sequence is fixed by the standard; the mappings to doubles and bounded
/// integers are defined here so results match across standard libraries.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    static RngStream for_sample(std::uint64_t global_seed, std::string_view image_id, std::uint64_t copy_index) {
        return RngStream(sample_seed(global_seed, image_id, copy_index));
    }

    /// Independent stream keyed by `tag`; does not advance this one.
    RngStream fork(std::string_view tag) const;

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform01();
    /// Uniform in [lo, hi]; returns lo when lo == hi.
    double uniform(double lo, double hi);
    /// Uniform integer in [lo, hi] (inclusive), unbiased by rejection.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
    bool bernoulli(double p) { return uniform01() < p; }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace panda
