#include "panda/rng.hpp"

#include <array>
#include <limits>

#include "panda/error.hpp"

namespace panda {

namespace {

constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;

std::uint64_t fnv_u64(std::uint64_t value, std::uint64_t state) noexcept {
    for (int i = 0; i < 8; ++i) {
        state ^= (value >> (8 * i)) & 0xFFu;
        state *= kFnvPrime;
    }
    return state;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state) noexcept {
    for (unsigned char c : bytes) {
        state ^= c;
        state *= kFnvPrime;
    }
    return state;
}

std::uint64_t sample_seed(std::uint64_t global_seed, std::string_view image_id, std::uint64_t copy_index) noexcept {
    std::uint64_t h = fnv_u64(global_seed, 0xcbf29ce484222325ull);
    h = fnv1a64(image_id, h);
    return fnv_u64(copy_index, h);
}

RngStream RngStream::fork(std::string_view tag) const {
    return RngStream(fnv1a64(tag, fnv_u64(seed_, 0xcbf29ce484222325ull)));
}

double RngStream::uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
    if (lo == hi) {
        engine_();  // keep the draw count independent of the interval
        return lo;
    }
    return lo + (hi - lo) * uniform01();
}

std::int64_t RngStream::uniform_int(std::int64_t lo, std::int64_t hi) {
    if (hi < lo) throw InvalidConfig("uniform_int: empty range");
    const std::uint64_t span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
    if (span == std::numeric_limits<std::uint64_t>::max()) return static_cast<std::int64_t>(engine_());
    const std::uint64_t range = span + 1;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + x % range);
}

}  // namespace panda
