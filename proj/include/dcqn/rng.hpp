#pragma once

#include <cstdint>
#include <optional>

namespace dcqn {

// Named streams derived from a single run seed. Scenario m uses stream
// kScenarioStreamBase + m.
enum class Stream : std::uint64_t {
    Init = 1,
    Shuffle = 2,
    QuantileLevels = 3,
    Validation = 4,
};
inline constexpr std::uint64_t kScenarioStreamBase = std::uint64_t{1} << 32;

inline constexpr std::uint64_t stream_id(Stream s) { return static_cast<std::uint64_t>(s); }

// xoshiro256** seeded through splitmix64 from (seed, stream). All derived
// quantities (uniforms, normals, integer ranges) are computed here rather
// than through <random> distributions, whose outputs are not specified
// bit-for-bit across standard library implementations.
class SeededRng {
public:
    SeededRng(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

    std::uint64_t next_u64() noexcept;
    // [0, 1) with 53 random bits.
    double uniform() noexcept;
    // (0, 1): never returns an endpoint.
    double uniform_open() noexcept;
    // Uniform integer in [0, n); n must be > 0.
    std::uint64_t below(std::uint64_t n) noexcept;
    // Standard normal via the polar rejection method.
    double normal() noexcept;

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t s_[4];
    std::optional<double> spare_;
};

}  // namespace dcqn
