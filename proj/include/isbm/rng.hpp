#pragma once

#include <array>
#include <cstdint>

namespace isbm {

/// Philox4x32-10 counter-based block cipher (Salmon et al., SC'11).
/// Output depends only on (key, counter), so any draw can be recomputed
/// without replaying the stream.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter encrypt(Counter ctr, Key key) noexcept;
};

/// What a random stream is used for. Distinct purposes never share draws.
enum class Purpose : std::uint32_t {
    brownian = 1,
    signs = 2,
    calibration = 3,
};

/// Stream label: (master seed, purpose, path index). The block counter within
/// the labelled stream is the excursion counter for sign draws and the step
/// pair index for Brownian increments.
struct RngSpec {
    std::uint64_t master_seed = 0;
    Purpose purpose = Purpose::brownian;
    std::uint64_t path_index = 0;

    RngSpec with_purpose(Purpose p) const noexcept { return {master_seed, p, path_index}; }
    RngSpec for_path(std::uint64_t i) const noexcept { return {master_seed, purpose, i}; }
    RngSpec with_seed(std::uint64_t s) const noexcept { return {s, purpose, path_index}; }

    friend bool operator==(const RngSpec&, const RngSpec&) = default;
};

/// Random-access view on the stream named by an RngSpec.
class CounterRng {
public:
    explicit CounterRng(const RngSpec& spec) noexcept;

    /// 128 random bits for block `counter`.
    Philox4x32::Counter block(std::uint64_t counter) const noexcept;

    /// Uniform in [0, 1) with 53 random bits, from block `counter`.
    double uniform(std::uint64_t counter) const noexcept;

    /// Two independent standard normals from block `counter` (Box-Muller).
    std::array<double, 2> normal_pair(std::uint64_t counter) const noexcept;

private:
    Philox4x32::Key key_;
    std::uint32_t path_lo_;
    std::uint32_t path_hi_;
};

}  // namespace isbm
