#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace cprrtc {

/// First `count` primes: 2, 3, 5, 7, ...
std::vector<std::uint32_t> first_primes(std::size_t count);

/// Van der Corput radical inverse of `index` in `base`, in [0, 1).
double radical_inverse(std::uint64_t index, std::uint32_t base);

/// Halton sequence over per-joint boxes. Element k (k >= 1) uses the radical
/// inverse of k + seed_offset in the k-th joint's prime base. One stream per
/// planner run; not thread-safe.
class HaltonSampler {
public:
    HaltonSampler(std::size_t dimension, std::uint64_t seed_offset = 0);

    /// lo + (hi - lo) * u per coordinate, then advances the index.
    Eigen::VectorXd next(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper);
    /// Unit-cube point for the current index, then advances.
    Eigen::VectorXd next_unit();

    std::uint64_t index() const { return index_; }
    std::uint64_t seed_offset() const { return seed_offset_; }
    const std::vector<std::uint32_t>& bases() const { return bases_; }

private:
    std::vector<std::uint32_t> bases_;
    std::uint64_t seed_offset_;
    std::uint64_t index_ = 1;
};

/// Seed offset used for trial `trial` of a batch reseeded per trial.
constexpr std::uint64_t trial_seed_offset(std::uint64_t base, std::uint64_t trial) {
    return base + trial * 10000;
}

}  // namespace cprrtc
