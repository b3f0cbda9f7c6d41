#include "cprrtc/sampling.hpp"

#include "cprrtc/errors.hpp"

namespace cprrtc {

std::vector<std::uint32_t> first_primes(std::size_t count) {
    std::vector<std::uint32_t> primes;
    for (std::uint32_t c = 2; primes.size() < count; ++c) {
        bool prime = true;
        for (auto p : primes) {
            if (p * p > c) break;
            if (c % p == 0) {
                prime = false;
                break;
            }
        }
        if (prime) primes.push_back(c);
    }
    return primes;
}

double radical_inverse(std::uint64_t index, std::uint32_t base) {
    const double inv = 1.0 / base;
    double scale = inv;
    double result = 0.0;
    while (index > 0) {
        result += static_cast<double>(index % base) * scale;
        index /= base;
        scale *= inv;
    }
    return result;
}

HaltonSampler::HaltonSampler(std::size_t dimension, std::uint64_t seed_offset)
    : bases_(first_primes(dimension)), seed_offset_(seed_offset) {}

Eigen::VectorXd HaltonSampler::next_unit() {
    Eigen::VectorXd u(static_cast<Eigen::Index>(bases_.size()));
    for (std::size_t i = 0; i < bases_.size(); ++i)
        u[static_cast<Eigen::Index>(i)] = radical_inverse(index_ + seed_offset_, bases_[i]);
    ++index_;
    return u;
}

Eigen::VectorXd HaltonSampler::next(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
    if (static_cast<std::size_t>(lower.size()) != bases_.size() || lower.size() != upper.size())
        throw dimension_error("sampling limits do not match sampler dimension");
    const Eigen::VectorXd u = next_unit();
    return (lower.array() + (upper - lower).array() * u.array()).matrix();
}

}  // namespace cprrtc
