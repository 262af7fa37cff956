#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace memaudit {

// std::mt19937_64 output is fixed by the standard; the distribution adaptors
// are not, so draws below are computed locally to stay bit-identical across
// standard libraries.

/// Combine a seed with stream identifiers (year, bucket, ...).
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> streams);

/// Unbiased integer in [0, bound).
std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t bound);

/// Uniform double in (0, 1).
double uniform_open(std::mt19937_64& rng);

/// Standard normal draws via the Box-Muller transform (one pair per two draws).
class NormalSampler {
public:
    double operator()(std::mt19937_64& rng);

private:
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace memaudit
