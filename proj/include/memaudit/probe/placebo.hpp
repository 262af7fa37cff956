#pragma once

#include "memaudit/probe/matrix.hpp"
#include "memaudit/stats/tests.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace memaudit::probe {

struct Placebos {
    /// Rows of X in a seeded random order; targets are left in place.
    Matrix shuffled;
    std::vector<std::size_t> permutation;  // shuffled.row(i) == X.row(permutation[i])
    /// Same shape as X, independent standard normal draws.
    Matrix random;
};

/// Throws PreconditionError for an empty X.
Placebos make_placebos(const Matrix& X, std::uint64_t seed);

struct CosineReport {
    std::vector<double> cosines;
    double mean = 0.0;
    /// t of the cosines against zero; empty for fewer than two rows or zero
    /// spread.
    std::optional<stats::TStat> t_vs_zero;
};

/// Row-wise cosine similarity. Throws PreconditionError on shape mismatch or
/// a zero-norm row.
CosineReport cosine_report(const Matrix& A, const Matrix& B);

/// Paired t of cos(A, B) - cos(A, C) across rows.
std::optional<stats::TStat> cosine_difference_t(const CosineReport& ab, const CosineReport& ac);

}  // namespace memaudit::probe
