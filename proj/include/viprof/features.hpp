// SPDX-License-Identifier: Apache-2.0
//
// Feature vector representations shared by the featurizers and the SVM.
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <variant>
#include <vector>

namespace viprof {

/// Sparse vector with strictly increasing indices and no explicit zeros.
class SparseVector {
public:
    using Entry = std::pair<std::uint32_t, double>;

    SparseVector() = default;
    explicit SparseVector(std::size_t dimension) : dimension_(dimension) {}
    /// Validates ordering, bounds and the no-zero rule; throws UsageError.
    SparseVector(std::size_t dimension, std::vector<Entry> entries);

    std::size_t dimension() const noexcept { return dimension_; }
    const std::vector<Entry>& entries() const noexcept { return entries_; }
    bool empty() const noexcept { return entries_.empty(); }

    double sum() const noexcept;
    double squared_norm() const noexcept;

    bool operator==(const SparseVector&) const = default;

private:
    std::size_t dimension_ = 0;
    std::vector<Entry> entries_;
};

/// Entrywise sum; dimensions must match.
SparseVector operator+(const SparseVector& a, const SparseVector& b);

using DenseVector = std::vector<double>;

using FeatureVector = std::variant<SparseVector, DenseVector>;

std::size_t dimension_of(const FeatureVector& x) noexcept;
double squared_norm(const FeatureVector& x) noexcept;

/// dot(w[0..dim), x); w may be longer than x (bias slot).
double dot(std::span<const double> w, const FeatureVector& x) noexcept;
/// w[0..dim) += a * x
void axpy(double a, const FeatureVector& x, std::span<double> w) noexcept;

bool all_finite(const FeatureVector& x) noexcept;

DenseVector to_dense(const SparseVector& x);

} // namespace viprof
