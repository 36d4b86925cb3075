// SPDX-License-Identifier: Apache-2.0
#include "viprof/features.hpp"

#include <cmath>
#include <string>

#include "viprof/error.hpp"

namespace viprof {

SparseVector::SparseVector(std::size_t dimension, std::vector<Entry> entries)
    : dimension_(dimension), entries_(std::move(entries)) {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto [idx, val] = entries_[i];
        if (idx >= dimension_)
            throw UsageError("sparse index " + std::to_string(idx) + " out of range for dimension " +
                             std::to_string(dimension_));
        if (i > 0 && entries_[i - 1].first >= idx) throw UsageError("sparse indices must be strictly increasing");
        if (val == 0.0) throw UsageError("sparse vector holds an explicit zero at index " + std::to_string(idx));
    }
}

double SparseVector::sum() const noexcept {
    double s = 0;
    for (const auto& e : entries_) s += e.second;
    return s;
}

double SparseVector::squared_norm() const noexcept {
    double s = 0;
    for (const auto& e : entries_) s += e.second * e.second;
    return s;
}

SparseVector operator+(const SparseVector& a, const SparseVector& b) {
    if (a.dimension() != b.dimension()) throw UsageError("dimension mismatch in sparse sum");
    std::vector<SparseVector::Entry> out;
    const auto& x = a.entries();
    const auto& y = b.entries();
    std::size_t i = 0, j = 0;
    while (i < x.size() || j < y.size()) {
        if (j == y.size() || (i < x.size() && x[i].first < y[j].first)) {
            out.push_back(x[i++]);
        } else if (i == x.size() || y[j].first < x[i].first) {
            out.push_back(y[j++]);
        } else {
            const double v = x[i].second + y[j].second;
            if (v != 0.0) out.emplace_back(x[i].first, v);
            ++i;
            ++j;
        }
    }
    return SparseVector(a.dimension(), std::move(out));
}

std::size_t dimension_of(const FeatureVector& x) noexcept {
    if (const auto* s = std::get_if<SparseVector>(&x)) return s->dimension();
    return std::get<DenseVector>(x).size();
}

double squared_norm(const FeatureVector& x) noexcept {
    if (const auto* s = std::get_if<SparseVector>(&x)) return s->squared_norm();
    double acc = 0;
    for (double v : std::get<DenseVector>(x)) acc += v * v;
    return acc;
}

double dot(std::span<const double> w, const FeatureVector& x) noexcept {
    double acc = 0;
    if (const auto* s = std::get_if<SparseVector>(&x)) {
        for (const auto& [idx, val] : s->entries()) acc += w[idx] * val;
        return acc;
    }
    const auto& d = std::get<DenseVector>(x);
    for (std::size_t i = 0; i < d.size(); ++i) acc += w[i] * d[i];
    return acc;
}

void axpy(double a, const FeatureVector& x, std::span<double> w) noexcept {
    if (const auto* s = std::get_if<SparseVector>(&x)) {
        for (const auto& [idx, val] : s->entries()) w[idx] += a * val;
        return;
    }
    const auto& d = std::get<DenseVector>(x);
    for (std::size_t i = 0; i < d.size(); ++i) w[i] += a * d[i];
}

bool all_finite(const FeatureVector& x) noexcept {
    if (const auto* s = std::get_if<SparseVector>(&x)) {
        for (const auto& e : s->entries())
            if (!std::isfinite(e.second)) return false;
        return true;
    }
    for (double v : std::get<DenseVector>(x))
        if (!std::isfinite(v)) return false;
    return true;
}

DenseVector to_dense(const SparseVector& x) {
    DenseVector d(x.dimension(), 0.0);
    for (const auto& [idx, val] : x.entries()) d[idx] = val;
    return d;
}

} // namespace viprof
