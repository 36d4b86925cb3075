// SPDX-License-Identifier: Apache-2.0
//
// Helpers shared by the unit and acceptance tests: tiny corpus builders,
// scratch directories and reference implementations that do not reuse
// library code.
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>
#include <vector>

#include "viprof/corpus.hpp"
#include "viprof/features.hpp"
#include "viprof/visual_features.hpp"

namespace viprof::testing {

/// A fresh directory under the system temp dir, removed on destruction.
class ScratchDir {
public:
    explicit ScratchDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("viprof_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~ScratchDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

struct ProfileSpec {
    std::string id;
    Gender gender = Gender::female;
    AgeRange age = AgeRange::age_18_24;
    std::vector<std::string> tweets;
    std::size_t tweeted = 0;
    std::size_t retweeted = 0;
};

/// Builds a linked corpus; image ids are "<profile>_t<i>" and "<profile>_r<i>".
inline Corpus make_corpus(const std::vector<ProfileSpec>& specs, Language lang = Language::en) {
    std::vector<Profile> profiles;
    std::vector<ImageRecord> images;
    for (const auto& s : specs) {
        Profile p;
        p.id = s.id;
        p.language = lang;
        p.gender = s.gender;
        p.age = s.age;
        p.tweets = s.tweets;
        for (std::size_t i = 0; i < s.tweeted; ++i) {
            images.push_back({s.id + "_t" + std::to_string(i), s.id, ImageSource::tweeted, std::nullopt});
            p.image_ids.push_back(images.back().id);
        }
        for (std::size_t i = 0; i < s.retweeted; ++i) {
            images.push_back({s.id + "_r" + std::to_string(i), s.id, ImageSource::retweeted, std::nullopt});
            p.image_ids.push_back(images.back().id);
        }
        profiles.push_back(std::move(p));
    }
    return Corpus(lang, std::move(profiles), std::move(images));
}

/// hidden4096 vector with the given leading values and zeros elsewhere.
inline EmbeddingVector hidden(const std::string& id, std::vector<float> head) {
    head.resize(4096, 0.0f);
    return {id, EmbeddingLayer::hidden4096, std::move(head)};
}

/// softmax1000 vector with `value` at `index` and `rest` elsewhere.
inline EmbeddingVector scores_at(const std::string& id, std::size_t index, float value = 1.0f, float rest = 0.0f) {
    std::vector<float> v(1000, rest);
    v[index] = value;
    return {id, EmbeddingLayer::softmax1000, std::move(v)};
}

// ---------------------------------------------------------------------------
// Solver oracles. Everything below works on plain dense matrices.

using Matrix = std::vector<std::vector<double>>;

inline Matrix to_rows(const std::vector<FeatureVector>& X) {
    Matrix rows;
    for (const auto& x : X) {
        if (const auto* d = std::get_if<DenseVector>(&x)) {
            rows.push_back(*d);
        } else {
            const auto& s = std::get<SparseVector>(x);
            std::vector<double> r(s.dimension(), 0.0);
            for (const auto& [i, v] : s.entries()) r[i] = v;
            rows.push_back(std::move(r));
        }
    }
    return rows;
}

/// Q_ij = y_i y_j (x_i . x_j + bias)
inline Matrix gram(const Matrix& X, const std::vector<int>& y, bool bias) {
    const std::size_t n = X.size();
    Matrix Q(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double k = bias ? 1.0 : 0.0;
            for (std::size_t d = 0; d < X[i].size(); ++d) k += X[i][d] * X[j][d];
            Q[i][j] = y[i] * y[j] * k;
        }
    return Q;
}

inline double dual_value(const Matrix& Q, const std::vector<double>& a) {
    double lin = 0, quad = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        lin += a[i];
        for (std::size_t j = 0; j < a.size(); ++j) quad += a[i] * Q[i][j] * a[j];
    }
    return lin - 0.5 * quad;
}

/// Accelerated projected gradient ascent on the box-constrained dual. For the
/// tiny problems used in tests it reaches the optimum to ~1e-10.
inline double dual_optimum_pg(const Matrix& Q, double C, std::size_t iters = 20000) {
    const std::size_t n = Q.size();
    double L = 1e-12;
    for (std::size_t i = 0; i < n; ++i) L += std::abs(Q[i][i]);  // trace bounds the top eigenvalue of a PSD matrix
    auto project = [C](double v) { return std::clamp(v, 0.0, C); };
    std::vector<double> a(n, 0.0), prev = a, z = a;
    double t = 1.0;
    double best = 0.0;
    for (std::size_t it = 0; it < iters; ++it) {
        std::vector<double> next(n);
        for (std::size_t i = 0; i < n; ++i) {
            double g = 1.0;
            for (std::size_t j = 0; j < n; ++j) g -= Q[i][j] * z[j];
            next[i] = project(z[i] + g / L);
        }
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        for (std::size_t i = 0; i < n; ++i) z[i] = project(next[i] + (t - 1.0) / t_next * (next[i] - a[i]));
        prev = a;
        a = next;
        t = t_next;
        best = std::max(best, dual_value(Q, a));
    }
    return best;
}

/// Exhaustive grid search of the dual over [0, C]^n (only for n <= 3).
inline double dual_optimum_grid(const Matrix& Q, double C, std::size_t steps) {
    const std::size_t n = Q.size();
    std::vector<std::size_t> idx(n, 0);
    double best = -1e300;
    while (true) {
        std::vector<double> a(n);
        for (std::size_t i = 0; i < n; ++i) a[i] = C * static_cast<double>(idx[i]) / static_cast<double>(steps);
        best = std::max(best, dual_value(Q, a));
        std::size_t k = 0;
        while (k < n && ++idx[k] > steps) idx[k++] = 0;
        if (k == n) break;
    }
    return best;
}

// ---------------------------------------------------------------------------
// Statistics oracle: textbook two-pass population moments.

inline double mean_of(const std::vector<double>& xs) {
    double s = 0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

inline double pop_std_of(const std::vector<double>& xs) {
    const double m = mean_of(xs);
    double s = 0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(xs.size()));
}

} // namespace viprof::testing
