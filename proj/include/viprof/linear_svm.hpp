// SPDX-License-Identifier: Apache-2.0
//
// L2-regularized hinge-loss (L1-loss) linear SVM trained by dual coordinate
// descent, plus one-vs-rest multiclass on top of it.
//
// The binary problem solved is
//
//     max_a  D(a) = sum_i a_i - 1/2 || sum_i a_i y_i x_i ||^2,   0 <= a_i <= C
//
// with w = sum_i a_i y_i x_i. When `bias` is set every x is augmented with a
// constant 1.0 feature, which is regularized like the other weights.
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "viprof/features.hpp"

namespace viprof {

struct TrainConfig {
    double C = 1.0;
    double tolerance = 1e-3;
    std::size_t max_outer_iters = 1000;
    std::uint64_t seed = 42;
    bool bias = true;

    /// Throws UsageError when C <= 0, tolerance <= 0 or max_outer_iters == 0.
    void validate() const;
};

struct BinaryModel {
    DenseVector weights;                 ///< feature dim, +1 when bias
    std::vector<double> alphas;          ///< one dual variable per example, in [0, C]
    bool bias = true;
    bool converged = false;
    std::size_t iterations = 0;          ///< outer sweeps performed
    double final_violation = 0;          ///< max |projected gradient| at the returned alphas
    double final_gap = 0;                ///< primal - dual objective at the returned point
    std::vector<double> dual_trace;      ///< D(alpha) after every outer sweep

    std::size_t feature_dim() const noexcept { return weights.size() - (bias ? 1 : 0); }
};

/// Throws UsageError on empty input, size/dimension mismatch, labels other
/// than +1/-1, or non-finite feature values.
BinaryModel train_binary(std::span<const FeatureVector> X, std::span<const int> y, const TrainConfig& cfg);

/// dot(weights, [x, 1]) (bias slot only when enabled). Throws UsageError on dimension mismatch.
double decision_value(const BinaryModel& model, const FeatureVector& x);

/// D(alpha) for the given data; used by the solver's trace and by tests.
double dual_objective(std::span<const FeatureVector> X, std::span<const int> y, std::span<const double> alphas,
                      bool bias);
/// 1/2 ||w||^2 + C * sum_i max(0, 1 - y_i w.x_i)
double primal_objective(std::span<const FeatureVector> X, std::span<const int> y, std::span<const double> w,
                        double C, bool bias);

struct TrainedModel {
    std::vector<std::string> classes;    ///< lexicographic order
    std::vector<double> priors;          ///< training frequency per class
    std::vector<BinaryModel> per_class;  ///< one-vs-rest, aligned with classes
    std::size_t dim = 0;
    TrainConfig config;
};

/// Throws UsageError when fewer than two distinct labels are present.
TrainedModel train_multiclass(std::span<const FeatureVector> X, std::span<const std::string> labels,
                              const TrainConfig& cfg, unsigned jobs = 1);

struct Prediction {
    std::string label;
    std::vector<double> scores;          ///< aligned with TrainedModel::classes
};

/// Argmax of the per-class decision values; ties go to the larger prior, then
/// the lexicographically first class.
Prediction predict(const TrainedModel& model, const FeatureVector& x);

/// Same tie rule, exposed for callers that already hold the scores.
std::size_t argmax_with_priors(std::span<const double> scores, std::span<const double> priors);

nlohmann::ordered_json model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& j);
nlohmann::ordered_json config_to_json(const TrainConfig& cfg);

} // namespace viprof
