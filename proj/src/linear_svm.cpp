// SPDX-License-Identifier: Apache-2.0
#include "viprof/linear_svm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "viprof/error.hpp"
#include "viprof/parallel.hpp"

namespace viprof {

namespace {

// Updates with a smaller projected gradient are skipped, as in LIBLINEAR.
constexpr double kMinStep = 1e-12;

double margin_dot(std::span<const double> w, const FeatureVector& x, bool bias) noexcept {
    double v = dot(w, x);
    if (bias) v += w[w.size() - 1];
    return v;
}

double projected_gradient(double G, double alpha, double C) noexcept {
    if (alpha <= 0.0) return std::min(G, 0.0);
    if (alpha >= C) return std::max(G, 0.0);
    return G;
}

void check_inputs(std::span<const FeatureVector> X, std::span<const int> y) {
    if (X.empty()) throw UsageError("training set is empty");
    if (X.size() != y.size())
        throw UsageError("got " + std::to_string(X.size()) + " examples but " + std::to_string(y.size()) + " labels");
    const std::size_t dim = dimension_of(X[0]);
    for (std::size_t i = 0; i < X.size(); ++i) {
        if (dimension_of(X[i]) != dim)
            throw UsageError("example " + std::to_string(i) + " has dimension " + std::to_string(dimension_of(X[i])) +
                             ", expected " + std::to_string(dim));
        if (!all_finite(X[i])) throw UsageError("example " + std::to_string(i) + " has a non-finite feature value");
        if (y[i] != 1 && y[i] != -1) throw UsageError("binary labels must be +1 or -1");
    }
}

} // namespace

void TrainConfig::validate() const {
    if (!(C > 0.0) || !std::isfinite(C)) throw UsageError("C must be positive");
    if (!(tolerance > 0.0)) throw UsageError("tolerance must be positive");
    if (max_outer_iters == 0) throw UsageError("max_outer_iters must be at least 1");
}

double dual_objective(std::span<const FeatureVector> X, std::span<const int> y, std::span<const double> alphas,
                      bool bias) {
    const std::size_t dim = X.empty() ? 0 : dimension_of(X[0]);
    DenseVector w(dim + (bias ? 1 : 0), 0.0);
    double sum_alpha = 0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        sum_alpha += alphas[i];
        axpy(alphas[i] * y[i], X[i], w);
        if (bias) w[dim] += alphas[i] * y[i];
    }
    double wsq = 0;
    for (double v : w) wsq += v * v;
    return sum_alpha - 0.5 * wsq;
}

double primal_objective(std::span<const FeatureVector> X, std::span<const int> y, std::span<const double> w,
                        double C, bool bias) {
    double wsq = 0;
    for (double v : w) wsq += v * v;
    double loss = 0;
    for (std::size_t i = 0; i < X.size(); ++i) loss += std::max(0.0, 1.0 - y[i] * margin_dot(w, X[i], bias));
    return 0.5 * wsq + C * loss;
}

BinaryModel train_binary(std::span<const FeatureVector> X, std::span<const int> y, const TrainConfig& cfg) {
    cfg.validate();
    check_inputs(X, y);

    const std::size_t n = X.size();
    const std::size_t dim = dimension_of(X[0]);
    const double C = cfg.C;

    BinaryModel model;
    model.bias = cfg.bias;
    model.weights.assign(dim + (cfg.bias ? 1 : 0), 0.0);
    model.alphas.assign(n, 0.0);
    auto& w = model.weights;
    auto& alpha = model.alphas;

    std::vector<double> qd(n);
    for (std::size_t i = 0; i < n; ++i) qd[i] = squared_norm(X[i]) + (cfg.bias ? 1.0 : 0.0);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(cfg.seed);

    auto update_w = [&](std::size_t i, double delta) {
        axpy(delta, X[i], w);
        if (cfg.bias) w[dim] += delta;
    };
    auto current_dual = [&] {
        double sum_alpha = 0, wsq = 0;
        for (double a : alpha) sum_alpha += a;
        for (double v : w) wsq += v * v;
        return sum_alpha - 0.5 * wsq;
    };
    auto max_violation = [&] {
        double worst = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double G = y[i] * margin_dot(w, X[i], cfg.bias) - 1.0;
            worst = std::max(worst, std::abs(projected_gradient(G, alpha[i], C)));
        }
        return worst;
    };

    // D(alpha) tracked through the gain of each coordinate step. Every gain is
    // a non-negative product, so the trace cannot dip by rounding the way a
    // from-scratch recomputation late in training can.
    double dual = 0.0;

    while (model.iterations < cfg.max_outer_iters) {
        // Fisher-Yates with a plain modulo draw: reproducible across standard libraries.
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
            std::swap(order[i], order[j]);
        }

        double sweep_violation = 0;
        for (std::size_t i : order) {
            const double G = y[i] * margin_dot(w, X[i], cfg.bias) - 1.0;
            const double PG = projected_gradient(G, alpha[i], C);
            sweep_violation = std::max(sweep_violation, std::abs(PG));
            if (std::abs(PG) <= kMinStep) continue;

            const double old = alpha[i];
            // A zero row leaves D linear in alpha_i with slope -G = 1.
            alpha[i] = qd[i] > 0.0 ? std::clamp(old - G / qd[i], 0.0, C) : (G < 0.0 ? C : 0.0);
            const double step = alpha[i] - old;
            if (step != 0.0) {
                update_w(i, step * y[i]);
                dual += -G * step - 0.5 * qd[i] * step * step;
            }
        }
        ++model.iterations;
        model.dual_trace.push_back(dual);

        // The per-sweep maximum is measured before each update, so confirm the
        // bound at the final alphas before declaring convergence.
        if (sweep_violation <= cfg.tolerance && max_violation() <= cfg.tolerance) {
            model.converged = true;
            break;
        }
    }

    model.final_violation = max_violation();
    model.final_gap = primal_objective(X, y, w, C, cfg.bias) - current_dual();
    return model;
}

double decision_value(const BinaryModel& model, const FeatureVector& x) {
    if (dimension_of(x) != model.feature_dim())
        throw UsageError("feature dimension " + std::to_string(dimension_of(x)) + " does not match model dimension " +
                         std::to_string(model.feature_dim()));
    return margin_dot(model.weights, x, model.bias);
}

TrainedModel train_multiclass(std::span<const FeatureVector> X, std::span<const std::string> labels,
                              const TrainConfig& cfg, unsigned jobs) {
    cfg.validate();
    if (X.size() != labels.size())
        throw UsageError("got " + std::to_string(X.size()) + " examples but " + std::to_string(labels.size()) +
                         " labels");
    const std::set<std::string> distinct(labels.begin(), labels.end());
    if (distinct.size() < 2)
        throw UsageError("multiclass training needs at least two distinct labels, got " +
                         std::to_string(distinct.size()));

    TrainedModel model;
    model.classes.assign(distinct.begin(), distinct.end());
    model.dim = dimension_of(X[0]);
    model.config = cfg;
    for (const auto& c : model.classes) {
        const auto count = std::count(labels.begin(), labels.end(), c);
        model.priors.push_back(static_cast<double>(count) / static_cast<double>(labels.size()));
    }

    model.per_class.resize(model.classes.size());
    parallel_for(model.classes.size(), jobs, [&](std::size_t k) {
        std::vector<int> y(labels.size());
        for (std::size_t i = 0; i < labels.size(); ++i) y[i] = labels[i] == model.classes[k] ? 1 : -1;
        model.per_class[k] = train_binary(X, y, cfg);
    });
    return model;
}

std::size_t argmax_with_priors(std::span<const double> scores, std::span<const double> priors) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < scores.size(); ++k) {
        // Classes are in lexicographic order, so keeping the earlier one on a
        // full tie is the lexicographic rule.
        if (scores[k] > scores[best] || (scores[k] == scores[best] && priors[k] > priors[best])) best = k;
    }
    return best;
}

Prediction predict(const TrainedModel& model, const FeatureVector& x) {
    if (dimension_of(x) != model.dim)
        throw UsageError("feature dimension " + std::to_string(dimension_of(x)) + " does not match model dimension " +
                         std::to_string(model.dim));
    Prediction p;
    p.scores.reserve(model.classes.size());
    for (const auto& m : model.per_class) p.scores.push_back(margin_dot(m.weights, x, m.bias));
    p.label = model.classes[argmax_with_priors(p.scores, model.priors)];
    return p;
}

nlohmann::ordered_json config_to_json(const TrainConfig& cfg) {
    nlohmann::ordered_json j;
    j["C"] = cfg.C;
    j["tolerance"] = cfg.tolerance;
    j["max_outer_iters"] = cfg.max_outer_iters;
    j["seed"] = cfg.seed;
    j["bias"] = cfg.bias;
    return j;
}

nlohmann::ordered_json model_to_json(const TrainedModel& model) {
    nlohmann::ordered_json j;
    j["classes"] = model.classes;
    j["priors"] = model.priors;
    j["dim"] = model.dim;
    j["bias"] = model.config.bias;
    j["config"] = config_to_json(model.config);
    auto& weights = j["weights"] = nlohmann::ordered_json::object();
    auto& meta = j["training"] = nlohmann::ordered_json::object();
    for (std::size_t k = 0; k < model.classes.size(); ++k) {
        const auto& m = model.per_class[k];
        weights[model.classes[k]] = m.weights;
        meta[model.classes[k]] = {{"converged", m.converged},
                                  {"iterations", m.iterations},
                                  {"final_violation", m.final_violation},
                                  {"final_gap", m.final_gap}};
    }
    return j;
}

TrainedModel model_from_json(const nlohmann::json& j) {
    try {
        TrainedModel model;
        model.classes = j.at("classes").get<std::vector<std::string>>();
        model.priors = j.at("priors").get<std::vector<double>>();
        model.dim = j.at("dim").get<std::size_t>();
        const auto& cfg = j.at("config");
        model.config.C = cfg.at("C").get<double>();
        model.config.tolerance = cfg.at("tolerance").get<double>();
        model.config.max_outer_iters = cfg.at("max_outer_iters").get<std::size_t>();
        model.config.seed = cfg.at("seed").get<std::uint64_t>();
        model.config.bias = j.at("bias").get<bool>();
        if (model.priors.size() != model.classes.size()) throw DataError("priors do not match classes");
        for (const auto& c : model.classes) {
            BinaryModel m;
            m.bias = model.config.bias;
            m.weights = j.at("weights").at(c).get<std::vector<double>>();
            if (m.weights.size() != model.dim + (m.bias ? 1 : 0))
                throw DataError("weight vector of class " + c + " has the wrong length");
            if (j.contains("training") && j["training"].contains(c)) {
                const auto& t = j["training"][c];
                m.converged = t.value("converged", false);
                m.iterations = t.value("iterations", std::size_t{0});
                m.final_violation = t.value("final_violation", 0.0);
                m.final_gap = t.value("final_gap", 0.0);
            }
            model.per_class.push_back(std::move(m));
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed model file: ") + e.what());
    }
}

} // namespace viprof
