// SPDX-License-Identifier: Apache-2.0
//
// Subject-independent fold planning, accuracy metrics and report rendering.
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "viprof/corpus.hpp"

namespace viprof {

/// Assignment of every profile to exactly one of k folds, stratified so that
/// each fold holds at least one profile of every class of `task`.
struct FoldPlan {
    std::size_t k = 0;
    std::uint64_t seed = 0;
    Task task = Task::gender;
    bool allow_missing_class = false;
    std::map<std::string, std::size_t> assignment;                    ///< profile id -> fold
    std::map<std::size_t, std::vector<std::string>> missing_classes;  ///< only in permissive mode

    std::size_t fold_of(const std::string& profile_id) const;
    std::vector<std::string> members(std::size_t fold) const;
};

/// Seeded shuffle inside each class, then round-robin dealing class after
/// class. In strict mode a class with fewer than k profiles is an error that
/// names the class; with `allow_missing_class` the gaps are recorded instead.
FoldPlan make_folds(const Corpus& corpus, std::size_t k, Task task, std::uint64_t seed,
                    bool allow_missing_class = false);

/// Checks that the plan covers exactly the corpus profiles with folds in [0, k).
void validate_plan(const FoldPlan& plan, const Corpus& corpus);

nlohmann::ordered_json folds_to_json(const FoldPlan& plan);
FoldPlan folds_from_json(const nlohmann::json& j);

/// Fraction of (gold, predicted) pairs that agree. Throws UsageError when empty.
double accuracy(std::span<const std::pair<std::string, std::string>> predictions);

/// Empirical class frequencies. Throws UsageError when empty.
std::map<std::string, double> class_probability_baseline(std::span<const std::string> labels);

/// Pooled per-class counts of test predictions.
struct ClassBreakdown {
    std::map<std::string, std::size_t> support;  ///< gold instances per class
    std::map<std::string, std::size_t> correct;  ///< correctly predicted per class

    void add(const std::string& gold, const std::string& predicted);
    std::size_t total() const;
    std::size_t total_correct() const;
    double overall() const;                       ///< total_correct / total
    double class_accuracy(const std::string& c) const;
    std::map<std::string, double> baseline() const;
    bool empty() const { return support.empty(); }
};

struct EvaluationReport {
    std::string name;                      ///< part name inside a composite report
    std::string method;                    ///< t1, t2, v3, v4, m3, m6, per_image, scenario, thousand_words
    std::string task;
    std::string source = "all";
    std::string unit = "profile";          ///< what one test instance is: profile, image or chunk
    std::vector<double> fold_accuracies;   ///< folds without test instances are left out
    double mean_accuracy = 0;
    ClassBreakdown breakdown;
    std::map<std::string, std::size_t> counts;
    nlohmann::ordered_json config = nlohmann::ordered_json::object();
    std::vector<std::string> notes;
    std::vector<EvaluationReport> parts;

    /// Sets mean_accuracy to the unweighted mean of fold_accuracies.
    void finalize_mean();
    const EvaluationReport* part(const std::string& part_name) const;
};

enum class ReportFormat { json, markdown };

nlohmann::ordered_json report_to_json(const EvaluationReport& report);
EvaluationReport report_from_json(const nlohmann::ordered_json& j);
std::string render_report(const EvaluationReport& report, ReportFormat format);

} // namespace viprof
