// SPDX-License-Identifier: Apache-2.0
//
// End-to-end author profiling methods evaluated under a fold plan:
//
//   t1/t2  bag-of-words (2k / 10k terms) per profile
//   v3     every image classified on its own, profile label by majority vote
//   v4     one averaged image embedding (prototype) per profile
//   m3/m6  bag-of-words (2k / 10k) concatenated with the prototype
//
// plus the per-image evaluation, the image-source scenarios and the
// thousand-word chunk experiment.
#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "viprof/corpus.hpp"
#include "viprof/evaluation.hpp"
#include "viprof/linear_svm.hpp"
#include "viprof/text_features.hpp"
#include "viprof/visual_features.hpp"

namespace viprof {

/// Records, per fold, which profiles and images each stage touched. Used to
/// assert that nothing from a test fold reaches vocabulary building or training.
struct FoldAudit {
    struct Fold {
        std::set<std::string> vocabulary_profiles;
        std::set<std::string> training_profiles;
        std::set<std::string> test_profiles;
        std::set<std::string> training_images;
        std::set<std::string> test_images;
    };
    std::vector<Fold> folds;
};

struct PipelineOptions {
    TrainConfig svm;
    unsigned jobs = 1;
    TermWeighting weighting = TermWeighting::counts;
    BlockNormalization block_norm = BlockNormalization::none;
    std::size_t chunk_tokens = 1000;
    FoldAudit* audit = nullptr;
};

enum class MethodKind { textual_2k, textual_10k, visual_individual, visual_prototype, multimodal_2k, multimodal_10k };

struct MethodSpec {
    MethodKind kind = MethodKind::textual_2k;
    SourceFilter source = SourceFilter::all;
    Task task = Task::gender;
};

/// t1, t2, v3, v4, m3, m6
std::optional<MethodKind> parse_method(std::string_view token);
std::string_view method_code(MethodKind kind);

EvaluationReport run_textual(const Corpus& corpus, const FoldPlan& folds, std::size_t k, Task task,
                             const PipelineOptions& opts = {});

EvaluationReport run_visual_individual(const Corpus& corpus, const FoldPlan& folds, const EmbeddingStore& store,
                                       SourceFilter source, Task task, const PipelineOptions& opts = {});

EvaluationReport run_visual_prototype(const Corpus& corpus, const FoldPlan& folds, const EmbeddingStore& store,
                                      SourceFilter source, Task task, const PipelineOptions& opts = {});

EvaluationReport run_multimodal(const Corpus& corpus, const FoldPlan& folds, const EmbeddingStore& store,
                                std::size_t k, Task task, const PipelineOptions& opts = {});

/// Dispatches on the method kind; `store` may be null only for textual methods.
EvaluationReport run_method(const Corpus& corpus, const FoldPlan& folds, const EmbeddingStore* store,
                            const MethodSpec& spec, const PipelineOptions& opts = {});

/// Most frequent label; ties go to the larger prior, then lexicographic order.
/// Throws UsageError on an empty list.
std::string majority_vote(std::span<const std::string> labels, const std::map<std::string, double>& priors);

/// Images of the training / test profiles of one fold that pass the source
/// filters and have a hidden4096 embedding.
struct ImageSplit {
    std::vector<std::string> train;
    std::vector<std::string> test;
};

ImageSplit split_images(const Corpus& corpus, const FoldPlan& folds, const EmbeddingStore& store, std::size_t fold,
                        SourceFilter train_source, SourceFilter test_source);

/// Every image is an instance labelled with its owner's class.
EvaluationReport run_per_image_eval(const Corpus& corpus, const FoldPlan& folds, const EmbeddingStore& store,
                                    Task task, const PipelineOptions& opts = {},
                                    SourceFilter train_source = SourceFilter::all,
                                    SourceFilter test_source = SourceFilter::all);

/// (a) train on one source, test on all images; (b) train on all, test on one
/// source; (c) train and test on the same source.
struct SourceScenario {
    char variant = 'a';
    ImageSource source = ImageSource::tweeted;
};

/// (train filter, test filter) for a scenario. Throws UsageError on an unknown variant.
std::pair<SourceFilter, SourceFilter> scenario_filters(const SourceScenario& scenario);

/// Throws DataError when the corpus has no image of the scenario's source.
EvaluationReport run_source_scenario(const Corpus& corpus, const FoldPlan& folds, const EmbeddingStore& store,
                                     const SourceScenario& scenario, Task task, const PipelineOptions& opts = {});

/// Composite report with parts named "a/tweets", "a/retweets", ... for the
/// requested variant, or all three when none is given.
EvaluationReport run_all_scenarios(const Corpus& corpus, const FoldPlan& folds, const EmbeddingStore& store, Task task,
                                   const PipelineOptions& opts = {}, std::optional<char> variant = std::nullopt);

/// Consecutive non-overlapping chunks; the remainder shorter than `size` is dropped.
std::vector<Tokens> chunk_tokens(const Tokens& tokens, std::size_t size);

/// Parts bow_2k, bow_10k (chunk instances) and all, tweets, retweets (image instances).
EvaluationReport run_thousand_words(const Corpus& corpus, const FoldPlan& folds, const EmbeddingStore& store,
                                    Task task, const PipelineOptions& opts = {});

} // namespace viprof
