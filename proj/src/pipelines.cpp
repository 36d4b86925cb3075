// SPDX-License-Identifier: Apache-2.0
#include "viprof/pipelines.hpp"

#include <algorithm>
#include <unordered_map>

#include "viprof/error.hpp"
#include "viprof/parallel.hpp"

namespace viprof {

namespace {

struct FoldMembers {
    std::vector<const Profile*> train;
    std::vector<const Profile*> test;
};

FoldMembers fold_members(const Corpus& corpus, const FoldPlan& folds, std::size_t fold) {
    FoldMembers m;
    for (const auto& p : corpus.profiles()) (folds.fold_of(p.id) == fold ? m.test : m.train).push_back(&p);
    return m;
}

std::vector<std::string> labels_of(const std::vector<const Profile*>& profiles, Task task) {
    std::vector<std::string> out;
    out.reserve(profiles.size());
    for (const auto* p : profiles) out.push_back(label_of(*p, task));
    return out;
}

/// Most frequent label, ties lexicographic.
std::string majority_label(std::span<const std::string> labels) {
    if (labels.empty()) throw UsageError("majority of an empty label list");
    std::map<std::string, std::size_t> counts;
    for (const auto& l : labels) ++counts[l];
    auto best = counts.begin();
    for (auto it = counts.begin(); it != counts.end(); ++it)
        if (it->second > best->second) best = it;
    return best->first;
}

bool all_identical(const std::vector<FeatureVector>& X) {
    return std::all_of(X.begin(), X.end(), [&](const FeatureVector& x) { return x == X.front(); });
}

/// A trained one-vs-rest model, or a constant predictor when the training
/// instances cannot separate anything (no instances, one class, or every
/// feature vector identical).
class FoldClassifier {
public:
    static FoldClassifier fit(const std::vector<FeatureVector>& X, const std::vector<std::string>& y,
                              const std::vector<std::string>& fallback_labels, const TrainConfig& cfg) {
        FoldClassifier c;
        if (X.empty()) {
            c.constant_ = majority_label(fallback_labels);
            c.priors_ = class_probability_baseline(fallback_labels);
            return c;
        }
        c.priors_ = class_probability_baseline(y);
        if (c.priors_.size() < 2 || all_identical(X)) {
            c.constant_ = majority_label(y);
            return c;
        }
        c.model_ = train_multiclass(X, y, cfg);
        return c;
    }

    std::string predict(const FeatureVector& x) const {
        return model_ ? viprof::predict(*model_, x).label : constant_;
    }
    const std::map<std::string, double>& priors() const { return priors_; }
    bool is_constant() const { return !model_; }

private:
    std::optional<TrainedModel> model_;
    std::string constant_;
    std::map<std::string, double> priors_;
};

struct FoldOutcome {
    std::vector<std::pair<std::string, std::string>> predictions;        // (gold, predicted)
    std::vector<std::pair<std::string, std::string>> image_predictions;  // V3 only
    bool constant = false;
    std::map<std::string, std::size_t> counts;
};

void collect(EvaluationReport& report, const std::vector<FoldOutcome>& outcomes, bool images = false) {
    for (const auto& o : outcomes) {
        const auto& preds = images ? o.image_predictions : o.predictions;
        if (preds.empty()) {
            ++report.counts["empty_test_folds"];
        } else {
            report.fold_accuracies.push_back(accuracy(preds));
        }
        for (const auto& [gold, pred] : preds) report.breakdown.add(gold, pred);
        if (!images) {
            if (o.constant) ++report.counts["constant_fallback_folds"];
            for (const auto& [k, v] : o.counts) report.counts[k] += v;
        }
        report.counts["test_instances"] += preds.size();
    }
    report.finalize_mean();
}

nlohmann::ordered_json base_config(const FoldPlan& folds, const PipelineOptions& opts, Task task) {
    nlohmann::ordered_json j;
    j["task"] = to_string(task);
    j["folds"] = {{"k", folds.k},
                  {"seed", folds.seed},
                  {"task", to_string(folds.task)},
                  {"allow_missing_class", folds.allow_missing_class}};
    j["svm"] = config_to_json(opts.svm);
    j["weighting"] = opts.weighting == TermWeighting::counts ? "counts" : "binary";
    j["block_norm"] = opts.block_norm == BlockNormalization::none ? "none" : "l2";
    return j;
}

void prepare_audit(const PipelineOptions& opts, const FoldPlan& folds) {
    if (opts.audit && opts.audit->folds.size() < folds.k) opts.audit->folds.resize(folds.k);
}

void audit_profiles(const PipelineOptions& opts, std::size_t fold, const FoldMembers& m, bool vocabulary) {
    if (!opts.audit) return;
    auto& a = opts.audit->folds[fold];
    for (const auto* p : m.train) {
        a.training_profiles.insert(p->id);
        if (vocabulary) a.vocabulary_profiles.insert(p->id);
    }
    for (const auto* p : m.test) a.test_profiles.insert(p->id);
}

std::vector<Tokens> tokens_by_profile(const Corpus& corpus) {
    std::vector<Tokens> out;
    out.reserve(corpus.profiles().size());
    for (const auto& p : corpus.profiles()) out.push_back(profile_tokens(p));
    return out;
}

std::unordered_map<const Profile*, std::size_t> profile_positions(const Corpus& corpus) {
    std::unordered_map<const Profile*, std::size_t> pos;
    for (std::size_t i = 0; i < corpus.profiles().size(); ++i) pos[&corpus.profiles()[i]] = i;
    return pos;
}

FeatureVector image_features(const EmbeddingStore& store, const std::string& image_id) {
    const auto* v = store.find(image_id, EmbeddingLayer::hidden4096);
    return DenseVector(v->values.begin(), v->values.end());
}

/// hidden4096 vectors of every image that has one, converted once per run.
std::unordered_map<std::string, FeatureVector> image_feature_cache(const Corpus& corpus, const EmbeddingStore& store) {
    std::unordered_map<std::string, FeatureVector> cache;
    for (const auto& img : corpus.images())
        if (store.find(img.id, EmbeddingLayer::hidden4096)) cache.emplace(img.id, image_features(store, img.id));
    return cache;
}

std::size_t missing_embeddings(const Corpus& corpus, const EmbeddingStore& store, SourceFilter filter) {
    std::size_t n = 0;
    for (const auto& img : corpus.images())
        if (matches(filter, img.source) && !store.find(img.id, EmbeddingLayer::hidden4096)) ++n;
    return n;
}

std::string bow_method_code(std::size_t k, bool multimodal) {
    if (k == kBowSmall) return multimodal ? "m3" : "t1";
    if (k == kBowLarge) return multimodal ? "m6" : "t2";
    return multimodal ? "multimodal" : "bow";
}

bool corpus_has_source(const Corpus& corpus, ImageSource s) {
    return std::any_of(corpus.images().begin(), corpus.images().end(),
                       [s](const ImageRecord& img) { return img.source == s; });
}

SourceFilter filter_for(ImageSource s) {
    return s == ImageSource::tweeted ? SourceFilter::tweeted : SourceFilter::retweeted;
}

} // namespace

// ---------------------------------------------------------------------------

std::optional<MethodKind> parse_method(std::string_view token) {
    if (token == "t1") return MethodKind::textual_2k;
    if (token == "t2") return MethodKind::textual_10k;
    if (token == "v3") return MethodKind::visual_individual;
    if (token == "v4") return MethodKind::visual_prototype;
    if (token == "m3") return MethodKind::multimodal_2k;
    if (token == "m6") return MethodKind::multimodal_10k;
    return std::nullopt;
}

std::string_view method_code(MethodKind kind) {
    switch (kind) {
    case MethodKind::textual_2k: return "t1";
    case MethodKind::textual_10k: return "t2";
    case MethodKind::visual_individual: return "v3";
    case MethodKind::visual_prototype: return "v4";
    case MethodKind::multimodal_2k: return "m3";
    case MethodKind::multimodal_10k: return "m6";
    }
    return "?";
}

std::string majority_vote(std::span<const std::string> labels, const std::map<std::string, double>& priors) {
    if (labels.empty()) throw UsageError("majority vote over an empty label list");
    std::map<std::string, std::size_t> counts;
    for (const auto& l : labels) ++counts[l];
    auto prior = [&](const std::string& c) {
        auto it = priors.find(c);
        return it == priors.end() ? 0.0 : it->second;
    };
    auto best = counts.begin();
    for (auto it = std::next(counts.begin()); it != counts.end(); ++it) {
        if (it->second > best->second || (it->second == best->second && prior(it->first) > prior(best->first)))
            best = it;
    }
    return best->first;
}

EvaluationReport run_textual(const Corpus& corpus, const FoldPlan& folds, std::size_t k, Task task,
                             const PipelineOptions& opts) {
    validate_plan(folds, corpus);
    prepare_audit(opts, folds);
    const auto tokens = tokens_by_profile(corpus);
    const auto pos = profile_positions(corpus);

    std::vector<FoldOutcome> outcomes(folds.k);
    parallel_for(folds.k, opts.jobs, [&](std::size_t f) {
        const auto m = fold_members(corpus, folds, f);
        std::vector<Tokens> docs;
        for (const auto* p : m.train) docs.push_back(tokens[pos.at(p)]);
        const auto vocab = build_vocabulary(docs, k);

        std::vector<FeatureVector> X;
        for (const auto& d : docs) X.emplace_back(vectorize(d, vocab, opts.weighting));
        const auto y = labels_of(m.train, task);
        const auto clf = FoldClassifier::fit(X, y, y, opts.svm);

        auto& out = outcomes[f];
        out.constant = clf.is_constant();
        for (const auto* p : m.test) {
            const FeatureVector x = vectorize(tokens[pos.at(p)], vocab, opts.weighting);
            out.predictions.emplace_back(label_of(*p, task), clf.predict(x));
        }
        audit_profiles(opts, f, m, true);
    });

    EvaluationReport r;
    r.method = bow_method_code(k, false);
    r.task = std::string(to_string(task));
    r.source = "all";
    r.config = base_config(folds, opts, task);
    r.config["vocabulary_size"] = k;
    collect(r, outcomes);
    return r;
}

EvaluationReport run_visual_individual(const Corpus& corpus, const FoldPlan& folds, const EmbeddingStore& store,
                                       SourceFilter source, Task task, const PipelineOptions& opts) {
    validate_plan(folds, corpus);
    prepare_audit(opts, folds);
    const auto cache = image_feature_cache(corpus, store);

    auto usable_images = [&](const Profile& p) {
        std::vector<std::string> ids;
        for (const auto* img : corpus.images_of(p))
            if (matches(source, img->source) && cache.count(img->id)) ids.push_back(img->id);
        return ids;
    };

    std::vector<FoldOutcome> outcomes(folds.k);
    parallel_for(folds.k, opts.jobs, [&](std::size_t f) {
        const auto m = fold_members(corpus, folds, f);
        std::vector<FeatureVector> X;
        std::vector<std::string> y;
        for (const auto* p : m.train) {
            for (const auto& id : usable_images(*p)) {
                X.push_back(cache.at(id));
                y.push_back(label_of(*p, task));
                if (opts.audit) opts.audit->folds[f].training_images.insert(id);
            }
        }
        const auto train_labels = labels_of(m.train, task);
        const auto clf = FoldClassifier::fit(X, y, train_labels, opts.svm);

        auto& out = outcomes[f];
        out.constant = clf.is_constant();
        for (const auto* p : m.test) {
            const std::string gold = label_of(*p, task);
            const auto ids = usable_images(*p);
            if (ids.empty()) {
                ++out.counts["profiles_without_usable_images"];
                out.predictions.emplace_back(gold, majority_label(train_labels));
                continue;
            }
            std::vector<std::string> votes;
            for (const auto& id : ids) {
                votes.push_back(clf.predict(cache.at(id)));
                out.image_predictions.emplace_back(gold, votes.back());
                if (opts.audit) opts.audit->folds[f].test_images.insert(id);
            }
            out.predictions.emplace_back(gold, majority_vote(votes, clf.priors()));
        }
        audit_profiles(opts, f, m, false);
    });

    EvaluationReport r;
    r.method = "v3";
    r.task = std::string(to_string(task));
    r.source = std::string(to_string(source));
    r.config = base_config(folds, opts, task);
    r.config["source"] = to_string(source);
    collect(r, outcomes);
    r.counts["images_missing_embedding"] = missing_embeddings(corpus, store, source);
    if (source == SourceFilter::retweeted && task == Task::age && corpus.language() == Language::en)
        r.notes.push_back("reference value for this configuration on the original English corpus: 0.432");

    EvaluationReport images;
    images.name = "image_level";
    images.method = "v3";
    images.task = r.task;
    images.source = r.source;
    images.unit = "image";
    images.config = r.config;
    collect(images, outcomes, true);
    r.parts.push_back(std::move(images));
    return r;
}

EvaluationReport run_visual_prototype(const Corpus& corpus, const FoldPlan& folds, const EmbeddingStore& store,
                                      SourceFilter source, Task task, const PipelineOptions& opts) {
    validate_plan(folds, corpus);
    prepare_audit(opts, folds);
    const auto pos = profile_positions(corpus);
    std::vector<FeatureVector> protos;
    std::size_t degenerate = 0;
    for (const auto& p : corpus.profiles()) {
        auto proto = build_prototype(corpus, p, store, source);
        if (proto.degenerate()) ++degenerate;
        protos.emplace_back(std::move(proto.values));
    }

    std::vector<FoldOutcome> outcomes(folds.k);
    parallel_for(folds.k, opts.jobs, [&](std::size_t f) {
        const auto m = fold_members(corpus, folds, f);
        std::vector<FeatureVector> X;
        for (const auto* p : m.train) X.push_back(protos[pos.at(p)]);
        const auto y = labels_of(m.train, task);
        const auto clf = FoldClassifier::fit(X, y, y, opts.svm);
        auto& out = outcomes[f];
        out.constant = clf.is_constant();
        for (const auto* p : m.test) out.predictions.emplace_back(label_of(*p, task), clf.predict(protos[pos.at(p)]));
        audit_profiles(opts, f, m, false);
    });

    EvaluationReport r;
    r.method = "v4";
    r.task = std::string(to_string(task));
    r.source = std::string(to_string(source));
    r.config = base_config(folds, opts, task);
    r.config["source"] = to_string(source);
    collect(r, outcomes);
    r.counts["degenerate_prototypes"] = degenerate;
    r.counts["images_missing_embedding"] = missing_embeddings(corpus, store, source);
    if (degenerate > 0) r.notes.push_back("profiles without usable images were given zero prototypes");
    return r;
}

EvaluationReport run_multimodal(const Corpus& corpus, const FoldPlan& folds, const EmbeddingStore& store,
                                std::size_t k, Task task, const PipelineOptions& opts) {
    validate_plan(folds, corpus);
    prepare_audit(opts, folds);
    const auto tokens = tokens_by_profile(corpus);
    const auto pos = profile_positions(corpus);
    std::vector<Prototype> protos;
    std::size_t degenerate = 0;
    for (const auto& p : corpus.profiles()) {
        protos.push_back(build_prototype(corpus, p, store, SourceFilter::all));
        if (protos.back().degenerate()) ++degenerate;
    }

    std::vector<FoldOutcome> outcomes(folds.k);
    parallel_for(folds.k, opts.jobs, [&](std::size_t f) {
        const auto m = fold_members(corpus, folds, f);
        std::vector<Tokens> docs;
        for (const auto* p : m.train) docs.push_back(tokens[pos.at(p)]);
        const auto vocab = build_vocabulary(docs, k);
        auto features = [&](const Profile* p) -> FeatureVector {
            const auto i = pos.at(p);
            return concat_multimodal(vectorize(tokens[i], vocab, opts.weighting), protos[i], opts.block_norm);
        };
        std::vector<FeatureVector> X;
        for (const auto* p : m.train) X.push_back(features(p));
        const auto y = labels_of(m.train, task);
        const auto clf = FoldClassifier::fit(X, y, y, opts.svm);
        auto& out = outcomes[f];
        out.constant = clf.is_constant();
        for (const auto* p : m.test) out.predictions.emplace_back(label_of(*p, task), clf.predict(features(p)));
        audit_profiles(opts, f, m, true);
    });

    EvaluationReport r;
    r.method = bow_method_code(k, true);
    r.task = std::string(to_string(task));
    r.source = "all";
    r.config = base_config(folds, opts, task);
    r.config["vocabulary_size"] = k;
    collect(r, outcomes);
    r.counts["degenerate_prototypes"] = degenerate;
    return r;
}

EvaluationReport run_method(const Corpus& corpus, const FoldPlan& folds, const EmbeddingStore* store,
                            const MethodSpec& spec, const PipelineOptions& opts) {
    auto need_store = [&]() -> const EmbeddingStore& {
        if (!store) throw UsageError("method " + std::string(method_code(spec.kind)) + " needs image embeddings");
        return *store;
    };
    switch (spec.kind) {
    case MethodKind::textual_2k: return run_textual(corpus, folds, kBowSmall, spec.task, opts);
    case MethodKind::textual_10k: return run_textual(corpus, folds, kBowLarge, spec.task, opts);
    case MethodKind::visual_individual:
        return run_visual_individual(corpus, folds, need_store(), spec.source, spec.task, opts);
    case MethodKind::visual_prototype:
        return run_visual_prototype(corpus, folds, need_store(), spec.source, spec.task, opts);
    case MethodKind::multimodal_2k: return run_multimodal(corpus, folds, need_store(), kBowSmall, spec.task, opts);
    case MethodKind::multimodal_10k: return run_multimodal(corpus, folds, need_store(), kBowLarge, spec.task, opts);
    }
    throw UsageError("unknown method");
}

// ---------------------------------------------------------------------------
// Image-instance evaluations

ImageSplit split_images(const Corpus& corpus, const FoldPlan& folds, const EmbeddingStore& store, std::size_t fold,
                        SourceFilter train_source, SourceFilter test_source) {
    ImageSplit split;
    for (const auto& p : corpus.profiles()) {
        const bool is_test = folds.fold_of(p.id) == fold;
        const SourceFilter filter = is_test ? test_source : train_source;
        for (const auto* img : corpus.images_of(p)) {
            if (!matches(filter, img->source) || !store.find(img->id, EmbeddingLayer::hidden4096)) continue;
            (is_test ? split.test : split.train).push_back(img->id);
        }
    }
    return split;
}

EvaluationReport run_per_image_eval(const Corpus& corpus, const FoldPlan& folds, const EmbeddingStore& store,
                                    Task task, const PipelineOptions& opts, SourceFilter train_source,
                                    SourceFilter test_source) {
    validate_plan(folds, corpus);
    prepare_audit(opts, folds);
    const auto cache = image_feature_cache(corpus, store);
    auto owner_label = [&](const std::string& image_id) {
        return label_of(corpus.profile(corpus.image(image_id).profile_id), task);
    };

    std::vector<FoldOutcome> outcomes(folds.k);
    parallel_for(folds.k, opts.jobs, [&](std::size_t f) {
        const auto m = fold_members(corpus, folds, f);
        const auto split = split_images(corpus, folds, store, f, train_source, test_source);
        std::vector<FeatureVector> X;
        std::vector<std::string> y;
        for (const auto& id : split.train) {
            X.push_back(cache.at(id));
            y.push_back(owner_label(id));
        }
        const auto clf = FoldClassifier::fit(X, y, labels_of(m.train, task), opts.svm);
        auto& out = outcomes[f];
        out.constant = clf.is_constant();
        for (const auto& id : split.test) out.predictions.emplace_back(owner_label(id), clf.predict(cache.at(id)));
        if (opts.audit) {
            auto& a = opts.audit->folds[f];
            a.training_images.insert(split.train.begin(), split.train.end());
            a.test_images.insert(split.test.begin(), split.test.end());
        }
        audit_profiles(opts, f, m, false);
    });

    EvaluationReport r;
    r.method = "per_image";
    r.task = std::string(to_string(task));
    r.source = std::string(to_string(test_source));
    r.unit = "image";
    r.config = base_config(folds, opts, task);
    r.config["train_source"] = to_string(train_source);
    r.config["test_source"] = to_string(test_source);
    collect(r, outcomes);
    return r;
}

std::pair<SourceFilter, SourceFilter> scenario_filters(const SourceScenario& scenario) {
    const SourceFilter s = filter_for(scenario.source);
    switch (scenario.variant) {
    case 'a': return {s, SourceFilter::all};
    case 'b': return {SourceFilter::all, s};
    case 'c': return {s, s};
    default: throw UsageError(std::string("unknown scenario variant '") + scenario.variant + "'");
    }
}

EvaluationReport run_source_scenario(const Corpus& corpus, const FoldPlan& folds, const EmbeddingStore& store,
                                     const SourceScenario& scenario, Task task, const PipelineOptions& opts) {
    const auto [train, test] = scenario_filters(scenario);
    if (!corpus_has_source(corpus, scenario.source))
        throw DataError("corpus has no " + std::string(to_string(scenario.source)) + " images for scenario (" +
                        scenario.variant + ")");
    auto r = run_per_image_eval(corpus, folds, store, task, opts, train, test);
    r.method = "scenario_single";
    r.name = std::string(1, scenario.variant) + "/" + std::string(to_string(filter_for(scenario.source)));
    r.config["variant"] = std::string(1, scenario.variant);
    return r;
}

EvaluationReport run_all_scenarios(const Corpus& corpus, const FoldPlan& folds, const EmbeddingStore& store, Task task,
                                   const PipelineOptions& opts, std::optional<char> variant) {
    EvaluationReport r;
    r.method = "scenario";
    r.task = std::string(to_string(task));
    r.unit = "image";
    r.config = base_config(folds, opts, task);
    for (char v : {'a', 'b', 'c'}) {
        if (variant && *variant != v) continue;
        for (ImageSource s : {ImageSource::tweeted, ImageSource::retweeted})
            r.parts.push_back(run_source_scenario(corpus, folds, store, {v, s}, task, opts));
    }
    if (r.parts.empty()) throw UsageError("unknown scenario variant");
    return r;
}

std::vector<Tokens> chunk_tokens(const Tokens& tokens, std::size_t size) {
    if (size == 0) throw UsageError("chunk size must be positive");
    std::vector<Tokens> chunks;
    for (std::size_t start = 0; start + size <= tokens.size(); start += size)
        chunks.emplace_back(tokens.begin() + static_cast<std::ptrdiff_t>(start),
                            tokens.begin() + static_cast<std::ptrdiff_t>(start + size));
    return chunks;
}

EvaluationReport run_thousand_words(const Corpus& corpus, const FoldPlan& folds, const EmbeddingStore& store,
                                    Task task, const PipelineOptions& opts) {
    validate_plan(folds, corpus);
    prepare_audit(opts, folds);
    std::vector<std::vector<Tokens>> chunks;
    std::size_t without_chunks = 0;
    for (const auto& p : corpus.profiles()) {
        chunks.push_back(chunk_tokens(profile_tokens(p), opts.chunk_tokens));
        if (chunks.back().empty()) ++without_chunks;
    }
    const auto pos = profile_positions(corpus);

    EvaluationReport r;
    r.method = "thousand_words";
    r.task = std::string(to_string(task));
    r.config = base_config(folds, opts, task);
    r.config["chunk_tokens"] = opts.chunk_tokens;
    r.counts["profiles_without_chunks"] = without_chunks;
    if (without_chunks > 0)
        r.notes.push_back(std::to_string(without_chunks) + " profile(s) have fewer than " +
                          std::to_string(opts.chunk_tokens) + " tokens and contribute no textual instance");

    for (const auto& [k, name] : {std::pair{kBowSmall, "bow_2k"}, std::pair{kBowLarge, "bow_10k"}}) {
        std::vector<FoldOutcome> outcomes(folds.k);
        parallel_for(folds.k, opts.jobs, [&, k = k](std::size_t f) {
            const auto m = fold_members(corpus, folds, f);
            std::vector<Tokens> docs;
            std::vector<std::string> y;
            for (const auto* p : m.train) {
                for (const auto& c : chunks[pos.at(p)]) {
                    docs.push_back(c);
                    y.push_back(label_of(*p, task));
                }
            }
            const auto vocab = build_vocabulary(docs, k);
            std::vector<FeatureVector> X;
            for (const auto& d : docs) X.emplace_back(vectorize(d, vocab, opts.weighting));
            const auto clf = FoldClassifier::fit(X, y, labels_of(m.train, task), opts.svm);
            auto& out = outcomes[f];
            out.constant = clf.is_constant();
            for (const auto* p : m.test)
                for (const auto& c : chunks[pos.at(p)])
                    out.predictions.emplace_back(label_of(*p, task), clf.predict(vectorize(c, vocab, opts.weighting)));
            audit_profiles(opts, f, m, true);
        });
        EvaluationReport part;
        part.name = name;
        part.method = "chunks";
        part.task = r.task;
        part.unit = "chunk";
        part.config = r.config;
        part.config["vocabulary_size"] = k;
        collect(part, outcomes);
        r.parts.push_back(std::move(part));
    }

    for (SourceFilter s : {SourceFilter::all, SourceFilter::tweeted, SourceFilter::retweeted}) {
        const bool present =
            s == SourceFilter::all ? !corpus.images().empty()
                                   : corpus_has_source(corpus, s == SourceFilter::tweeted ? ImageSource::tweeted
                                                                                          : ImageSource::retweeted);
        EvaluationReport part;
        if (present) {
            part = run_per_image_eval(corpus, folds, store, task, opts, s, s);
        } else {
            part.method = "per_image";
            part.task = r.task;
            part.unit = "image";
            part.source = std::string(to_string(s));
            part.notes.push_back("corpus has no images from this source");
        }
        part.name = std::string(to_string(s));
        r.parts.push_back(std::move(part));
    }
    return r;
}

} // namespace viprof
