// SPDX-License-Identifier: Apache-2.0
//
// viprof: command-line driver for corpus ingestion, feature extraction,
// training, cross-validated evaluation and image-category analysis.
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "viprof/corpus.hpp"
#include "viprof/error.hpp"
#include "viprof/evaluation.hpp"
#include "viprof/extract.hpp"
#include "viprof/io.hpp"
#include "viprof/linear_svm.hpp"
#include "viprof/parallel.hpp"
#include "viprof/pipelines.hpp"
#include "viprof/qualitative.hpp"
#include "viprof/synthetic.hpp"
#include "viprof/text_features.hpp"
#include "viprof/visual_features.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace viprof;

namespace {

// ---------------------------------------------------------------------------
// Loading helpers. Every failure names the offending path.

nlohmann::json read_json(const fs::path& path) {
    try {
        return nlohmann::json::parse(io::read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

template <class Fn>
auto with_origin(const fs::path& path, Fn&& fn) {
    try {
        return fn();
    } catch (const DataError& e) {
        const std::string what = e.what();
        if (what.find(path.string()) != std::string::npos) throw;
        throw DataError(path.string() + ": " + what);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

/// A corpus snapshot (JSON) or a corpus directory in the ingest layout.
Corpus load_any_corpus(const fs::path& path, Language lang) {
    if (fs::is_directory(path)) return load_corpus(path, lang);
    const auto j = read_json(path);
    return with_origin(path, [&] { return corpus_from_json(j); });
}

FoldPlan load_folds(const fs::path& path) {
    const auto j = read_json(path);
    return with_origin(path, [&] { return folds_from_json(j); });
}

template <class Enum, class Parse>
Enum parse_or_usage(const std::string& token, Parse parse, const char* what) {
    auto v = parse(token);
    if (!v) throw UsageError(std::string("unknown ") + what + " '" + token + "'");
    return *v;
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

/// Writes `content` to `out` atomically, or to standard output when `out` is empty.
void emit(const std::string& out, const std::string& content) {
    if (out.empty() || out == "-") {
        std::cout << content;
        return;
    }
    io::write_file_atomic(out, content);
}

/// Every run leaves its effective configuration next to its outputs.
void write_snapshot(const fs::path& where, const std::string& subcommand, const ordered_json& options) {
    ordered_json j;
    j["subcommand"] = subcommand;
    j["options"] = options;
    io::write_file_atomic(where, dump(j));
}

fs::path snapshot_beside(const std::string& out) { return fs::path(out + ".config.json"); }

// ---------------------------------------------------------------------------
// Feature files: one JSON object per line, either
//   {"profile_id": ..., "dimension": d, "entries": [[idx, val], ...]}  (sparse)
//   {"profile_id": ..., "values": [...]}                                (dense)

std::string sparse_line(const std::string& id, const SparseVector& v) {
    ordered_json j;
    j["profile_id"] = id;
    j["dimension"] = v.dimension();
    auto entries = ordered_json::array();
    for (const auto& [i, x] : v.entries()) entries.push_back({i, x});
    j["entries"] = std::move(entries);
    return j.dump() + "\n";
}

std::string dense_line(const Prototype& p) {
    ordered_json j;
    j["profile_id"] = p.profile_id;
    j["source"] = to_string(p.source_filter);
    j["image_count"] = p.image_count;
    j["missing"] = p.missing;
    j["degenerate"] = p.degenerate();
    j["values"] = p.values;
    return j.dump() + "\n";
}

struct FeatureRow {
    std::string profile_id;
    FeatureVector x;
};

std::vector<FeatureRow> load_features(const fs::path& path) {
    std::vector<FeatureRow> rows;
    const auto text = io::read_text_file(path);
    std::size_t line_no = 0;
    for (auto line : io::split_lines(text)) {
        ++line_no;
        if (io::trim(line).empty()) continue;
        const std::string where = path.string() + ":" + std::to_string(line_no);
        try {
            const auto j = nlohmann::json::parse(line);
            FeatureRow row;
            row.profile_id = j.at("profile_id").get<std::string>();
            if (j.contains("entries")) {
                std::vector<SparseVector::Entry> entries;
                for (const auto& e : j.at("entries"))
                    entries.emplace_back(e.at(0).get<std::uint32_t>(), e.at(1).get<double>());
                row.x = SparseVector(j.at("dimension").get<std::size_t>(), std::move(entries));
            } else {
                row.x = j.at("values").get<DenseVector>();
            }
            rows.push_back(std::move(row));
        } catch (const nlohmann::json::exception& e) {
            throw DataError("malformed feature record at " + where + ": " + e.what());
        } catch (const std::invalid_argument& e) {
            throw DataError("invalid feature record at " + where + ": " + e.what());
        }
    }
    return rows;
}

/// Labels from truth.txt, a corpus snapshot or a corpus directory.
std::map<std::string, std::string> load_labels(const fs::path& path, Task task, Language lang) {
    std::map<std::string, std::string> labels;
    if (fs::is_directory(path) || path.extension() == ".json") {
        const auto corpus = load_any_corpus(path, lang);
        for (const auto& p : corpus.profiles()) labels[p.id] = label_of(p, task);
        return labels;
    }
    const auto truth = with_origin(path, [&] { return parse_truth_file(io::read_text_file(path)); });
    for (const auto& r : truth)
        labels[r.profile_id] = task == Task::age ? std::string(to_string(r.age)) : std::string(to_string(r.gender));
    return labels;
}

// ---------------------------------------------------------------------------
// Option groups shared by the evaluation subcommands.

struct SvmFlags {
    double C = 1.0;
    double tolerance = 1e-3;
    std::size_t max_iter = 1000;
    std::uint64_t seed = 42;
    bool no_bias = false;

    void add_to(CLI::App* app) {
        app->add_option("--C", C, "SVM cost parameter")->capture_default_str();
        app->add_option("--tolerance", tolerance, "stopping tolerance on the projected gradient")->capture_default_str();
        app->add_option("--max-iter", max_iter, "maximum outer iterations")->capture_default_str();
        app->add_option("--svm-seed", seed, "seed of the coordinate permutation")->capture_default_str();
        app->add_flag("--no-bias", no_bias, "train without the bias feature");
    }
    TrainConfig config() const {
        TrainConfig c;
        c.C = C;
        c.tolerance = tolerance;
        c.max_outer_iters = max_iter;
        c.seed = seed;
        c.bias = !no_bias;
        c.validate();
        return c;
    }
    ordered_json json() const { return config_to_json(config()); }
};

struct EvalFlags {
    std::string corpus, embeddings, folds, out, task = "gender", lang = "en", format = "json";
    std::string weighting = "counts", block_norm = "none";
    bool shared_folds = false;
    SvmFlags svm;

    void add_to(CLI::App* app, bool need_embeddings) {
        app->add_option("--corpus", corpus, "corpus snapshot or directory")->required();
        auto* e = app->add_option("--embeddings", embeddings, "embedding JSON-lines file");
        if (need_embeddings) e->required();
        app->add_option("--folds", folds, "fold plan from 'viprof folds'")->required();
        app->add_flag("--shared-folds", shared_folds, "accept a plan stratified for the other task");
        app->add_option("--task", task, "age or gender")->capture_default_str();
        app->add_option("--lang", lang, "corpus language when --corpus is a directory")->capture_default_str();
        app->add_option("--out", out, "report path (standard output when omitted)");
        app->add_option("--format", format, "json or markdown")->check(CLI::IsMember({"json", "markdown"}))->capture_default_str();
        app->add_option("--weighting", weighting, "counts or binary")->check(CLI::IsMember({"counts", "binary"}))->capture_default_str();
        app->add_option("--block-norm", block_norm, "none or l2")->check(CLI::IsMember({"none", "l2"}))->capture_default_str();
        svm.add_to(app);
    }

    Task parsed_task() const { return parse_or_usage<Task>(task, parse_task, "task"); }
    Language parsed_lang() const { return parse_or_usage<Language>(lang, parse_language, "language"); }

    FoldPlan plan() const {
        auto p = load_folds(folds);
        if (p.task != parsed_task() && !shared_folds)
            throw UsageError(folds + " is stratified by " + std::string(to_string(p.task)) + "; pass --shared-folds to evaluate " +
                             task + " with it");
        return p;
    }

    PipelineOptions options(unsigned jobs) const {
        PipelineOptions o;
        o.svm = svm.config();
        o.jobs = jobs;
        o.weighting = weighting == "binary" ? TermWeighting::binary : TermWeighting::counts;
        o.block_norm = block_norm == "l2" ? BlockNormalization::l2 : BlockNormalization::none;
        return o;
    }

    ordered_json json() const {
        return {{"corpus", corpus},     {"embeddings", embeddings}, {"folds", folds},
                {"task", task},         {"lang", lang},             {"out", out},
                {"format", format},     {"weighting", weighting},   {"block_norm", block_norm},
                {"shared_folds", shared_folds}, {"svm", svm.json()}};
    }
};

void write_report(const EvaluationReport& r, const EvalFlags& f, const std::string& subcommand, ordered_json options) {
    const auto format = f.format == "markdown" ? ReportFormat::markdown : ReportFormat::json;
    emit(f.out, render_report(r, format));
    if (!f.out.empty() && f.out != "-") write_snapshot(snapshot_beside(f.out), subcommand, options);
    for (const auto& note : r.notes) std::cerr << "note: " << note << "\n";
}

unsigned default_jobs() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : n;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"viprof: age and gender profiling from posted text and images"};
    app.require_subcommand(1);
    unsigned jobs = default_jobs();
    app.add_option("--jobs,-j", jobs, "worker threads for independent folds and groups")
        ->envname("VIPROF_JOBS")
        ->check(CLI::PositiveNumber);

    // ingest ----------------------------------------------------------------
    auto* ingest = app.add_subcommand("ingest", "load a corpus directory into a JSON snapshot");
    std::string ingest_root, ingest_lang = "en", ingest_out;
    ingest->add_option("--root", ingest_root, "directory with truth.txt, <id>.xml and images.csv")->required();
    ingest->add_option("--lang", ingest_lang, "en or sp")->capture_default_str();
    ingest->add_option("--out", ingest_out, "corpus snapshot")->required();

    // stats -----------------------------------------------------------------
    auto* stats = app.add_subcommand("stats", "descriptive image statistics");
    std::string stats_corpus, stats_format = "json", stats_out, stats_lang = "en";
    stats->add_option("--corpus", stats_corpus, "corpus snapshot or directory")->required();
    stats->add_option("--lang", stats_lang, "corpus language when --corpus is a directory")->capture_default_str();
    stats->add_option("--format", stats_format, "json or markdown")->check(CLI::IsMember({"json", "markdown"}))->capture_default_str();
    stats->add_option("--out", stats_out, "output path (standard output when omitted)");

    // folds -----------------------------------------------------------------
    auto* folds = app.add_subcommand("folds", "subject-independent stratified fold plan");
    std::string folds_corpus, folds_task = "gender", folds_out, folds_lang = "en";
    std::size_t folds_k = 10;
    std::uint64_t folds_seed = 42;
    bool folds_allow_missing = false;
    folds->add_option("--corpus", folds_corpus, "corpus snapshot or directory")->required();
    folds->add_option("--lang", folds_lang, "corpus language when --corpus is a directory")->capture_default_str();
    folds->add_option("--k", folds_k, "number of folds")->capture_default_str();
    folds->add_option("--task", folds_task, "stratify by age or gender")->capture_default_str();
    folds->add_option("--seed", folds_seed, "shuffle seed")->capture_default_str();
    folds->add_flag("--allow-missing-class", folds_allow_missing, "record folds lacking a class instead of failing");
    folds->add_option("--out", folds_out, "fold plan JSON")->required();

    // featurize -------------------------------------------------------------
    auto* featurize = app.add_subcommand("featurize", "write text or visual feature files");
    featurize->require_subcommand(1);
    auto* feat_text = featurize->add_subcommand("text", "bag-of-words vectors, one vocabulary per fold");
    std::string ft_corpus, ft_folds, ft_out, ft_lang = "en", ft_weighting = "counts";
    std::size_t ft_k = kBowLarge;
    feat_text->add_option("--corpus", ft_corpus, "corpus snapshot or directory")->required();
    feat_text->add_option("--lang", ft_lang, "corpus language when --corpus is a directory")->capture_default_str();
    feat_text->add_option("--folds", ft_folds, "fold plan; without it one vocabulary covers every profile");
    feat_text->add_option("--k", ft_k, "vocabulary size")->capture_default_str();
    feat_text->add_option("--weighting", ft_weighting, "counts or binary")->check(CLI::IsMember({"counts", "binary"}))->capture_default_str();
    feat_text->add_option("--out", ft_out, "output directory")->required();

    auto* feat_visual = featurize->add_subcommand("visual", "per-profile image prototypes");
    std::string fv_corpus, fv_embeddings, fv_source = "all", fv_out, fv_lang = "en";
    feat_visual->add_option("--corpus", fv_corpus, "corpus snapshot or directory")->required();
    feat_visual->add_option("--lang", fv_lang, "corpus language when --corpus is a directory")->capture_default_str();
    feat_visual->add_option("--embeddings", fv_embeddings, "embedding JSON-lines file")->required();
    feat_visual->add_option("--source", fv_source, "all, tweets or retweets")->capture_default_str();
    feat_visual->add_option("--out", fv_out, "prototype JSON-lines file")->required();

    // train -----------------------------------------------------------------
    auto* train = app.add_subcommand("train", "train a one-vs-rest linear SVM on a feature file");
    std::string tr_features, tr_labels, tr_task = "gender", tr_out, tr_lang = "en";
    SvmFlags tr_svm;
    train->add_option("--features", tr_features, "feature JSON-lines file")->required();
    train->add_option("--labels", tr_labels, "truth.txt, corpus snapshot or corpus directory")->required();
    train->add_option("--task", tr_task, "age or gender")->capture_default_str();
    train->add_option("--lang", tr_lang, "corpus language when --labels is a directory")->capture_default_str();
    train->add_option("--out", tr_out, "model JSON")->required();
    tr_svm.add_to(train);

    // eval ------------------------------------------------------------------
    auto* eval = app.add_subcommand("eval", "cross-validated profile-level evaluation of one method");
    EvalFlags ev;
    std::string ev_method, ev_source = "all";
    eval->add_option("--method", ev_method, "t1, t2, v3, v4, m3 or m6")->required();
    eval->add_option("--source", ev_source, "image source for v3/v4: all, tweets or retweets")->capture_default_str();
    ev.add_to(eval, false);

    auto* scen = app.add_subcommand("eval-scenarios", "per-image evaluation across image-source scenarios");
    EvalFlags sc;
    std::string sc_variant;
    scen->add_option("--variant", sc_variant, "a, b or c (all three when omitted)")->check(CLI::IsMember({"a", "b", "c"}));
    sc.add_to(scen, true);

    auto* per_image = app.add_subcommand("eval-per-image", "every image is a test instance");
    EvalFlags pi;
    std::string pi_train = "all", pi_test = "all";
    per_image->add_option("--train-source", pi_train, "all, tweets or retweets")->capture_default_str();
    per_image->add_option("--test-source", pi_test, "all, tweets or retweets")->capture_default_str();
    pi.add_to(per_image, true);

    auto* words = app.add_subcommand("eval-thousand-words", "1000-token text chunks against single images");
    EvalFlags tw;
    std::size_t tw_chunk = 1000;
    words->add_option("--chunk", tw_chunk, "tokens per text chunk")->capture_default_str();
    tw.add_to(words, true);

    // analyze ---------------------------------------------------------------
    auto* analyze = app.add_subcommand("analyze", "image-category histograms and difference lists");
    std::string an_corpus, an_embeddings, an_group = "gender", an_lang = "en", an_out, an_names;
    std::size_t an_top = 20;
    analyze->add_option("--corpus", an_corpus, "corpus snapshot or directory")->required();
    analyze->add_option("--embeddings", an_embeddings, "embedding JSON-lines file with softmax1000 records")->required();
    analyze->add_option("--group-by", an_group, "gender or age")->check(CLI::IsMember({"gender", "age"}))->capture_default_str();
    analyze->add_option("--lang", an_lang, "language of the profiles to analyse")->capture_default_str();
    analyze->add_option("--top", an_top, "difference list length (even)")->capture_default_str();
    analyze->add_option("--names", an_names, "replacement category name table, one name per line");
    analyze->add_option("--out", an_out, "output directory")->required();

    // synth -----------------------------------------------------------------
    auto* synth = app.add_subcommand("synth", "generate a synthetic corpus with planted class signal");
    SynthSpec sp;
    std::string sy_out, sy_spec, sy_lang = "en";
    bool sy_no_softmax = false;
    synth->add_option("--spec", sy_spec, "JSON spec; explicit flags override its fields");
    synth->add_option("--out", sy_out, "output directory")->required();
    auto* o_profiles = synth->add_option("--profiles", sp.profiles, "number of profiles")->capture_default_str();
    auto* o_lang = synth->add_option("--lang", sy_lang, "en or sp")->capture_default_str();
    auto* o_genders = synth->add_option("--gender-classes", sp.gender_classes, "1 or 2")->capture_default_str();
    auto* o_ages = synth->add_option("--age-classes", sp.age_classes, "1 to 5")->capture_default_str();
    auto* o_imin = synth->add_option("--images-min", sp.images_min, "fewest images per profile")->capture_default_str();
    auto* o_imax = synth->add_option("--images-max", sp.images_max, "most images per profile")->capture_default_str();
    auto* o_rt = synth->add_option("--retweet-fraction", sp.retweet_fraction, "share of retweeted images")->capture_default_str();
    auto* o_sep = synth->add_option("--separation", sp.separation, "distance between class means")->capture_default_str();
    auto* o_spread = synth->add_option("--spread", sp.spread, "per-dimension noise deviation")->capture_default_str();
    auto* o_text = synth->add_option("--text-signal", sp.text_signal, "share of class-specific tokens")->capture_default_str();
    auto* o_tweets = synth->add_option("--tweets", sp.tweets, "tweets per profile")->capture_default_str();
    auto* o_tokens = synth->add_option("--tokens-per-tweet", sp.tokens_per_tweet, "tokens per tweet")->capture_default_str();
    auto* o_seed = synth->add_option("--seed", sp.seed, "generator seed")->capture_default_str();
    synth->add_flag("--no-softmax", sy_no_softmax, "omit softmax1000 records");

    // extract ---------------------------------------------------------------
    auto* extract = app.add_subcommand("extract", "run a pre-trained CNN over the images of a manifest");
    std::string ex_model, ex_config, ex_manifest, ex_out;
    ExtractOptions ex_opts;
    extract->add_option("--model", ex_model, "network file readable by OpenCV dnn (ONNX, Caffe, ...)")->required();
    extract->add_option("--config", ex_config, "second network file when the format needs one");
    extract->add_option("--manifest", ex_manifest, "images.csv; paths are relative to its directory")->required();
    extract->add_option("--out", ex_out, "embedding JSON-lines file")->required();
    extract->add_option("--hidden-layer", ex_opts.hidden_layer, "name of the 4096-wide layer")->capture_default_str();
    extract->add_option("--scores-layer", ex_opts.scores_layer, "name of the 1000-way output")->capture_default_str();

    // Parse errors print the failing command's usage after the message.
    app.failure_message(CLI::FailureMessage::help);
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*ingest) {
            const auto lang = parse_or_usage<Language>(ingest_lang, parse_language, "language");
            LoadSummary summary;
            const auto corpus = load_corpus(ingest_root, lang, &summary);
            emit(ingest_out, dump(corpus_to_json(corpus)));
            write_snapshot(snapshot_beside(ingest_out), "ingest",
                           {{"root", ingest_root}, {"lang", ingest_lang}, {"out", ingest_out}});
            std::cerr << "loaded " << summary.profiles << " profiles, " << summary.images << " images";
            if (summary.profiles_without_images > 0)
                std::cerr << "; " << summary.profiles_without_images << " profile(s) without images";
            std::cerr << "\n";
        } else if (*stats) {
            const auto corpus =
                load_any_corpus(stats_corpus, parse_or_usage<Language>(stats_lang, parse_language, "language"));
            const auto report = corpus_stats(corpus);
            emit(stats_out, stats_format == "markdown" ? stats_to_markdown(report) : dump(stats_to_json(report)));
            if (!stats_out.empty() && stats_out != "-")
                write_snapshot(snapshot_beside(stats_out), "stats",
                               {{"corpus", stats_corpus}, {"format", stats_format}, {"out", stats_out}});
        } else if (*folds) {
            const auto corpus =
                load_any_corpus(folds_corpus, parse_or_usage<Language>(folds_lang, parse_language, "language"));
            const auto task = parse_or_usage<Task>(folds_task, parse_task, "task");
            const auto plan = make_folds(corpus, folds_k, task, folds_seed, folds_allow_missing);
            emit(folds_out, dump(folds_to_json(plan)));
            write_snapshot(snapshot_beside(folds_out), "folds",
                           {{"corpus", folds_corpus},
                            {"k", folds_k},
                            {"task", folds_task},
                            {"seed", folds_seed},
                            {"allow_missing_class", folds_allow_missing},
                            {"out", folds_out}});
            for (const auto& [fold, classes] : plan.missing_classes)
                for (const auto& c : classes) std::cerr << "warning: fold " << fold << " has no '" << c << "' profile\n";
        } else if (*feat_text) {
            const auto corpus = load_any_corpus(ft_corpus, parse_or_usage<Language>(ft_lang, parse_language, "language"));
            const auto weighting = ft_weighting == "binary" ? TermWeighting::binary : TermWeighting::counts;
            std::vector<Tokens> tokens;
            for (const auto& p : corpus.profiles()) tokens.push_back(profile_tokens(p));
            auto write_space = [&](const std::string& suffix, const std::vector<Tokens>& docs) {
                const auto vocab = build_vocabulary(docs, ft_k);
                io::write_file_atomic(fs::path(ft_out) / ("vocabulary" + suffix + ".json"),
                                      vocabulary_to_json(vocab).dump(2) + "\n");
                std::string lines;
                for (std::size_t i = 0; i < corpus.profiles().size(); ++i)
                    lines += sparse_line(corpus.profiles()[i].id, vectorize(tokens[i], vocab, weighting));
                io::write_file_atomic(fs::path(ft_out) / ("features" + suffix + ".jsonl"), lines);
            };
            if (ft_folds.empty()) {
                write_space("", tokens);
            } else {
                const auto plan = load_folds(ft_folds);
                validate_plan(plan, corpus);
                for (std::size_t f = 0; f < plan.k; ++f) {
                    // Only training profiles of fold f contribute to its vocabulary.
                    std::vector<Tokens> docs;
                    for (std::size_t i = 0; i < corpus.profiles().size(); ++i)
                        if (plan.fold_of(corpus.profiles()[i].id) != f) docs.push_back(tokens[i]);
                    write_space("_fold" + std::to_string(f), docs);
                }
            }
            write_snapshot(fs::path(ft_out) / "run_config.json", "featurize text",
                           {{"corpus", ft_corpus}, {"folds", ft_folds}, {"k", ft_k}, {"weighting", ft_weighting}});
        } else if (*feat_visual) {
            const auto corpus = load_any_corpus(fv_corpus, parse_or_usage<Language>(fv_lang, parse_language, "language"));
            const auto store = load_embeddings(fv_embeddings);
            const auto source = parse_or_usage<SourceFilter>(fv_source, parse_source_filter, "source");
            std::string lines;
            std::size_t degenerate = 0;
            for (const auto& p : corpus.profiles()) {
                const auto proto = build_prototype(corpus, p, store, source);
                if (proto.degenerate()) ++degenerate;
                lines += dense_line(proto);
            }
            emit(fv_out, lines);
            write_snapshot(snapshot_beside(fv_out), "featurize visual",
                           {{"corpus", fv_corpus}, {"embeddings", fv_embeddings}, {"source", fv_source}});
            if (degenerate > 0)
                std::cerr << "warning: " << degenerate << " profile(s) have no usable image; zero prototypes written\n";
        } else if (*train) {
            const auto task = parse_or_usage<Task>(tr_task, parse_task, "task");
            const auto labels =
                load_labels(tr_labels, task, parse_or_usage<Language>(tr_lang, parse_language, "language"));
            const auto rows = load_features(tr_features);
            std::vector<FeatureVector> X;
            std::vector<std::string> y;
            for (const auto& r : rows) {
                auto it = labels.find(r.profile_id);
                if (it == labels.end())
                    throw DataError("profile " + r.profile_id + " in " + tr_features + " has no label in " + tr_labels);
                X.push_back(r.x);
                y.push_back(it->second);
            }
            if (X.empty()) throw DataError(tr_features + " contains no feature record");
            const auto model = train_multiclass(X, y, tr_svm.config(), jobs);
            emit(tr_out, dump(model_to_json(model)));
            write_snapshot(snapshot_beside(tr_out), "train",
                           {{"features", tr_features}, {"labels", tr_labels}, {"task", tr_task}, {"svm", tr_svm.json()}});
            for (std::size_t c = 0; c < model.classes.size(); ++c)
                if (!model.per_class[c].converged)
                    std::cerr << "warning: class " << model.classes[c] << " stopped after "
                              << model.per_class[c].iterations << " iterations without converging\n";
        } else if (*eval) {
            const auto kind = parse_method(ev_method);
            if (!kind) throw UsageError("unknown method '" + ev_method + "'");
            const bool textual = *kind == MethodKind::textual_2k || *kind == MethodKind::textual_10k;
            const auto corpus = load_any_corpus(ev.corpus, ev.parsed_lang());
            const auto plan = ev.plan();
            std::optional<EmbeddingStore> store;
            if (!textual) {
                if (ev.embeddings.empty()) throw UsageError("method " + ev_method + " needs --embeddings");
                store = load_embeddings(ev.embeddings);
            }
            MethodSpec spec{*kind, parse_or_usage<SourceFilter>(ev_source, parse_source_filter, "source"),
                            ev.parsed_task()};
            const auto report = run_method(corpus, plan, store ? &*store : nullptr, spec, ev.options(jobs));
            auto opts = ev.json();
            opts["method"] = ev_method;
            opts["source"] = ev_source;
            write_report(report, ev, "eval", opts);
        } else if (*scen) {
            const auto corpus = load_any_corpus(sc.corpus, sc.parsed_lang());
            const auto plan = sc.plan();
            const auto store = load_embeddings(sc.embeddings);
            std::optional<char> variant;
            if (!sc_variant.empty()) variant = sc_variant[0];
            const auto report = run_all_scenarios(corpus, plan, store, sc.parsed_task(), sc.options(jobs), variant);
            auto opts = sc.json();
            opts["variant"] = sc_variant;
            write_report(report, sc, "eval-scenarios", opts);
        } else if (*per_image) {
            const auto corpus = load_any_corpus(pi.corpus, pi.parsed_lang());
            const auto plan = pi.plan();
            const auto store = load_embeddings(pi.embeddings);
            const auto report = run_per_image_eval(
                corpus, plan, store, pi.parsed_task(), pi.options(jobs),
                parse_or_usage<SourceFilter>(pi_train, parse_source_filter, "source"),
                parse_or_usage<SourceFilter>(pi_test, parse_source_filter, "source"));
            auto opts = pi.json();
            opts["train_source"] = pi_train;
            opts["test_source"] = pi_test;
            write_report(report, pi, "eval-per-image", opts);
        } else if (*words) {
            const auto corpus = load_any_corpus(tw.corpus, tw.parsed_lang());
            const auto plan = tw.plan();
            const auto store = load_embeddings(tw.embeddings);
            auto o = tw.options(jobs);
            o.chunk_tokens = tw_chunk;
            const auto report = run_thousand_words(corpus, plan, store, tw.parsed_task(), o);
            auto opts = tw.json();
            opts["chunk"] = tw_chunk;
            write_report(report, tw, "eval-thousand-words", opts);
        } else if (*analyze) {
            const auto lang = parse_or_usage<Language>(an_lang, parse_language, "language");
            const auto corpus = load_any_corpus(an_corpus, lang);
            const auto store = load_embeddings(an_embeddings);
            const CategoryNames names = an_names.empty() ? default_category_names() : load_category_names(an_names);
            auto in_lang = [lang](const GroupSelector& s) {
                return GroupSelector::where(s.description + " (" + std::string(to_string(lang)) + ")",
                                            [lang, pred = s.predicate](const Profile& p) {
                                                return p.language == lang && pred(p);
                                            });
            };

            // Gender: female against male. Age: every range against the other four.
            std::vector<std::pair<GroupSelector, GroupSelector>> pairs;
            if (an_group == "gender") {
                pairs.emplace_back(in_lang(GroupSelector::gender(Gender::female)),
                                   in_lang(GroupSelector::gender(Gender::male)));
            } else {
                for (AgeRange a : kAllAgeRanges) {
                    pairs.emplace_back(in_lang(GroupSelector::age(a)),
                                       in_lang(GroupSelector::where("not " + std::string(to_string(a)),
                                                                    [a](const Profile& p) { return p.age != a; })));
                }
            }

            std::vector<GroupSelector> selectors;
            for (const auto& [a, b] : pairs) {
                selectors.push_back(a);
                selectors.push_back(b);
            }
            std::vector<std::optional<CategoryHistogram>> hists(selectors.size());
            std::vector<std::string> skipped(selectors.size());
            parallel_for(selectors.size(), jobs, [&](std::size_t i) {
                try {
                    hists[i] = group_histogram(corpus, store, selectors[i]);
                } catch (const DataError& e) {
                    skipped[i] = e.what();
                }
            });

            auto hist_json = ordered_json::array();
            auto diff_json = ordered_json::array();
            std::string md;
            for (std::size_t i = 0; i < selectors.size(); ++i) {
                if (!hists[i]) continue;
                hist_json.push_back(histogram_to_json(*hists[i], names));
            }
            std::size_t produced = 0;
            for (std::size_t p = 0; p < pairs.size(); ++p) {
                const auto& ha = hists[2 * p];
                const auto& hb = hists[2 * p + 1];
                if (!ha || !hb) {
                    std::cerr << "warning: " << (ha ? skipped[2 * p + 1] : skipped[2 * p]) << "\n";
                    continue;
                }
                ++produced;
                const auto diff = difference_list(*ha, *hb, an_top);
                diff_json.push_back(difference_list_to_json(diff, names));
                md += "## " + diff.group_a + " vs " + diff.group_b + "\n\n" + difference_list_to_markdown(diff, names) + "\n";
                for (const auto& w : diff.warnings) std::cerr << "warning: " << w << "\n";
            }
            if (produced == 0) throw DataError("no group with softmax1000 scores in " + an_embeddings);

            const fs::path out(an_out);
            io::write_file_atomic(out / "histograms.json", dump(hist_json));
            io::write_file_atomic(out / "differences.json", dump(diff_json));
            io::write_file_atomic(out / "differences.md", md);
            for (std::size_t i = 0; i < selectors.size(); ++i) {
                if (!hists[i]) continue;
                // "female (en)" -> cloud_female_en.csv
                std::string stem;
                for (char ch : hists[i]->group) {
                    const bool keep = std::isalnum(static_cast<unsigned char>(ch)) || ch == '-';
                    if (keep) stem += ch;
                    else if (!stem.empty() && stem.back() != '_') stem += '_';
                }
                while (!stem.empty() && stem.back() == '_') stem.pop_back();
                io::write_file_atomic(out / ("cloud_" + stem + ".csv"), export_cloud(*hists[i], names));
            }
            write_snapshot(out / "run_config.json", "analyze",
                           {{"corpus", an_corpus},
                            {"embeddings", an_embeddings},
                            {"group_by", an_group},
                            {"lang", an_lang},
                            {"top", an_top},
                            {"names", an_names}});
        } else if (*synth) {
            SynthSpec spec;
            if (!sy_spec.empty()) {
                const auto j = read_json(sy_spec);
                spec = synth_spec_from_json(j);
            }
            // Flags given on the command line take precedence over the spec file.
            if (o_profiles->count() || sy_spec.empty()) spec.profiles = sp.profiles;
            if (o_lang->count()) spec.language = parse_or_usage<Language>(sy_lang, parse_language, "language");
            if (o_genders->count() || sy_spec.empty()) spec.gender_classes = sp.gender_classes;
            if (o_ages->count() || sy_spec.empty()) spec.age_classes = sp.age_classes;
            if (o_imin->count() || sy_spec.empty()) spec.images_min = sp.images_min;
            if (o_imax->count() || sy_spec.empty()) spec.images_max = sp.images_max;
            if (o_rt->count() || sy_spec.empty()) spec.retweet_fraction = sp.retweet_fraction;
            if (o_sep->count() || sy_spec.empty()) spec.separation = sp.separation;
            if (o_spread->count() || sy_spec.empty()) spec.spread = sp.spread;
            if (o_text->count() || sy_spec.empty()) spec.text_signal = sp.text_signal;
            if (o_tweets->count() || sy_spec.empty()) spec.tweets = sp.tweets;
            if (o_tokens->count() || sy_spec.empty()) spec.tokens_per_tweet = sp.tokens_per_tweet;
            if (o_seed->count() || sy_spec.empty()) spec.seed = sp.seed;
            if (sy_no_softmax) spec.softmax = false;

            const auto data = generate_synthetic(spec);
            write_synthetic(data, sy_out);
            write_snapshot(fs::path(sy_out) / "run_config.json", "synth", synth_spec_to_json(spec));
        } else if (*extract) {
            if (!extraction_available())
                throw CapabilityUnavailable("extract needs a build with OpenCV dnn; this binary has none");
            const fs::path manifest(ex_manifest);
            const auto text = io::read_text_file(manifest);
            std::vector<ImageInput> inputs;
            std::size_t line_no = 0;
            for (auto line : io::split_lines(text)) {
                ++line_no;
                if (line_no == 1 || io::trim(line).empty()) continue;
                const auto fields = with_origin(manifest, [&] { return io::split_csv_record(line); });
                if (fields.size() < 4 || fields[3].empty())
                    throw DataError(manifest.string() + ":" + std::to_string(line_no) + ": image has no path");
                fs::path p(fields[3]);
                if (p.is_relative()) p = manifest.parent_path() / p;
                inputs.push_back({fields[0], p});
            }
            ex_opts.config = ex_config;
            const auto result = extract_embeddings(ex_model, inputs, ex_opts);
            std::string lines;
            for (const auto& v : result.vectors) lines += embedding_to_jsonl(v);
            emit(ex_out, lines);
            std::string failures;
            for (const auto& f : result.failures) {
                failures += ordered_json{{"image_id", f.image_id}, {"path", f.path}, {"error", f.message}}.dump() + "\n";
                std::cerr << "warning: " << f.image_id << " (" << f.path << "): " << f.message << "\n";
            }
            if (!result.failures.empty()) io::write_file_atomic(ex_out + ".errors.jsonl", failures);
            write_snapshot(snapshot_beside(ex_out), "extract",
                           {{"model", ex_model},
                            {"config", ex_config},
                            {"manifest", ex_manifest},
                            {"hidden_layer", ex_opts.hidden_layer},
                            {"scores_layer", ex_opts.scores_layer}});
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const CapabilityUnavailable& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
