// SPDX-License-Identifier: Apache-2.0
#include "viprof/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include "viprof/error.hpp"
#include "viprof/random.hpp"

namespace viprof {

// ---------------------------------------------------------------------------
// Folds

std::size_t FoldPlan::fold_of(const std::string& profile_id) const {
    auto it = assignment.find(profile_id);
    if (it == assignment.end()) throw DataError("profile " + profile_id + " is not in the fold plan");
    return it->second;
}

std::vector<std::string> FoldPlan::members(std::size_t fold) const {
    std::vector<std::string> out;
    for (const auto& [id, f] : assignment)
        if (f == fold) out.push_back(id);
    return out;
}

FoldPlan make_folds(const Corpus& corpus, std::size_t k, Task task, std::uint64_t seed, bool allow_missing_class) {
    if (k < 2) throw UsageError("number of folds must be at least 2");
    if (corpus.empty()) throw DataError("cannot build folds for an empty corpus");
    if (k > corpus.profiles().size())
        throw DataError("k=" + std::to_string(k) + " exceeds the number of profiles (" +
                        std::to_string(corpus.profiles().size()) + ")");

    std::map<std::string, std::vector<std::string>> by_class;
    for (const auto& p : corpus.profiles()) by_class[label_of(p, task)].push_back(p.id);

    std::vector<std::string> short_classes;
    for (const auto& [label, ids] : by_class)
        if (ids.size() < k) short_classes.push_back(label + " (" + std::to_string(ids.size()) + " profiles)");
    if (!short_classes.empty() && !allow_missing_class) {
        std::string msg = "cannot place every class in each of " + std::to_string(k) + " folds; too few profiles in class";
        for (const auto& c : short_classes) msg += " " + c;
        throw DataError(msg);
    }

    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.task = task;
    plan.allow_missing_class = allow_missing_class;

    std::mt19937_64 rng(seed);
    std::size_t next = 0;
    for (auto& [label, ids] : by_class) {
        std::sort(ids.begin(), ids.end());  // independent of corpus order
        seeded_shuffle(ids, rng);
        std::vector<bool> present(k, false);
        for (const auto& id : ids) {
            plan.assignment[id] = next;
            present[next] = true;
            next = (next + 1) % k;
        }
        for (std::size_t f = 0; f < k; ++f)
            if (!present[f]) plan.missing_classes[f].push_back(label);
    }
    return plan;
}

void validate_plan(const FoldPlan& plan, const Corpus& corpus) {
    if (plan.k < 2) throw DataError("fold plan has k < 2");
    for (const auto& p : corpus.profiles()) {
        auto it = plan.assignment.find(p.id);
        if (it == plan.assignment.end()) throw DataError("fold plan does not assign profile " + p.id);
        if (it->second >= plan.k) throw DataError("fold index out of range for profile " + p.id);
    }
    for (const auto& [id, _] : plan.assignment)
        if (!corpus.find_profile(id)) throw DataError("fold plan assigns unknown profile " + id);
}

nlohmann::ordered_json folds_to_json(const FoldPlan& plan) {
    nlohmann::ordered_json j;
    j["k"] = plan.k;
    j["seed"] = plan.seed;
    j["task"] = to_string(plan.task);
    j["allow_missing_class"] = plan.allow_missing_class;
    auto& a = j["assignment"] = nlohmann::ordered_json::object();
    for (const auto& [id, f] : plan.assignment) a[id] = f;
    if (!plan.missing_classes.empty()) {
        auto& m = j["missing_classes"] = nlohmann::ordered_json::object();
        for (const auto& [f, classes] : plan.missing_classes) m[std::to_string(f)] = classes;
    }
    return j;
}

FoldPlan folds_from_json(const nlohmann::json& j) {
    try {
        FoldPlan plan;
        plan.k = j.at("k").get<std::size_t>();
        plan.seed = j.at("seed").get<std::uint64_t>();
        auto task = parse_task(j.at("task").get<std::string>());
        if (!task) throw DataError("unknown task in fold plan");
        plan.task = *task;
        plan.allow_missing_class = j.value("allow_missing_class", false);
        for (const auto& [id, f] : j.at("assignment").items()) plan.assignment[id] = f.get<std::size_t>();
        if (j.contains("missing_classes"))
            for (const auto& [f, classes] : j["missing_classes"].items())
                plan.missing_classes[std::stoul(f)] = classes.get<std::vector<std::string>>();
        return plan;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed fold plan: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Metrics

double accuracy(std::span<const std::pair<std::string, std::string>> predictions) {
    if (predictions.empty()) throw UsageError("accuracy of an empty prediction list");
    std::size_t hits = 0;
    for (const auto& [gold, pred] : predictions)
        if (gold == pred) ++hits;
    return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

std::map<std::string, double> class_probability_baseline(std::span<const std::string> labels) {
    if (labels.empty()) throw UsageError("class probabilities of an empty instance list");
    std::map<std::string, std::size_t> counts;
    for (const auto& l : labels) ++counts[l];
    std::map<std::string, double> out;
    for (const auto& [c, n] : counts) out[c] = static_cast<double>(n) / static_cast<double>(labels.size());
    return out;
}

void ClassBreakdown::add(const std::string& gold, const std::string& predicted) {
    ++support[gold];
    auto& hit = correct[gold];
    if (gold == predicted) ++hit;
}

std::size_t ClassBreakdown::total() const {
    std::size_t n = 0;
    for (const auto& [_, s] : support) n += s;
    return n;
}

std::size_t ClassBreakdown::total_correct() const {
    std::size_t n = 0;
    for (const auto& [_, s] : correct) n += s;
    return n;
}

double ClassBreakdown::overall() const {
    const std::size_t n = total();
    return n == 0 ? 0.0 : static_cast<double>(total_correct()) / static_cast<double>(n);
}

double ClassBreakdown::class_accuracy(const std::string& c) const {
    auto s = support.find(c);
    if (s == support.end() || s->second == 0) return 0.0;
    return static_cast<double>(correct.at(c)) / static_cast<double>(s->second);
}

std::map<std::string, double> ClassBreakdown::baseline() const {
    std::map<std::string, double> out;
    const std::size_t n = total();
    for (const auto& [c, s] : support) out[c] = static_cast<double>(s) / static_cast<double>(n);
    return out;
}

void EvaluationReport::finalize_mean() {
    if (fold_accuracies.empty()) {
        mean_accuracy = 0;
        return;
    }
    double s = 0;
    for (double a : fold_accuracies) s += a;
    mean_accuracy = s / static_cast<double>(fold_accuracies.size());
}

const EvaluationReport* EvaluationReport::part(const std::string& part_name) const {
    for (const auto& p : parts)
        if (p.name == part_name) return &p;
    return nullptr;
}

// ---------------------------------------------------------------------------
// Serialization

nlohmann::ordered_json report_to_json(const EvaluationReport& r) {
    nlohmann::ordered_json j;
    if (!r.name.empty()) j["name"] = r.name;
    j["method"] = r.method;
    j["task"] = r.task;
    j["source"] = r.source;
    j["unit"] = r.unit;
    j["fold_accuracies"] = r.fold_accuracies;
    j["mean_accuracy"] = r.mean_accuracy;
    if (!r.breakdown.empty()) {
        auto& classes = j["per_class"] = nlohmann::ordered_json::object();
        const auto base = r.breakdown.baseline();
        for (const auto& [c, s] : r.breakdown.support) {
            classes[c] = {{"support", s},
                          {"correct", r.breakdown.correct.at(c)},
                          {"accuracy", r.breakdown.class_accuracy(c)},
                          {"class_probability", base.at(c)}};
        }
        j["pooled_accuracy"] = r.breakdown.overall();
    }
    j["counts"] = r.counts;
    j["config"] = r.config;
    if (!r.notes.empty()) j["notes"] = r.notes;
    if (!r.parts.empty()) {
        auto& parts = j["parts"] = nlohmann::ordered_json::array();
        for (const auto& p : r.parts) parts.push_back(report_to_json(p));
    }
    return j;
}

EvaluationReport report_from_json(const nlohmann::ordered_json& j) {
    try {
        EvaluationReport r;
        r.name = j.value("name", std::string{});
        r.method = j.at("method").get<std::string>();
        r.task = j.at("task").get<std::string>();
        r.source = j.at("source").get<std::string>();
        r.unit = j.at("unit").get<std::string>();
        r.fold_accuracies = j.at("fold_accuracies").get<std::vector<double>>();
        r.mean_accuracy = j.at("mean_accuracy").get<double>();
        if (j.contains("per_class")) {
            for (const auto& [c, v] : j["per_class"].items()) {
                r.breakdown.support[c] = v.at("support").get<std::size_t>();
                r.breakdown.correct[c] = v.at("correct").get<std::size_t>();
            }
        }
        r.counts = j.at("counts").get<std::map<std::string, std::size_t>>();
        r.config = j.at("config");
        if (j.contains("notes")) r.notes = j["notes"].get<std::vector<std::string>>();
        if (j.contains("parts"))
            for (const auto& p : j["parts"]) r.parts.push_back(report_from_json(p));
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed report: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Markdown

namespace {

std::string fixed3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

std::string percent(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * v);
    return buf;
}

std::string method_title(const EvaluationReport& r) {
    const std::string src = r.source == "all" ? "all-imgs" : r.source;
    if (r.method == "t1") return "T1: BoW (2k)";
    if (r.method == "t2") return "T2: BoW (10k)";
    if (r.method == "v3") return "V3: LL-CNN (" + src + ")";
    if (r.method == "v4") return "V4: LL-CNN AVG (" + src + ")";
    if (r.method == "m3") return "M3: T1+V4";
    if (r.method == "m6") return "M6: T2+V4";
    return r.method;
}

void render_notes(std::ostringstream& md, const EvaluationReport& r) {
    if (!r.counts.empty()) {
        md << "\n";
        for (const auto& [k, v] : r.counts) md << "- " << k << ": " << v << "\n";
    }
    for (const auto& n : r.notes) md << "- note: " << n << "\n";
}

void render_class_rows(std::ostringstream& md, const EvaluationReport& r, const char* axis) {
    md << "| " << axis << " | accuracy [P*] |\n|---|---|\n";
    const auto base = r.breakdown.baseline();
    for (const auto& [c, _] : r.breakdown.support)
        md << "| " << c << " | " << fixed3(r.breakdown.class_accuracy(c)) << " [" << fixed3(base.at(c)) << "] |\n";
    md << "| *accuracy* | " << fixed3(r.breakdown.overall()) << " |\n";
    md << "\n*Class probability.\n";
}

std::string render_method(const EvaluationReport& r) {
    std::ostringstream md;
    md << "## " << method_title(r) << " (" << r.task << ")\n\n";
    md << "| methods | " << r.task << " |\n|---|---|\n";
    md << "| " << method_title(r) << " | " << fixed3(r.mean_accuracy) << " |\n";
    md << "\nPer-fold accuracy:";
    for (double a : r.fold_accuracies) md << " " << fixed3(a);
    md << "\n";
    if (const auto* img = r.part("image_level")) {
        md << "\nImage-level accuracy: " << fixed3(img->mean_accuracy) << " (pooled " << fixed3(img->breakdown.overall())
           << ")\n";
    }
    if (!r.breakdown.empty()) {
        md << "\n";
        render_class_rows(md, r, r.task == "age" ? "ages" : "gender");
    }
    render_notes(md, r);
    return md.str();
}

std::string render_per_image(const EvaluationReport& r) {
    std::ostringstream md;
    md << "## Per-image accuracy (" << r.task << ", train " << r.config.value("train_source", std::string("all"))
       << " / test " << r.config.value("test_source", std::string("all")) << ")\n\n";
    render_class_rows(md, r, r.task == "age" ? "ages" : "gender");
    md << "\nMean of per-fold accuracies: " << fixed3(r.mean_accuracy) << "\n";
    render_notes(md, r);
    return md.str();
}

std::string render_scenarios(const EvaluationReport& r) {
    static const char* variants[] = {"a", "b", "c"};
    static const char* sources[] = {"tweets", "retweets"};
    std::ostringstream md;
    md << "## Accuracy considering origin of the images\n\n";
    md << "| | (a) testing all-imgs / [training with] | | (b) [testing with] / training all-imgs | | "
          "(c) [testing/training] with | |\n";
    md << "|---|---|---|---|---|---|---|\n";
    md << "| *evaluating* |";
    for (int v = 0; v < 3; ++v)
        for (const char* s : sources) md << " *" << s << "* |";
    md << "\n| " << r.task << " |";
    for (const char* v : variants) {
        for (const char* s : sources) {
            const auto* p = r.part(std::string(v) + "/" + s);
            md << " " << (p ? fixed3(p->breakdown.overall()) : std::string("-")) << " |";
        }
    }
    md << "\n";
    for (const auto& p : r.parts) {
        if (!p.notes.empty())
            for (const auto& n : p.notes) md << "- " << p.name << ": " << n << "\n";
    }
    render_notes(md, r);
    return md.str();
}

std::string render_thousand_words(const EvaluationReport& r) {
    static const std::pair<const char*, const char*> columns[] = {
        {"bow_2k", "BoW (2k)"}, {"bow_10k", "BoW (10k)"}, {"all", "all-images"}, {"tweets", "tweets"},
        {"retweets", "retweets"}};
    std::set<std::string> classes;
    for (const auto& p : r.parts)
        for (const auto& [c, _] : p.breakdown.support) classes.insert(c);

    std::ostringstream md;
    md << "## A picture versus a thousand words (" << r.task << ")\n\n";
    md << "| | Textual | | Visual | | |\n|---|---|---|---|---|---|\n";
    md << "| *" << (r.task == "age" ? "ages" : "gender") << "* |";
    for (const auto& [_, title] : columns) md << " *" << title << "* |";
    md << "\n";
    for (const auto& c : classes) {
        md << "| " << c << " |";
        for (const auto& [key, _] : columns) {
            const auto* p = r.part(key);
            const bool has = p && p->breakdown.support.count(c) && p->breakdown.support.at(c) > 0;
            md << " " << (has ? percent(p->breakdown.class_accuracy(c)) : std::string("-")) << " |";
        }
        md << "\n";
    }
    render_notes(md, r);
    for (const auto& p : r.parts) {
        if (p.counts.empty()) continue;
        md << "\n" << p.name << ":";
        for (const auto& [k, v] : p.counts) md << " " << k << "=" << v;
        md << "\n";
    }
    return md.str();
}

} // namespace

std::string render_report(const EvaluationReport& report, ReportFormat format) {
    if (format == ReportFormat::json) return report_to_json(report).dump(2) + "\n";
    if (report.method == "per_image" || report.method == "scenario_single") return render_per_image(report);
    if (report.method == "scenario") return render_scenarios(report);
    if (report.method == "thousand_words") return render_thousand_words(report);
    return render_method(report);
}

} // namespace viprof
