// SPDX-License-Identifier: Apache-2.0
#include "viprof/qualitative.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>

#include "viprof/error.hpp"
#include "viprof/io.hpp"
#include "viprof/parallel.hpp"

namespace viprof {

// Generated from data/imagenet_classes.txt at configure time.
extern const char* const kImagenetClassNames;

namespace {

CategoryNames parse_names(std::string_view text, const std::string& origin) {
    CategoryNames names;
    for (auto line : io::split_lines(text)) {
        if (io::trim(line).empty()) continue;
        names.emplace_back(io::trim(line));
    }
    if (names.size() != kCategoryCount)
        throw DataError(origin + " lists " + std::to_string(names.size()) + " category names, expected " +
                        std::to_string(kCategoryCount));
    return names;
}

std::string shortest(double x) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

const std::string& name_of(const CategoryNames& names, std::size_t c) {
    if (c >= names.size()) throw UsageError("category " + std::to_string(c) + " outside the name table");
    return names[c];
}

} // namespace

const CategoryNames& default_category_names() {
    static const CategoryNames names = parse_names(kImagenetClassNames, "built-in name table");
    return names;
}

CategoryNames load_category_names(const std::filesystem::path& path) {
    return parse_names(io::read_text_file(path), path.string());
}

std::size_t label_image(const EmbeddingVector& scores) {
    if (scores.layer != EmbeddingLayer::softmax1000)
        throw UsageError("image " + scores.image_id + ": labelling needs a softmax1000 vector, got " +
                         std::string(to_string(scores.layer)));
    if (scores.values.size() != kCategoryCount)
        throw DataError("image " + scores.image_id + ": expected 1000 scores");
    // max_element keeps the first of equal maxima.
    return static_cast<std::size_t>(std::max_element(scores.values.begin(), scores.values.end()) -
                                    scores.values.begin());
}

GroupSelector GroupSelector::gender(Gender g) {
    return {std::string(to_string(g)), [g](const Profile& p) { return p.gender == g; }};
}

GroupSelector GroupSelector::age(AgeRange a) {
    return {std::string(to_string(a)), [a](const Profile& p) { return p.age == a; }};
}

GroupSelector GroupSelector::language(Language l) {
    return {std::string(to_string(l)), [l](const Profile& p) { return p.language == l; }};
}

GroupSelector GroupSelector::where(std::string description, std::function<bool(const Profile&)> predicate) {
    return {std::move(description), std::move(predicate)};
}

std::size_t CategoryHistogram::total() const noexcept {
    std::size_t n = 0;
    for (auto c : counts) n += c;
    return n;
}

double CategoryHistogram::frequency(std::size_t category) const noexcept {
    const std::size_t n = total();
    if (n == 0 || category >= kCategoryCount) return 0;
    return static_cast<double>(counts[category]) / static_cast<double>(n);
}

std::vector<double> CategoryHistogram::frequencies() const {
    std::vector<double> f(kCategoryCount);
    for (std::size_t c = 0; c < kCategoryCount; ++c) f[c] = frequency(c);
    return f;
}

CategoryHistogram group_histogram(const Corpus& corpus, const EmbeddingStore& store, const GroupSelector& selector) {
    CategoryHistogram h;
    h.group = selector.description;
    for (const auto& p : corpus.profiles()) {
        if (!selector.predicate(p)) continue;
        for (const auto* img : corpus.images_of(p)) {
            if (const auto* v = store.find(img->id, EmbeddingLayer::softmax1000)) ++h.counts[label_image(*v)];
        }
    }
    if (h.total() == 0) throw DataError("group '" + h.group + "' has no image with softmax1000 scores");
    return h;
}

std::vector<CategoryHistogram> group_histograms(const Corpus& corpus, const EmbeddingStore& store,
                                                const std::vector<GroupSelector>& selectors, unsigned jobs) {
    std::vector<CategoryHistogram> out(selectors.size());
    parallel_for(selectors.size(), jobs, [&](std::size_t i) { out[i] = group_histogram(corpus, store, selectors[i]); });
    return out;
}

std::vector<DifferenceList::Entry> DifferenceList::entries() const {
    std::vector<Entry> all = favor_a;
    all.insert(all.end(), favor_b.begin(), favor_b.end());
    return all;
}

DifferenceList difference_list(const CategoryHistogram& a, const CategoryHistogram& b, std::size_t n) {
    if (n % 2 != 0) throw UsageError("difference list length must be even, got " + std::to_string(n));
    DifferenceList out;
    out.group_a = a.group;
    out.group_b = b.group;
    out.n_per_side = n / 2;

    for (std::size_t c = 0; c < kCategoryCount; ++c) {
        const double d = a.frequency(c) - b.frequency(c);
        if (d > 0) out.favor_a.push_back({c, d});
        if (d < 0) out.favor_b.push_back({c, d});
    }
    auto by_magnitude = [](const DifferenceList::Entry& x, const DifferenceList::Entry& y) {
        const double mx = std::fabs(x.difference), my = std::fabs(y.difference);
        return mx != my ? mx > my : x.category < y.category;
    };
    std::sort(out.favor_a.begin(), out.favor_a.end(), by_magnitude);
    std::sort(out.favor_b.begin(), out.favor_b.end(), by_magnitude);

    auto trim_side = [&](std::vector<DifferenceList::Entry>& side, const std::string& group) {
        if (side.size() > out.n_per_side) {
            side.resize(out.n_per_side);
        } else if (side.size() < out.n_per_side) {
            out.warnings.push_back("only " + std::to_string(side.size()) + " categories favor " + group + ", " +
                                   std::to_string(out.n_per_side) + " requested");
        }
    };
    trim_side(out.favor_a, a.group);
    trim_side(out.favor_b, b.group);
    return out;
}

std::string export_cloud(const CategoryHistogram& histogram, const CategoryNames& names) {
    std::vector<std::size_t> order;
    for (std::size_t c = 0; c < kCategoryCount; ++c)
        if (histogram.counts[c] > 0) order.push_back(c);
    // Equal counts mean equal frequencies, so compare the integers.
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return histogram.counts[x] > histogram.counts[y]; });
    std::string csv = "category,frequency\n";
    for (auto c : order) csv += io::csv_field(name_of(names, c)) + "," + shortest(histogram.frequency(c)) + "\n";
    return csv;
}

nlohmann::ordered_json histogram_to_json(const CategoryHistogram& histogram, const CategoryNames& names) {
    nlohmann::ordered_json j;
    j["group"] = histogram.group;
    j["total"] = histogram.total();
    auto cats = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < kCategoryCount; ++c) {
        if (histogram.counts[c] == 0) continue;
        cats.push_back({{"category", c},
                        {"name", name_of(names, c)},
                        {"count", histogram.counts[c]},
                        {"frequency", histogram.frequency(c)}});
    }
    j["categories"] = std::move(cats);
    return j;
}

nlohmann::ordered_json difference_list_to_json(const DifferenceList& list, const CategoryNames& names) {
    auto side = [&](const std::vector<DifferenceList::Entry>& entries) {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& e : entries)
            arr.push_back({{"category", e.category}, {"name", name_of(names, e.category)}, {"difference", e.difference}});
        return arr;
    };
    nlohmann::ordered_json j;
    j["group_a"] = list.group_a;
    j["group_b"] = list.group_b;
    j["n_per_side"] = list.n_per_side;
    j["favor_a"] = side(list.favor_a);
    j["favor_b"] = side(list.favor_b);
    j["warnings"] = list.warnings;
    return j;
}

std::string difference_list_to_markdown(const DifferenceList& list, const CategoryNames& names) {
    std::string md = "| Category | " + list.group_a + " - " + list.group_b + " |\n|---|---:|\n";
    char buf[64];
    for (const auto& e : list.entries()) {
        std::snprintf(buf, sizeof buf, "%+.4f", e.difference);
        md += "| " + name_of(names, e.category) + " | " + buf + " |\n";
    }
    for (const auto& w : list.warnings) md += "\nWarning: " + w + "\n";
    return md;
}

} // namespace viprof
