// SPDX-License-Identifier: Apache-2.0
//
// Image-category analysis over the 1000-way final-layer scores: argmax
// labelling, per-group histograms, difference lists and word-cloud tables.
#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "viprof/corpus.hpp"
#include "viprof/visual_features.hpp"

namespace viprof {

inline constexpr std::size_t kCategoryCount = 1000;

using CategoryNames = std::vector<std::string>;

/// The standard ImageNet-1k class names, built into the binary.
const CategoryNames& default_category_names();

/// One name per line, exactly 1000 non-empty lines.
CategoryNames load_category_names(const std::filesystem::path& path);

/// Argmax of a softmax1000 vector; ties go to the lowest index.
/// Throws UsageError for any other layer.
std::size_t label_image(const EmbeddingVector& scores);

struct GroupSelector {
    std::string description;
    std::function<bool(const Profile&)> predicate;

    static GroupSelector gender(Gender g);
    static GroupSelector age(AgeRange a);
    static GroupSelector language(Language l);
    static GroupSelector where(std::string description, std::function<bool(const Profile&)> predicate);
};

struct CategoryHistogram {
    std::string group;
    std::array<std::size_t, kCategoryCount> counts{};

    std::size_t total() const noexcept;
    /// counts[c] / total, or 0 for an empty histogram.
    double frequency(std::size_t category) const noexcept;
    std::vector<double> frequencies() const;
};

/// Histogram of image labels over the selected profiles' images that have a
/// softmax1000 vector. Throws DataError when no such image exists.
CategoryHistogram group_histogram(const Corpus& corpus, const EmbeddingStore& store, const GroupSelector& selector);

/// One histogram per selector, computed in parallel.
std::vector<CategoryHistogram> group_histograms(const Corpus& corpus, const EmbeddingStore& store,
                                                const std::vector<GroupSelector>& selectors, unsigned jobs = 1);

struct DifferenceList {
    struct Entry {
        std::size_t category = 0;
        double difference = 0;  ///< frequency in A minus frequency in B
        bool operator==(const Entry&) const = default;
    };
    std::string group_a;
    std::string group_b;
    std::size_t n_per_side = 0;
    std::vector<Entry> favor_a;  ///< positive differences, |d| descending
    std::vector<Entry> favor_b;  ///< negative differences, |d| descending
    std::vector<std::string> warnings;

    /// favor_a followed by favor_b.
    std::vector<Entry> entries() const;
};

/// n/2 categories with the largest positive and n/2 with the largest negative
/// difference; ties by category id. A side with too few nonzero differences is
/// returned short with a warning. Throws UsageError when n is odd.
DifferenceList difference_list(const CategoryHistogram& a, const CategoryHistogram& b, std::size_t n);

/// `category,frequency` rows for every nonzero category, frequency descending
/// then category id ascending.
std::string export_cloud(const CategoryHistogram& histogram, const CategoryNames& names = default_category_names());

nlohmann::ordered_json histogram_to_json(const CategoryHistogram& histogram,
                                         const CategoryNames& names = default_category_names());
nlohmann::ordered_json difference_list_to_json(const DifferenceList& list,
                                               const CategoryNames& names = default_category_names());
std::string difference_list_to_markdown(const DifferenceList& list,
                                        const CategoryNames& names = default_category_names());

} // namespace viprof
