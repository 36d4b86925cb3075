// SPDX-License-Identifier: Apache-2.0
//
// Corpus data model: author profiles with their tweets and the images they
// posted, plus ingestion of PAN-style corpus directories.
#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace viprof {

enum class Gender { female, male };

enum class AgeRange { age_18_24, age_25_34, age_35_49, age_50_64, age_65_plus };

enum class Language { en, sp };

enum class ImageSource { tweeted, retweeted };

/// Which profile attribute is being predicted.
enum class Task { age, gender };

inline constexpr AgeRange kAllAgeRanges[] = {AgeRange::age_18_24, AgeRange::age_25_34,
                                             AgeRange::age_35_49, AgeRange::age_50_64,
                                             AgeRange::age_65_plus};
inline constexpr Gender kAllGenders[] = {Gender::female, Gender::male};

std::string_view to_string(Gender g);
std::string_view to_string(AgeRange a);
std::string_view to_string(Language l);
std::string_view to_string(ImageSource s);
std::string_view to_string(Task t);

// Case-insensitive parsers. They return nullopt on unknown tokens.
std::optional<Gender> parse_gender(std::string_view token);
std::optional<AgeRange> parse_age_range(std::string_view token);
std::optional<Language> parse_language(std::string_view token);
std::optional<Task> parse_task(std::string_view token);

struct Profile {
    std::string id;
    Language language = Language::en;
    Gender gender = Gender::female;
    AgeRange age = AgeRange::age_18_24;
    std::vector<std::string> tweets;
    std::vector<std::string> image_ids;
};

/// Class label of a profile for the given task ("female", "25-34", ...).
std::string label_of(const Profile& p, Task task);

struct ImageRecord {
    std::string id;
    std::string profile_id;
    ImageSource source = ImageSource::tweeted;
    std::optional<std::string> path;
};

/// A fully linked, immutable corpus of one language.
///
/// Construction validates that ids are unique, that every image points at an
/// existing profile and that every image id listed by a profile resolves to
/// an image owned by that profile. Violations throw DataError.
class Corpus {
public:
    Corpus() = default;
    Corpus(Language language, std::vector<Profile> profiles, std::vector<ImageRecord> images);

    Language language() const noexcept { return language_; }
    const std::vector<Profile>& profiles() const noexcept { return profiles_; }
    const std::vector<ImageRecord>& images() const noexcept { return images_; }

    const Profile* find_profile(std::string_view id) const;
    const ImageRecord* find_image(std::string_view id) const;
    const Profile& profile(std::string_view id) const;
    const ImageRecord& image(std::string_view id) const;

    /// Images owned by the profile, in the profile's listed order.
    std::vector<const ImageRecord*> images_of(const Profile& p) const;

    bool empty() const noexcept { return profiles_.empty(); }

private:
    Language language_ = Language::en;
    std::vector<Profile> profiles_;
    std::vector<ImageRecord> images_;
    std::unordered_map<std::string, std::size_t> profile_index_;
    std::unordered_map<std::string, std::size_t> image_index_;
};

struct TruthRecord {
    std::string profile_id;
    Gender gender = Gender::female;
    AgeRange age = AgeRange::age_18_24;

    bool operator==(const TruthRecord&) const = default;
};

/// Parses `id:::gender:::agerange` lines; blank lines are skipped.
/// Throws DataError naming the 1-based line number on malformed lines.
std::vector<TruthRecord> parse_truth_file(std::string_view text);
std::string serialize_truth(const std::vector<TruthRecord>& records);

/// Extracts the text of every `document` element of a PAN author file.
std::vector<std::string> parse_author_xml(const std::string& xml, const std::string& origin);

struct LoadSummary {
    std::size_t profiles = 0;
    std::size_t images = 0;
    std::size_t profiles_without_images = 0;
};

/// Loads `root/truth.txt`, `root/<id>.xml` per author and `root/images.csv`.
Corpus load_corpus(const std::filesystem::path& root, Language language,
                   LoadSummary* summary = nullptr);

/// Writes the layout read by load_corpus. Every file is written atomically.
void write_corpus_dir(const Corpus& corpus, const std::filesystem::path& root);

nlohmann::ordered_json corpus_to_json(const Corpus& corpus);
Corpus corpus_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Descriptive statistics

/// Mean and population standard deviation of a per-profile count. Both are
/// absent when the group has no profiles.
struct CountSummary {
    std::optional<double> mean;
    std::optional<double> stddev;
};

struct GroupStats {
    std::string group;             ///< "all", an age label or a gender label
    std::size_t profiles = 0;
    std::size_t tweeted = 0;
    std::size_t retweeted = 0;
    CountSummary by_profile;       ///< images per profile
    CountSummary in_tweets;        ///< tweeted images per profile
    CountSummary in_retweets;      ///< retweeted images per profile
};

struct StatsReport {
    Language language = Language::en;
    GroupStats overall;
    std::vector<GroupStats> by_age;      ///< always the five ranges, in order
    std::vector<GroupStats> by_gender;   ///< female, male
    std::size_t profiles_without_images = 0;
};

StatsReport corpus_stats(const Corpus& corpus);
nlohmann::ordered_json stats_to_json(const StatsReport& report);
std::string stats_to_markdown(const StatsReport& report);

} // namespace viprof
