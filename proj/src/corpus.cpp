// SPDX-License-Identifier: Apache-2.0
#include "viprof/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <set>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "viprof/error.hpp"
#include "viprof/io.hpp"

namespace viprof {

namespace {

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) ==
                      std::tolower(static_cast<unsigned char>(y));
           });
}

std::optional<ImageSource> parse_manifest_source(std::string_view token) {
    if (iequals(token, "tweet")) return ImageSource::tweeted;
    if (iequals(token, "retweet")) return ImageSource::retweeted;
    return std::nullopt;
}

std::string_view manifest_token(ImageSource s) {
    return s == ImageSource::tweeted ? "tweet" : "retweet";
}

} // namespace

std::string_view to_string(Gender g) { return g == Gender::female ? "female" : "male"; }

std::string_view to_string(AgeRange a) {
    switch (a) {
    case AgeRange::age_18_24: return "18-24";
    case AgeRange::age_25_34: return "25-34";
    case AgeRange::age_35_49: return "35-49";
    case AgeRange::age_50_64: return "50-64";
    case AgeRange::age_65_plus: return "65-N";
    }
    return "?";
}

std::string_view to_string(Language l) { return l == Language::en ? "en" : "sp"; }

std::string_view to_string(ImageSource s) { return s == ImageSource::tweeted ? "tweeted" : "retweeted"; }

std::string_view to_string(Task t) { return t == Task::age ? "age" : "gender"; }

std::optional<Gender> parse_gender(std::string_view token) {
    for (Gender g : kAllGenders)
        if (iequals(token, to_string(g))) return g;
    return std::nullopt;
}

std::optional<AgeRange> parse_age_range(std::string_view token) {
    for (AgeRange a : kAllAgeRanges)
        if (iequals(token, to_string(a))) return a;
    return std::nullopt;
}

std::optional<Language> parse_language(std::string_view token) {
    if (iequals(token, "en")) return Language::en;
    if (iequals(token, "sp") || iequals(token, "es")) return Language::sp;
    return std::nullopt;
}

std::optional<Task> parse_task(std::string_view token) {
    if (iequals(token, "age")) return Task::age;
    if (iequals(token, "gender")) return Task::gender;
    return std::nullopt;
}

std::string label_of(const Profile& p, Task task) {
    return std::string(task == Task::age ? to_string(p.age) : to_string(p.gender));
}

// ---------------------------------------------------------------------------

Corpus::Corpus(Language language, std::vector<Profile> profiles, std::vector<ImageRecord> images)
    : language_(language), profiles_(std::move(profiles)), images_(std::move(images)) {
    for (std::size_t i = 0; i < profiles_.size(); ++i) {
        if (!profile_index_.emplace(profiles_[i].id, i).second)
            throw DataError("duplicate profile id: " + profiles_[i].id);
    }
    for (std::size_t i = 0; i < images_.size(); ++i) {
        const auto& img = images_[i];
        if (!image_index_.emplace(img.id, i).second) throw DataError("duplicate image_id: " + img.id);
        if (!profile_index_.count(img.profile_id))
            throw DataError("dangling profile_id '" + img.profile_id + "' for image " + img.id);
    }
    std::size_t listed = 0;
    for (const auto& p : profiles_) {
        for (const auto& id : p.image_ids) {
            auto it = image_index_.find(id);
            if (it == image_index_.end())
                throw DataError("profile " + p.id + " lists unknown image " + id);
            if (images_[it->second].profile_id != p.id)
                throw DataError("profile " + p.id + " lists image " + id + " owned by " +
                                images_[it->second].profile_id);
        }
        listed += p.image_ids.size();
    }
    if (listed != images_.size())
        throw DataError("image lists of profiles do not cover every image record exactly once");
}

const Profile* Corpus::find_profile(std::string_view id) const {
    auto it = profile_index_.find(std::string(id));
    return it == profile_index_.end() ? nullptr : &profiles_[it->second];
}

const ImageRecord* Corpus::find_image(std::string_view id) const {
    auto it = image_index_.find(std::string(id));
    return it == image_index_.end() ? nullptr : &images_[it->second];
}

const Profile& Corpus::profile(std::string_view id) const {
    if (const auto* p = find_profile(id)) return *p;
    throw DataError("unknown profile id: " + std::string(id));
}

const ImageRecord& Corpus::image(std::string_view id) const {
    if (const auto* img = find_image(id)) return *img;
    throw DataError("unknown image id: " + std::string(id));
}

std::vector<const ImageRecord*> Corpus::images_of(const Profile& p) const {
    std::vector<const ImageRecord*> out;
    out.reserve(p.image_ids.size());
    for (const auto& id : p.image_ids) out.push_back(&image(id));
    return out;
}

// ---------------------------------------------------------------------------
// Ingestion

std::vector<TruthRecord> parse_truth_file(std::string_view text) {
    std::vector<TruthRecord> records;
    std::size_t line_no = 0;
    for (std::string_view raw : io::split_lines(text)) {
        ++line_no;
        const std::string_view line = io::trim(raw);
        if (line.empty()) continue;

        std::vector<std::string_view> fields;
        std::size_t start = 0;
        for (;;) {
            const auto pos = line.find(":::", start);
            fields.push_back(line.substr(start, pos == std::string_view::npos ? line.npos : pos - start));
            if (pos == std::string_view::npos) break;
            start = pos + 3;
        }
        const std::string where = " at line " + std::to_string(line_no);
        if (fields.size() != 3)
            throw DataError("expected 3 ':::'-separated fields, got " + std::to_string(fields.size()) + where);
        if (io::trim(fields[0]).empty()) throw DataError("empty profile id" + where);

        auto gender = parse_gender(io::trim(fields[1]));
        if (!gender) throw DataError("unknown gender token" + where);
        auto age = parse_age_range(io::trim(fields[2]));
        if (!age) throw DataError("unknown age range token" + where);
        records.push_back({std::string(io::trim(fields[0])), *gender, *age});
    }
    return records;
}

std::string serialize_truth(const std::vector<TruthRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        std::string age(to_string(r.age));
        std::transform(age.begin(), age.end(), age.begin(), [](unsigned char c) { return std::toupper(c); });
        std::string gender(to_string(r.gender));
        std::transform(gender.begin(), gender.end(), gender.begin(),
                       [](unsigned char c) { return std::toupper(c); });
        out += r.profile_id + ":::" + gender + ":::" + age + "\n";
    }
    return out;
}

std::vector<std::string> parse_author_xml(const std::string& xml, const std::string& origin) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        std::istringstream in(xml);
        pt::read_xml(in, tree);
    } catch (const pt::xml_parser_error& e) {
        throw DataError("malformed author XML " + origin + ": " + e.message() + " (line " +
                        std::to_string(e.line()) + ")");
    }
    auto author = tree.get_child_optional("author");
    if (!author) throw DataError("missing <author> element in " + origin);

    std::vector<std::string> tweets;
    auto documents = author->get_child_optional("documents");
    if (!documents) return tweets;
    for (const auto& [name, node] : *documents) {
        if (name == "document") tweets.push_back(node.data());
    }
    return tweets;
}

Corpus load_corpus(const std::filesystem::path& root, Language language, LoadSummary* summary) {
    const auto truth = parse_truth_file(io::read_text_file(root / "truth.txt"));

    std::vector<Profile> profiles;
    profiles.reserve(truth.size());
    std::unordered_map<std::string, std::size_t> by_id;
    for (const auto& rec : truth) {
        if (!by_id.emplace(rec.profile_id, profiles.size()).second)
            throw DataError("duplicate profile id in truth.txt: " + rec.profile_id);
        const auto xml_path = root / (rec.profile_id + ".xml");
        if (!std::filesystem::exists(xml_path))
            throw DataError("profile " + rec.profile_id + " has no author file: " + xml_path.string());
        Profile p;
        p.id = rec.profile_id;
        p.language = language;
        p.gender = rec.gender;
        p.age = rec.age;
        p.tweets = parse_author_xml(io::read_text_file(xml_path), xml_path.string());
        profiles.push_back(std::move(p));
    }

    const auto manifest_path = root / "images.csv";
    const auto manifest = io::read_text_file(manifest_path);
    const auto lines = io::split_lines(manifest);
    std::vector<ImageRecord> images;
    std::set<std::string> seen;
    for (std::size_t n = 0; n < lines.size(); ++n) {
        const std::string where = manifest_path.string() + ":" + std::to_string(n + 1);
        if (io::trim(lines[n]).empty()) continue;
        std::vector<std::string> fields;
        try {
            fields = io::split_csv_record(lines[n]);
        } catch (const DataError& e) {
            throw DataError(std::string(e.what()) + " at " + where);
        }
        if (n == 0) {
            if (fields.size() < 3 || fields[0] != "image_id" || fields[1] != "profile_id" || fields[2] != "source")
                throw DataError("images.csv must start with header image_id,profile_id,source,path");
            continue;
        }
        if (fields.size() != 3 && fields.size() != 4)
            throw DataError("expected 4 columns at " + where);
        ImageRecord img;
        img.id = fields[0];
        img.profile_id = fields[1];
        auto src = parse_manifest_source(io::trim(fields[2]));
        if (!src) throw DataError("unknown source token '" + fields[2] + "' at " + where);
        img.source = *src;
        if (fields.size() == 4 && !fields[3].empty()) img.path = fields[3];
        if (!seen.insert(img.id).second) throw DataError("duplicate image_id '" + img.id + "' at " + where);
        auto owner = by_id.find(img.profile_id);
        if (owner == by_id.end())
            throw DataError("dangling profile_id '" + img.profile_id + "' at " + where);
        profiles[owner->second].image_ids.push_back(img.id);
        images.push_back(std::move(img));
    }

    if (summary) {
        summary->profiles = profiles.size();
        summary->images = images.size();
        summary->profiles_without_images = static_cast<std::size_t>(
            std::count_if(profiles.begin(), profiles.end(), [](const Profile& p) { return p.image_ids.empty(); }));
    }
    return Corpus(language, std::move(profiles), std::move(images));
}

// ---------------------------------------------------------------------------
// JSON snapshot

void write_corpus_dir(const Corpus& corpus, const std::filesystem::path& root) {
    std::vector<TruthRecord> truth;
    for (const auto& p : corpus.profiles()) {
        truth.push_back({p.id, p.gender, p.age});
        std::ostringstream xml;
        xml << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<author lang=\"" << to_string(corpus.language())
            << "\">\n<documents count=\"" << p.tweets.size() << "\">\n";
        for (std::size_t i = 0; i < p.tweets.size(); ++i) {
            // "]]>" cannot appear inside one CDATA section, so split it across two.
            std::string body = p.tweets[i];
            for (std::size_t at = body.find("]]>"); at != std::string::npos; at = body.find("]]>", at + 15))
                body.replace(at, 3, "]]]]><![CDATA[>");
            xml << "<document id=\"" << i << "\"><![CDATA[" << body << "]]></document>\n";
        }
        xml << "</documents>\n</author>\n";
        io::write_file_atomic(root / (p.id + ".xml"), xml.str());
    }
    io::write_file_atomic(root / "truth.txt", serialize_truth(truth));

    std::string manifest = "image_id,profile_id,source,path\n";
    for (const auto& img : corpus.images()) {
        manifest += io::csv_field(img.id) + "," + io::csv_field(img.profile_id) + "," +
                    std::string(manifest_token(img.source)) + "," + io::csv_field(img.path.value_or("")) + "\n";
    }
    io::write_file_atomic(root / "images.csv", manifest);
}

nlohmann::ordered_json corpus_to_json(const Corpus& corpus) {
    nlohmann::ordered_json j;
    j["language"] = to_string(corpus.language());
    auto& profiles = j["profiles"] = nlohmann::ordered_json::array();
    for (const auto& p : corpus.profiles()) {
        nlohmann::ordered_json pj;
        pj["id"] = p.id;
        pj["gender"] = to_string(p.gender);
        pj["age"] = to_string(p.age);
        pj["tweets"] = p.tweets;
        pj["images"] = p.image_ids;
        profiles.push_back(std::move(pj));
    }
    auto& images = j["images"] = nlohmann::ordered_json::array();
    for (const auto& img : corpus.images()) {
        nlohmann::ordered_json ij;
        ij["id"] = img.id;
        ij["profile_id"] = img.profile_id;
        ij["source"] = manifest_token(img.source);
        if (img.path) ij["path"] = *img.path;
        images.push_back(std::move(ij));
    }
    return j;
}

Corpus corpus_from_json(const nlohmann::json& j) {
    try {
        auto lang = parse_language(j.at("language").get<std::string>());
        if (!lang) throw DataError("unknown corpus language");
        std::vector<Profile> profiles;
        for (const auto& pj : j.at("profiles")) {
            Profile p;
            p.id = pj.at("id").get<std::string>();
            p.language = *lang;
            auto g = parse_gender(pj.at("gender").get<std::string>());
            auto a = parse_age_range(pj.at("age").get<std::string>());
            if (!g || !a) throw DataError("bad gender/age label for profile " + p.id);
            p.gender = *g;
            p.age = *a;
            p.tweets = pj.at("tweets").get<std::vector<std::string>>();
            p.image_ids = pj.at("images").get<std::vector<std::string>>();
            profiles.push_back(std::move(p));
        }
        std::vector<ImageRecord> images;
        for (const auto& ij : j.at("images")) {
            ImageRecord img;
            img.id = ij.at("id").get<std::string>();
            img.profile_id = ij.at("profile_id").get<std::string>();
            auto src = parse_manifest_source(ij.at("source").get<std::string>());
            if (!src) throw DataError("bad source for image " + img.id);
            img.source = *src;
            if (ij.contains("path")) img.path = ij.at("path").get<std::string>();
            images.push_back(std::move(img));
        }
        return Corpus(*lang, std::move(profiles), std::move(images));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed corpus snapshot: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Statistics

namespace {

// Counts are integers, so the moments are accumulated exactly and the
// result does not depend on profile order.
CountSummary summarize(const std::vector<std::uint64_t>& xs) {
    if (xs.empty()) return {};
    std::uint64_t sum = 0, sum_sq = 0;
    for (auto x : xs) {
        sum += x;
        sum_sq += x * x;
    }
    const auto n = static_cast<std::uint64_t>(xs.size());
    const double mean = static_cast<double>(sum) / static_cast<double>(n);
    // var = (n * sum_sq - sum^2) / n^2
    const auto num = static_cast<long double>(n * sum_sq - sum * sum);
    const long double var = num / (static_cast<long double>(n) * static_cast<long double>(n));
    return {mean, static_cast<double>(std::sqrt(var))};
}

template <class Pred>
GroupStats group_stats(const Corpus& corpus, std::string name, Pred&& in_group) {
    GroupStats g;
    g.group = std::move(name);
    std::vector<std::uint64_t> total, tw, rt;
    for (const auto& p : corpus.profiles()) {
        if (!in_group(p)) continue;
        std::size_t t = 0, r = 0;
        for (const auto* img : corpus.images_of(p)) (img->source == ImageSource::tweeted ? t : r) += 1;
        ++g.profiles;
        g.tweeted += t;
        g.retweeted += r;
        total.push_back(t + r);
        tw.push_back(t);
        rt.push_back(r);
    }
    g.by_profile = summarize(total);
    g.in_tweets = summarize(tw);
    g.in_retweets = summarize(rt);
    return g;
}

nlohmann::ordered_json summary_json(const CountSummary& s) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    if (s.mean) j["mean"] = *s.mean;
    if (s.stddev) j["std"] = *s.stddev;
    return j;
}

nlohmann::ordered_json group_json(const GroupStats& g) {
    nlohmann::ordered_json j;
    j["group"] = g.group;
    j["profiles"] = g.profiles;
    j["images_tweeted"] = g.tweeted;
    j["images_retweeted"] = g.retweeted;
    j["by_profile"] = summary_json(g.by_profile);
    j["in_tweets"] = summary_json(g.in_tweets);
    j["in_retweets"] = summary_json(g.in_retweets);
    return j;
}

std::string thousands(std::size_t n) {
    std::string digits = std::to_string(n);
    std::string out;
    for (std::size_t i = 0; i < digits.size(); ++i) {
        if (i > 0 && (digits.size() - i) % 3 == 0) out += ',';
        out += digits[i];
    }
    return out;
}

std::string cell(const CountSummary& s) {
    if (!s.mean) return "-";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.0f (±%.0f)", *s.mean, *s.stddev);
    return buf;
}

std::string language_header(Language l) { return l == Language::en ? "EN" : "SP"; }

} // namespace

StatsReport corpus_stats(const Corpus& corpus) {
    StatsReport r;
    r.language = corpus.language();
    r.overall = group_stats(corpus, "all", [](const Profile&) { return true; });
    for (AgeRange a : kAllAgeRanges)
        r.by_age.push_back(group_stats(corpus, std::string(to_string(a)), [a](const Profile& p) { return p.age == a; }));
    for (Gender g : kAllGenders)
        r.by_gender.push_back(
            group_stats(corpus, std::string(to_string(g)), [g](const Profile& p) { return p.gender == g; }));
    for (const auto& p : corpus.profiles())
        if (p.image_ids.empty()) ++r.profiles_without_images;
    return r;
}

nlohmann::ordered_json stats_to_json(const StatsReport& report) {
    nlohmann::ordered_json j;
    j["language"] = to_string(report.language);
    j["overall"] = group_json(report.overall);
    j["by_age"] = nlohmann::ordered_json::array();
    for (const auto& g : report.by_age) j["by_age"].push_back(group_json(g));
    j["by_gender"] = nlohmann::ordered_json::array();
    for (const auto& g : report.by_gender) j["by_gender"].push_back(group_json(g));
    j["profiles_without_images"] = report.profiles_without_images;
    return j;
}

std::string stats_to_markdown(const StatsReport& report) {
    const std::string lang = language_header(report.language);
    std::ostringstream md;
    md << "## General statistics of the images\n\n";
    md << "| | " << lang << " |\n|---|---|\n";
    md << "| # Profiles used | " << thousands(report.overall.profiles) << " |\n";
    md << "| Images tweeted | " << thousands(report.overall.tweeted) << " |\n";
    md << "| Images retweeted | " << thousands(report.overall.retweeted) << " |\n";
    md << "| Average images (σ) by profile | " << cell(report.overall.by_profile) << " |\n";
    md << "| Average images (σ) in tweet set | " << cell(report.overall.in_tweets) << " |\n";
    md << "| Average images (σ) in retweet set | " << cell(report.overall.in_retweets) << " |\n";
    if (report.profiles_without_images > 0)
        md << "\nProfiles without images: " << report.profiles_without_images << "\n";

    auto breakdown = [&](const char* title, const char* axis, const std::vector<GroupStats>& rows) {
        md << "\n## " << title << "\n\n";
        md << "| | " << axis << " | # | by profile | in tweets | in retweets |\n";
        md << "|---|---|---|---|---|---|\n";
        for (const auto& g : rows) {
            md << "| " << lang << " | " << g.group << " | " << g.profiles << " | " << cell(g.by_profile) << " | "
               << cell(g.in_tweets) << " | " << cell(g.in_retweets) << " |\n";
        }
    };
    breakdown("Statistics of images shared by each age category", "ages", report.by_age);
    breakdown("Statistics of images shared by each gender category", "gender", report.by_gender);
    return md.str();
}

} // namespace viprof
