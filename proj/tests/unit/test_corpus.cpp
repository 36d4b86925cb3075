#include <doctest.h>

#include <random>

#include "support.hpp"
#include "viprof/corpus.hpp"
#include "viprof/error.hpp"
#include "viprof/io.hpp"

using namespace viprof;
using viprof::testing::make_corpus;
using viprof::testing::ProfileSpec;
using viprof::testing::ScratchDir;

namespace {

std::string error_of(auto&& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        return e.what();
    }
    return {};
}

void write_author(const std::filesystem::path& root, const std::string& id, const std::vector<std::string>& docs) {
    std::string xml = "<author type=\"twitter\" lang=\"en\"><documents count=\"" + std::to_string(docs.size()) + "\">";
    for (const auto& d : docs) xml += "<document id=\"1\"><![CDATA[" + d + "]]></document>";
    xml += "</documents></author>";
    io::write_file_atomic(root / (id + ".xml"), xml);
}

} // namespace

TEST_SUITE("corpus") {

TEST_CASE("label tokens") {
    CHECK(parse_gender("FEMALE") == Gender::female);
    CHECK(parse_gender("Male") == Gender::male);
    CHECK_FALSE(parse_gender("F"));
    CHECK(parse_age_range("65-n") == AgeRange::age_65_plus);
    CHECK(parse_age_range("18-24") == AgeRange::age_18_24);
    CHECK_FALSE(parse_age_range("18-25"));
    CHECK_FALSE(parse_age_range("XX-XX"));
    CHECK(to_string(AgeRange::age_65_plus) == "65-N");
    CHECK(parse_language("es") == Language::sp);
    CHECK(parse_language("EN") == Language::en);
}

TEST_CASE("truth file examples") {
    const auto one = parse_truth_file("u1:::FEMALE:::25-34\n");
    REQUIRE(one.size() == 1);
    CHECK(one[0] == TruthRecord{"u1", Gender::female, AgeRange::age_25_34});
    CHECK(parse_truth_file("").empty());
    CHECK(error_of([] { parse_truth_file("u1:::F:::25-34"); }) == "unknown gender token at line 1");
    CHECK(error_of([] { parse_truth_file("\nu1:::MALE:::10-20"); }).find("at line 2") != std::string::npos);
    CHECK_THROWS_AS(parse_truth_file("u1:::MALE"), DataError);
    CHECK_THROWS_AS(parse_truth_file("u1:::MALE:::18-24:::extra"), DataError);
}

TEST_CASE("truth file round-trips for random records") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<TruthRecord> recs(rng() % 12);
        for (std::size_t i = 0; i < recs.size(); ++i)
            recs[i] = {"id" + std::to_string(rng() % 100000), kAllGenders[rng() % 2], kAllAgeRanges[rng() % 5]};
        CHECK(parse_truth_file(serialize_truth(recs)) == recs);
    }
}

TEST_CASE("corpus links are validated") {
    Profile p{"a", Language::en, Gender::male, AgeRange::age_18_24, {}, {"img"}};
    CHECK_THROWS_AS(Corpus(Language::en, {p}, {}), DataError);  // image id does not resolve
    CHECK_THROWS_AS(Corpus(Language::en, {p}, {{"img", "b", ImageSource::tweeted, std::nullopt}}), DataError);
    CHECK_THROWS_AS(Corpus(Language::en, {p, p}, {{"img", "a", ImageSource::tweeted, std::nullopt}}), DataError);
    const Corpus ok(Language::en, {p}, {{"img", "a", ImageSource::tweeted, std::nullopt}});
    CHECK(ok.images_of(ok.profile("a")).size() == 1);
}

TEST_CASE("load_corpus builds a linked corpus") {
    ScratchDir dir("corpus");
    io::write_file_atomic(dir / "truth.txt", "a1:::FEMALE:::18-24\na2:::MALE:::65-N\n");
    write_author(dir.path(), "a1", {"Hello <b>world</b> & friends", "second"});
    write_author(dir.path(), "a2", {});
    io::write_file_atomic(dir / "images.csv",
                          "image_id,profile_id,source,path\ni1,a1,tweet,img/i1.jpg\ni2,a1,retweet,\ni3,a2,tweet,x.png\n");
    LoadSummary summary;
    const auto c = load_corpus(dir.path(), Language::en, &summary);
    CHECK(c.profiles().size() == 2);
    CHECK(c.images().size() == 3);
    CHECK(summary.profiles_without_images == 0);
    const auto& a1 = c.profile("a1");
    REQUIRE(a1.tweets.size() == 2);
    CHECK(a1.tweets[0] == "Hello <b>world</b> & friends");  // CDATA taken verbatim
    CHECK(c.image("i1").path == std::optional<std::string>("img/i1.jpg"));
    CHECK_FALSE(c.image("i2").path);
    CHECK(c.image("i2").source == ImageSource::retweeted);
}

TEST_CASE("load_corpus keeps profiles without images and counts them") {
    ScratchDir dir("corpus");
    io::write_file_atomic(dir / "truth.txt", "a1:::FEMALE:::18-24\na2:::MALE:::65-N\n");
    write_author(dir.path(), "a1", {"x"});
    write_author(dir.path(), "a2", {"y"});
    io::write_file_atomic(dir / "images.csv", "image_id,profile_id,source,path\ni1,a1,tweet,\n");
    LoadSummary summary;
    const auto c = load_corpus(dir.path(), Language::en, &summary);
    CHECK(c.profile("a2").image_ids.empty());
    CHECK(summary.profiles_without_images == 1);
}

TEST_CASE("load_corpus rejects broken inputs") {
    ScratchDir dir("corpus");
    io::write_file_atomic(dir / "truth.txt", "a1:::FEMALE:::18-24\n");
    write_author(dir.path(), "a1", {"x"});

    io::write_file_atomic(dir / "images.csv", "image_id,profile_id,source,path\ni1,ghost,tweet,\n");
    CHECK(error_of([&] { load_corpus(dir.path(), Language::en); }).find("dangling profile_id") != std::string::npos);

    io::write_file_atomic(dir / "images.csv", "image_id,profile_id,source,path\ni1,a1,tweet,\ni1,a1,retweet,\n");
    CHECK(error_of([&] { load_corpus(dir.path(), Language::en); }).find("duplicate image_id") != std::string::npos);

    io::write_file_atomic(dir / "images.csv", "image_id,profile_id,source,path\ni1,a1,repost,\n");
    CHECK_THROWS_AS(load_corpus(dir.path(), Language::en), DataError);

    io::write_file_atomic(dir / "images.csv", "id,owner\n");
    CHECK_THROWS_AS(load_corpus(dir.path(), Language::en), DataError);

    io::write_file_atomic(dir / "images.csv", "image_id,profile_id,source,path\n");
    io::write_file_atomic(dir / "truth.txt", "a1:::FEMALE:::18-24\nmissing:::MALE:::18-24\n");
    CHECK(error_of([&] { load_corpus(dir.path(), Language::en); }).find("missing") != std::string::npos);

    std::filesystem::remove(dir / "truth.txt");
    CHECK(error_of([&] { load_corpus(dir.path(), Language::en); }).find("truth.txt") != std::string::npos);
}

TEST_CASE("malformed author XML is a data error") {
    CHECK_THROWS_AS(parse_author_xml("<author><documents>", "x.xml"), DataError);
    CHECK_THROWS_AS(parse_author_xml("<other/>", "x.xml"), DataError);
    CHECK(parse_author_xml("<author/>", "x.xml").empty());
}

TEST_CASE("written corpus directories load back identically") {
    const auto c = make_corpus({{"p1", Gender::female, AgeRange::age_25_34, {"a ]]> b", "<tag> & more"}, 2, 1},
                                {"p2", Gender::male, AgeRange::age_50_64, {}, 0, 0}},
                               Language::sp);
    ScratchDir dir("corpus");
    write_corpus_dir(c, dir.path());
    const auto back = load_corpus(dir.path(), Language::sp);
    CHECK(corpus_to_json(back) == corpus_to_json(c));
}

TEST_CASE("corpus snapshots round-trip") {
    const auto c = make_corpus({{"p1", Gender::female, AgeRange::age_25_34, {"one", "two"}, 2, 1},
                                {"p2", Gender::male, AgeRange::age_65_plus, {}, 0, 3}});
    const auto j = corpus_to_json(c);
    const auto back = corpus_from_json(nlohmann::json::parse(j.dump()));
    CHECK(corpus_to_json(back).dump() == j.dump());
    CHECK_THROWS_AS(corpus_from_json(nlohmann::json::parse("{\"language\": \"fr\"}")), DataError);
}

TEST_CASE("stats: two profiles with 3 and 5 images") {
    const auto c = make_corpus({{"a", Gender::female, AgeRange::age_18_24, {}, 3, 0},
                                {"b", Gender::male, AgeRange::age_18_24, {}, 2, 3}});
    const auto s = corpus_stats(c);
    CHECK(*s.overall.by_profile.mean == 4.0);
    CHECK(*s.overall.by_profile.stddev == 1.0);
    CHECK(s.overall.tweeted == 5);
    CHECK(s.overall.retweeted == 3);
}

TEST_CASE("stats: one profile with only tweeted images") {
    const auto s = corpus_stats(make_corpus({{"a", Gender::female, AgeRange::age_35_49, {}, 2, 0}}));
    CHECK(s.overall.tweeted == 2);
    CHECK(s.overall.retweeted == 0);
}

TEST_CASE("stats: six profiles across all age ranges match a hand computation") {
    // by age:  18-24 {4, 2}   25-34 {5}   35-49 {0}   50-64 {1}   65-N {3}
    const auto c = make_corpus({{"a", Gender::female, AgeRange::age_18_24, {}, 3, 1},
                                {"b", Gender::male, AgeRange::age_18_24, {}, 0, 2},
                                {"c", Gender::female, AgeRange::age_25_34, {}, 5, 0},
                                {"d", Gender::male, AgeRange::age_35_49, {}, 0, 0},
                                {"e", Gender::female, AgeRange::age_50_64, {}, 1, 0},
                                {"f", Gender::male, AgeRange::age_65_plus, {}, 1, 2}});
    const auto s = corpus_stats(c);
    REQUIRE(s.by_age.size() == 5);
    CHECK(s.by_age[0].profiles == 2);
    CHECK(*s.by_age[0].by_profile.mean == 3.0);
    CHECK(*s.by_age[0].by_profile.stddev == 1.0);
    CHECK(*s.by_age[0].in_tweets.mean == 1.5);
    CHECK(*s.by_age[0].in_tweets.stddev == 1.5);
    CHECK(*s.by_age[0].in_retweets.mean == 1.5);
    CHECK(*s.by_age[0].in_retweets.stddev == 0.5);
    CHECK(*s.by_age[1].by_profile.mean == 5.0);
    CHECK(*s.by_age[1].by_profile.stddev == 0.0);
    CHECK(*s.by_age[2].by_profile.mean == 0.0);
    CHECK(*s.by_age[3].by_profile.mean == 1.0);
    CHECK(*s.by_age[4].by_profile.mean == 3.0);
    CHECK(s.by_age[4].tweeted == 1);
    CHECK(s.by_age[4].retweeted == 2);
    // female {4, 5, 1}: mean 10/3, population variance 26/9
    CHECK(*s.by_gender[0].by_profile.mean == doctest::Approx(10.0 / 3.0).epsilon(1e-15));
    CHECK(*s.by_gender[0].by_profile.stddev == doctest::Approx(std::sqrt(26.0 / 9.0)).epsilon(1e-15));
    CHECK(s.profiles_without_images == 1);

    const auto md = stats_to_markdown(s);
    CHECK(md.find("| EN | 18-24 | 2 | 3 (±1) | 2 (±2) | 2 (±0) |") != std::string::npos);
    CHECK(md.find("| EN | female | 3 | 3 (±2) |") != std::string::npos);
}

TEST_CASE("stats: empty corpus has absent means and deviations") {
    const auto s = corpus_stats(Corpus{});
    CHECK(s.overall.profiles == 0);
    CHECK_FALSE(s.overall.by_profile.mean);
    const auto j = stats_to_json(s);
    CHECK_FALSE(j["overall"]["by_profile"].contains("mean"));
    CHECK_FALSE(j["overall"]["by_profile"].contains("std"));
    CHECK(stats_to_markdown(s).find("| - |") != std::string::npos);
}

TEST_CASE("stats: markdown uses thousands separators") {
    std::vector<ProfileSpec> specs{{"a", Gender::female, AgeRange::age_18_24, {}, 1234, 0}};
    const auto md = stats_to_markdown(corpus_stats(make_corpus(specs)));
    CHECK(md.find("| Images tweeted | 1,234 |") != std::string::npos);
}

TEST_CASE("stats: counts add up and are invariant to ordering") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<ProfileSpec> specs;
        const std::size_t n = 1 + rng() % 15;
        std::size_t total = 0;
        for (std::size_t i = 0; i < n; ++i) {
            specs.push_back({"p" + std::to_string(i), kAllGenders[rng() % 2], kAllAgeRanges[rng() % 5], {},
                             rng() % 30, rng() % 30});
            total += specs.back().tweeted + specs.back().retweeted;
        }
        const auto s = corpus_stats(make_corpus(specs));
        CHECK(s.overall.tweeted + s.overall.retweeted == total);
        std::size_t by_profile = 0;
        for (const auto& g : s.by_gender) by_profile += g.tweeted + g.retweeted;
        CHECK(by_profile == total);

        std::vector<double> counts;
        for (const auto& p : specs) counts.push_back(static_cast<double>(p.tweeted + p.retweeted));
        CHECK(*s.overall.by_profile.mean == doctest::Approx(testing::mean_of(counts)).epsilon(1e-12));
        CHECK(*s.overall.by_profile.stddev == doctest::Approx(testing::pop_std_of(counts)).epsilon(1e-9));

        std::shuffle(specs.begin(), specs.end(), rng);
        CHECK(stats_to_json(corpus_stats(make_corpus(specs))) == stats_to_json(s));
    }
}

}
