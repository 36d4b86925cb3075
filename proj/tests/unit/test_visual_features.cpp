#include <doctest.h>

#include <cmath>
#include <random>
#include <string>

#include "support.hpp"
#include "viprof/error.hpp"
#include "viprof/visual_features.hpp"

using namespace viprof;
using namespace viprof::testing;

namespace {

std::string record(const std::string& id, const std::string& layer, std::size_t n, double value = 0.5) {
    std::string s = R"({"image_id":")" + id + R"(","layer":")" + layer + R"(","values":[)";
    for (std::size_t i = 0; i < n; ++i) s += (i ? "," : "") + std::to_string(value);
    return s + "]}\n";
}

} // namespace

TEST_SUITE("visual_features") {

TEST_CASE("layer tags round-trip") {
    for (auto l : {EmbeddingLayer::hidden4096, EmbeddingLayer::softmax1000}) CHECK(parse_layer(to_string(l)) == l);
    CHECK_FALSE(parse_layer("fc7"));
    CHECK(expected_length(EmbeddingLayer::hidden4096) == 4096);
    CHECK(expected_length(EmbeddingLayer::softmax1000) == 1000);
}

TEST_CASE("embedding store rejects bad records") {
    EmbeddingStore s;
    s.add(hidden("a", {1.0f}));
    CHECK_THROWS_AS(s.add(hidden("a", {2.0f})), DataError);
    CHECK_THROWS_AS(s.add({"b", EmbeddingLayer::hidden4096, std::vector<float>(1000)}), DataError);
    CHECK_THROWS_AS(s.add({"b", EmbeddingLayer::softmax1000, std::vector<float>(4096)}), DataError);
    auto bad = hidden("c", {NAN});
    CHECK_THROWS_AS(s.add(bad), DataError);
    // Same image id on the other layer is a different key.
    s.add(scores_at("a", 3));
    CHECK(s.size() == 2);
    CHECK(s.size(EmbeddingLayer::hidden4096) == 1);
    CHECK(s.find("a", EmbeddingLayer::softmax1000)->values[3] == 1.0f);
    CHECK(s.find("zz", EmbeddingLayer::hidden4096) == nullptr);
}

TEST_CASE("parse embeddings names the offending line") {
    const std::string good = record("img1", "hidden4096", 4096) + "\n" + record("img1", "softmax1000", 1000);
    const auto store = parse_embeddings(good, "emb.jsonl");
    CHECK(store.size() == 2);

    auto message_of = [](const std::string& text) {
        try {
            parse_embeddings(text, "emb.jsonl");
        } catch (const DataError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message_of(record("x", "hidden4096", 4095)).find("emb.jsonl:1") != std::string::npos);
    CHECK(message_of(good + record("img1", "hidden4096", 4096)).find("emb.jsonl:4") != std::string::npos);
    CHECK(message_of(record("x", "fc8", 1000)).find("unknown layer") != std::string::npos);
    CHECK(message_of("{not json}\n").find("malformed") != std::string::npos);
    CHECK(message_of(R"({"image_id":"x","layer":"softmax1000","values":"no"})").find("emb.jsonl:1") !=
          std::string::npos);
    // A value that overflows float is not finite once stored.
    std::string huge = record("x", "softmax1000", 999);
    huge.insert(huge.size() - 3, ",1e300");
    CHECK(message_of(huge).find("non-finite") != std::string::npos);
}

TEST_CASE("embeddings JSONL round-trips losslessly") {
    std::mt19937 rng(9);
    std::normal_distribution<float> d(0.0f, 3.0f);
    EmbeddingStore s;
    for (int i = 0; i < 5; ++i) {
        EmbeddingVector v{"im" + std::to_string(i), EmbeddingLayer::hidden4096, std::vector<float>(4096)};
        for (auto& x : v.values) x = d(rng);
        s.add(v);
        EmbeddingVector p{"im" + std::to_string(i), EmbeddingLayer::softmax1000, std::vector<float>(1000)};
        for (auto& x : p.values) x = std::abs(d(rng)) * 1e-7f;
        s.add(p);
    }
    const std::string text = embeddings_to_jsonl(s);
    const auto back = parse_embeddings(text);
    CHECK(embeddings_to_jsonl(back) == text);
    for (const auto* r : s.records()) CHECK(back.find(r->image_id, r->layer)->values == r->values);
    // records() orders by layer then id
    const auto recs = s.records();
    CHECK(recs.front()->layer == EmbeddingLayer::hidden4096);
    CHECK(recs.front()->image_id == "im0");
    CHECK(recs.back()->layer == EmbeddingLayer::softmax1000);
}

TEST_CASE("source filters") {
    CHECK(parse_source_filter("tweets") == SourceFilter::tweeted);
    CHECK(parse_source_filter("retweeted") == SourceFilter::retweeted);
    CHECK(parse_source_filter("all") == SourceFilter::all);
    CHECK_FALSE(parse_source_filter("quotes"));
    CHECK(matches(SourceFilter::all, ImageSource::retweeted));
    CHECK(matches(SourceFilter::tweeted, ImageSource::tweeted));
    CHECK_FALSE(matches(SourceFilter::tweeted, ImageSource::retweeted));
    CHECK_FALSE(matches(SourceFilter::retweeted, ImageSource::tweeted));
}

TEST_CASE("prototype is the mean of the selected hidden vectors") {
    const auto corpus = make_corpus({{"p", Gender::male, AgeRange::age_25_34, {}, 2, 1}});
    EmbeddingStore s;
    s.add(hidden("p_t0", {1.0f, 2.0f}));
    s.add(hidden("p_t1", {3.0f, -2.0f}));
    s.add(hidden("p_r0", {8.0f, 8.0f}));
    const auto& prof = corpus.profiles()[0];

    const auto all = build_prototype(corpus, prof, s, SourceFilter::all);
    CHECK(all.image_count == 3);
    CHECK(all.values[0] == doctest::Approx(4.0));
    CHECK(all.values[1] == doctest::Approx(8.0 / 3.0));
    CHECK(all.values.size() == 4096);

    const auto tw = build_prototype(corpus, prof, s, SourceFilter::tweeted);
    CHECK(tw.values[0] == 2.0);
    CHECK(tw.values[1] == 0.0);
    CHECK(tw.source_filter == SourceFilter::tweeted);

    const auto rt = build_prototype(corpus, prof, s, SourceFilter::retweeted);
    CHECK(rt.values[0] == 8.0);
    CHECK(rt.image_count == 1);
}

TEST_CASE("prototype with no usable image is the degenerate zero vector") {
    const auto corpus = make_corpus({{"p", Gender::male, AgeRange::age_25_34, {}, 2, 0},
                                     {"q", Gender::female, AgeRange::age_25_34, {}, 0, 0}});
    EmbeddingStore s;
    const auto p = build_prototype(corpus, corpus.profiles()[0], s, SourceFilter::all);
    CHECK(p.degenerate());
    CHECK(p.missing == 2);
    CHECK(std::all_of(p.values.begin(), p.values.end(), [](double x) { return x == 0.0; }));
    const auto q = build_prototype(corpus, corpus.profiles()[1], s, SourceFilter::all);
    CHECK(q.degenerate());
    CHECK(q.missing == 0);
    // Softmax vectors alone do not count.
    s.add(scores_at("p_t0", 1));
    CHECK(build_prototype(corpus, corpus.profiles()[0], s, SourceFilter::all).degenerate());
}

TEST_CASE("prototype properties on random data") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<float> u(-5.0f, 5.0f);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 1 + rng() % 6;
        const auto corpus = make_corpus({{"p", Gender::male, AgeRange::age_25_34, {}, n, 0}});
        EmbeddingStore s;
        std::vector<std::vector<float>> heads;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<float> h{u(rng), u(rng), u(rng)};
            heads.push_back(h);
            s.add(hidden("p_t" + std::to_string(i), h));
        }
        const auto proto = build_prototype(corpus, corpus.profiles()[0], s, SourceFilter::all);
        for (std::size_t d = 0; d < 3; ++d) {
            double lo = 1e9, hi = -1e9, sum = 0;
            for (const auto& h : heads) {
                lo = std::min(lo, double(h[d]));
                hi = std::max(hi, double(h[d]));
                sum += h[d];
            }
            // inside the hull of the inputs and equal to the textbook mean
            CHECK(proto.values[d] >= lo - 1e-9);
            CHECK(proto.values[d] <= hi + 1e-9);
            CHECK(proto.values[d] == doctest::Approx(sum / double(n)).epsilon(1e-12));
        }
    }
}

TEST_CASE("multimodal concatenation") {
    const SparseVector bow(3, {{0, 3.0}, {2, 4.0}});
    Prototype proto;
    proto.values.assign(4096, 0.0);
    proto.values[0] = 6.0;
    proto.values[1] = 8.0;
    proto.image_count = 1;

    const auto raw = concat_multimodal(bow, proto);
    CHECK(raw.size() == 3 + 4096);
    CHECK(raw[0] == 3.0);
    CHECK(raw[1] == 0.0);
    CHECK(raw[2] == 4.0);
    CHECK(raw[3] == 6.0);
    CHECK(raw[4] == 8.0);

    const auto normed = concat_multimodal(bow, proto, BlockNormalization::l2);
    CHECK(normed[0] == doctest::Approx(0.6));
    CHECK(normed[2] == doctest::Approx(0.8));
    CHECK(normed[3] == doctest::Approx(0.6));
    CHECK(normed[4] == doctest::Approx(0.8));

    // Zero blocks stay zero instead of dividing by zero.
    Prototype empty;
    empty.values.assign(4096, 0.0);
    const auto z = concat_multimodal(SparseVector(3), empty, BlockNormalization::l2);
    CHECK(std::all_of(z.begin(), z.end(), [](double x) { return x == 0.0; }));
}

}
