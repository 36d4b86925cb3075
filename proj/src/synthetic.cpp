// SPDX-License-Identifier: Apache-2.0
#include "viprof/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include "viprof/error.hpp"
#include "viprof/io.hpp"

namespace viprof {

namespace {

std::string numbered(const char* prefix, std::size_t n, int width) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, n);
    return buf;
}

// Signal words are plain alphanumerics so the tokenizer keeps them whole.
std::string gender_term(std::size_t g, std::size_t j) { return "sig" + numbered("g", g, 1) + numbered("w", j, 3); }
std::string age_term(std::size_t a, std::size_t j) { return "sig" + numbered("a", a, 1) + numbered("w", j, 3); }

// Preferred categories: ten per gender starting at 100*g, ten per age range starting at 500 + 50*a.
constexpr std::size_t kPreferred = 10;

} // namespace

void SynthSpec::validate() const {
    if (profiles == 0) throw UsageError("synthetic spec needs at least one profile");
    if (gender_classes == 0 || gender_classes > 2) throw UsageError("gender_classes must be 1 or 2");
    if (age_classes == 0 || age_classes > 5) throw UsageError("age_classes must be between 1 and 5");
    if (images_min > images_max) throw UsageError("images_min exceeds images_max");
    if (!(retweet_fraction >= 0 && retweet_fraction <= 1)) throw UsageError("retweet_fraction must be in [0, 1]");
    if (!(text_signal >= 0 && text_signal <= 1)) throw UsageError("text_signal must be in [0, 1]");
    if (!(separation >= 0) || !std::isfinite(separation)) throw UsageError("separation must be finite and >= 0");
    if (!(spread >= 0) || !std::isfinite(spread)) throw UsageError("spread must be finite and >= 0");
    if (!std::isfinite(category_boost)) throw UsageError("category_boost must be finite");
    if (background_terms == 0) throw UsageError("background_terms must be positive");
    if (text_signal > 0 && signal_terms == 0) throw UsageError("text_signal > 0 needs signal_terms > 0");
}

nlohmann::ordered_json synth_spec_to_json(const SynthSpec& s) {
    return {{"profiles", s.profiles},
            {"language", to_string(s.language)},
            {"gender_classes", s.gender_classes},
            {"age_classes", s.age_classes},
            {"images_min", s.images_min},
            {"images_max", s.images_max},
            {"retweet_fraction", s.retweet_fraction},
            {"separation", s.separation},
            {"spread", s.spread},
            {"softmax", s.softmax},
            {"category_boost", s.category_boost},
            {"text_signal", s.text_signal},
            {"tweets", s.tweets},
            {"tokens_per_tweet", s.tokens_per_tweet},
            {"background_terms", s.background_terms},
            {"signal_terms", s.signal_terms},
            {"seed", s.seed}};
}

SynthSpec synth_spec_from_json(const nlohmann::json& j) {
    SynthSpec s;
    try {
        s.profiles = j.value("profiles", s.profiles);
        if (j.contains("language")) {
            auto l = parse_language(j.at("language").get<std::string>());
            if (!l) throw UsageError("unknown language in synthetic spec");
            s.language = *l;
        }
        s.gender_classes = j.value("gender_classes", s.gender_classes);
        s.age_classes = j.value("age_classes", s.age_classes);
        s.images_min = j.value("images_min", s.images_min);
        s.images_max = j.value("images_max", s.images_max);
        s.retweet_fraction = j.value("retweet_fraction", s.retweet_fraction);
        s.separation = j.value("separation", s.separation);
        s.spread = j.value("spread", s.spread);
        s.softmax = j.value("softmax", s.softmax);
        s.category_boost = j.value("category_boost", s.category_boost);
        s.text_signal = j.value("text_signal", s.text_signal);
        s.tweets = j.value("tweets", s.tweets);
        s.tokens_per_tweet = j.value("tokens_per_tweet", s.tokens_per_tweet);
        s.background_terms = j.value("background_terms", s.background_terms);
        s.signal_terms = j.value("signal_terms", s.signal_terms);
        s.seed = j.value("seed", s.seed);
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("malformed synthetic spec: ") + e.what());
    }
    return s;
}

SyntheticData generate_synthetic(const SynthSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> image_count(spec.images_min, spec.images_max);
    std::uniform_int_distribution<std::size_t> background(0, spec.background_terms - 1);
    std::uniform_int_distribution<std::size_t> signal(0, spec.signal_terms == 0 ? 0 : spec.signal_terms - 1);

    const double offset = spec.separation / std::sqrt(2.0);
    const std::size_t hidden = expected_length(EmbeddingLayer::hidden4096);
    const std::size_t categories = expected_length(EmbeddingLayer::softmax1000);

    std::vector<Profile> profiles;
    std::vector<ImageRecord> images;
    EmbeddingStore store;
    for (std::size_t i = 0; i < spec.profiles; ++i) {
        Profile p;
        p.id = numbered("u", i, 4);
        p.language = spec.language;
        const std::size_t g = i % spec.gender_classes;
        const std::size_t a = (i / spec.gender_classes) % spec.age_classes;
        p.gender = kAllGenders[g];
        p.age = kAllAgeRanges[a];

        for (std::size_t t = 0; t < spec.tweets; ++t) {
            std::string tweet;
            for (std::size_t k = 0; k < spec.tokens_per_tweet; ++k) {
                if (!tweet.empty()) tweet += ' ';
                if (unit(rng) < spec.text_signal) {
                    const bool gender_pool = unit(rng) < 0.5;
                    tweet += gender_pool ? gender_term(g, signal(rng)) : age_term(a, signal(rng));
                } else {
                    tweet += numbered("w", background(rng), 4);
                }
            }
            p.tweets.push_back(std::move(tweet));
        }

        const std::size_t n_images = image_count(rng);
        for (std::size_t m = 0; m < n_images; ++m) {
            ImageRecord img;
            img.id = p.id + numbered("_i", m, 3);
            img.profile_id = p.id;
            img.source = unit(rng) < spec.retweet_fraction ? ImageSource::retweeted : ImageSource::tweeted;

            EmbeddingVector h{img.id, EmbeddingLayer::hidden4096, std::vector<float>(hidden)};
            for (std::size_t d = 0; d < hidden; ++d) {
                double x = spec.spread * noise(rng);
                if (d == g || d == 2 + a) x += offset;
                h.values[d] = static_cast<float>(x);
            }
            store.add(std::move(h));

            if (spec.softmax) {
                std::vector<double> logits(categories);
                for (auto& l : logits) l = noise(rng);
                if (spec.separation > 0) {
                    for (std::size_t c = 0; c < kPreferred; ++c) {
                        logits[100 * g + c] += spec.category_boost;
                        logits[500 + 50 * a + c] += spec.category_boost;
                    }
                }
                double mx = logits[0];
                for (double l : logits) mx = std::max(mx, l);
                double z = 0;
                for (auto& l : logits) z += (l = std::exp(l - mx));
                EmbeddingVector s{img.id, EmbeddingLayer::softmax1000, std::vector<float>(categories)};
                for (std::size_t c = 0; c < categories; ++c) s.values[c] = static_cast<float>(logits[c] / z);
                store.add(std::move(s));
            }
            p.image_ids.push_back(img.id);
            images.push_back(std::move(img));
        }
        profiles.push_back(std::move(p));
    }
    return {Corpus(spec.language, std::move(profiles), std::move(images)), std::move(store)};
}

void write_synthetic(const SyntheticData& data, const std::filesystem::path& dir) {
    write_corpus_dir(data.corpus, dir / "corpus");
    io::write_file_atomic(dir / "embeddings.jsonl", embeddings_to_jsonl(data.embeddings));
}

} // namespace viprof
