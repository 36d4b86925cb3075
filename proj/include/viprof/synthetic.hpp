// SPDX-License-Identifier: Apache-2.0
//
// Seeded synthetic corpora with a tunable planted class signal in the text,
// the image embeddings, or both.
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>

#include <json.hpp>

#include "viprof/corpus.hpp"
#include "viprof/visual_features.hpp"

namespace viprof {

struct SynthSpec {
    std::size_t profiles = 40;
    Language language = Language::en;
    std::size_t gender_classes = 2;     ///< 1..2, dealt round-robin
    std::size_t age_classes = 5;        ///< 1..5
    std::size_t images_min = 15;        ///< images per profile, uniform in [min, max]
    std::size_t images_max = 25;
    double retweet_fraction = 0.5;

    // Visual signal: class means sit separation/sqrt(2) along one axis for the
    // gender and one for the age class, so two profiles that differ in one
    // label have means exactly `separation` apart. Noise is N(0, spread^2) per
    // dimension.
    double separation = 10.0;
    double spread = 1.0;
    bool softmax = true;                ///< also emit softmax1000 scores
    double category_boost = 3.0;        ///< logit boost of class-preferred categories (only with separation > 0)

    // Text signal: each token is drawn from the class vocabulary with this
    // probability, otherwise from the shared background vocabulary.
    double text_signal = 0.0;
    std::size_t tweets = 20;
    std::size_t tokens_per_tweet = 12;
    std::size_t background_terms = 2000;
    std::size_t signal_terms = 20;      ///< per class

    std::uint64_t seed = 1;

    /// Throws UsageError on an inconsistent spec (zero classes, empty ranges, ...).
    void validate() const;
};

nlohmann::ordered_json synth_spec_to_json(const SynthSpec& spec);
SynthSpec synth_spec_from_json(const nlohmann::json& j);

struct SyntheticData {
    Corpus corpus;
    EmbeddingStore embeddings;
};

/// Deterministic for a given spec and standard library.
SyntheticData generate_synthetic(const SynthSpec& spec);

/// `dir/corpus/` in the load_corpus layout plus `dir/embeddings.jsonl`.
void write_synthetic(const SyntheticData& data, const std::filesystem::path& dir);

} // namespace viprof
