// SPDX-License-Identifier: Apache-2.0
//
// Per-image CNN representations and the per-profile visual prototype.
#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "viprof/corpus.hpp"
#include "viprof/features.hpp"

namespace viprof {

enum class EmbeddingLayer { hidden4096, softmax1000 };

std::string_view to_string(EmbeddingLayer layer);
std::optional<EmbeddingLayer> parse_layer(std::string_view token);
constexpr std::size_t expected_length(EmbeddingLayer layer) noexcept {
    return layer == EmbeddingLayer::hidden4096 ? 4096 : 1000;
}

struct EmbeddingVector {
    std::string image_id;
    EmbeddingLayer layer = EmbeddingLayer::hidden4096;
    std::vector<float> values;
};

/// Image embeddings keyed by (image_id, layer). At most one vector per key;
/// every vector of a layer has that layer's length.
class EmbeddingStore {
public:
    /// Throws DataError on a duplicate key, a length mismatch or a non-finite value.
    void add(EmbeddingVector v);

    const EmbeddingVector* find(std::string_view image_id, EmbeddingLayer layer) const;
    std::size_t size() const noexcept;
    std::size_t size(EmbeddingLayer layer) const noexcept;
    /// All records, ordered by layer then image id.
    std::vector<const EmbeddingVector*> records() const;

private:
    std::map<EmbeddingLayer, std::unordered_map<std::string, EmbeddingVector>> by_layer_;
};

/// One JSON object per line: {"image_id", "layer", "values"}.
EmbeddingStore parse_embeddings(std::string_view jsonl, const std::string& origin = "<memory>");
EmbeddingStore load_embeddings(const std::filesystem::path& path);
/// Shortest round-trip float formatting, so rewriting a loaded file is lossless.
std::string embedding_to_jsonl(const EmbeddingVector& v);
std::string embeddings_to_jsonl(const EmbeddingStore& store);

enum class SourceFilter { all, tweeted, retweeted };

std::string_view to_string(SourceFilter f);
/// Accepts all, tweets/tweeted, retweets/retweeted.
std::optional<SourceFilter> parse_source_filter(std::string_view token);
bool matches(SourceFilter f, ImageSource s) noexcept;

struct Prototype {
    std::string profile_id;
    DenseVector values;
    std::size_t image_count = 0;     ///< vectors actually averaged
    std::size_t missing = 0;         ///< selected images without a hidden4096 vector
    SourceFilter source_filter = SourceFilter::all;
    bool degenerate() const noexcept { return image_count == 0; }
};

/// Componentwise mean of the hidden4096 vectors of the profile's images that
/// pass the filter. With no usable image the result is the zero vector.
Prototype build_prototype(const Corpus& corpus, const Profile& profile, const EmbeddingStore& store,
                          SourceFilter filter);

enum class BlockNormalization { none, l2 };

/// [bow | prototype], optionally scaling each block to unit L2 norm.
DenseVector concat_multimodal(const SparseVector& bow, const Prototype& proto,
                              BlockNormalization norm = BlockNormalization::none);

} // namespace viprof
