// SPDX-License-Identifier: Apache-2.0
//
// Bag-of-words text representation: tokenizer, top-k vocabulary and
// count vectorizer.
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "viprof/corpus.hpp"
#include "viprof/features.hpp"

namespace viprof {

using Tokens = std::vector<std::string>;

/// Lowercased maximal runs of Unicode letters/digits. Everything else,
/// including malformed UTF-8, separates tokens.
Tokens tokenize(std::string_view text);

/// Tokens of all tweets of a profile, in order.
Tokens profile_tokens(const Profile& profile);

class Vocabulary {
public:
    Vocabulary() = default;
    /// Throws UsageError on duplicate terms.
    explicit Vocabulary(std::vector<std::string> terms);

    const std::vector<std::string>& terms() const noexcept { return terms_; }
    std::size_t size() const noexcept { return terms_.size(); }
    std::optional<std::uint32_t> index_of(std::string_view term) const;

private:
    std::vector<std::string> terms_;
    std::unordered_map<std::string, std::uint32_t> index_;
};

/// The k most frequent terms (descending frequency, ties lexicographic).
Vocabulary build_vocabulary(const std::vector<Tokens>& docs, std::size_t k);

enum class TermWeighting { counts, binary };

SparseVector vectorize(const Tokens& tokens, const Vocabulary& vocab,
                       TermWeighting weighting = TermWeighting::counts);

nlohmann::json vocabulary_to_json(const Vocabulary& vocab);
Vocabulary vocabulary_from_json(const nlohmann::json& j);

inline constexpr std::size_t kBowSmall = 2000;
inline constexpr std::size_t kBowLarge = 10000;

} // namespace viprof
