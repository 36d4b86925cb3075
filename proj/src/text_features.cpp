// SPDX-License-Identifier: Apache-2.0
#include "viprof/text_features.hpp"

#include <algorithm>
#include <map>

#include <locale.h>
#include <wctype.h>

#include "viprof/error.hpp"

namespace viprof {

namespace {

locale_t utf8_ctype() {
    static const locale_t loc = [] {
        locale_t l = newlocale(LC_CTYPE_MASK, "C.UTF-8", static_cast<locale_t>(nullptr));
        if (!l) l = newlocale(LC_CTYPE_MASK, "en_US.UTF-8", static_cast<locale_t>(nullptr));
        return l;
    }();
    return loc;
}

constexpr char32_t kInvalid = 0xFFFFFFFF;

// Decodes one code point starting at text[i] and advances i. Malformed
// sequences consume one byte and yield kInvalid.
char32_t next_code_point(std::string_view text, std::size_t& i) {
    const auto b0 = static_cast<unsigned char>(text[i]);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    int len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        ++i;
        return kInvalid;
    }
    if (i + static_cast<std::size_t>(len) > text.size()) {
        ++i;
        return kInvalid;
    }
    for (int k = 1; k < len; ++k) {
        const auto b = static_cast<unsigned char>(text[i + static_cast<std::size_t>(k)]);
        if ((b & 0xC0) != 0x80) {
            ++i;
            return kInvalid;
        }
        cp = (cp << 6) | (b & 0x3F);
    }
    static constexpr char32_t min_for_len[] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < min_for_len[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
        ++i;
        return kInvalid;
    }
    i += static_cast<std::size_t>(len);
    return cp;
}

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

bool is_word_char(char32_t cp, locale_t loc) {
    if (cp == kInvalid) return false;
    if (cp < 0x80) return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || (cp >= '0' && cp <= '9');
    return loc && iswalnum_l(static_cast<wint_t>(cp), loc);
}

char32_t lower(char32_t cp, locale_t loc) {
    if (cp < 0x80) return (cp >= 'A' && cp <= 'Z') ? cp + 32 : cp;
    return loc ? static_cast<char32_t>(towlower_l(static_cast<wint_t>(cp), loc)) : cp;
}

} // namespace

Tokens tokenize(std::string_view text) {
    const locale_t loc = utf8_ctype();
    Tokens tokens;
    std::string cur;
    std::size_t i = 0;
    while (i < text.size()) {
        const char32_t cp = next_code_point(text, i);
        if (is_word_char(cp, loc)) {
            append_utf8(cur, lower(cp, loc));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

Tokens profile_tokens(const Profile& profile) {
    Tokens all;
    for (const auto& tweet : profile.tweets) {
        auto t = tokenize(tweet);
        all.insert(all.end(), std::make_move_iterator(t.begin()), std::make_move_iterator(t.end()));
    }
    return all;
}

Vocabulary::Vocabulary(std::vector<std::string> terms) : terms_(std::move(terms)) {
    index_.reserve(terms_.size());
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        if (!index_.emplace(terms_[i], static_cast<std::uint32_t>(i)).second)
            throw UsageError("duplicate vocabulary term: " + terms_[i]);
    }
}

std::optional<std::uint32_t> Vocabulary::index_of(std::string_view term) const {
    auto it = index_.find(std::string(term));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

Vocabulary build_vocabulary(const std::vector<Tokens>& docs, std::size_t k) {
    if (k == 0) throw UsageError("vocabulary size k must be at least 1");
    std::unordered_map<std::string, std::size_t> freq;
    for (const auto& doc : docs)
        for (const auto& t : doc) ++freq[t];

    std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
    const auto by_rank = [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    };
    const std::size_t keep = std::min(k, ranked.size());
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep), ranked.end(), by_rank);

    std::vector<std::string> terms;
    terms.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) terms.push_back(std::move(ranked[i].first));
    return Vocabulary(std::move(terms));
}

SparseVector vectorize(const Tokens& tokens, const Vocabulary& vocab, TermWeighting weighting) {
    std::map<std::uint32_t, double> counts;
    for (const auto& t : tokens) {
        if (auto idx = vocab.index_of(t)) counts[*idx] += 1.0;
    }
    std::vector<SparseVector::Entry> entries(counts.begin(), counts.end());
    if (weighting == TermWeighting::binary)
        for (auto& e : entries) e.second = 1.0;
    return SparseVector(vocab.size(), std::move(entries));
}

nlohmann::json vocabulary_to_json(const Vocabulary& vocab) { return vocab.terms(); }

Vocabulary vocabulary_from_json(const nlohmann::json& j) {
    try {
        return Vocabulary(j.get<std::vector<std::string>>());
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed vocabulary: ") + e.what());
    }
}

} // namespace viprof
