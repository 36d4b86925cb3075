// SPDX-License-Identifier: Apache-2.0
#include "viprof/visual_features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include <json.hpp>

#include "viprof/error.hpp"
#include "viprof/io.hpp"

namespace viprof {

std::string_view to_string(EmbeddingLayer layer) {
    return layer == EmbeddingLayer::hidden4096 ? "hidden4096" : "softmax1000";
}

std::optional<EmbeddingLayer> parse_layer(std::string_view token) {
    if (token == "hidden4096") return EmbeddingLayer::hidden4096;
    if (token == "softmax1000") return EmbeddingLayer::softmax1000;
    return std::nullopt;
}

void EmbeddingStore::add(EmbeddingVector v) {
    const std::size_t want = expected_length(v.layer);
    if (v.values.size() != want)
        throw DataError("embedding for image " + v.image_id + " tagged " + std::string(to_string(v.layer)) +
                        " has " + std::to_string(v.values.size()) + " values, expected " + std::to_string(want));
    for (float x : v.values)
        if (!std::isfinite(x)) throw DataError("non-finite embedding value for image " + v.image_id);
    auto& layer = by_layer_[v.layer];
    const std::string key = v.image_id;
    if (!layer.emplace(key, std::move(v)).second)
        throw DataError("duplicate embedding for image " + key + " layer " +
                        std::string(to_string(layer.at(key).layer)));
}

const EmbeddingVector* EmbeddingStore::find(std::string_view image_id, EmbeddingLayer layer) const {
    auto l = by_layer_.find(layer);
    if (l == by_layer_.end()) return nullptr;
    auto it = l->second.find(std::string(image_id));
    return it == l->second.end() ? nullptr : &it->second;
}

std::size_t EmbeddingStore::size() const noexcept {
    std::size_t n = 0;
    for (const auto& [_, m] : by_layer_) n += m.size();
    return n;
}

std::size_t EmbeddingStore::size(EmbeddingLayer layer) const noexcept {
    auto l = by_layer_.find(layer);
    return l == by_layer_.end() ? 0 : l->second.size();
}

std::vector<const EmbeddingVector*> EmbeddingStore::records() const {
    std::vector<const EmbeddingVector*> out;
    for (const auto& [_, m] : by_layer_) {
        std::vector<const EmbeddingVector*> layer;
        for (const auto& [__, v] : m) layer.push_back(&v);
        std::sort(layer.begin(), layer.end(), [](auto* a, auto* b) { return a->image_id < b->image_id; });
        out.insert(out.end(), layer.begin(), layer.end());
    }
    return out;
}

EmbeddingStore parse_embeddings(std::string_view jsonl, const std::string& origin) {
    EmbeddingStore store;
    std::size_t line_no = 0;
    for (std::string_view line : io::split_lines(jsonl)) {
        ++line_no;
        if (io::trim(line).empty()) continue;
        const std::string where = origin + ":" + std::to_string(line_no);
        EmbeddingVector v;
        try {
            const auto j = nlohmann::json::parse(line);
            v.image_id = j.at("image_id").get<std::string>();
            auto layer = parse_layer(j.at("layer").get<std::string>());
            if (!layer) throw DataError("unknown layer tag at " + where);
            v.layer = *layer;
            const auto& vals = j.at("values");
            if (!vals.is_array()) throw DataError("values must be an array at " + where);
            v.values.reserve(vals.size());
            for (const auto& x : vals) v.values.push_back(static_cast<float>(x.get<double>()));
        } catch (const nlohmann::json::exception& e) {
            throw DataError("malformed embedding record at " + where + ": " + e.what());
        }
        try {
            store.add(std::move(v));
        } catch (const DataError& e) {
            throw DataError(std::string(e.what()) + " at " + where);
        }
    }
    return store;
}

EmbeddingStore load_embeddings(const std::filesystem::path& path) {
    return parse_embeddings(io::read_text_file(path), path.string());
}

std::string embedding_to_jsonl(const EmbeddingVector& v) {
    std::string out = nlohmann::json{{"image_id", v.image_id}}.dump();
    out.pop_back();  // reopen the object
    out += ",\"layer\":\"";
    out += to_string(v.layer);
    out += "\",\"values\":[";
    char buf[32];
    for (std::size_t i = 0; i < v.values.size(); ++i) {
        if (i) out += ',';
        auto res = std::to_chars(buf, buf + sizeof buf, v.values[i]);
        out.append(buf, res.ptr);
    }
    out += "]}\n";
    return out;
}

std::string embeddings_to_jsonl(const EmbeddingStore& store) {
    std::string out;
    for (const auto* v : store.records()) out += embedding_to_jsonl(*v);
    return out;
}

std::string_view to_string(SourceFilter f) {
    switch (f) {
    case SourceFilter::all: return "all";
    case SourceFilter::tweeted: return "tweets";
    case SourceFilter::retweeted: return "retweets";
    }
    return "?";
}

std::optional<SourceFilter> parse_source_filter(std::string_view token) {
    if (token == "all") return SourceFilter::all;
    if (token == "tweets" || token == "tweeted") return SourceFilter::tweeted;
    if (token == "retweets" || token == "retweeted") return SourceFilter::retweeted;
    return std::nullopt;
}

bool matches(SourceFilter f, ImageSource s) noexcept {
    switch (f) {
    case SourceFilter::all: return true;
    case SourceFilter::tweeted: return s == ImageSource::tweeted;
    case SourceFilter::retweeted: return s == ImageSource::retweeted;
    }
    return false;
}

Prototype build_prototype(const Corpus& corpus, const Profile& profile, const EmbeddingStore& store,
                          SourceFilter filter) {
    Prototype proto;
    proto.profile_id = profile.id;
    proto.source_filter = filter;
    proto.values.assign(expected_length(EmbeddingLayer::hidden4096), 0.0);
    for (const auto* img : corpus.images_of(profile)) {
        if (!matches(filter, img->source)) continue;
        const auto* v = store.find(img->id, EmbeddingLayer::hidden4096);
        if (!v) {
            ++proto.missing;
            continue;
        }
        for (std::size_t i = 0; i < v->values.size(); ++i) proto.values[i] += static_cast<double>(v->values[i]);
        ++proto.image_count;
    }
    if (proto.image_count > 0) {
        const double n = static_cast<double>(proto.image_count);
        for (double& x : proto.values) x /= n;
    }
    return proto;
}

DenseVector concat_multimodal(const SparseVector& bow, const Prototype& proto, BlockNormalization norm) {
    DenseVector out(bow.dimension() + proto.values.size(), 0.0);
    double bow_norm = 1.0, proto_norm = 1.0;
    if (norm == BlockNormalization::l2) {
        const double bn = std::sqrt(bow.squared_norm());
        double pn = 0;
        for (double x : proto.values) pn += x * x;
        pn = std::sqrt(pn);
        if (bn > 0) bow_norm = bn;
        if (pn > 0) proto_norm = pn;
    }
    for (const auto& [idx, val] : bow.entries()) out[idx] = val / bow_norm;
    std::transform(proto.values.begin(), proto.values.end(), out.begin() + static_cast<std::ptrdiff_t>(bow.dimension()),
                   [&](double x) { return x / proto_norm; });
    return out;
}

} // namespace viprof
