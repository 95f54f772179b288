#pragma once
// Text embeddings for landmark descriptions. Providers are pluggable behind
// the Embedder interface; the default hashes lowercase character trigrams and
// whitespace tokens into a fixed-size counted bag, so identical strings embed
// identically and near-identical phrases land close in cosine space.

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "lookaside/common.hpp"

namespace lookaside::slkb {

using EmbeddingVector = std::vector<double>;

inline double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.size() != b.size()) throw Error("embedding dimension mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) throw Error("zero-norm embedding");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual EmbeddingVector embed(std::string_view text) const = 0;
    virtual size_t dimension() const = 0;
    virtual std::string id() const = 0;
};

namespace detail {
inline uint64_t fnv1a(std::string_view data, uint64_t seed = 14695981039346656037ull) {
    uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}
}  // namespace detail

class NgramHashEmbedder final : public Embedder {
public:
    static constexpr size_t kDimension = 256;

    EmbeddingVector embed(std::string_view text) const override {
        const std::string s = lowercase(trim(text));
        if (s.empty()) throw Error("cannot embed empty text");
        EmbeddingVector v(kDimension, 0.0);
        // Character trigrams over the whole phrase, spaces included.
        if (s.size() >= 3) {
            for (size_t i = 0; i + 3 <= s.size(); ++i) {
                v[detail::fnv1a(std::string_view(s).substr(i, 3)) % kDimension] += 1.0;
            }
        }
        // Whole tokens, salted so they occupy buckets independent of trigrams.
        size_t pos = 0;
        while (pos < s.size()) {
            while (pos < s.size() && s[pos] == ' ') ++pos;
            size_t end = pos;
            while (end < s.size() && s[end] != ' ') ++end;
            if (end > pos) {
                const uint64_t salted = detail::fnv1a(std::string_view(s).substr(pos, end - pos),
                                                      detail::fnv1a("tok\x1f"));
                v[salted % kDimension] += 1.0;
            }
            pos = end;
        }
        return v;
    }

    size_t dimension() const override { return kDimension; }
    std::string id() const override { return "ngram-256/v1"; }
};

inline std::shared_ptr<const Embedder> default_embedder() {
    static const auto instance = std::make_shared<const NgramHashEmbedder>();
    return instance;
}

}  // namespace lookaside::slkb
