#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "burstlab/error.hpp"

namespace burstlab {

using TokenId = std::uint32_t;

// Whitespace word tokenizer. No lowercasing, no subword splitting.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t start = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start) out.emplace_back(text.substr(start, i - start));
    }
    return out;
}

class Vocabulary {
public:
    static constexpr const char* kUnkToken = "<unk>";

    Vocabulary() = default;

    // Most frequent tokens up to `cap` (including the reserved <unk> slot);
    // ties broken by lexicographic order, tokens below `min_count` dropped.
    static Vocabulary build(std::span<const std::vector<std::string>> corpus,
                            std::size_t cap = 5000, std::uint64_t min_count = 1) {
        if (cap < 2) throw UsageError("vocabulary cap must be at least 2");
        std::unordered_map<std::string, std::uint64_t> freq;
        for (const auto& doc : corpus) {
            for (const auto& tok : doc) ++freq[tok];
        }
        std::vector<std::pair<std::string, std::uint64_t>> ranked;
        ranked.reserve(freq.size());
        for (auto& kv : freq) {
            if (kv.second >= min_count && kv.first != kUnkToken) ranked.emplace_back(kv.first, kv.second);
        }
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        if (ranked.size() > cap - 1) ranked.resize(cap - 1);

        Vocabulary v;
        v.add(kUnkToken);
        for (const auto& [tok, _] : ranked) v.add(tok);
        if (v.size() < 2) throw DataError("empty training corpus");
        return v;
    }

    std::size_t size() const { return tokens_.size(); }
    TokenId unk_id() const { return unk_id_; }
    const std::string& token(TokenId id) const { return tokens_.at(id); }
    const std::vector<std::string>& tokens() const { return tokens_; }

    TokenId id_of(std::string_view tok) const {
        auto it = index_.find(std::string(tok));
        return it == index_.end() ? unk_id_ : it->second;
    }

    std::vector<TokenId> encode(std::span<const std::string> toks) const {
        std::vector<TokenId> ids;
        ids.reserve(toks.size());
        for (const auto& t : toks) ids.push_back(id_of(t));
        return ids;
    }

    std::string decode(std::span<const TokenId> ids) const {
        std::string out;
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (i) out += ' ';
            out += token(ids[i]);
        }
        return out;
    }

    // Used by deserialization; token order defines ids.
    static Vocabulary from_tokens(std::vector<std::string> tokens, TokenId unk_id) {
        if (tokens.size() < 2) throw DataError("vocabulary must have at least 2 tokens");
        if (unk_id >= tokens.size()) throw DataError("unk_id out of range");
        Vocabulary v;
        for (auto& t : tokens) v.add(std::move(t));
        v.unk_id_ = unk_id;
        return v;
    }

private:
    void add(std::string tok) {
        if (index_.count(tok)) throw DataError("duplicate token in vocabulary: " + tok);
        index_.emplace(tok, static_cast<TokenId>(tokens_.size()));
        tokens_.push_back(std::move(tok));
    }

    std::vector<std::string> tokens_;
    std::unordered_map<std::string, TokenId> index_;
    TokenId unk_id_ = 0;
};

}  // namespace burstlab
