#pragma once

// Additively smoothed n-gram language model. Desk-scale stand-in for a large
// causal LM: full-support conditionals, deterministic rank order, cheap enough
// to materialize the whole sorted distribution at every step.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "burstlab/distribution.hpp"
#include "burstlab/error.hpp"
#include "burstlab/vocabulary.hpp"

namespace burstlab {

class NgramModel {
public:
    // Context positions shorter than order-1 are padded with this marker. It
    // is not part of the vocabulary and is never predicted.
    static constexpr char32_t kStartMarker = 0xFFFFFFFF;

    struct ContextCounts {
        std::vector<std::pair<TokenId, std::uint64_t>> counts;  // sorted by token id
        std::uint64_t total = 0;
    };

    NgramModel() = default;

    int order() const { return order_; }
    double alpha() const { return alpha_; }
    const Vocabulary& vocab() const { return vocab_; }
    std::size_t vocab_size() const { return vocab_.size(); }

    // nullptr for contexts never seen in training (pure-smoothing case).
    const ContextCounts* context_counts(std::span<const TokenId> context) const {
        const auto it = table_.find(make_key(context));
        return it == table_.end() ? nullptr : &it->second;
    }

    NextTokenDistribution next_distribution(std::span<const TokenId> context) const {
        NextTokenDistribution dist;
        next_distribution_into(context, dist);
        return dist;
    }

    // Canonical construction: tokens seen after this context, ordered by
    // (count desc, id asc), then every unseen token in ascending id order.
    // All smoothed probabilities share the denominator total + alpha*V, so
    // this is exactly probability-descending order without a full sort.
    void next_distribution_into(std::span<const TokenId> context, NextTokenDistribution& out) const {
        const std::size_t V = vocab_.size();
        out.entries.clear();
        out.entries.reserve(V);

        static const ContextCounts kEmpty;
        const ContextCounts* cc = context_counts(context);
        if (cc == nullptr) cc = &kEmpty;

        const double denom = static_cast<double>(cc->total) + alpha_ * static_cast<double>(V);

        std::vector<std::pair<TokenId, std::uint64_t>> head(cc->counts);
        std::sort(head.begin(), head.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        for (const auto& [id, c] : head) {
            out.entries.push_back({id, (static_cast<double>(c) + alpha_) / denom});
        }

        const double tail_prob = alpha_ / denom;
        std::size_t k = 0;  // walks the id-sorted counts to skip seen ids
        for (TokenId id = 0; id < static_cast<TokenId>(V); ++id) {
            if (k < cc->counts.size() && cc->counts[k].first == id) {
                ++k;
                continue;
            }
            out.entries.push_back({id, tail_prob});
        }
    }

    void save(const std::filesystem::path& path) const {
        nlohmann::json j;
        j["format"] = "burstlab-ngram";
        j["version"] = 1;
        j["order"] = order_;
        j["alpha"] = alpha_;
        j["unk_id"] = vocab_.unk_id();
        j["tokens"] = vocab_.tokens();

        std::vector<const std::u32string*> keys;
        keys.reserve(table_.size());
        for (const auto& kv : table_) keys.push_back(&kv.first);
        std::sort(keys.begin(), keys.end(), [](const auto* a, const auto* b) { return *a < *b; });

        nlohmann::json contexts = nlohmann::json::array();
        for (const auto* key : keys) {
            const ContextCounts& cc = table_.at(*key);
            nlohmann::json ctx = nlohmann::json::array();
            for (char32_t c : *key) ctx.push_back(static_cast<std::uint32_t>(c));
            nlohmann::json counts = nlohmann::json::array();
            for (const auto& [id, n] : cc.counts) counts.push_back({id, n});
            contexts.push_back({{"ctx", std::move(ctx)}, {"counts", std::move(counts)}});
        }
        j["contexts"] = std::move(contexts);

        std::ofstream f(path);
        if (!f) throw DataError("cannot write model file: " + path.string());
        f << j.dump() << '\n';
    }

    static NgramModel load(const std::filesystem::path& path) {
        std::ifstream f(path);
        if (!f) throw DataError("cannot read model file: " + path.string());
        nlohmann::json j;
        try {
            f >> j;
        } catch (const nlohmann::json::exception& e) {
            throw DataError("malformed model file: " + std::string(e.what()));
        }
        if (j.value("format", "") != "burstlab-ngram") throw DataError("not a burstlab model file");
        if (j.value("version", 0) != 1) throw DataError("unsupported model file version");

        NgramModel m;
        m.order_ = j.at("order").get<int>();
        m.alpha_ = j.at("alpha").get<double>();
        if (m.order_ < 1) throw DataError("invalid order");
        if (!(m.alpha_ > 0.0)) throw DataError("invalid alpha");
        m.vocab_ = Vocabulary::from_tokens(j.at("tokens").get<std::vector<std::string>>(),
                                           j.at("unk_id").get<TokenId>());
        for (const auto& ctx : j.at("contexts")) {
            std::u32string key;
            for (const auto& c : ctx.at("ctx")) key.push_back(static_cast<char32_t>(c.get<std::uint32_t>()));
            ContextCounts cc;
            for (const auto& pair : ctx.at("counts")) {
                const TokenId id = pair.at(0).get<TokenId>();
                const std::uint64_t n = pair.at(1).get<std::uint64_t>();
                if (id >= m.vocab_.size()) throw DataError("count token id out of range");
                if (n == 0) throw DataError("zero count in model file");
                cc.counts.emplace_back(id, n);
                cc.total += n;
            }
            if (!std::is_sorted(cc.counts.begin(), cc.counts.end(),
                                [](const auto& a, const auto& b) { return a.first < b.first; })) {
                throw DataError("model context counts not sorted");
            }
            m.table_.emplace(std::move(key), std::move(cc));
        }
        return m;
    }

    friend NgramModel train_ngram(std::span<const std::vector<std::string>> corpus, int order,
                                  double alpha, std::size_t vocab_cap, std::uint64_t min_count);

private:
    // Key is the last order-1 ids, front-padded with kStartMarker. u32string
    // keeps short contexts inline and hashes out of the box.
    std::u32string make_key(std::span<const TokenId> context) const {
        const std::size_t want = static_cast<std::size_t>(order_ - 1);
        std::u32string key;
        key.reserve(want);
        const std::size_t have = std::min(context.size(), want);
        for (std::size_t i = 0; i < want - have; ++i) key.push_back(kStartMarker);
        for (std::size_t i = context.size() - have; i < context.size(); ++i) {
            key.push_back(static_cast<char32_t>(context[i]));
        }
        return key;
    }

    int order_ = 1;
    double alpha_ = 1.0;
    Vocabulary vocab_;
    std::unordered_map<std::u32string, ContextCounts> table_;
};

inline NgramModel train_ngram(std::span<const std::vector<std::string>> corpus, int order,
                              double alpha, std::size_t vocab_cap = 5000,
                              std::uint64_t min_count = 1) {
    if (order < 1) throw UsageError("invalid order");
    if (!(alpha > 0.0)) throw UsageError("invalid alpha");
    bool any_token = false;
    for (const auto& doc : corpus) {
        if (!doc.empty()) {
            any_token = true;
            break;
        }
    }
    if (corpus.empty() || !any_token) throw DataError("empty training corpus");

    NgramModel m;
    m.order_ = order;
    m.alpha_ = alpha;
    m.vocab_ = Vocabulary::build(corpus, vocab_cap, min_count);

    std::unordered_map<std::u32string, std::unordered_map<TokenId, std::uint64_t>> raw;
    for (const auto& doc : corpus) {
        if (doc.empty()) continue;
        const std::vector<TokenId> ids = m.vocab_.encode(doc);
        for (std::size_t t = 0; t < ids.size(); ++t) {
            const std::span<const TokenId> prefix(ids.data(), t);
            ++raw[m.make_key(prefix)][ids[t]];
        }
    }

    for (auto& [key, counts] : raw) {
        NgramModel::ContextCounts cc;
        cc.counts.assign(counts.begin(), counts.end());
        std::sort(cc.counts.begin(), cc.counts.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (const auto& [_, n] : cc.counts) cc.total += n;
        m.table_.emplace(key, std::move(cc));
    }
    return m;
}

}  // namespace burstlab
