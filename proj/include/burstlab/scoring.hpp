#pragma once

// Turns a token sequence into per-token scoring facts (rank, probability,
// cumulative probability) under any next-token distribution provider.

#include <cmath>
#include <concepts>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "burstlab/distribution.hpp"
#include "burstlab/error.hpp"
#include "burstlab/vocabulary.hpp"

namespace burstlab {

template <typename M>
concept NextTokenProvider = requires(const M& m, std::span<const TokenId> ctx) {
    { m.vocab_size() } -> std::convertible_to<std::size_t>;
    { m.next_distribution(ctx) } -> std::same_as<NextTokenDistribution>;
};

struct TokenRecord {
    TokenId token_id = 0;
    std::uint32_t rank = 0;  // 1-based position in the sorted distribution
    double prob = 0.0;
    double logprob = 0.0;
    double cum_prob = 0.0;  // inclusive prefix mass through this rank
};

struct DocumentScore {
    std::string doc_id;
    std::vector<TokenRecord> records;

    std::size_t T() const { return records.size(); }
};

namespace detail {

template <NextTokenProvider M>
void eval_distribution(const M& model, std::span<const TokenId> ctx, NextTokenDistribution& dist) {
    if constexpr (requires { model.next_distribution_into(ctx, dist); }) {
        model.next_distribution_into(ctx, dist);
    } else {
        dist = model.next_distribution(ctx);
    }
}

}  // namespace detail

// Record i describes tokens[i] under the distribution conditioned on
// tokens[0..i). cum_prob accumulates entry probabilities in canonical sorted
// order, the same arithmetic the nucleus functions use, so top-p membership
// checks agree bit for bit between generation and scoring.
template <NextTokenProvider M>
DocumentScore score_document(const M& model, std::span<const TokenId> tokens,
                             std::string doc_id = "") {
    if (tokens.empty()) throw DataError("nothing to score");

    DocumentScore score;
    score.doc_id = std::move(doc_id);
    score.records.reserve(tokens.size());

    NextTokenDistribution dist;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        detail::eval_distribution(model, tokens.subspan(0, i), dist);
        const TokenId target = tokens[i];
        double acc = 0.0;
        bool found = false;
        for (std::size_t pos = 0; pos < dist.entries.size(); ++pos) {
            acc += dist.entries[pos].prob;
            if (dist.entries[pos].token_id == target) {
                TokenRecord rec;
                rec.token_id = target;
                rec.rank = static_cast<std::uint32_t>(pos + 1);
                rec.prob = dist.entries[pos].prob;
                rec.logprob = std::log(rec.prob);
                rec.cum_prob = acc;
                score.records.push_back(rec);
                found = true;
                break;
            }
        }
        if (!found) throw DataError("token id out of vocabulary range");
    }
    return score;
}

}  // namespace burstlab
