#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "burstlab/error.hpp"
#include "burstlab/vocabulary.hpp"

namespace burstlab {

struct DistEntry {
    TokenId token_id;
    double prob;
};

// One step's distribution over the vocabulary, sorted by probability
// descending with ties broken by ascending token id. The 1-based position of
// an entry is its rank.
struct NextTokenDistribution {
    std::vector<DistEntry> entries;

    std::size_t size() const { return entries.size(); }

    // 0-based position of a token id, size() if absent.
    std::size_t position_of(TokenId id) const {
        for (std::size_t i = 0; i < entries.size(); ++i) {
            if (entries[i].token_id == id) return i;
        }
        return entries.size();
    }

    double total_mass() const {
        double acc = 0.0;
        for (const auto& e : entries) acc += e.prob;
        return acc;
    }

    // Normalization and sort-order invariants.
    void validate(double eps = 1e-9) const {
        if (entries.empty()) throw DataError("empty distribution");
        for (std::size_t i = 0; i + 1 < entries.size(); ++i) {
            const auto& a = entries[i];
            const auto& b = entries[i + 1];
            if (a.prob < b.prob || (a.prob == b.prob && a.token_id > b.token_id)) {
                throw DataError("distribution entries are not in canonical order");
            }
        }
        for (const auto& e : entries) {
            if (!(e.prob >= 0.0) || !std::isfinite(e.prob)) throw DataError("invalid probability");
        }
        const double total = total_mass();
        if (std::fabs(total - 1.0) > eps) throw DataError("distribution does not sum to 1");
    }
};

}  // namespace burstlab
