#pragma once

// Probability Record Format: line-delimited JSON carrying per-token scoring
// facts, so probability dumps produced elsewhere can flow through the same
// metric pipeline. First line is a header object, each following line one
// document. logprob is derived on read, never stored.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "burstlab/error.hpp"
#include "burstlab/scoring.hpp"

namespace burstlab {

struct RecordsFile {
    std::size_t vocab_size = 0;
    std::vector<DocumentScore> docs;
};

inline void write_records(const std::filesystem::path& path, std::span<const DocumentScore> docs,
                          std::size_t vocab_size) {
    std::ofstream f(path);
    if (!f) throw DataError("cannot write records file: " + path.string());
    nlohmann::json header;
    header["format"] = "burstlab-records";
    header["version"] = 1;
    header["vocab_size"] = vocab_size;
    f << header.dump() << '\n';
    for (const auto& doc : docs) {
        nlohmann::json line;
        line["doc_id"] = doc.doc_id;
        nlohmann::json records = nlohmann::json::array();
        for (const auto& r : doc.records) {
            records.push_back({{"token_id", r.token_id},
                               {"rank", r.rank},
                               {"prob", r.prob},
                               {"cum_prob", r.cum_prob}});
        }
        line["records"] = std::move(records);
        f << line.dump() << '\n';
    }
}

inline RecordsFile read_records(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot read records file: " + path.string());

    const auto fail = [](std::size_t line_no, const std::string& why) -> DataError {
        return DataError("records line " + std::to_string(line_no) + ": " + why);
    };

    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(f, line)) throw DataError("missing records header");
    ++line_no;
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw fail(line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!header.is_object() || header.value("format", "") != "burstlab-records") {
        throw DataError("missing records header");
    }
    if (header.value("version", 0) != 1) throw DataError("unsupported records version");

    RecordsFile out;
    out.vocab_size = header.value("vocab_size", std::size_t{0});
    if (out.vocab_size < 2) throw DataError("records header vocab_size must be at least 2");

    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw fail(line_no, std::string("malformed JSON: ") + e.what());
        }
        if (!j.is_object() || !j.contains("doc_id") || !j.contains("records")) {
            throw fail(line_no, "document must have doc_id and records");
        }
        DocumentScore doc;
        try {
            doc.doc_id = j.at("doc_id").get<std::string>();
            for (const auto& rj : j.at("records")) {
                TokenRecord r;
                r.token_id = rj.at("token_id").get<TokenId>();
                const auto rank = rj.at("rank").get<std::int64_t>();
                r.prob = rj.at("prob").get<double>();
                r.cum_prob = rj.at("cum_prob").get<double>();
                if (rank < 1) throw fail(line_no, "rank must be >= 1");
                if (static_cast<std::size_t>(rank) > out.vocab_size) {
                    throw fail(line_no, "rank exceeds vocab_size");
                }
                r.rank = static_cast<std::uint32_t>(rank);
                if (!(r.prob > 0.0) || r.prob > 1.0) throw fail(line_no, "prob must be in (0, 1]");
                if (r.cum_prob < r.prob) throw fail(line_no, "inconsistent record");
                if (r.cum_prob > 1.0 + 1e-9) throw fail(line_no, "cum_prob exceeds 1");
                r.logprob = std::log(r.prob);
                doc.records.push_back(r);
            }
        } catch (const nlohmann::json::exception& e) {
            throw fail(line_no, std::string("malformed record: ") + e.what());
        }
        if (doc.records.empty()) throw fail(line_no, "document has no records");
        out.docs.push_back(std::move(doc));
    }
    return out;
}

}  // namespace burstlab
