#pragma once

// Minimal RFC 4180 CSV: quoting on demand, doubles printed with the shortest
// round-trip representation so written values re-parse bit-exactly.

#include <charconv>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "burstlab/error.hpp"

namespace burstlab {

inline std::string csv_escape(const std::string& field) {
    const bool needs_quotes = field.find_first_of(",\"\n\r") != std::string::npos;
    if (!needs_quotes) return field;
    std::string out = "\"";
    for (const char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw UsageError("cannot format double");
    return std::string(buf, ptr);
}

inline double parse_double(const std::string& s) {
    double v = 0.0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end) throw DataError("not a number: " + s);
    return v;
}

inline void write_csv_row(std::ostream& out, std::span<const std::string> fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << csv_escape(fields[i]);
    }
    out << '\n';
}

// Parses one logical CSV record from the stream (quoted fields may span
// lines). Returns false at end of input.
inline bool read_csv_row(std::istream& in, std::vector<std::string>& fields) {
    fields.clear();
    std::string field;
    bool in_quotes = false;
    bool started = false;
    int c;
    while ((c = in.get()) != EOF) {
        started = true;
        const char ch = static_cast<char>(c);
        if (in_quotes) {
            if (ch == '"') {
                if (in.peek() == '"') {
                    field += '"';
                    in.get();
                } else {
                    in_quotes = false;
                }
            } else {
                field += ch;
            }
        } else if (ch == '"') {
            in_quotes = true;
        } else if (ch == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (ch == '\n') {
            fields.push_back(std::move(field));
            return true;
        } else if (ch == '\r') {
            // swallow; \n follows in CRLF files
        } else {
            field += ch;
        }
    }
    if (!started) return false;
    fields.push_back(std::move(field));
    return true;
}

}  // namespace burstlab
