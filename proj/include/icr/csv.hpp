#pragma once

// Minimal RFC 4180-style CSV helpers: quoted fields, doubled quotes, no embedded newlines.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "icr/error.hpp"

namespace icr::csv {

inline std::string quote(std::string_view field)
{
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') {
            out += '"';
        }
        out += ch;
    }
    out += '"';
    return out;
}

/// Splits one line into fields, unquoting quoted ones.
inline std::vector<std::string> split(std::string_view line)
{
    std::vector<std::string> fields;
    std::string cur;
    bool in_quotes = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (in_quotes) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            if (!cur.empty() || was_quoted) {
                throw InvalidArgument("malformed CSV field near '" + cur + "'");
            }
            in_quotes = true;
            was_quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
            was_quoted = false;
        } else if (ch != '\r') {
            if (was_quoted) {
                throw InvalidArgument("text after closing quote in CSV field");
            }
            cur += ch;
        }
    }
    if (in_quotes) {
        throw InvalidArgument("unterminated quote in CSV line");
    }
    fields.push_back(std::move(cur));
    return fields;
}

/// Shortest representation is not needed; 17 significant digits round-trip every double.
inline std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double parse_double(const std::string& s)
{
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw InvalidArgument("not a number: '" + s + "'");
    }
    if (pos != s.size()) {
        throw InvalidArgument("not a number: '" + s + "'");
    }
    return v;
}

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InvalidArgument("cannot open '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& contents)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw InvalidArgument("cannot write '" + path + "'");
    }
    out << contents;
    if (!out) {
        throw InvalidArgument("write to '" + path + "' failed");
    }
}

inline std::vector<std::string> lines(const std::string& text)
{
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        out.push_back(std::move(line));
    }
    return out;
}

}  // namespace icr::csv
