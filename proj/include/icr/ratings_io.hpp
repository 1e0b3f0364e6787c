#pragma once

// RatingsMatrix CSV: header `item,rater_1,...,rater_R`, then one row per item with the
// 1-based item number followed by quoted category labels.

#include <algorithm>
#include <optional>
#include <set>
#include <string>

#include "icr/csv.hpp"
#include "icr/model.hpp"

namespace icr {

inline std::string ratings_to_csv(const RatingsMatrix& ratings)
{
    std::string out = "item";
    for (std::size_t i = 1; i <= ratings.raters(); ++i) {
        out += ",rater_" + std::to_string(i);
    }
    out += '\n';
    for (std::size_t k = 0; k < ratings.items(); ++k) {
        out += std::to_string(k + 1);
        for (std::size_t i = 0; i < ratings.raters(); ++i) {
            out += ',';
            out += csv::quote(ratings.categories().label(ratings(k, i)));
        }
        out += '\n';
    }
    return out;
}

/// Parses ratings CSV text. Without an explicit category set the categories are the
/// distinct labels in lexicographic order, which requires at least two distinct labels.
inline RatingsMatrix ratings_from_csv(const std::string& text, const std::optional<CategorySet>& categories = std::nullopt)
{
    auto rows = csv::lines(text);
    while (!rows.empty() && rows.back().empty()) {
        rows.pop_back();
    }
    if (rows.empty()) {
        throw InvalidArgument("ratings file is empty");
    }
    const auto header = csv::split(rows.front());
    if (header.size() < 2 || header[0] != "item") {
        throw InvalidArgument("ratings header must be item,rater_1,...,rater_R");
    }
    const std::size_t raters = header.size() - 1;
    for (std::size_t i = 1; i <= raters; ++i) {
        if (header[i] != "rater_" + std::to_string(i)) {
            throw InvalidArgument("ratings header column " + std::to_string(i + 1) + " must be rater_" +
                                  std::to_string(i));
        }
    }
    std::vector<std::vector<std::string>> cells;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        auto fields = csv::split(rows[r]);
        if (fields.size() != raters + 1) {
            throw InvalidArgument("ratings line " + std::to_string(r + 1) + " has " + std::to_string(fields.size()) +
                                  " fields, expected " + std::to_string(raters + 1));
        }
        if (fields[0] != std::to_string(r)) {
            throw InvalidArgument("ratings line " + std::to_string(r + 1) + " must carry item number " +
                                  std::to_string(r));
        }
        cells.push_back(std::move(fields));
    }
    if (cells.empty()) {
        throw InvalidArgument("ratings file has no items");
    }
    CategorySet cats = [&] {
        if (categories) {
            return *categories;
        }
        std::set<std::string> distinct;
        for (const auto& row : cells) {
            distinct.insert(row.begin() + 1, row.end());
        }
        if (distinct.size() < 2) {
            throw InvalidArgument("ratings use a single category; pass the category set explicitly");
        }
        return CategorySet(std::vector<std::string>(distinct.begin(), distinct.end()));
    }();
    std::vector<Category> entries;
    entries.reserve(cells.size() * raters);
    for (const auto& row : cells) {
        for (std::size_t i = 1; i < row.size(); ++i) {
            entries.push_back(cats.index_of(row[i]));
        }
    }
    return RatingsMatrix(cells.size(), raters, std::move(entries), std::move(cats));
}

inline void write_ratings_csv(const std::string& path, const RatingsMatrix& ratings)
{
    csv::write_file(path, ratings_to_csv(ratings));
}

inline RatingsMatrix read_ratings_csv(const std::string& path, const std::optional<CategorySet>& categories = std::nullopt)
{
    return ratings_from_csv(csv::read_file(path), categories);
}

}  // namespace icr
