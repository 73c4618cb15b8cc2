// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The eggp Authors

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "eggp/generate.hpp"

namespace eggp {

struct Dataset {
    Eigen::MatrixXd x; // rows x features
    Eigen::VectorXd y;
    std::vector<std::string> names;

    [[nodiscard]] auto rows() const noexcept -> std::size_t { return static_cast<std::size_t>(x.rows()); }
    [[nodiscard]] auto features() const noexcept -> std::size_t { return static_cast<std::size_t>(x.cols()); }
};

struct DataSpec {
    std::string path;
    std::optional<std::string> target; // header name or 0-based column index; last column when empty
    char delimiter { ',' };
    bool has_header { true };
    std::optional<std::size_t> row_cap;
    std::uint64_t cap_seed { 0 };
};

class DataError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline auto subset(Dataset const& d, std::vector<std::size_t> const& rows) -> Dataset
{
    Dataset out;
    out.names = d.names;
    out.x.resize(static_cast<Eigen::Index>(rows.size()), d.x.cols());
    out.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        auto src = static_cast<Eigen::Index>(rows[r]);
        out.x.row(static_cast<Eigen::Index>(r)) = d.x.row(src);
        out.y(static_cast<Eigen::Index>(r)) = d.y(src);
    }
    return out;
}

namespace detail {

    inline auto trim(std::string_view s) -> std::string_view
    {
        auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
        while (!s.empty() && ws(s.front())) {
            s.remove_prefix(1);
        }
        while (!s.empty() && ws(s.back())) {
            s.remove_suffix(1);
        }
        return s;
    }

    inline auto split_fields(std::string_view line, char delim) -> std::vector<std::string_view>
    {
        std::vector<std::string_view> out;
        std::size_t start = 0;
        for (;;) {
            auto end = line.find(delim, start);
            out.push_back(trim(line.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start)));
            if (end == std::string_view::npos) {
                return out;
            }
            start = end + 1;
        }
    }

    inline auto parse_cell(std::string_view cell, std::size_t row, std::size_t col) -> double
    {
        auto text = cell;
        if (!text.empty() && text.front() == '+') {
            text.remove_prefix(1);
        }
        double v {};
        auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (text.empty() || ec != std::errc {} || p != text.data() + text.size() || !std::isfinite(v)) {
            throw DataError("non-numeric cell '" + std::string(cell) + "' at (" + std::to_string(row) + "," + std::to_string(col) + ")");
        }
        return v;
    }

    // Random permutation of [0, n), then the first `k` entries sorted.
    inline auto sample_rows(std::size_t n, std::size_t k, Rng& rng) -> std::vector<std::size_t>
    {
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), rng);
        idx.resize(k);
        std::sort(idx.begin(), idx.end());
        return idx;
    }

    inline auto complement(std::size_t n, std::vector<std::size_t> const& taken) -> std::vector<std::size_t>
    {
        std::vector<bool> used(n, false);
        for (auto i : taken) {
            used[i] = true;
        }
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < n; ++i) {
            if (!used[i]) {
                out.push_back(i);
            }
        }
        return out;
    }

} // namespace detail

// Rows and columns in error messages are 1-based; rows count data rows only.
inline auto parse_csv(std::string_view text, DataSpec const& spec) -> Dataset
{
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        auto line = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
        if (!detail::trim(line).empty()) {
            lines.push_back(line);
        }
        if (end == std::string_view::npos) {
            break;
        }
        start = end + 1;
    }
    if (lines.empty()) {
        throw DataError("empty data file");
    }

    std::vector<std::string> header;
    std::size_t first = 0;
    if (spec.has_header) {
        for (auto f : detail::split_fields(lines[0], spec.delimiter)) {
            header.emplace_back(f);
        }
        first = 1;
    }
    auto width = spec.has_header ? header.size() : detail::split_fields(lines[0], spec.delimiter).size();
    if (width < 2) {
        throw DataError("need at least one feature column and a target column");
    }

    std::size_t target = width - 1;
    if (spec.target) {
        auto it = std::find(header.begin(), header.end(), *spec.target);
        if (it != header.end()) {
            target = static_cast<std::size_t>(it - header.begin());
        } else {
            std::size_t k {};
            auto const& t = *spec.target;
            auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), k);
            if (t.empty() || ec != std::errc {} || p != t.data() + t.size() || k >= width) {
                throw DataError("target column '" + t + "' not found");
            }
            target = k;
        }
    }

    auto n = lines.size() - first;
    std::vector<double> cells;
    cells.reserve(n * width);
    for (std::size_t r = 0; r < n; ++r) {
        auto fields = detail::split_fields(lines[first + r], spec.delimiter);
        if (fields.size() != width) {
            throw DataError("row " + std::to_string(r + 1) + " has " + std::to_string(fields.size()) + " fields, expected " + std::to_string(width));
        }
        for (std::size_t c = 0; c < width; ++c) {
            cells.push_back(detail::parse_cell(fields[c], r + 1, c + 1));
        }
    }

    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), 0);
    if (spec.row_cap) {
        if (*spec.row_cap < 1) {
            throw DataError("row cap must be >= 1");
        }
        if (*spec.row_cap < n) {
            Rng rng(spec.cap_seed);
            rows = detail::sample_rows(n, *spec.row_cap, rng);
        }
    }
    if (rows.size() < 2) {
        throw DataError("need at least 2 data rows");
    }

    Dataset d;
    d.x.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width - 1));
    d.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        Eigen::Index col = 0;
        for (std::size_t c = 0; c < width; ++c) {
            auto v = cells[rows[r] * width + c];
            if (c == target) {
                d.y(static_cast<Eigen::Index>(r)) = v;
            } else {
                d.x(static_cast<Eigen::Index>(r), col++) = v;
            }
        }
    }
    for (std::size_t c = 0, k = 0; c < width; ++c) {
        if (c != target) {
            d.names.push_back(spec.has_header ? header[c] : "x" + std::to_string(k));
            ++k;
        }
    }
    return d;
}

inline auto load_csv(DataSpec const& spec) -> Dataset
{
    std::ifstream in(spec.path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open '" + spec.path + "'");
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), spec);
}

inline auto train_test_split(Dataset const& d, double test_fraction, Rng& rng) -> std::pair<Dataset, Dataset>
{
    auto n = d.rows();
    if (n < 2) {
        throw DataError("train_test_split: need at least 2 rows");
    }
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw std::invalid_argument("train_test_split: test fraction must lie in (0, 1)");
    }
    auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * (1.0 - test_fraction)));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
    auto train = detail::sample_rows(n, n_train, rng);
    return { subset(d, train), subset(d, detail::complement(n, train)) };
}

struct FitValSplit {
    Dataset fit;
    Dataset val;
    bool degenerate { false }; // fewer than 3 rows: both halves are the full set
};

inline auto split_fit_val(Dataset const& d, Rng& rng) -> FitValSplit
{
    auto n = d.rows();
    if (n < 3) {
        return { d, d, true };
    }
    auto n_val = static_cast<std::size_t>(std::llround(static_cast<double>(n) / 3.0));
    auto val = detail::sample_rows(n, n_val, rng);
    return { subset(d, detail::complement(n, val)), subset(d, val), false };
}

} // namespace eggp
