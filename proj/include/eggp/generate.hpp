// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The eggp Authors

#pragma once

#include <cstddef>
#include <random>
#include <stdexcept>
#include <vector>

#include "eggp/expr.hpp"

namespace eggp {

using Rng = std::mt19937_64;

struct GenConfig {
    std::size_t max_depth { 10 };
    std::size_t max_size { 30 };
    std::size_t feature_count { 1 };
    std::vector<Op> nonterminals = all_nonterminals();
    double terminal_probability { 0.5 }; // grow only
    double param_weight { 1.0 };         // relative to a weight of 1 per variable
    std::size_t size_retries { 20 };

    void validate() const
    {
        if (max_depth < 1 || max_size < 1) {
            throw std::invalid_argument("GenConfig: max_depth and max_size must be >= 1");
        }
        if (feature_count < 1) {
            throw std::invalid_argument("GenConfig: feature_count must be >= 1");
        }
        for (auto op : nonterminals) {
            if (is_terminal(op)) {
                throw std::invalid_argument("GenConfig: terminal in nonterminal set");
            }
        }
    }

    [[nodiscard]] auto nonterminals_of_arity(std::size_t k) const -> std::vector<Op>
    {
        std::vector<Op> out;
        for (auto op : nonterminals) {
            if (arity(op) == k) {
                out.push_back(op);
            }
        }
        return out;
    }
};

inline auto random_terminal(GenConfig const& cfg, Rng& rng) -> Symbol
{
    auto total = static_cast<double>(cfg.feature_count) + cfg.param_weight;
    std::uniform_real_distribution<double> u(0.0, total);
    auto r = u(rng);
    if (r >= static_cast<double>(cfg.feature_count)) {
        return Symbol::param();
    }
    auto idx = static_cast<std::uint32_t>(r);
    return Symbol::variable(std::min<std::uint32_t>(idx, static_cast<std::uint32_t>(cfg.feature_count - 1)));
}

namespace detail {

    template <typename T>
    auto pick(std::vector<T> const& v, Rng& rng) -> T const&
    {
        std::uniform_int_distribution<std::size_t> d(0, v.size() - 1);
        return v[d(rng)];
    }

    // `room` is the number of nodes still available beyond the open slots, or
    // nullptr when unconstrained.
    inline void build(GenConfig const& cfg, std::size_t depth_left, bool full, Rng& rng, std::vector<Symbol>& out, std::size_t* room)
    {
        bool terminal = depth_left <= 1 || cfg.nonterminals.empty();
        if (!terminal && !full) {
            std::bernoulli_distribution coin(cfg.terminal_probability);
            terminal = coin(rng);
        }
        if (!terminal) {
            std::vector<Op> const* choices = &cfg.nonterminals;
            std::vector<Op> fitting;
            if (room != nullptr) {
                for (auto op : cfg.nonterminals) {
                    if (arity(op) <= *room) {
                        fitting.push_back(op);
                    }
                }
                choices = &fitting;
            }
            if (choices->empty()) {
                terminal = true;
            } else {
                auto op = pick(*choices, rng);
                if (room != nullptr) {
                    *room -= arity(op);
                }
                out.push_back(Symbol::of(op));
                for (std::size_t c = 0; c < arity(op); ++c) {
                    build(cfg, depth_left - 1, full, rng, out, room);
                }
                return;
            }
        }
        out.push_back(random_terminal(cfg, rng));
    }

    inline auto generate(GenConfig const& cfg, bool full, Rng& rng) -> Expr
    {
        cfg.validate();
        for (std::size_t attempt = 0; attempt < cfg.size_retries; ++attempt) {
            std::vector<Symbol> out;
            build(cfg, cfg.max_depth, full, rng, out, nullptr);
            if (out.size() <= cfg.max_size) {
                return Expr(std::move(out));
            }
        }
        // Budget-aware pass: once the size budget is exhausted every open slot becomes a terminal.
        std::vector<Symbol> out;
        std::size_t room = cfg.max_size - 1;
        build(cfg, cfg.max_depth, full, rng, out, &room);
        return Expr(std::move(out));
    }

} // namespace detail

inline auto grow(GenConfig const& cfg, Rng& rng) -> Expr { return detail::generate(cfg, false, rng); }
inline auto full(GenConfig const& cfg, Rng& rng) -> Expr { return detail::generate(cfg, true, rng); }

// Depth limits ramp over [2, max_depth]; consecutive draws alternate grow/full
// so each depth bucket is split evenly between the two methods.
inline auto ramped_half_and_half(std::size_t n, GenConfig const& cfg, Rng& rng) -> std::vector<Expr>
{
    if (n < 1) {
        throw std::invalid_argument("ramped_half_and_half: n must be >= 1");
    }
    cfg.validate();
    std::size_t lo = std::min<std::size_t>(2, cfg.max_depth);
    std::size_t buckets = cfg.max_depth - lo + 1;
    std::vector<Expr> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        auto local = cfg;
        local.max_depth = lo + (k / 2) % buckets;
        out.push_back(k % 2 == 0 ? grow(local, rng) : full(local, rng));
    }
    return out;
}

} // namespace eggp
