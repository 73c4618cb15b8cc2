// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The eggp Authors

#pragma once

#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "eggp/egraph.hpp"
#include "eggp/generate.hpp"

namespace eggp {

struct VariationConfig {
    double pc { 0.9 };
    double pm { 0.3 };
    GenConfig gen {}; // max_size / max_depth double as the offspring limits

    void validate() const
    {
        if (!(pc >= 0.0 && pc <= 1.0) || !(pm >= 0.0 && pm <= 1.0)) {
            throw std::invalid_argument("VariationConfig: pc and pm must lie in [0, 1]");
        }
        gen.validate();
    }
};

namespace detail {

    inline auto uniform_index(std::size_t n, Rng& rng) -> std::size_t
    {
        std::uniform_int_distribution<std::size_t> d(0, n - 1);
        return d(rng);
    }

    // Whether placing a subtree of (sub_size, sub_depth) at `hole` keeps host within limits.
    inline auto fits(Expr const& host, std::size_t hole, std::size_t sub_size, std::size_t sub_depth, GenConfig const& lim) -> bool
    {
        auto size = host.size() - host.subtree_size(hole) + sub_size;
        return size <= lim.max_size && host.level(hole) + sub_depth <= lim.max_depth;
    }

    // Subtree sizes and depths of every position, in one reverse sweep.
    inline auto subtree_shapes(Expr const& e) -> std::vector<std::pair<std::size_t, std::size_t>>
    {
        std::vector<std::pair<std::size_t, std::size_t>> shape(e.size());
        std::vector<std::size_t> stack;
        for (std::size_t i = e.size(); i-- > 0;) {
            std::size_t size = 1;
            std::size_t depth = 0;
            for (std::size_t c = 0; c < e[i].arity(); ++c) {
                auto j = stack.back();
                stack.pop_back();
                size += shape[j].first;
                depth = std::max(depth, shape[j].second);
            }
            shape[i] = { size, depth + 1 };
            stack.push_back(i);
        }
        return shape;
    }

} // namespace detail

// Positions of p2 whose subtree, placed at `hole` of p1, yields an
// expression within limits and absent from g. Subtrees that do not resolve
// in g always count as novel.
inline auto crossover_candidates(Expr const& p1, std::size_t hole, Expr const& p2, GenConfig const& lim, EGraph const& g) -> std::vector<std::size_t>
{
    auto spine = build_spine(g, p1, hole);
    auto ids = g.lookup_subtrees(p2);
    auto shape = detail::subtree_shapes(p2);
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < p2.size(); ++j) {
        if (!detail::fits(p1, hole, shape[j].first, shape[j].second, lim)) {
            continue;
        }
        if (ids[j] && contains_with_context(g, spine, *ids[j])) {
            continue;
        }
        out.push_back(j);
    }
    return out;
}

inline auto egraph_crossover(Expr const& p1, Expr const& p2, VariationConfig const& cfg, EGraph const& g, Rng& rng) -> Expr
{
    std::bernoulli_distribution coin(cfg.pc);
    if (!coin(rng)) {
        return p1;
    }
    auto hole = detail::uniform_index(p1.size(), rng);
    auto cands = crossover_candidates(p1, hole, p2, cfg.gen, g);
    if (cands.empty()) {
        return p1;
    }
    auto j = cands[detail::uniform_index(cands.size(), rng)];
    return p1.replace_at(hole, p2.subtree_at(j));
}

// Symbols that may replace the root of `s` without changing its arity.
inline auto swap_symbols(Symbol const& root, GenConfig const& gen) -> std::vector<Symbol>
{
    std::vector<Symbol> out;
    if (root.arity() == 0) {
        for (std::uint32_t k = 0; k < gen.feature_count; ++k) {
            out.push_back(Symbol::variable(k));
        }
        out.push_back(Symbol::param());
    } else {
        for (auto op : gen.nonterminals_of_arity(root.arity())) {
            out.push_back(Symbol::of(op));
        }
    }
    std::erase(out, root);
    return out;
}

// Second stage of the e-graph mutation, with the random subtree `s` already
// drawn for position i of e.
inline auto mutate_with_subtree(Expr const& e, std::size_t i, Expr const& s, VariationConfig const& cfg, EGraph const& g, Rng& rng) -> Expr
{
    auto mutated = e.replace_at(i, s);
    auto ids = g.lookup_subtrees(mutated);
    if (!ids[0]) {
        return mutated;
    }
    auto spine = build_spine(g, mutated, i, ids);
    // Class ids of the subtree root's children inside `mutated`.
    std::array<std::optional<EClassId>, 2> kid_ids {};
    auto kids = mutated.children(i);
    for (std::size_t c = 0; c < kids.size(); ++c) {
        kid_ids[c] = ids[kids[c]];
    }
    std::vector<Symbol> novel;
    for (auto const& sym : swap_symbols(s[0], cfg.gen)) {
        ENode n { sym, {} };
        bool resolved = true;
        for (std::size_t c = 0; c < sym.arity(); ++c) {
            if (!kid_ids[c]) {
                resolved = false;
                break;
            }
            n.kids[c] = *kid_ids[c];
        }
        if (!resolved || !spine || !contains_with_context(g, *spine, n)) {
            novel.push_back(sym);
        }
    }
    if (novel.empty()) {
        return mutated;
    }
    return mutated.with_symbol(i, novel[detail::uniform_index(novel.size(), rng)]);
}

namespace detail {

    // Random subtree for position i within the remaining size/depth budget.
    inline auto random_subtree(Expr const& e, std::size_t i, GenConfig const& lim, Rng& rng) -> Expr
    {
        auto local = lim;
        auto level = e.level(i);
        auto rest = e.size() - e.subtree_size(i);
        local.max_depth = lim.max_depth > level ? lim.max_depth - level : 1;
        local.max_size = lim.max_size > rest ? lim.max_size - rest : 1;
        std::bernoulli_distribution coin(0.5);
        return coin(rng) ? grow(local, rng) : full(local, rng);
    }

} // namespace detail

inline auto egraph_mutation(Expr const& e, VariationConfig const& cfg, EGraph const& g, Rng& rng) -> Expr
{
    std::bernoulli_distribution coin(cfg.pm);
    if (!coin(rng)) {
        return e;
    }
    auto i = detail::uniform_index(e.size(), rng);
    auto s = detail::random_subtree(e, i, cfg.gen, rng);
    return mutate_with_subtree(e, i, s, cfg, g, rng);
}

// Plain subtree operators for the tinyGP baseline: same limits, no e-graph filter.
inline auto subtree_crossover(Expr const& p1, Expr const& p2, VariationConfig const& cfg, Rng& rng) -> Expr
{
    std::bernoulli_distribution coin(cfg.pc);
    if (!coin(rng)) {
        return p1;
    }
    auto hole = detail::uniform_index(p1.size(), rng);
    auto shape = detail::subtree_shapes(p2);
    std::vector<std::size_t> cands;
    for (std::size_t j = 0; j < p2.size(); ++j) {
        if (detail::fits(p1, hole, shape[j].first, shape[j].second, cfg.gen)) {
            cands.push_back(j);
        }
    }
    if (cands.empty()) {
        return p1;
    }
    auto j = cands[detail::uniform_index(cands.size(), rng)];
    return p1.replace_at(hole, p2.subtree_at(j));
}

inline auto subtree_mutation(Expr const& e, VariationConfig const& cfg, Rng& rng) -> Expr
{
    std::bernoulli_distribution coin(cfg.pm);
    if (!coin(rng)) {
        return e;
    }
    auto i = detail::uniform_index(e.size(), rng);
    return e.replace_at(i, detail::random_subtree(e, i, cfg.gen, rng));
}

} // namespace eggp
