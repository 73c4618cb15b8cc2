// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The eggp Authors

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "eggp/egraph.hpp"
#include "eggp/eval.hpp"

namespace eggp {

inline constexpr std::size_t max_pattern_vars = 4;

// Pattern variables bind either an e-class (?a) or the value of a literal
// constant found in the matched class (?c).
struct Bindings {
    std::array<std::optional<EClassId>, max_pattern_vars> cls {};
    std::array<std::optional<double>, max_pattern_vars> val {};
};

struct Pattern {
    enum class Kind : std::uint8_t { Var, ConstVar, Lit, Node, Computed };

    Kind kind { Kind::Var };
    std::uint8_t var { 0 };
    Symbol sym {};
    std::vector<Pattern> kids;
    std::function<std::optional<double>(Bindings const&)> compute;

    [[nodiscard]] auto depth() const -> std::size_t
    {
        std::size_t d = 0;
        for (auto const& k : kids) {
            d = std::max(d, k.depth());
        }
        return d + 1;
    }
};

namespace pat {
    inline auto v(std::uint8_t i) -> Pattern { return { Pattern::Kind::Var, i, {}, {}, {} }; }
    inline auto c(std::uint8_t i) -> Pattern { return { Pattern::Kind::ConstVar, i, {}, {}, {} }; }
    inline auto lit(Symbol s) -> Pattern { return { Pattern::Kind::Lit, 0, s, {}, {} }; }
    inline auto num(double x) -> Pattern { return lit(Symbol::constant(x)); }
    inline auto theta() -> Pattern { return lit(Symbol::param()); }
    inline auto node(Op op, Pattern a) -> Pattern { return { Pattern::Kind::Node, 0, Symbol::of(op), { std::move(a) }, {} }; }
    inline auto node(Op op, Pattern a, Pattern b) -> Pattern { return { Pattern::Kind::Node, 0, Symbol::of(op), { std::move(a), std::move(b) }, {} }; }
    inline auto computed(std::function<std::optional<double>(Bindings const&)> f) -> Pattern
    {
        Pattern p;
        p.kind = Pattern::Kind::Computed;
        p.compute = std::move(f);
        return p;
    }
} // namespace pat

struct RewriteRule {
    std::string name;
    Pattern lhs;
    Pattern rhs;
    std::function<bool(EGraph const&, Bindings const&)> guard;
    // Parameter-absorption rules equate parameter families, not pointwise values.
    bool absorbs_params { false };
    // The guard needs θ-free operands, so a θ-dependent root never matches.
    bool ground_root { false };
};

// ---- matching ---------------------------------------------------------------

namespace detail {

    inline auto class_constant(EGraph const& g, EClassId c) -> std::optional<double>
    {
        for (auto const& n : g.eclass(c).nodes) {
            if (n.sym.op == Op::Const) {
                return n.sym.value;
            }
        }
        return std::nullopt;
    }

    inline void match(EGraph const& g, Pattern const& p, EClassId c, Bindings const& in, std::vector<Bindings>& out,
        std::size_t limit = std::numeric_limits<std::size_t>::max())
    {
        c = g.find(c);
        switch (p.kind) {
        case Pattern::Kind::Var: {
            auto const& slot = in.cls[p.var];
            if (slot) {
                if (g.find(*slot) == c) {
                    out.push_back(in);
                }
                return;
            }
            auto b = in;
            b.cls[p.var] = c;
            out.push_back(b);
            return;
        }
        case Pattern::Kind::ConstVar:
            for (auto const& n : g.eclass(c).nodes) {
                if (n.sym.op != Op::Const) {
                    continue;
                }
                auto const& slot = in.val[p.var];
                if (slot) {
                    if (*slot == n.sym.value) {
                        out.push_back(in);
                    }
                    continue;
                }
                auto b = in;
                b.val[p.var] = n.sym.value;
                out.push_back(b);
            }
            return;
        case Pattern::Kind::Lit:
            for (auto const& n : g.eclass(c).nodes) {
                if (n.sym == p.sym) {
                    out.push_back(in);
                    return;
                }
            }
            return;
        case Pattern::Kind::Node:
            for (auto const& n : g.eclass(c).nodes) {
                if (out.size() >= limit) {
                    return;
                }
                if (n.sym.op != p.sym.op) {
                    continue;
                }
                std::vector<Bindings> partial { in };
                for (std::size_t k = 0; k < p.kids.size() && !partial.empty(); ++k) {
                    std::vector<Bindings> next;
                    for (auto const& b : partial) {
                        match(g, p.kids[k], n.kids[k], b, next, limit);
                        if (next.size() >= limit) {
                            break;
                        }
                    }
                    partial = std::move(next);
                }
                auto room = limit - out.size();
                out.insert(out.end(), partial.begin(), partial.begin() + static_cast<std::ptrdiff_t>(std::min(room, partial.size())));
            }
            return;
        case Pattern::Kind::Computed:
            return;
        }
    }

    inline auto instantiate(EGraph& g, Pattern const& p, Bindings const& b) -> std::optional<EClassId>
    {
        switch (p.kind) {
        case Pattern::Kind::Var:
            return b.cls[p.var];
        case Pattern::Kind::ConstVar:
            return b.val[p.var] ? std::optional { g.add(ENode::leaf(Symbol::constant(*b.val[p.var]))) } : std::nullopt;
        case Pattern::Kind::Lit:
            return g.add(ENode::leaf(p.sym));
        case Pattern::Kind::Computed: {
            auto v = p.compute(b);
            if (!v || !std::isfinite(*v)) {
                return std::nullopt;
            }
            return g.add(ENode::leaf(Symbol::constant(*v)));
        }
        case Pattern::Kind::Node: {
            ENode n { p.sym, {} };
            for (std::size_t k = 0; k < p.kids.size(); ++k) {
                auto kid = instantiate(g, p.kids[k], b);
                if (!kid) {
                    return std::nullopt;
                }
                n.kids[k] = *kid;
            }
            // constant operands fold on the spot instead of adding a new node
            auto op = n.sym.op;
            if (op == Op::Add || op == Op::Sub || op == Op::Mul || op == Op::Div) {
                auto x = class_constant(g, n.kids[0]);
                auto y = class_constant(g, n.kids[1]);
                if (x && y && !(op == Op::Div && *y == 0.0)) {
                    auto v = prim::apply(op, *x, *y);
                    if (std::isfinite(v)) {
                        return g.add(ENode::leaf(Symbol::constant(v)));
                    }
                }
            }
            return g.add(n);
        }
        }
        return std::nullopt;
    }

    // The class `instantiate` would return, if every node already exists.
    inline auto existing_instance(EGraph const& g, Pattern const& p, Bindings const& b) -> std::optional<EClassId>
    {
        auto constant = [&](std::optional<double> v) -> std::optional<EClassId> {
            if (!v || !std::isfinite(*v)) {
                return std::nullopt;
            }
            return g.lookup(ENode::leaf(Symbol::constant(*v)));
        };
        switch (p.kind) {
        case Pattern::Kind::Var:
            return b.cls[p.var];
        case Pattern::Kind::ConstVar:
            return constant(b.val[p.var]);
        case Pattern::Kind::Lit:
            return g.lookup(ENode::leaf(p.sym));
        case Pattern::Kind::Computed:
            return constant(p.compute(b));
        case Pattern::Kind::Node: {
            ENode n { p.sym, {} };
            for (std::size_t k = 0; k < p.kids.size(); ++k) {
                auto kid = existing_instance(g, p.kids[k], b);
                if (!kid) {
                    return std::nullopt;
                }
                n.kids[k] = *kid;
            }
            auto op = n.sym.op;
            if (op == Op::Add || op == Op::Sub || op == Op::Mul || op == Op::Div) {
                auto x = class_constant(g, n.kids[0]);
                auto y = class_constant(g, n.kids[1]);
                if (x && y && !(op == Op::Div && *y == 0.0)) {
                    return constant(prim::apply(op, *x, *y));
                }
            }
            return g.lookup(n);
        }
        }
        return std::nullopt;
    }

    inline auto class_has(EGraph const& g, EClassId c, Symbol s) -> bool
    {
        auto const& nodes = g.eclass(c).nodes;
        return std::any_of(nodes.begin(), nodes.end(), [&](ENode const& n) { return n.sym == s; });
    }

} // namespace detail

// All bindings of `lhs` rooted at class c (guards not applied).
inline auto ematch(EGraph const& g, Pattern const& lhs, EClassId c, std::size_t limit = std::numeric_limits<std::size_t>::max()) -> std::vector<Bindings>
{
    std::vector<Bindings> out;
    detail::match(g, lhs, c, Bindings {}, out, limit);
    return out;
}

// ---- default rule set ---------------------------------------------------------

inline auto default_rules() -> std::vector<RewriteRule>
{
    using namespace pat;
    std::vector<RewriteRule> rules;
    auto rule = [&](std::string name, Pattern lhs, Pattern rhs, bool absorbs = false) {
        rules.push_back({ std::move(name), std::move(lhs), std::move(rhs), {}, absorbs });
    };
    // Rules that use one class twice are only pointwise facts; a class that
    // may stand for a θ family has independent parameters per occurrence.
    auto ground = [](EGraph const& g, Bindings const& b) { return g.is_ground(*b.cls[0]); };
    auto guarded = [&](std::string name, Pattern lhs, Pattern rhs, std::function<bool(EGraph const&, Bindings const&)> guard) {
        rules.push_back({ std::move(name), std::move(lhs), std::move(rhs), std::move(guard), false, true });
    };
    auto folded = [](Op op) {
        return computed([op](Bindings const& b) -> std::optional<double> {
            auto x = *b.val[0];
            auto y = *b.val[1];
            if (op == Op::Div && y == 0.0) {
                return std::nullopt;
            }
            switch (op) {
            case Op::Add: return x + y;
            case Op::Sub: return x - y;
            case Op::Mul: return x * y;
            default: return x / y;
            }
        });
    };

    rule("add-comm", node(Op::Add, v(0), v(1)), node(Op::Add, v(1), v(0)));
    rule("mul-comm", node(Op::Mul, v(0), v(1)), node(Op::Mul, v(1), v(0)));
    // Reassociation is restricted to θ-free operands and only builds a node
    // pairing a constant with a non-constant when the constant is a fold of
    // two constants; an inner node equal to a constant is not expanded.
    // Cycles such as x = x + 0 would otherwise feed an endless supply of
    // x + k terms.
    auto acyclic = [](Op op) {
        return [op](EGraph const& g, Bindings const& b) {
            auto a = *b.cls[0];
            auto x = *b.cls[1];
            auto y = *b.cls[2];
            if (!g.is_ground(a) || !g.is_ground(x) || !g.is_ground(y)) {
                return false;
            }
            auto constant = [&](EClassId c) { return detail::class_constant(g, c).has_value(); };
            auto inner = g.lookup(ENode::binary(op, a, x));
            if (inner && (*inner == g.find(a) || *inner == g.find(x) || constant(*inner))) {
                return false;
            }
            auto ca = constant(a);
            auto cx = constant(x);
            auto cy = constant(y);
            if (cx && cy) {
                return true;
            }
            return ca == cx && cx == cy;
        };
    };
    guarded("add-assoc", node(Op::Add, node(Op::Add, v(0), v(1)), v(2)), node(Op::Add, v(0), node(Op::Add, v(1), v(2))), acyclic(Op::Add));
    guarded("mul-assoc", node(Op::Mul, node(Op::Mul, v(0), v(1)), v(2)), node(Op::Mul, v(0), node(Op::Mul, v(1), v(2))), acyclic(Op::Mul));
    rule("add-zero", node(Op::Add, v(0), num(0.0)), v(0));
    rule("mul-one", node(Op::Mul, v(0), num(1.0)), v(0));
    rule("mul-zero", node(Op::Mul, v(0), num(0.0)), num(0.0));
    guarded("sub-self", node(Op::Sub, v(0), v(0)), num(0.0), ground);
    guarded("div-self", node(Op::Div, v(0), v(0)), num(1.0), [](EGraph const& g, Bindings const& b) {
        return g.is_ground(*b.cls[0]) && !detail::class_has(g, *b.cls[0], Symbol::constant(0.0));
    });
    guarded("add-self", node(Op::Add, v(0), v(0)), node(Op::Mul, num(2.0), v(0)), ground);
    guarded("collect", node(Op::Add, node(Op::Mul, c(0), v(0)), node(Op::Mul, c(1), v(0))),
        node(Op::Mul, computed([](Bindings const& b) -> std::optional<double> { return *b.val[0] + *b.val[1]; }), v(0)), ground);
    guarded("collect-one", node(Op::Add, node(Op::Mul, c(0), v(0)), v(0)),
        node(Op::Mul, computed([](Bindings const& b) -> std::optional<double> { return *b.val[0] + 1.0; }), v(0)), ground);
    rule("log-exp", node(Op::LogAbs, node(Op::Exp, v(0))), v(0));
    for (auto op : { Op::Add, Op::Sub, Op::Mul, Op::Div }) {
        rule(std::string("fold-") + std::string(op_name(op)), node(op, c(0), c(1)), folded(op));
    }
    for (auto op : { Op::Add, Op::Sub, Op::Mul, Op::Div }) {
        rule(std::string("absorb-param-param-") + std::string(op_name(op)), node(op, theta(), theta()), theta(), true);
        RewriteRule r { std::string("absorb-param-const-") + std::string(op_name(op)), node(op, theta(), c(0)), theta(), {}, true };
        if (op == Op::Mul || op == Op::Div) {
            // θ·0 and θ/0 do not range over every value
            r.guard = [](EGraph const&, Bindings const& b) { return *b.val[0] != 0.0; };
        }
        rules.push_back(std::move(r));
    }
    return rules;
}

// ---- saturation -------------------------------------------------------------

struct SaturationOptions {
    std::size_t max_matches { 10'000 };
    // Bindings enumerated per class; the rest are dropped for this step.
    std::size_t max_class_matches { 1'000 };
    // Match every class instead of only the classes whose matches may have
    // changed since the previous step. Both give the same e-graph when the
    // budget is not hit; re-applying an old match is a no-op.
    bool full_scan { false };
    std::function<void(std::string_view)> warn = [](std::string_view msg) { std::clog << "warning: " << msg << '\n'; };
};

struct SaturationReport {
    std::size_t classes_scanned { 0 };
    std::size_t matches { 0 };
    std::size_t applied { 0 };
    bool truncated { false };
};

namespace detail {
    // Touched classes plus their ancestors up to `levels` above, in
    // first-seen order so classes deferred by a truncated step go first.
    inline auto dirty_closure(EGraph const& g, std::vector<EClassId> const& seeds, std::size_t levels) -> std::vector<EClassId>
    {
        std::vector<bool> seen(g.id_bound(), false);
        std::vector<EClassId> all;
        auto visit = [&](EClassId c) {
            c = g.find(c);
            if (!seen[c.value]) {
                seen[c.value] = true;
                all.push_back(c);
            }
        };
        for (auto s : seeds) {
            visit(s);
        }
        std::size_t begin = 0;
        for (std::size_t l = 0; l < levels; ++l) {
            auto end = all.size();
            for (auto i = begin; i < end; ++i) {
                for (auto const& [pn, pc] : g.eclass(all[i]).parents) {
                    visit(pc);
                }
            }
            begin = end;
        }
        return all;
    }
} // namespace detail

// One equality-saturation step: collect every match of every rule against
// the current graph, apply them all, rebuild once.
inline auto saturate_one_step(EGraph& g, std::vector<RewriteRule> const& rules, SaturationOptions const& opt = {}) -> SaturationReport
{
    SaturationReport report;
    if (g.needs_rebuild()) {
        g.rebuild();
    }
    if (rules.empty()) {
        return report;
    }
    std::size_t depth = 1;
    for (auto const& r : rules) {
        depth = std::max(depth, r.lhs.depth());
    }
    auto touched = g.take_touched();
    auto scope = opt.full_scan ? g.class_ids() : detail::dirty_closure(g, touched, depth - 1);

    struct Match {
        std::size_t rule;
        EClassId root;
        Bindings b;
    };
    std::vector<Match> matches;
    std::size_t k = 0;
    for (; k < scope.size(); ++k) {
        if (matches.size() >= opt.max_matches) {
            report.truncated = true;
            break;
        }
        auto c = scope[k];
        ++report.classes_scanned;
        if (detail::class_constant(g, c)) {
            continue; // already holds a size-1 member
        }
        auto ground = g.is_ground(c);
        auto cap = std::min(opt.max_class_matches, opt.max_matches - matches.size());
        std::size_t found = 0;
        bool capped = false;
        for (std::size_t r = 0; r < rules.size() && !capped; ++r) {
            if (rules[r].ground_root && !ground) {
                continue;
            }
            auto bindings = ematch(g, rules[r].lhs, c, cap - found);
            capped = bindings.size() >= cap - found;
            found += bindings.size();
            for (auto& b : bindings) {
                if (rules[r].guard && !rules[r].guard(g, b)) {
                    continue;
                }
                auto known = detail::existing_instance(g, rules[r].rhs, b);
                if (known && g.find(*known) == c) {
                    continue; // already holds
                }
                matches.push_back({ r, c, std::move(b) });
            }
        }
        if (capped) {
            report.truncated = true;
        }
    }
    if (report.truncated) {
        // unscanned classes stay pending for the next step
        for (; k < scope.size(); ++k) {
            g.mark_touched(scope[k]);
        }
        if (opt.warn) {
            opt.warn("equality saturation match budget reached; some classes deferred to the next step");
        }
    }
    report.matches = matches.size();
    for (auto const& m : matches) {
        auto rhs = detail::instantiate(g, rules[m.rule].rhs, m.b);
        if (!rhs) {
            continue;
        }
        if (g.find(*rhs) != g.find(m.root)) {
            g.merge(m.root, *rhs);
            ++report.applied;
        }
    }
    g.rebuild();
    return report;
}

} // namespace eggp
