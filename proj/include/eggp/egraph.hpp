// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The eggp Authors

#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "eggp/expr.hpp"

namespace eggp {

struct EClassId {
    std::uint32_t value { 0 };

    friend constexpr auto operator==(EClassId, EClassId) noexcept -> bool = default;
    friend constexpr auto operator<=>(EClassId, EClassId) noexcept = default;
};

// A symbol whose children are e-class ids. Parameters inside the e-graph are
// all the same θ node: Symbol::param() carries no index.
struct ENode {
    Symbol sym;
    std::array<EClassId, 2> kids {};

    [[nodiscard]] auto arity() const noexcept -> std::size_t { return sym.arity(); }
    [[nodiscard]] auto children() const noexcept -> std::span<EClassId const> { return { kids.data(), arity() }; }

    friend auto operator==(ENode const& a, ENode const& b) noexcept -> bool
    {
        if (!(a.sym == b.sym)) {
            return false;
        }
        for (std::size_t i = 0; i < a.arity(); ++i) {
            if (a.kids[i] != b.kids[i]) {
                return false;
            }
        }
        return true;
    }

    // Symbol ordinal, then child ids.
    friend auto operator<=>(ENode const& a, ENode const& b) noexcept -> std::strong_ordering
    {
        if (auto c = a.sym <=> b.sym; c != 0) {
            return c;
        }
        for (std::size_t i = 0; i < a.arity(); ++i) {
            if (auto c = a.kids[i] <=> b.kids[i]; c != 0) {
                return c;
            }
        }
        return std::strong_ordering::equal;
    }

    struct Hash {
        auto operator()(ENode const& n) const noexcept -> std::size_t
        {
            auto h = static_cast<std::uint64_t>(n.sym.hash());
            for (std::size_t i = 0; i < n.arity(); ++i) {
                h ^= (static_cast<std::uint64_t>(n.kids[i].value) + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2));
                h *= 0xBF58476D1CE4E5B9ULL;
            }
            return static_cast<std::size_t>(h ^ (h >> 29));
        }
    };

    static auto leaf(Symbol s) -> ENode { return { s, {} }; }
    static auto unary(Op op, EClassId a) -> ENode { return { Symbol::of(op), { a, EClassId {} } }; }
    static auto binary(Op op, EClassId a, EClassId b) -> ENode { return { Symbol::of(op), { a, b } }; }
};

// One evaluated individual, recorded against the class it was extracted from.
struct Evaluation {
    EClassId root;
    Expr expr;
    std::vector<double> params;
    double fitness { std::numeric_limits<double>::infinity() };
};

struct EClass {
    std::vector<ENode> nodes;
    std::vector<std::pair<ENode, EClassId>> parents;
    std::size_t smallest_size { 0 };
    ENode best;
    bool ground { false }; // some member contains no θ
    bool alive { false };
};

namespace detail {
    struct EGraphCodec;
}

class EGraph {
public:
    // ---- union-find -----------------------------------------------------

    // Non-mutating; safe for concurrent readers between mutations.
    [[nodiscard]] auto find(EClassId id) const -> EClassId
    {
        check_id(id);
        auto x = id.value;
        while (parent_[x] != x) {
            x = parent_[x];
        }
        return EClassId { x };
    }

    // ---- insertion and lookup ---------------------------------------------

    auto add(ENode node) -> EClassId
    {
        canonicalize(node);
        if (auto it = memo_.find(node); it != memo_.end()) {
            return find(it->second);
        }
        auto id = EClassId { static_cast<std::uint32_t>(parent_.size()) };
        parent_.push_back(id.value);
        auto& cls = classes_.emplace_back();
        cls.nodes.push_back(node);
        cls.best = node;
        cls.smallest_size = node_cost(node);
        cls.ground = node_ground(node);
        cls.alive = true;
        for (auto kid : node.children()) {
            classes_[kid.value].parents.emplace_back(node, id);
        }
        memo_.emplace(node, id);
        ++class_count_;
        ++node_count_;
        touched_.push_back(id);
        return id;
    }

    // Bottom-up insertion of a whole expression; the root is recorded.
    auto add_expr(Expr const& e) -> EClassId
    {
        auto id = insert_subtree(e);
        roots_.push_back(id);
        return id;
    }

    // Bottom-up insertion without recording a root.
    auto insert_subtree(Expr const& e) -> EClassId
    {
        std::vector<EClassId> stack;
        for (std::size_t i = e.size(); i-- > 0;) {
            ENode n { e[i], {} };
            if (n.sym.op == Op::Param) {
                n.sym = Symbol::param();
            }
            for (std::size_t c = 0; c < n.arity(); ++c) {
                n.kids[c] = stack.back();
                stack.pop_back();
            }
            stack.push_back(add(n));
        }
        return stack.back();
    }

    [[nodiscard]] auto lookup(ENode node) const -> std::optional<EClassId>
    {
        for (std::size_t c = 0; c < node.arity(); ++c) {
            node.kids[c] = find(node.kids[c]);
        }
        if (node.sym.op == Op::Param) {
            node.sym = Symbol::param();
        }
        if (auto it = memo_.find(node); it != memo_.end()) {
            return find(it->second);
        }
        return std::nullopt;
    }

    // Class id of e iff every e-node of e is present. Never mutates.
    [[nodiscard]] auto lookup_expr(Expr const& e) const -> std::optional<EClassId>
    {
        std::vector<EClassId> stack;
        for (std::size_t i = e.size(); i-- > 0;) {
            ENode n { e[i], {} };
            for (std::size_t c = 0; c < n.arity(); ++c) {
                n.kids[c] = stack.back();
                stack.pop_back();
            }
            auto id = lookup(n);
            if (!id) {
                return std::nullopt;
            }
            stack.push_back(*id);
        }
        return stack.empty() ? std::nullopt : std::optional { stack.back() };
    }

    // Class id (or absence) of every subtree of e, indexed by pre-order position.
    [[nodiscard]] auto lookup_subtrees(Expr const& e) const -> std::vector<std::optional<EClassId>>
    {
        std::vector<std::optional<EClassId>> out(e.size());
        std::vector<std::size_t> stack;
        for (std::size_t i = e.size(); i-- > 0;) {
            ENode n { e[i], {} };
            bool ok = true;
            for (std::size_t c = 0; c < n.arity(); ++c) {
                auto j = stack.back();
                stack.pop_back();
                if (out[j]) {
                    n.kids[c] = *out[j];
                } else {
                    ok = false;
                }
            }
            if (ok) {
                out[i] = lookup(n);
            }
            stack.push_back(i);
        }
        return out;
    }

    // ---- merging ----------------------------------------------------------

    auto merge(EClassId a, EClassId b) -> EClassId
    {
        a = find_mut(a);
        b = find_mut(b);
        if (a == b) {
            return a;
        }
        if (classes_[a.value].parents.size() < classes_[b.value].parents.size()) {
            std::swap(a, b);
        }
        parent_[b.value] = a.value;
        auto& into = classes_[a.value];
        auto& from = classes_[b.value];
        into.nodes.insert(into.nodes.end(), from.nodes.begin(), from.nodes.end());
        into.parents.insert(into.parents.end(), from.parents.begin(), from.parents.end());
        // sizes are reconciled by rebuild(), which re-queues parents on improvement
        from = EClass {};
        --class_count_;
        worklist_.push_back(a);
        touched_.push_back(a);
        return a;
    }

    // Restores hash-cons uniqueness and congruence, then the size analysis.
    void rebuild()
    {
        std::vector<EClassId> stale;
        while (!worklist_.empty()) {
            auto todo = std::exchange(worklist_, {});
            for (auto& id : todo) {
                id = find_mut(id);
            }
            std::sort(todo.begin(), todo.end());
            todo.erase(std::unique(todo.begin(), todo.end()), todo.end());
            for (auto id : todo) {
                stale.push_back(id);
                repair(id, stale);
            }
        }
        for (auto& id : stale) {
            id = find_mut(id);
        }
        std::sort(stale.begin(), stale.end());
        stale.erase(std::unique(stale.begin(), stale.end()), stale.end());
        for (auto id : stale) {
            normalize_nodes(id);
        }
        propagate_sizes(stale);
    }

    [[nodiscard]] auto needs_rebuild() const noexcept -> bool { return !worklist_.empty(); }

    // ---- analysis and extraction ---------------------------------------

    [[nodiscard]] auto smallest_size(EClassId id) const -> std::size_t { return classes_[find(id).value].smallest_size; }

    // True when the class has a parameter-free member, i.e. it denotes a
    // single function rather than a family indexed by θ.
    [[nodiscard]] auto is_ground(EClassId id) const -> bool { return classes_[find(id).value].ground; }

    // A smallest member expression; ties go to the lowest symbol ordinal, then
    // the lowest child class ids. Const nodes are kept as they are.
    [[nodiscard]] auto extract_smallest(EClassId id) const -> Expr
    {
        std::vector<Symbol> out;
        out.reserve(smallest_size(id));
        extract_into(find(id), out);
        return Expr(std::move(out));
    }

    // ---- inspection -----------------------------------------------------

    [[nodiscard]] auto class_count() const noexcept -> std::size_t { return class_count_; }
    [[nodiscard]] auto node_count() const noexcept -> std::size_t { return node_count_; }
    [[nodiscard]] auto id_bound() const noexcept -> std::size_t { return parent_.size(); }
    [[nodiscard]] auto eclass(EClassId id) const -> EClass const& { return classes_[find(id).value]; }
    [[nodiscard]] auto is_canonical(EClassId id) const -> bool { return find(id) == id; }

    [[nodiscard]] auto class_ids() const -> std::vector<EClassId>
    {
        std::vector<EClassId> out;
        out.reserve(class_count_);
        for (std::uint32_t i = 0; i < parent_.size(); ++i) {
            if (parent_[i] == i) {
                out.push_back(EClassId { i });
            }
        }
        return out;
    }

    // Root of every inserted expression, re-canonicalized.
    [[nodiscard]] auto roots() const -> std::vector<EClassId>
    {
        std::vector<EClassId> out;
        out.reserve(roots_.size());
        for (auto r : roots_) {
            out.push_back(find(r));
        }
        return out;
    }

    void record_evaluation(Evaluation ev)
    {
        ev.root = find(ev.root);
        evaluations_.push_back(std::move(ev));
    }

    [[nodiscard]] auto evaluations() const noexcept -> std::vector<Evaluation> const& { return evaluations_; }

    [[nodiscard]] auto evaluated() const -> std::vector<EClassId>
    {
        std::vector<EClassId> out;
        out.reserve(evaluations_.size());
        for (auto const& ev : evaluations_) {
            out.push_back(find(ev.root));
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    [[nodiscard]] auto is_evaluated(EClassId id) const -> bool
    {
        auto c = find(id);
        return std::any_of(evaluations_.begin(), evaluations_.end(), [&](auto const& ev) { return find(ev.root) == c; });
    }

    // True iff no two classes share a canonical e-node and every canonical
    // e-node is hash-consed to its own class. Only meaningful after rebuild().
    [[nodiscard]] auto check_congruence() const -> bool
    {
        std::unordered_map<ENode, EClassId, ENode::Hash> seen;
        for (auto id : class_ids()) {
            for (auto n : classes_[id.value].nodes) {
                for (std::size_t c = 0; c < n.arity(); ++c) {
                    n.kids[c] = find(n.kids[c]);
                }
                auto [it, inserted] = seen.emplace(n, id);
                if (!inserted && it->second != id) {
                    return false;
                }
                auto m = memo_.find(n);
                if (m == memo_.end() || find(m->second) != id) {
                    return false;
                }
            }
        }
        return true;
    }

    // Classes created or merged since the last call.
    auto take_touched() -> std::vector<EClassId> { return std::exchange(touched_, {}); }
    void mark_touched(EClassId id) { touched_.push_back(find(id)); }

private:
    friend struct detail::EGraphCodec;

    void check_id(EClassId id) const
    {
        if (id.value >= parent_.size()) {
            throw std::out_of_range("e-class id " + std::to_string(id.value) + " out of range");
        }
    }

    auto find_mut(EClassId id) -> EClassId
    {
        check_id(id);
        auto x = id.value;
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return EClassId { x };
    }

    void canonicalize(ENode& n)
    {
        for (std::size_t c = 0; c < n.arity(); ++c) {
            n.kids[c] = find_mut(n.kids[c]);
        }
    }

    [[nodiscard]] auto node_cost(ENode const& n) const -> std::size_t
    {
        constexpr auto unknown = std::numeric_limits<std::size_t>::max();
        std::size_t cost = 1;
        for (auto kid : n.children()) {
            auto s = classes_[find(kid).value].smallest_size;
            if (s == unknown) {
                return unknown;
            }
            cost += s;
        }
        return cost;
    }

    [[nodiscard]] auto node_ground(ENode const& n) const -> bool
    {
        if (n.sym.op == Op::Param) {
            return false;
        }
        return std::all_of(n.children().begin(), n.children().end(), [&](EClassId k) { return classes_[find(k).value].ground; });
    }

    void repair(EClassId id, std::vector<EClassId>& stale)
    {
        auto parents = std::exchange(classes_[find_mut(id).value].parents, {});
        for (auto const& [pn, pc] : parents) {
            memo_.erase(pn);
        }
        for (auto& [pn, pc] : parents) {
            canonicalize(pn);
            pc = find_mut(pc);
            auto [it, inserted] = memo_.try_emplace(pn, pc);
            if (!inserted) {
                auto other = find_mut(it->second);
                if (other != pc) {
                    pc = merge(other, pc);
                }
                it->second = pc;
            }
            stale.push_back(pc);
        }
        // Congruent parents (same canonical node) belong in one class.
        for (auto& [pn, pc] : parents) {
            canonicalize(pn);
            pc = find_mut(pc);
        }
        std::sort(parents.begin(), parents.end(), [](auto const& a, auto const& b) { return a.first < b.first || (a.first == b.first && a.second < b.second); });
        std::vector<std::pair<ENode, EClassId>> unique;
        unique.reserve(parents.size());
        for (auto& p : parents) {
            if (!unique.empty() && unique.back().first == p.first) {
                if (find_mut(unique.back().second) != find_mut(p.second)) {
                    unique.back().second = merge(unique.back().second, p.second);
                }
                continue;
            }
            unique.push_back(p);
        }
        auto& cls = classes_[find_mut(id).value];
        cls.parents.insert(cls.parents.end(), unique.begin(), unique.end());
    }

    void normalize_nodes(EClassId id)
    {
        auto& cls = classes_[id.value];
        for (auto& n : cls.nodes) {
            canonicalize(n);
        }
        std::sort(cls.nodes.begin(), cls.nodes.end());
        auto before = cls.nodes.size();
        cls.nodes.erase(std::unique(cls.nodes.begin(), cls.nodes.end()), cls.nodes.end());
        node_count_ -= before - cls.nodes.size();
    }

    // Sizes only decrease and groundness only turns on; parents are re-queued
    // whenever either changes.
    void propagate_sizes(std::vector<EClassId> queue)
    {
        while (!queue.empty()) {
            auto id = find(queue.back());
            queue.pop_back();
            auto& cls = classes_[id.value];
            auto best_cost = std::numeric_limits<std::size_t>::max();
            ENode best;
            bool ground = false;
            for (auto n : cls.nodes) {
                for (std::size_t c = 0; c < n.arity(); ++c) {
                    n.kids[c] = find(n.kids[c]);
                }
                auto cost = node_cost(n);
                ground = ground || node_ground(n);
                if (cost < best_cost || (cost == best_cost && n < best)) {
                    best_cost = cost;
                    best = n;
                }
            }
            cls.best = best;
            if (best_cost < cls.smallest_size || (ground && !cls.ground)) {
                cls.smallest_size = std::min(cls.smallest_size, best_cost);
                cls.ground = cls.ground || ground;
                for (auto const& [pn, pc] : cls.parents) {
                    queue.push_back(pc);
                }
            }
        }
    }

    void extract_into(EClassId id, std::vector<Symbol>& out) const
    {
        auto const& n = classes_[id.value].best;
        out.push_back(n.sym);
        for (auto kid : n.children()) {
            extract_into(find(kid), out);
        }
    }

    std::vector<std::uint32_t> parent_;
    std::vector<EClass> classes_;
    std::unordered_map<ENode, EClassId, ENode::Hash> memo_;
    std::vector<EClassId> roots_;
    std::vector<Evaluation> evaluations_;
    std::vector<EClassId> worklist_;
    std::vector<EClassId> touched_;
    std::size_t class_count_ { 0 };
    std::size_t node_count_ { 0 };
};

inline auto add_expr(EGraph& g, Expr const& e) -> EClassId { return g.add_expr(e); }
inline auto lookup_expr(EGraph const& g, Expr const& e) -> std::optional<EClassId> { return g.lookup_expr(e); }
inline auto extract_smallest(EGraph const& g, EClassId c) -> Expr { return g.extract_smallest(c); }

// ---- novelty probes -------------------------------------------------------

// One level of the root-to-hole path of a host expression, stored bottom-up:
// spine[0] is the hole's parent. `kids` holds the class ids of the off-path
// children; the entry at `hole` is ignored.
struct SpineLevel {
    Symbol sym;
    std::array<EClassId, 2> kids {};
    std::uint8_t hole { 0 };
};

using Spine = std::vector<SpineLevel>;

// nullopt when some off-path subtree is absent from g: then no completion of
// the host can be present.
inline auto build_spine(EGraph const& g, Expr const& host, std::size_t hole, std::vector<std::optional<EClassId>> const& ids) -> std::optional<Spine>
{
    auto path = host.path_to(hole);
    Spine spine;
    for (std::size_t k = path.size() - 1; k-- > 0;) {
        auto at = path[k];
        auto below = path[k + 1];
        SpineLevel level { host[at], {}, 0 };
        auto kids = host.children(at);
        for (std::size_t c = 0; c < kids.size(); ++c) {
            if (kids[c] == below) {
                level.hole = static_cast<std::uint8_t>(c);
            } else if (ids[kids[c]]) {
                level.kids[c] = *ids[kids[c]];
            } else {
                return std::nullopt;
            }
        }
        spine.push_back(level);
    }
    (void)g;
    return spine;
}

inline auto build_spine(EGraph const& g, Expr const& host, std::size_t hole) -> std::optional<Spine>
{
    return build_spine(g, host, hole, g.lookup_subtrees(host));
}

// Walks the spine upward from `candidate`, probing the hash-cons at every
// level. True iff the completed expression is present in g.
inline auto contains_with_context(EGraph const& g, Spine const& spine, EClassId candidate) -> bool
{
    auto cur = candidate;
    for (auto const& level : spine) {
        ENode n { level.sym, level.kids };
        n.kids[level.hole] = cur;
        auto hit = g.lookup(n);
        if (!hit) {
            return false;
        }
        cur = *hit;
    }
    return true;
}

// Same, for a candidate given as an e-node that may itself be absent.
inline auto contains_with_context(EGraph const& g, Spine const& spine, ENode const& candidate) -> bool
{
    auto hit = g.lookup(candidate);
    return hit && contains_with_context(g, spine, *hit);
}

inline auto contains_with_context(EGraph const& g, std::optional<Spine> const& spine, EClassId candidate) -> bool
{
    return spine && contains_with_context(g, *spine, candidate);
}

} // namespace eggp
