// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The eggp Authors

#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "eggp/symbol.hpp"

namespace eggp {

// Expression tree stored as a flat pre-order sequence of symbols. Node i's
// subtree occupies the contiguous range [i, subtree_end(i)).
class Expr {
public:
    Expr() = default;

    explicit Expr(std::vector<Symbol> nodes)
        : nodes_(std::move(nodes))
    {
        if (!well_formed(nodes_)) {
            throw std::invalid_argument("malformed pre-order expression");
        }
    }

    static auto leaf(Symbol s) -> Expr
    {
        if (!s.is_terminal()) {
            throw std::invalid_argument("leaf() requires a terminal symbol");
        }
        Expr e;
        e.nodes_.push_back(s);
        return e;
    }

    static auto var(std::uint32_t i) -> Expr { return leaf(Symbol::variable(i)); }
    static auto param() -> Expr { return leaf(Symbol::param()); }
    static auto constant(double v) -> Expr { return leaf(Symbol::constant(v)); }

    static auto node(Op op, std::initializer_list<Expr> children) -> Expr
    {
        if (children.size() != arity(op)) {
            throw std::invalid_argument("wrong number of children for operator");
        }
        Expr e;
        e.nodes_.push_back(Symbol::of(op));
        for (auto const& c : children) {
            e.nodes_.insert(e.nodes_.end(), c.nodes_.begin(), c.nodes_.end());
        }
        return e;
    }

    [[nodiscard]] auto empty() const noexcept -> bool { return nodes_.empty(); }
    [[nodiscard]] auto size() const noexcept -> std::size_t { return nodes_.size(); }
    [[nodiscard]] auto nodes() const noexcept -> std::span<Symbol const> { return nodes_; }
    [[nodiscard]] auto operator[](std::size_t i) const -> Symbol const& { return nodes_[i]; }
    [[nodiscard]] auto root() const -> Symbol const& { return nodes_.front(); }

    [[nodiscard]] auto subtree_end(std::size_t i) const -> std::size_t
    {
        check_index(i);
        std::size_t need = 1;
        std::size_t j = i;
        while (need > 0) {
            need = need - 1 + nodes_[j].arity();
            ++j;
        }
        return j;
    }

    [[nodiscard]] auto subtree_size(std::size_t i) const -> std::size_t { return subtree_end(i) - i; }

    // Pre-order indices of the children of node i.
    [[nodiscard]] auto children(std::size_t i) const -> std::vector<std::size_t>
    {
        std::vector<std::size_t> out;
        auto k = nodes_[i].arity();
        auto j = i + 1;
        for (std::size_t c = 0; c < k; ++c) {
            out.push_back(j);
            j = subtree_end(j);
        }
        return out;
    }

    // Depth counted in nodes: a single terminal has depth 1.
    [[nodiscard]] auto depth() const -> std::size_t
    {
        std::vector<std::size_t> stack;
        for (std::size_t i = nodes_.size(); i-- > 0;) {
            std::size_t best = 0;
            for (std::size_t c = 0; c < nodes_[i].arity(); ++c) {
                best = std::max(best, stack.back());
                stack.pop_back();
            }
            stack.push_back(best + 1);
        }
        return stack.empty() ? 0 : stack.back();
    }

    // Number of edges from the root to node i (root = 0).
    [[nodiscard]] auto level(std::size_t i) const -> std::size_t
    {
        check_index(i);
        // Walk from the root, descending into whichever child range holds i.
        std::size_t cur = 0;
        std::size_t lvl = 0;
        while (cur != i) {
            auto j = cur + 1;
            for (std::size_t c = 0; c < nodes_[cur].arity(); ++c) {
                auto end = subtree_end(j);
                if (i < end) {
                    break;
                }
                j = end;
            }
            cur = j;
            ++lvl;
        }
        return lvl;
    }

    // Pre-order indices on the path from the root down to node i, inclusive.
    [[nodiscard]] auto path_to(std::size_t i) const -> std::vector<std::size_t>
    {
        check_index(i);
        std::vector<std::size_t> path { 0 };
        std::size_t cur = 0;
        while (cur != i) {
            auto j = cur + 1;
            for (std::size_t c = 0; c < nodes_[cur].arity(); ++c) {
                auto end = subtree_end(j);
                if (i < end) {
                    break;
                }
                j = end;
            }
            cur = j;
            path.push_back(cur);
        }
        return path;
    }

    [[nodiscard]] auto subtree_at(std::size_t i) const -> Expr
    {
        auto end = subtree_end(i);
        Expr e;
        e.nodes_.assign(nodes_.begin() + static_cast<std::ptrdiff_t>(i), nodes_.begin() + static_cast<std::ptrdiff_t>(end));
        return e;
    }

    [[nodiscard]] auto replace_at(std::size_t i, Expr const& s) const -> Expr
    {
        if (s.empty()) {
            throw std::invalid_argument("replace_at: empty replacement");
        }
        auto end = subtree_end(i);
        Expr e;
        e.nodes_.reserve(nodes_.size() - (end - i) + s.size());
        e.nodes_.insert(e.nodes_.end(), nodes_.begin(), nodes_.begin() + static_cast<std::ptrdiff_t>(i));
        e.nodes_.insert(e.nodes_.end(), s.nodes_.begin(), s.nodes_.end());
        e.nodes_.insert(e.nodes_.end(), nodes_.begin() + static_cast<std::ptrdiff_t>(end), nodes_.end());
        return e;
    }

    // Same shape, different label at node i. Arity must match.
    [[nodiscard]] auto with_symbol(std::size_t i, Symbol s) const -> Expr
    {
        check_index(i);
        if (s.arity() != nodes_[i].arity()) {
            throw std::invalid_argument("with_symbol: arity mismatch");
        }
        Expr e = *this;
        e.nodes_[i] = s;
        return e;
    }

    [[nodiscard]] auto slot_count() const noexcept -> std::size_t
    {
        return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](Symbol const& s) { return s.is_slot(); }));
    }

    [[nodiscard]] auto has_op(Op op) const noexcept -> bool
    {
        return std::any_of(nodes_.begin(), nodes_.end(), [op](Symbol const& s) { return s.op == op; });
    }

    // Literal values of Const slots, in pre-order over all slots; Param slots yield nullopt.
    [[nodiscard]] auto slot_literals() const -> std::vector<std::optional<double>>
    {
        std::vector<std::optional<double>> out;
        for (auto const& s : nodes_) {
            if (s.op == Op::Const) {
                out.emplace_back(s.value);
            } else if (s.op == Op::Param) {
                out.emplace_back(std::nullopt);
            }
        }
        return out;
    }

    // Every Const becomes a Param; slot order is unchanged.
    [[nodiscard]] auto consts_to_params() const -> Expr
    {
        Expr e = *this;
        for (auto& s : e.nodes_) {
            if (s.op == Op::Const) {
                s = Symbol::param();
            }
        }
        return e;
    }

    [[nodiscard]] auto max_var_index() const noexcept -> std::optional<std::uint32_t>
    {
        std::optional<std::uint32_t> m;
        for (auto const& s : nodes_) {
            if (s.op == Op::Var && (!m || s.var > *m)) {
                m = s.var;
            }
        }
        return m;
    }

    friend auto operator==(Expr const& a, Expr const& b) -> bool { return a.nodes_ == b.nodes_; }

    static auto well_formed(std::span<Symbol const> nodes) -> bool
    {
        if (nodes.empty()) {
            return false;
        }
        std::size_t need = 1;
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            if (need == 0) {
                return false;
            }
            need = need - 1 + nodes[j].arity();
        }
        return need == 0;
    }

private:
    void check_index(std::size_t i) const
    {
        if (i >= nodes_.size()) {
            throw std::out_of_range("node index " + std::to_string(i) + " out of range for expression of size " + std::to_string(nodes_.size()));
        }
    }

    std::vector<Symbol> nodes_;
};

inline auto size(Expr const& e) -> std::size_t { return e.size(); }
inline auto depth(Expr const& e) -> std::size_t { return e.depth(); }
inline auto subtree_at(Expr const& e, std::size_t i) -> Expr { return e.subtree_at(i); }
inline auto replace_at(Expr const& e, std::size_t i, Expr const& s) -> Expr { return e.replace_at(i, s); }

inline auto format_number(double v) -> std::string
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc {}) {
        throw std::runtime_error("format_number failed");
    }
    return { buf, ptr };
}

namespace detail {

    // Renders node i; slot values come from `values` when given.
    inline void render(Expr const& e, std::size_t i, std::span<double const> values, std::size_t& slot, std::string& out)
    {
        auto const& s = e[i];
        auto kids = e.children(i);
        auto binary = [&](char const* op) {
            out += '(';
            render(e, kids[0], values, slot, out);
            out += ' ';
            out += op;
            out += ' ';
            render(e, kids[1], values, slot, out);
            out += ')';
        };
        switch (s.op) {
        case Op::Var:
            out += 'x';
            out += std::to_string(s.var);
            break;
        case Op::Param:
        case Op::Const:
            if (!values.empty()) {
                out += format_number(values[slot]);
            } else if (s.op == Op::Const) {
                out += format_number(s.value);
            } else {
                out += 't';
                out += std::to_string(slot);
            }
            ++slot;
            break;
        case Op::Add: binary("+"); break;
        case Op::Sub: binary("-"); break;
        case Op::Mul: binary("*"); break;
        case Op::Div: binary("/"); break;
        case Op::PowAbs:
            out += "(abs(";
            render(e, kids[0], values, slot, out);
            out += ") ^ ";
            render(e, kids[1], values, slot, out);
            out += ')';
            break;
        case Op::LogAbs:
            out += "log(abs(";
            render(e, kids[0], values, slot, out);
            out += "))";
            break;
        case Op::SqrtAbs:
            out += "sqrt(abs(";
            render(e, kids[0], values, slot, out);
            out += "))";
            break;
        case Op::Exp:
            out += "exp(";
            render(e, kids[0], values, slot, out);
            out += ')';
            break;
        }
    }

    class Parser {
    public:
        explicit Parser(std::string_view text)
            : text_(text)
        {
        }

        auto parse() -> Expr
        {
            std::vector<Symbol> out;
            parse_expr(out);
            skip_ws();
            if (pos_ != text_.size()) {
                fail("trailing input");
            }
            return Expr(std::move(out));
        }

    private:
        [[noreturn]] void fail(std::string const& what) const
        {
            throw std::invalid_argument("parse error at position " + std::to_string(pos_) + ": " + what);
        }

        void skip_ws()
        {
            while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])) != 0) {
                ++pos_;
            }
        }

        auto peek() -> char
        {
            skip_ws();
            return pos_ < text_.size() ? text_[pos_] : '\0';
        }

        void expect(std::string_view tok)
        {
            skip_ws();
            if (text_.substr(pos_, tok.size()) != tok) {
                fail("expected '" + std::string(tok) + "'");
            }
            pos_ += tok.size();
        }

        auto accept(std::string_view tok) -> bool
        {
            skip_ws();
            if (text_.substr(pos_, tok.size()) == tok) {
                pos_ += tok.size();
                return true;
            }
            return false;
        }

        auto parse_index() -> std::uint32_t
        {
            std::uint32_t v {};
            auto const* first = text_.data() + pos_;
            auto [ptr, ec] = std::from_chars(first, text_.data() + text_.size(), v);
            if (ec != std::errc {} || ptr == first) {
                fail("expected index");
            }
            pos_ += static_cast<std::size_t>(ptr - first);
            return v;
        }

        auto parse_number() -> double
        {
            double v {};
            auto const* first = text_.data() + pos_;
            auto [ptr, ec] = std::from_chars(first, text_.data() + text_.size(), v);
            if (ec != std::errc {} || ptr == first) {
                fail("expected number");
            }
            pos_ += static_cast<std::size_t>(ptr - first);
            return v;
        }

        void parse_expr(std::vector<Symbol>& out)
        {
            char c = peek();
            if (c == '(') {
                ++pos_;
                // "(abs(a) ^ b)" is the only binary form whose left operand is wrapped
                auto save = pos_;
                if (accept("abs(")) {
                    std::vector<Symbol> lhs;
                    parse_expr(lhs);
                    expect(")");
                    if (accept("^")) {
                        out.push_back(Symbol::of(Op::PowAbs));
                        out.insert(out.end(), lhs.begin(), lhs.end());
                        parse_expr(out);
                        expect(")");
                        return;
                    }
                    pos_ = save;
                    fail("abs() is only valid as the base of '^'");
                }
                auto at = out.size();
                out.push_back(Symbol {});
                parse_expr(out);
                skip_ws();
                Op op {};
                switch (pos_ < text_.size() ? text_[pos_] : '\0') {
                case '+': op = Op::Add; break;
                case '-': op = Op::Sub; break;
                case '*': op = Op::Mul; break;
                case '/': op = Op::Div; break;
                default: fail("expected binary operator");
                }
                ++pos_;
                out[at] = Symbol::of(op);
                parse_expr(out);
                expect(")");
                return;
            }
            if (c == 'x' && pos_ + 1 < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])) != 0) {
                ++pos_;
                out.push_back(Symbol::variable(parse_index()));
                return;
            }
            if (c == 't' && pos_ + 1 < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])) != 0) {
                ++pos_;
                (void)parse_index();
                out.push_back(Symbol::param());
                return;
            }
            if (accept("log(abs(")) {
                out.push_back(Symbol::of(Op::LogAbs));
                parse_expr(out);
                expect("))");
                return;
            }
            if (accept("sqrt(abs(")) {
                out.push_back(Symbol::of(Op::SqrtAbs));
                parse_expr(out);
                expect("))");
                return;
            }
            if (accept("exp(")) {
                out.push_back(Symbol::of(Op::Exp));
                parse_expr(out);
                expect(")");
                return;
            }
            if (c == '-' || c == '.' || std::isdigit(static_cast<unsigned char>(c)) != 0) {
                auto v = parse_number();
                if (!std::isfinite(v)) {
                    fail("non-finite constant");
                }
                out.push_back(Symbol::constant(v));
                return;
            }
            if (c == '\0') {
                fail("unexpected end of input");
            }
            fail(std::string("unexpected character '") + c + "'");
        }

        std::string_view text_;
        std::size_t pos_ { 0 };
    };

} // namespace detail

// Fully parenthesized infix. Params print as t<slot>, constants as literals.
inline auto to_string(Expr const& e) -> std::string
{
    std::string out;
    std::size_t slot = 0;
    detail::render(e, 0, {}, slot, out);
    return out;
}

// Every Param/Const slot replaced by the corresponding value.
inline auto to_string(Expr const& e, std::span<double const> values) -> std::string
{
    if (values.size() != e.slot_count()) {
        throw std::invalid_argument("to_string: slot/value count mismatch");
    }
    std::string out;
    std::size_t slot = 0;
    if (values.empty()) {
        detail::render(e, 0, {}, slot, out);
    } else {
        detail::render(e, 0, values, slot, out);
    }
    return out;
}

// Every slot rendered as t<slot>, constants included.
inline auto to_parameterized_string(Expr const& e) -> std::string { return to_string(e.consts_to_params()); }

inline auto parse(std::string_view text) -> Expr { return detail::Parser(text).parse(); }

inline auto operator<<(std::ostream& os, Expr const& e) -> std::ostream& { return os << to_string(e); }

} // namespace eggp
