// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The eggp Authors

#pragma once

#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace eggp {

// The declaration order is the symbol ordinal used for deterministic
// tie-breaking during extraction.
enum class Op : std::uint8_t {
    Var,
    Param,
    Const,
    Add,
    Sub,
    Mul,
    Div,
    LogAbs,
    Exp,
    SqrtAbs,
    PowAbs,
};

inline constexpr std::size_t op_count = 11;

constexpr auto arity(Op op) noexcept -> std::size_t
{
    switch (op) {
    case Op::Var:
    case Op::Param:
    case Op::Const:
        return 0;
    case Op::LogAbs:
    case Op::Exp:
    case Op::SqrtAbs:
        return 1;
    default:
        return 2;
    }
}

constexpr auto is_terminal(Op op) noexcept -> bool { return arity(op) == 0; }

// Short names used on the command line (--nonterminals) and in the e-graph file.
constexpr auto op_name(Op op) noexcept -> std::string_view
{
    switch (op) {
    case Op::Var: return "var";
    case Op::Param: return "param";
    case Op::Const: return "const";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Div: return "div";
    case Op::LogAbs: return "logabs";
    case Op::Exp: return "exp";
    case Op::SqrtAbs: return "sqrtabs";
    case Op::PowAbs: return "powabs";
    }
    return "?";
}

inline auto parse_op_name(std::string_view name) -> Op
{
    for (std::size_t i = 0; i < op_count; ++i) {
        auto op = static_cast<Op>(i);
        if (op_name(op) == name) {
            return op;
        }
    }
    throw std::invalid_argument("unknown operator name '" + std::string(name) + "'");
}

inline auto all_nonterminals() -> std::vector<Op>
{
    return { Op::Add, Op::Sub, Op::Mul, Op::Div, Op::LogAbs, Op::Exp, Op::SqrtAbs, Op::PowAbs };
}

// A node label. Var carries a feature index, Const a literal value; Param is
// a fitting placeholder whose identity is its pre-order position.
struct Symbol {
    Op op { Op::Var };
    std::uint32_t var { 0 };
    double value { 0.0 };

    static constexpr auto variable(std::uint32_t index) noexcept -> Symbol { return { Op::Var, index, 0.0 }; }
    static constexpr auto param() noexcept -> Symbol { return { Op::Param, 0, 0.0 }; }
    static constexpr auto constant(double v) noexcept -> Symbol { return { Op::Const, 0, v == 0.0 ? 0.0 : v }; }
    static constexpr auto of(Op op) noexcept -> Symbol { return { op, 0, 0.0 }; }

    [[nodiscard]] constexpr auto arity() const noexcept -> std::size_t { return eggp::arity(op); }
    [[nodiscard]] constexpr auto is_terminal() const noexcept -> bool { return eggp::is_terminal(op); }
    // Param and Const occurrences both consume a parameter slot.
    [[nodiscard]] constexpr auto is_slot() const noexcept -> bool { return op == Op::Param || op == Op::Const; }

    friend constexpr auto operator==(Symbol const& a, Symbol const& b) noexcept -> bool
    {
        if (a.op != b.op) {
            return false;
        }
        if (a.op == Op::Var) {
            return a.var == b.var;
        }
        if (a.op == Op::Const) {
            return std::bit_cast<std::uint64_t>(a.value) == std::bit_cast<std::uint64_t>(b.value);
        }
        return true;
    }

    // Ordinal first, then payload.
    friend constexpr auto operator<=>(Symbol const& a, Symbol const& b) noexcept -> std::strong_ordering
    {
        if (auto c = a.op <=> b.op; c != 0) {
            return c;
        }
        if (a.op == Op::Var) {
            return a.var <=> b.var;
        }
        if (a.op == Op::Const) {
            // constants are always finite, so the partial order is total here
            if (a.value < b.value) {
                return std::strong_ordering::less;
            }
            if (b.value < a.value) {
                return std::strong_ordering::greater;
            }
        }
        return std::strong_ordering::equal;
    }

    [[nodiscard]] auto hash() const noexcept -> std::size_t
    {
        std::uint64_t h = static_cast<std::uint64_t>(op) * 0x9E3779B97F4A7C15ULL;
        if (op == Op::Var) {
            h ^= (static_cast<std::uint64_t>(var) + 0x632BE59BD9B4E019ULL) * 0xBF58476D1CE4E5B9ULL;
        } else if (op == Op::Const) {
            h ^= std::bit_cast<std::uint64_t>(value) * 0x94D049BB133111EBULL;
        }
        return static_cast<std::size_t>(h ^ (h >> 31));
    }
};

} // namespace eggp
