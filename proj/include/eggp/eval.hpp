// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The eggp Authors

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "eggp/expr.hpp"

namespace eggp {

// Scalar primitives. log, sqrt and pow take the absolute value of their first
// argument; division is unguarded and non-finite values propagate.
namespace prim {
    inline auto apply(Op op, double a, double b = 0.0) -> double
    {
        switch (op) {
        case Op::Add: return a + b;
        case Op::Sub: return a - b;
        case Op::Mul: return a * b;
        case Op::Div: return a / b;
        case Op::LogAbs: return std::log(std::abs(a));
        case Op::Exp: return std::exp(a);
        case Op::SqrtAbs: return std::sqrt(std::abs(a));
        case Op::PowAbs: return std::pow(std::abs(a), b);
        default: break;
        }
        throw std::logic_error("prim::apply on a terminal");
    }
} // namespace prim

// Pre-order indices of each node's children (unused slots hold 0).
inline auto child_table(Expr const& e) -> std::vector<std::array<std::uint32_t, 2>>
{
    auto n = e.size();
    std::vector<std::array<std::uint32_t, 2>> kids(n, { 0, 0 });
    std::vector<std::uint32_t> stack;
    for (std::size_t i = n; i-- > 0;) {
        auto k = e[i].arity();
        for (std::size_t c = 0; c < k; ++c) {
            kids[i][c] = stack.back();
            stack.pop_back();
        }
        stack.push_back(static_cast<std::uint32_t>(i));
    }
    return kids;
}

// Evaluates node-by-node starting at `cursor`-th slot; the k-th Param/Const
// occurrence in pre-order reads params[k].
struct ParamCursor {
    std::size_t next { 0 };
};

namespace detail {
    inline auto eval_node(Expr const& e, std::size_t& i, std::span<double const> row, std::span<double const> params, ParamCursor& cursor) -> double
    {
        auto const& s = e[i++];
        switch (s.op) {
        case Op::Var:
            return row[s.var];
        case Op::Param:
        case Op::Const:
            return params[cursor.next++];
        default:
            break;
        }
        auto a = eval_node(e, i, row, params, cursor);
        if (s.arity() == 1) {
            return prim::apply(s.op, a);
        }
        auto b = eval_node(e, i, row, params, cursor);
        return prim::apply(s.op, a, b);
    }
} // namespace detail

inline auto evaluate(Expr const& e, std::span<double const> row, std::span<double const> params, ParamCursor& cursor) -> double
{
    std::size_t i = 0;
    return detail::eval_node(e, i, row, params, cursor);
}

inline auto evaluate(Expr const& e, std::span<double const> row, std::span<double const> params) -> double
{
    if (params.size() < e.slot_count()) {
        throw std::invalid_argument("evaluate: too few parameters");
    }
    ParamCursor cursor;
    return evaluate(e, row, params, cursor);
}

// Literal values for Const slots, `fill` for Param slots.
inline auto default_params(Expr const& e, double fill = 0.0) -> std::vector<double>
{
    std::vector<double> p;
    for (auto const& s : e.nodes()) {
        if (s.op == Op::Const) {
            p.push_back(s.value);
        } else if (s.op == Op::Param) {
            p.push_back(fill);
        }
    }
    return p;
}

// Column-vectorized evaluator: every node gets one buffer of n_rows values.
// X is (rows x features), column-major.
class BatchEvaluator {
public:
    explicit BatchEvaluator(Expr const& e)
        : expr_(&e)
        , kids_(child_table(e))
    {
        slot_of_.assign(e.size(), 0);
        std::size_t slot = 0;
        for (std::size_t i = 0; i < e.size(); ++i) {
            if (e[i].is_slot()) {
                slot_of_[i] = slot++;
            }
        }
        slots_ = slot;
    }

    [[nodiscard]] auto slot_count() const noexcept -> std::size_t { return slots_; }

    auto forward(Eigen::MatrixXd const& x, std::span<double const> params) -> Eigen::Ref<Eigen::ArrayXd const>
    {
        auto const& e = *expr_;
        if (params.size() < slots_) {
            throw std::invalid_argument("evaluate: too few parameters");
        }
        auto rows = x.rows();
        values_.resize(rows, static_cast<Eigen::Index>(e.size()));
        for (std::size_t i = e.size(); i-- > 0;) {
            auto col = values_.col(static_cast<Eigen::Index>(i));
            auto const& s = e[i];
            auto a = values_.col(kids_[i][0]);
            auto b = values_.col(kids_[i][1]);
            switch (s.op) {
            case Op::Var:
                if (static_cast<Eigen::Index>(s.var) >= x.cols()) {
                    throw std::out_of_range("variable x" + std::to_string(s.var) + " exceeds feature count");
                }
                col = x.col(s.var).array();
                break;
            case Op::Param:
            case Op::Const:
                col.setConstant(params[slot_of_[i]]);
                break;
            case Op::Add: col = a + b; break;
            case Op::Sub: col = a - b; break;
            case Op::Mul: col = a * b; break;
            case Op::Div: col = a / b; break;
            case Op::LogAbs: col = a.abs().log(); break;
            case Op::Exp: col = a.exp(); break;
            case Op::SqrtAbs: col = a.abs().sqrt(); break;
            case Op::PowAbs:
                for (Eigen::Index r = 0; r < rows; ++r) {
                    col(r) = std::pow(std::abs(a(r)), b(r));
                }
                break;
            }
        }
        return values_.col(0);
    }

    // Reverse sweep over the buffers from the last forward() call. Column k
    // of `jac` receives d f(row) / d params[k] for every row.
    void jacobian(Eigen::MatrixXd& jac)
    {
        auto const& e = *expr_;
        auto rows = values_.rows();
        adjoint_.resize(rows, static_cast<Eigen::Index>(e.size()));
        adjoint_.col(0).setOnes();
        jac.resize(rows, static_cast<Eigen::Index>(slots_));
        for (std::size_t i = 0; i < e.size(); ++i) {
            auto const& s = e[i];
            auto adj = adjoint_.col(static_cast<Eigen::Index>(i));
            if (s.is_slot()) {
                jac.col(static_cast<Eigen::Index>(slot_of_[i])) = adj.matrix();
                continue;
            }
            if (s.is_terminal()) {
                continue;
            }
            auto ia = kids_[i][0];
            auto ib = kids_[i][1];
            auto a = values_.col(ia);
            auto b = values_.col(ib);
            auto f = values_.col(static_cast<Eigen::Index>(i));
            auto da = adjoint_.col(ia);
            auto db = adjoint_.col(ib);
            switch (s.op) {
            case Op::Add: da = adj; db = adj; break;
            case Op::Sub: da = adj; db = -adj; break;
            case Op::Mul: da = adj * b; db = adj * a; break;
            case Op::Div: da = adj / b; db = -adj * f / b; break;
            case Op::LogAbs: da = adj / a; break;
            case Op::Exp: da = adj * f; break;
            case Op::SqrtAbs: da = adj * a.sign() * 0.5 / f; break;
            case Op::PowAbs:
                for (Eigen::Index r = 0; r < rows; ++r) {
                    auto m = std::abs(a(r));
                    da(r) = adj(r) * b(r) * std::pow(m, b(r) - 1.0) * (a(r) < 0 ? -1.0 : 1.0);
                    db(r) = adj(r) * f(r) * std::log(m);
                }
                break;
            default:
                break;
            }
        }
    }

private:
    Expr const* expr_;
    std::vector<std::array<std::uint32_t, 2>> kids_;
    std::vector<std::size_t> slot_of_;
    std::size_t slots_ { 0 };
    Eigen::ArrayXXd values_;
    Eigen::ArrayXXd adjoint_;
};

inline auto evaluate(Expr const& e, Eigen::MatrixXd const& x, std::span<double const> params) -> Eigen::VectorXd
{
    BatchEvaluator ev(e);
    return ev.forward(x, params).matrix();
}

} // namespace eggp
