// Shared fixtures for the test suite.
#pragma once

#include <array>
#include <random>

#include <Eigen/Core>

#include "eggp/egraph.hpp"
#include "eggp/generate.hpp"
#include "eggp/rewrite.hpp"

namespace support {

// Random tree with some θ leaves replaced by small literals, so rules that
// match constants fire.
inline auto random_expr(eggp::GenConfig const& cfg, eggp::Rng& rng, double const_rate = 0.3) -> eggp::Expr
{
    static constexpr std::array<double, 6> literals { 0.0, 1.0, 2.0, -1.0, 0.5, 3.0 };
    std::bernoulli_distribution coin(0.5);
    std::bernoulli_distribution as_const(const_rate);
    std::uniform_int_distribution<std::size_t> pick(0, literals.size() - 1);
    auto e = coin(rng) ? eggp::grow(cfg, rng) : eggp::full(cfg, rng);
    for (std::size_t i = 0; i < e.size(); ++i) {
        if (e[i].op == eggp::Op::Param && as_const(rng)) {
            e = e.with_symbol(i, eggp::Symbol::constant(literals[pick(rng)]));
        }
    }
    return e;
}

inline auto quiet() -> eggp::SaturationOptions
{
    eggp::SaturationOptions opt;
    opt.warn = nullptr;
    return opt;
}

// Graph built from `count` random expressions, one saturation step after each.
inline auto random_graph(std::size_t count, std::size_t max_size, std::uint64_t seed, std::vector<eggp::Expr>* inserted = nullptr) -> eggp::EGraph
{
    eggp::Rng rng(seed);
    eggp::GenConfig cfg;
    cfg.feature_count = 2;
    cfg.max_size = max_size;
    cfg.max_depth = 6;
    auto rules = eggp::default_rules();
    eggp::EGraph g;
    for (std::size_t k = 0; k < count; ++k) {
        auto e = random_expr(cfg, rng);
        g.add_expr(e);
        eggp::saturate_one_step(g, rules, quiet());
        if (inserted != nullptr) {
            inserted->push_back(e);
        }
    }
    return g;
}

inline auto random_matrix(Eigen::Index rows, Eigen::Index cols, double lo, double hi, eggp::Rng& rng) -> Eigen::MatrixXd
{
    std::uniform_real_distribution<double> u(lo, hi);
    Eigen::MatrixXd x(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            x(r, c) = u(rng);
        }
    }
    return x;
}

} // namespace support
