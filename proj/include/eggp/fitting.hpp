// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The eggp Authors

#pragma once

#include <cmath>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "eggp/dataset.hpp"
#include "eggp/eval.hpp"
#include "eggp/generate.hpp"

namespace eggp {

inline constexpr double worst_fitness = std::numeric_limits<double>::infinity();

struct FitConfig {
    std::size_t iterations { 50 };
    std::size_t restarts { 2 };

    void validate() const
    {
        if (iterations < 1 || restarts < 1) {
            throw std::invalid_argument("FitConfig: iterations and restarts must be >= 1");
        }
    }
};

struct FitResult {
    std::vector<double> params;
    double loss { worst_fitness };
};

inline auto mse(Eigen::Ref<Eigen::VectorXd const> const& pred, Eigen::Ref<Eigen::VectorXd const> const& y) -> double
{
    if (pred.size() != y.size() || y.size() < 1) {
        throw std::invalid_argument("mse: length mismatch");
    }
    if (!pred.allFinite()) {
        return worst_fitness;
    }
    return (pred - y).squaredNorm() / static_cast<double>(y.size());
}

inline auto r2(Eigen::Ref<Eigen::VectorXd const> const& pred, Eigen::Ref<Eigen::VectorXd const> const& y) -> double
{
    if (pred.size() != y.size() || y.size() < 1) {
        throw std::invalid_argument("r2: length mismatch");
    }
    if (!pred.allFinite()) {
        return -std::numeric_limits<double>::infinity();
    }
    auto ss_res = (pred - y).squaredNorm();
    auto ss_tot = (y.array() - y.mean()).matrix().squaredNorm();
    if (ss_tot == 0.0) {
        return ss_res == 0.0 ? 1.0 : 0.0;
    }
    return 1.0 - ss_res / ss_tot;
}

// Analytic gradient of the mean squared error with respect to every slot.
inline auto mse_gradient(Expr const& e, Eigen::MatrixXd const& x, Eigen::VectorXd const& y, std::span<double const> params) -> Eigen::VectorXd
{
    BatchEvaluator ev(e);
    Eigen::VectorXd r = ev.forward(x, params).matrix() - y;
    Eigen::MatrixXd jac;
    ev.jacobian(jac);
    return (2.0 / static_cast<double>(y.size())) * jac.transpose() * r;
}

namespace detail {

    // Levenberg-Marquardt with Marquardt diagonal scaling; each iteration is
    // one trial step. Leaves the best point seen in `p`.
    inline auto levenberg_marquardt(BatchEvaluator& ev, Eigen::MatrixXd const& x, Eigen::VectorXd const& y, std::vector<double>& p, std::size_t iterations) -> double
    {
        auto n = static_cast<double>(y.size());
        auto k = static_cast<Eigen::Index>(p.size());
        Eigen::VectorXd r = ev.forward(x, p).matrix() - y;
        if (!r.allFinite()) {
            return worst_fitness;
        }
        auto loss = r.squaredNorm() / n;
        Eigen::MatrixXd jac;
        Eigen::VectorXd grad;
        Eigen::MatrixXd normal;
        double lambda = 1e-3;
        bool fresh = true;
        std::vector<double> trial(p.size());
        for (std::size_t it = 0; it < iterations && loss > 0.0; ++it) {
            if (fresh) {
                ev.jacobian(jac);
                if (!jac.allFinite()) {
                    break;
                }
                grad = jac.transpose() * r;
                normal = jac.transpose() * jac;
                fresh = false;
            }
            Eigen::MatrixXd a = normal;
            for (Eigen::Index d = 0; d < k; ++d) {
                a(d, d) += lambda * (normal(d, d) + 1e-12);
            }
            Eigen::VectorXd step = a.ldlt().solve(-grad);
            if (!step.allFinite()) {
                lambda *= 10.0;
                continue;
            }
            for (Eigen::Index d = 0; d < k; ++d) {
                trial[static_cast<std::size_t>(d)] = p[static_cast<std::size_t>(d)] + step(d);
            }
            Eigen::VectorXd rt = ev.forward(x, trial).matrix() - y;
            auto lt = rt.allFinite() ? rt.squaredNorm() / n : worst_fitness;
            if (lt < loss) {
                auto gain = loss - lt;
                p = trial;
                r = std::move(rt);
                loss = lt;
                lambda = std::max(lambda / 10.0, 1e-12);
                fresh = true;
                if (gain <= 1e-15 * std::max(1.0, loss)) {
                    break;
                }
            } else {
                // restore buffers for the accepted point before the next Jacobian
                ev.forward(x, p);
                lambda *= 10.0;
                if (lambda > 1e12) {
                    break;
                }
            }
        }
        return loss;
    }

} // namespace detail

// Restart 0 seeds Const slots with their literal; later restarts perturb
// them by N(0,1). Param slots always start at N(0,1).
inline auto fit_params(Expr const& e, Eigen::MatrixXd const& x, Eigen::VectorXd const& y, FitConfig const& cfg, Rng& rng) -> FitResult
{
    cfg.validate();
    BatchEvaluator ev(e);
    if (ev.slot_count() == 0) {
        return { {}, mse(ev.forward(x, {}).matrix(), y) };
    }
    std::normal_distribution<double> normal(0.0, 1.0);
    FitResult best;
    std::vector<double> last;
    for (std::size_t restart = 0; restart < cfg.restarts; ++restart) {
        std::vector<double> p;
        p.reserve(ev.slot_count());
        for (auto const& s : e.nodes()) {
            if (s.op == Op::Const) {
                p.push_back(restart == 0 ? s.value : s.value + normal(rng));
            } else if (s.op == Op::Param) {
                p.push_back(normal(rng));
            }
        }
        auto loss = detail::levenberg_marquardt(ev, x, y, p, cfg.iterations);
        if (std::isfinite(loss) && loss < best.loss) {
            best = { p, loss };
        }
        last = std::move(p);
    }
    if (!std::isfinite(best.loss)) {
        return { std::move(last), worst_fitness };
    }
    return best;
}

inline auto fit_params(Expr const& e, Dataset const& fit, FitConfig const& cfg, Rng& rng) -> FitResult
{
    return fit_params(e, fit.x, fit.y, cfg, rng);
}

inline auto predict(Expr const& e, Dataset const& d, std::span<double const> params) -> Eigen::VectorXd
{
    return evaluate(e, d.x, params);
}

} // namespace eggp
