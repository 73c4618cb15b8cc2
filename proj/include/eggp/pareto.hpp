// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The eggp Authors

#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "eggp/egraph.hpp"
#include "eggp/generate.hpp"

namespace eggp {

struct Individual {
    Expr expr;
    EClassId root {};
    std::vector<double> params;
    double fitness { std::numeric_limits<double>::infinity() }; // validation MSE
    std::size_t size { 1 };
    double r2_val { -std::numeric_limits<double>::infinity() };
};

// a dominates b under (minimize fitness, minimize size)
inline auto dominates(double fa, std::size_t sa, double fb, std::size_t sb) -> bool
{
    return fa <= fb && sa <= sb && (fa < fb || sa < sb);
}

// History of every evaluated individual, keyed by size. Only the per-size
// champion is kept in full; the history itself records (size, fitness).
class ParetoDB {
public:
    struct Entry {
        std::size_t size;
        double fitness;
    };

    explicit ParetoDB(std::size_t max_size)
        : best_(max_size + 1)
    {
        if (max_size < 1) {
            throw std::invalid_argument("ParetoDB: max_size must be >= 1");
        }
    }

    void insert(Individual const& ind)
    {
        if (ind.size < 1 || ind.size >= best_.size()) {
            throw std::out_of_range("ParetoDB: size " + std::to_string(ind.size) + " outside [1, " + std::to_string(best_.size() - 1) + "]");
        }
        history_.push_back({ ind.size, ind.fitness });
        auto& slot = best_[ind.size];
        if (!slot || ind.fitness < slot->fitness) {
            slot = ind;
        }
    }

    [[nodiscard]] auto max_size() const noexcept -> std::size_t { return best_.size() - 1; }
    [[nodiscard]] auto count() const noexcept -> std::size_t { return history_.size(); }
    [[nodiscard]] auto empty() const noexcept -> bool { return history_.empty(); }
    [[nodiscard]] auto history() const noexcept -> std::vector<Entry> const& { return history_; }
    [[nodiscard]] auto best_at(std::size_t size) const -> std::optional<Individual> const& { return best_.at(size); }

    // Sizes of the first front, ascending.
    [[nodiscard]] auto front_sizes() const -> std::vector<std::size_t> { return scan({}); }

    // Sizes of the next front once the first front's champions are removed.
    [[nodiscard]] auto second_front_sizes() const -> std::vector<std::size_t> { return scan(front_sizes()); }

    [[nodiscard]] auto pareto_front() const -> std::vector<Individual> { return collect(front_sizes()); }
    [[nodiscard]] auto second_front() const -> std::vector<Individual> { return collect(second_front_sizes()); }

private:
    [[nodiscard]] auto scan(std::vector<std::size_t> const& skip) const -> std::vector<std::size_t>
    {
        std::vector<std::size_t> out;
        std::optional<double> seen;
        auto k = skip.begin();
        for (std::size_t s = 1; s < best_.size(); ++s) {
            if (k != skip.end() && *k == s) {
                ++k;
                continue;
            }
            if (best_[s] && (!seen || best_[s]->fitness < *seen)) {
                out.push_back(s);
                seen = best_[s]->fitness;
            }
        }
        return out;
    }

    [[nodiscard]] auto collect(std::vector<std::size_t> const& sizes) const -> std::vector<Individual>
    {
        std::vector<Individual> out;
        out.reserve(sizes.size());
        for (auto s : sizes) {
            out.push_back(*best_[s]);
        }
        return out;
    }

    std::vector<std::optional<Individual>> best_;
    std::vector<Entry> history_;
};

inline auto pareto_front(ParetoDB const& db) -> std::vector<Individual> { return db.pareto_front(); }

// Next population: first front, then the second front (randomly thinned if
// it overflows), then offspring drawn without replacement. May come out
// short when there is nothing left to draw.
inline auto replace_mo(ParetoDB const& db, std::vector<Individual> const& offspring, std::size_t pop_size, Rng& rng) -> std::vector<Individual>
{
    if (db.empty()) {
        throw std::invalid_argument("replace_mo: empty database");
    }
    auto pop = db.pareto_front();
    if (pop.size() >= pop_size) {
        pop.resize(pop_size);
        return pop;
    }
    auto second = db.second_front();
    auto room = pop_size - pop.size();
    if (second.size() > room) {
        std::shuffle(second.begin(), second.end(), rng);
        second.resize(room);
        std::sort(second.begin(), second.end(), [](auto const& a, auto const& b) { return a.size < b.size; });
    }
    pop.insert(pop.end(), second.begin(), second.end());

    std::vector<std::size_t> idx(offspring.size());
    std::iota(idx.begin(), idx.end(), 0);
    auto need = std::min(pop_size - pop.size(), idx.size());
    for (std::size_t k = 0; k < need; ++k) {
        std::uniform_int_distribution<std::size_t> d(k, idx.size() - 1);
        std::swap(idx[k], idx[d(rng)]);
        pop.push_back(offspring[idx[k]]);
    }
    return pop;
}

inline auto replace_so(std::vector<Individual> const& /*old_pop*/, std::vector<Individual> offspring) -> std::vector<Individual>
{
    return offspring;
}

} // namespace eggp
