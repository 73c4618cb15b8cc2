// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The eggp Authors

#pragma once

#include <algorithm>
#include <chrono>
#include <iostream>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "eggp/dataset.hpp"
#include "eggp/egraph.hpp"
#include "eggp/egraph_io.hpp"
#include "eggp/fitting.hpp"
#include "eggp/generate.hpp"
#include "eggp/novelty.hpp"
#include "eggp/pareto.hpp"
#include "eggp/rewrite.hpp"

namespace eggp {

enum class Mode : std::uint8_t { EggpSO, EggpMO, TinyGP };

inline auto mode_name(Mode m) -> std::string_view
{
    switch (m) {
    case Mode::EggpSO: return "eggp-so";
    case Mode::EggpMO: return "eggp-mo";
    case Mode::TinyGP: return "tinygp";
    }
    return "?";
}

inline auto parse_mode(std::string_view s) -> Mode
{
    for (auto m : { Mode::EggpSO, Mode::EggpMO, Mode::TinyGP }) {
        if (s == mode_name(m)) {
            return m;
        }
    }
    throw std::invalid_argument("unknown mode '" + std::string(s) + "'");
}

struct RunConfig {
    std::size_t pop_size { 500 };
    std::size_t generations { 200 };
    std::size_t tournament_size { 5 };
    double pc { 0.9 };
    double pm { 0.3 };
    std::size_t max_size { 30 };
    std::size_t max_depth { 10 };
    std::vector<Op> nonterminals = all_nonterminals();
    FitConfig fit {};
    Mode mode { Mode::EggpMO };
    std::uint64_t seed { 0 };
    std::size_t saturation_steps { 1 };
    std::size_t max_matches { 10'000 };
    std::optional<std::string> load_egraph;
    std::optional<std::string> save_egraph;

    void validate() const
    {
        if (pop_size < 1 || tournament_size < 1 || max_size < 1 || max_depth < 1) {
            throw std::invalid_argument("RunConfig: pop_size, tournament_size, max_size and max_depth must be >= 1");
        }
        if (!(pc >= 0.0 && pc <= 1.0) || !(pm >= 0.0 && pm <= 1.0)) {
            throw std::invalid_argument("RunConfig: pc and pm must lie in [0, 1]");
        }
        if (nonterminals.empty()) {
            throw std::invalid_argument("RunConfig: empty nonterminal set");
        }
        for (auto op : nonterminals) {
            if (is_terminal(op)) {
                throw std::invalid_argument("RunConfig: terminal in nonterminal set");
            }
        }
        fit.validate();
    }
};

struct GenerationStats {
    std::size_t generation { 0 };
    double best_fitness { worst_fitness };
    double median_fitness { worst_fitness };
    double unique_ratio { 0.0 };
    std::size_t egraph_classes { 0 };
    std::size_t egraph_nodes { 0 };
    double elapsed_ms { 0.0 };
};

// One crossover application that changed parent 1.
struct CrossoverRecord {
    std::size_t generation;
    bool absent_before; // child was not in the e-graph when produced
};

struct RunResult {
    std::vector<Individual> front;
    std::vector<GenerationStats> stats;
    std::vector<CrossoverRecord> crossovers;
};

// Lowest fitness wins; ties go to the smaller size, then the earlier index.
inline auto tournament_index(std::vector<Individual> const& pop, std::size_t k, Rng& rng) -> std::size_t
{
    if (pop.empty() || k < 1) {
        throw std::invalid_argument("tournament_select: empty population or k < 1");
    }
    std::uniform_int_distribution<std::size_t> d(0, pop.size() - 1);
    auto best = d(rng);
    for (std::size_t t = 1; t < k; ++t) {
        auto c = d(rng);
        auto const& a = pop[c];
        auto const& b = pop[best];
        if (a.fitness < b.fitness || (a.fitness == b.fitness && (a.size < b.size || (a.size == b.size && c < best)))) {
            best = c;
        }
    }
    return best;
}

inline auto tournament_select(std::vector<Individual> const& pop, std::size_t k, Rng& rng) -> Individual const&
{
    return pop[tournament_index(pop, k, rng)];
}

class Search {
public:
    Search(RunConfig cfg, Dataset const& train)
        : cfg_(std::move(cfg))
        , rng_(cfg_.seed)
        , rules_(default_rules())
        , db_(cfg_.max_size)
    {
        cfg_.validate();
        if (train.rows() < 2 || train.features() < 1) {
            throw DataError("training data needs at least 2 rows and 1 feature");
        }
        split_ = split_fit_val(train, rng_);
        var_.pc = cfg_.pc;
        var_.pm = cfg_.pm;
        var_.gen.max_size = cfg_.max_size;
        var_.gen.max_depth = cfg_.max_depth;
        var_.gen.feature_count = train.features();
        var_.gen.nonterminals = cfg_.nonterminals;
        sat_.max_matches = cfg_.max_matches;
        sat_.warn = [warned = false](std::string_view msg) mutable {
            if (!warned) {
                std::clog << "warning: " << msg << " (reported once per run)\n";
                warned = true;
            }
        };
    }

    [[nodiscard]] auto config() const noexcept -> RunConfig const& { return cfg_; }
    [[nodiscard]] auto egraph() const noexcept -> EGraph const& { return g_; }
    [[nodiscard]] auto db() const noexcept -> ParetoDB const& { return db_; }
    [[nodiscard]] auto population() const noexcept -> std::vector<Individual> const& { return pop_; }
    [[nodiscard]] auto stats() const noexcept -> std::vector<GenerationStats> const& { return stats_; }
    [[nodiscard]] auto crossovers() const noexcept -> std::vector<CrossoverRecord> const& { return crossovers_; }
    [[nodiscard]] auto split() const noexcept -> FitValSplit const& { return split_; }
    [[nodiscard]] auto generation() const noexcept -> std::size_t { return generation_; }

    // Generation 0: a fresh population, or one drawn from a loaded e-graph.
    void initialize()
    {
        auto start = clock::now();
        std::size_t absent = 0;
        if (cfg_.load_egraph) {
            g_ = load_egraph(*cfg_.load_egraph);
            check_features();
            reseed_db();
            pop_ = resume_population();
        }
        if (pop_.empty()) {
            for (auto& e : ramped_half_and_half(cfg_.pop_size, var_.gen, rng_)) {
                if (!g_.lookup_expr(e)) {
                    ++absent;
                }
                auto root = insert(e);
                pop_.push_back(evaluate(e, root));
            }
        }
        record_stats(static_cast<double>(absent) / static_cast<double>(cfg_.pop_size), start);
    }

    void step()
    {
        auto start = clock::now();
        ++generation_;
        std::vector<std::pair<Expr, EClassId>> children;
        children.reserve(cfg_.pop_size);
        std::size_t absent = 0;
        for (std::size_t k = 0; k < cfg_.pop_size; ++k) {
            auto child = vary();
            if (!g_.lookup_expr(child)) {
                ++absent;
            }
            auto root = insert(child);
            children.emplace_back(std::move(child), root);
        }
        std::vector<Individual> offspring;
        offspring.reserve(children.size());
        for (auto const& [child, root] : children) {
            offspring.push_back(evaluate(child, root));
        }
        if (cfg_.mode == Mode::EggpMO) {
            pop_ = replace_mo(db_, offspring, cfg_.pop_size, rng_);
        } else {
            pop_ = replace_so(pop_, std::move(offspring));
        }
        record_stats(static_cast<double>(absent) / static_cast<double>(cfg_.pop_size), start);
    }

    auto run() -> RunResult
    {
        initialize();
        for (std::size_t k = 0; k < cfg_.generations; ++k) {
            step();
        }
        if (cfg_.save_egraph) {
            save_egraph(g_, *cfg_.save_egraph);
        }
        return { db_.pareto_front(), stats_, crossovers_ };
    }

private:
    using clock = std::chrono::steady_clock;

    auto insert(Expr const& e) -> EClassId
    {
        auto root = g_.add_expr(e);
        for (std::size_t s = 0; s < cfg_.saturation_steps; ++s) {
            saturate_one_step(g_, rules_, sat_);
        }
        return g_.find(root);
    }

    auto vary() -> Expr
    {
        auto const& p1 = tournament_select(pop_, cfg_.tournament_size, rng_).expr;
        auto const& p2 = tournament_select(pop_, cfg_.tournament_size, rng_).expr;
        if (cfg_.mode == Mode::TinyGP) {
            return subtree_mutation(subtree_crossover(p1, p2, var_, rng_), var_, rng_);
        }
        auto x = egraph_crossover(p1, p2, var_, g_, rng_);
        if (x != p1) {
            crossovers_.push_back({ generation_, !g_.lookup_expr(x) });
        }
        return egraph_mutation(x, var_, g_, rng_);
    }

    // eggp re-extracts the smallest member of the child's class before
    // fitting; the baseline fits the child as produced. A deeper extraction
    // than the depth limit falls back to the child itself.
    auto evaluate(Expr const& child, EClassId root) -> Individual
    {
        auto cls = g_.find(root);
        auto chosen = child;
        if (cfg_.mode != Mode::TinyGP) {
            auto ext = g_.extract_smallest(cls);
            if (ext.depth() <= cfg_.max_depth) {
                chosen = std::move(ext);
            }
        }
        Rng local(rng_());
        auto fitted = fit_params(chosen, split_.fit, cfg_.fit, local);
        auto ind = score(chosen.consts_to_params(), cls, std::move(fitted.params));
        g_.record_evaluation({ cls, ind.expr, ind.params, ind.fitness });
        db_.insert(ind);
        return ind;
    }

    auto score(Expr e, EClassId cls, std::vector<double> params) const -> Individual
    {
        Individual ind;
        auto pred = predict(e, split_.val, params);
        ind.fitness = mse(pred, split_.val.y);
        ind.r2_val = r2(pred, split_.val.y);
        ind.size = e.size();
        ind.expr = std::move(e);
        ind.root = cls;
        ind.params = std::move(params);
        return ind;
    }

    void check_features() const
    {
        auto features = var_.gen.feature_count;
        for (auto id : g_.class_ids()) {
            for (auto const& n : g_.eclass(id).nodes) {
                if (n.sym.op == Op::Var && n.sym.var >= features) {
                    throw DataError("loaded e-graph uses x" + std::to_string(n.sym.var) + " but the data has " + std::to_string(features) + " features");
                }
            }
        }
    }

    // Stored evaluations are re-scored with their saved parameters so the
    // history front is available before any refit.
    void reseed_db()
    {
        for (auto const& ev : g_.evaluations()) {
            if (ev.expr.size() > cfg_.max_size) {
                continue;
            }
            db_.insert(score(ev.expr, g_.find(ev.root), ev.params));
        }
    }

    auto resume_population() -> std::vector<Individual>
    {
        std::vector<Individual> pop;
        if (cfg_.mode == Mode::EggpMO) {
            for (auto const& ind : db_.pareto_front()) {
                if (pop.size() < cfg_.pop_size) {
                    pop.push_back(evaluate(ind.expr, ind.root));
                }
            }
        }
        std::vector<EClassId> roots;
        for (auto r : g_.roots()) {
            if (g_.smallest_size(r) <= cfg_.max_size) {
                roots.push_back(r);
            }
        }
        if (roots.empty()) {
            return pop;
        }
        std::uniform_int_distribution<std::size_t> d(0, roots.size() - 1);
        while (pop.size() < cfg_.pop_size) {
            auto r = roots[d(rng_)];
            pop.push_back(evaluate(g_.extract_smallest(r), r));
        }
        return pop;
    }

    void record_stats(double unique_ratio, clock::time_point start)
    {
        GenerationStats s;
        s.generation = generation_;
        std::vector<double> f;
        f.reserve(pop_.size());
        for (auto const& ind : pop_) {
            f.push_back(ind.fitness);
        }
        if (!f.empty()) {
            std::sort(f.begin(), f.end());
            s.best_fitness = f.front();
            auto m = f.size() / 2;
            s.median_fitness = f.size() % 2 == 1 ? f[m] : 0.5 * (f[m - 1] + f[m]);
        }
        s.unique_ratio = unique_ratio;
        s.egraph_classes = g_.class_count();
        s.egraph_nodes = g_.node_count();
        s.elapsed_ms = std::chrono::duration<double, std::milli>(clock::now() - start).count();
        stats_.push_back(s);
    }

    RunConfig cfg_;
    Rng rng_;
    std::vector<RewriteRule> rules_;
    SaturationOptions sat_;
    VariationConfig var_;
    FitValSplit split_;
    EGraph g_;
    ParetoDB db_;
    std::vector<Individual> pop_;
    std::vector<GenerationStats> stats_;
    std::vector<CrossoverRecord> crossovers_;
    std::size_t generation_ { 0 };
};

inline auto run(RunConfig cfg, Dataset const& train) -> RunResult
{
    Search s(std::move(cfg), train);
    return s.run();
}

} // namespace eggp
