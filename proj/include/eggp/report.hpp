// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The eggp Authors

#pragma once

#include <optional>
#include <ostream>
#include <vector>

#include "eggp/dataset.hpp"
#include "eggp/fitting.hpp"
#include "eggp/pareto.hpp"
#include "eggp/search.hpp"

namespace eggp {

// r2_train is measured on the full training set (fit and validation rows).
inline void write_front_csv(std::ostream& out, std::vector<Individual> const& front, Dataset const& train,
    Dataset const& val, std::optional<Dataset> const& test = std::nullopt)
{
    out << "expression,parameterized_expression,size,n_params,fitness_val_mse,r2_train,r2_val,r2_test\n";
    for (auto const& ind : front) {
        auto r2_on = [&](Dataset const& d) { return format_number(r2(predict(ind.expr, d, ind.params), d.y)); };
        out << to_string(ind.expr, ind.params) << ',' << to_parameterized_string(ind.expr) << ',' << ind.size << ','
            << ind.params.size() << ',' << format_number(ind.fitness) << ',' << r2_on(train) << ',' << r2_on(val) << ',';
        if (test) {
            out << r2_on(*test);
        }
        out << '\n';
    }
}

inline void write_stats_csv(std::ostream& out, std::vector<GenerationStats> const& stats)
{
    out << "generation,best_fitness,median_fitness,unique_ratio,egraph_classes,egraph_nodes,elapsed_ms\n";
    for (auto const& s : stats) {
        out << s.generation << ',' << format_number(s.best_fitness) << ',' << format_number(s.median_fitness) << ','
            << format_number(s.unique_ratio) << ',' << s.egraph_classes << ',' << s.egraph_nodes << ','
            << format_number(s.elapsed_ms) << '\n';
    }
}

} // namespace eggp
