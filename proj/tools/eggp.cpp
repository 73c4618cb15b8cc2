// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The eggp Authors

#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "eggp/eggp.hpp"

namespace {

auto parse_nonterminals(std::string const& list) -> std::vector<eggp::Op>
{
    std::vector<eggp::Op> ops;
    std::stringstream in(list);
    std::string item;
    while (std::getline(in, item, ',')) {
        auto op = eggp::parse_op_name(item);
        if (eggp::is_terminal(op)) {
            throw std::invalid_argument("'" + item + "' is not a non-terminal");
        }
        ops.push_back(op);
    }
    if (ops.empty()) {
        throw std::invalid_argument("empty non-terminal list");
    }
    return ops;
}

template <typename Write>
void write_file(std::string const& path, Write write)
{
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    write(out);
    if (!out) {
        throw std::runtime_error("failed writing '" + path + "'");
    }
}

} // namespace

auto main(int argc, char** argv) -> int
{
    CLI::App app { "eggp: symbolic regression with e-graph guided genetic programming" };

    eggp::RunConfig cfg;
    eggp::DataSpec data;
    std::string test_path;
    std::string target;
    std::string mode = "eggp-mo";
    std::string nonterminals = "add,sub,mul,div,logabs,exp,sqrtabs,powabs";
    std::string load_path;
    std::string save_path;
    std::string out_path = "front.csv";
    std::string stats_path = "stats.csv";
    std::size_t row_cap = 0;
    bool no_header = false;
    char delimiter = ',';

    app.add_option("--data", data.path, "training CSV")->required();
    app.add_option("--target", target, "target column name or 0-based index (default: last column)");
    app.add_option("--test-data", test_path, "held-out CSV with the same columns");
    app.add_option("--mode", mode, "eggp-so | eggp-mo | tinygp")->check(CLI::IsMember({ "eggp-so", "eggp-mo", "tinygp" }));
    app.add_option("--pop", cfg.pop_size, "population size")->check(CLI::PositiveNumber);
    app.add_option("--gens", cfg.generations, "generations");
    app.add_option("--tournament", cfg.tournament_size, "tournament size")->check(CLI::PositiveNumber);
    app.add_option("--pc", cfg.pc, "crossover probability")->check(CLI::Range(0.0, 1.0));
    app.add_option("--pm", cfg.pm, "mutation probability")->check(CLI::Range(0.0, 1.0));
    app.add_option("--max-size", cfg.max_size, "maximum expression size")->check(CLI::PositiveNumber);
    app.add_option("--max-depth", cfg.max_depth, "maximum expression depth")->check(CLI::PositiveNumber);
    app.add_option("--opt-iters", cfg.fit.iterations, "optimizer iterations per restart")->check(CLI::PositiveNumber);
    app.add_option("--opt-restarts", cfg.fit.restarts, "optimizer restarts")->check(CLI::PositiveNumber);
    app.add_option("--seed", cfg.seed, "random seed");
    app.add_option("--nonterminals", nonterminals, "comma-separated operator list");
    app.add_option("--saturation-steps", cfg.saturation_steps, "equality saturation steps per insertion");
    app.add_option("--load-egraph", load_path, "resume from a saved e-graph");
    app.add_option("--save-egraph", save_path, "write the final e-graph");
    app.add_option("--out", out_path, "Pareto front CSV");
    app.add_option("--stats", stats_path, "per-generation statistics CSV");
    app.add_option("--row-cap", row_cap, "keep at most N random training rows")->check(CLI::PositiveNumber);
    app.add_option("--delimiter", delimiter, "CSV delimiter");
    app.add_flag("--no-header", no_header, "CSV files have no header row");

    try {
        app.parse(argc, argv);
        cfg.mode = eggp::parse_mode(mode);
        cfg.nonterminals = parse_nonterminals(nonterminals);
        cfg.validate();
    } catch (CLI::CallForHelp const& e) {
        return app.exit(e);
    } catch (CLI::ParseError const& e) {
        app.exit(e);
        return 2;
    } catch (std::invalid_argument const& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        data.delimiter = delimiter;
        data.has_header = !no_header;
        if (!target.empty()) {
            data.target = target;
        }
        if (row_cap > 0) {
            data.row_cap = row_cap;
            data.cap_seed = cfg.seed;
        }
        if (!load_path.empty()) {
            cfg.load_egraph = load_path;
        }
        if (!save_path.empty()) {
            cfg.save_egraph = save_path;
        }
        auto train = eggp::load_csv(data);
        std::optional<eggp::Dataset> test;
        if (!test_path.empty()) {
            auto spec = data;
            spec.path = test_path;
            spec.row_cap.reset();
            test = eggp::load_csv(spec);
            if (test->features() != train.features()) {
                throw eggp::DataError("test data has " + std::to_string(test->features()) + " features, training data has " + std::to_string(train.features()));
            }
        }

        eggp::Search search(cfg, train);
        if (search.split().degenerate) {
            std::cerr << "warning: fewer than 3 training rows; fitting and validation use the same rows\n";
        }
        auto result = search.run();
        write_file(out_path, [&](std::ostream& o) { eggp::write_front_csv(o, result.front, train, search.split().val, test); });
        write_file(stats_path, [&](std::ostream& o) { eggp::write_stats_csv(o, result.stats); });

        if (!result.front.empty()) {
            auto const& best = *std::min_element(result.front.begin(), result.front.end(),
                [](auto const& a, auto const& b) { return a.fitness < b.fitness; });
            std::cout << "best: " << eggp::to_string(best.expr, best.params) << "  (size " << best.size
                      << ", val mse " << eggp::format_number(best.fitness) << ")\n";
        }
        return 0;
    } catch (std::exception const& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
