#include <set>

#include <gtest/gtest.h>

#include "eggp/novelty.hpp"
#include "support.hpp"

using namespace eggp;

namespace {

auto config(std::size_t features = 1) -> VariationConfig
{
    VariationConfig cfg;
    cfg.pc = 1.0;
    cfg.pm = 1.0;
    cfg.gen.feature_count = features;
    return cfg;
}

} // namespace

// exp stands in for the cosine of the worked example.
TEST(Crossover, WorkedExampleCandidates)
{
    EGraph g;
    auto p1 = parse("(x0 + exp(x0))");
    auto p2 = parse("((2 + x0) * x0)");
    g.add_expr(p1);
    g.add_expr(p2);
    g.add_expr(parse("(x0 + (2 + x0))"));
    g.add_expr(parse("(x0 + x0)"));
    auto cfg = config();
    auto cands = crossover_candidates(p1, 2, p2, cfg.gen, g);
    EXPECT_EQ(cands, (std::vector<std::size_t> { 0, 2 }));
    EXPECT_EQ(p1.replace_at(2, p2.subtree_at(2)), parse("(x0 + 2)"));

    Rng rng(1);
    std::set<std::string> outputs;
    for (int k = 0; k < 200; ++k) {
        auto child = egraph_crossover(p1, p2, cfg, g, rng);
        if (child != p1) {
            EXPECT_FALSE(g.lookup_expr(child)) << to_string(child);
            outputs.insert(to_string(child));
        }
    }
    EXPECT_TRUE(outputs.count("(x0 + 2)"));
}

TEST(Crossover, ZeroProbabilityIsIdentity)
{
    EGraph g;
    auto p1 = parse("(x0 + exp(x0))");
    auto p2 = parse("((2 + x0) * x0)");
    auto cfg = config();
    cfg.pc = 0.0;
    Rng rng(2);
    for (int k = 0; k < 100; ++k) {
        EXPECT_EQ(egraph_crossover(p1, p2, cfg, g, rng), p1);
    }
}

TEST(Crossover, EmptyCandidateSetReturnsFirstParent)
{
    EGraph g;
    auto p1 = parse("(x0 + x0)");
    auto p2 = parse("x0");
    g.add_expr(p1);
    g.add_expr(p2);
    Rng rng(3);
    auto cfg = config();
    for (int k = 0; k < 20; ++k) {
        EXPECT_EQ(egraph_crossover(p1, p2, cfg, g, rng), p1);
    }
}

TEST(Crossover, UnresolvedSubtreesCountAsNovel)
{
    EGraph g;
    auto p1 = parse("(x0 + x0)");
    g.add_expr(p1);
    auto p2 = parse("exp(x1)"); // never inserted
    auto cands = crossover_candidates(p1, 1, p2, config(2).gen, g);
    EXPECT_EQ(cands, (std::vector<std::size_t> { 0, 1 }));
}

TEST(CrossoverProperty, NoveltyAndLimits)
{
    std::vector<Expr> pool;
    auto g = support::random_graph(200, 15, 5, &pool);
    auto cfg = config(2);
    cfg.gen.max_size = 15;
    cfg.gen.max_depth = 6;
    Rng rng(6);
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    std::size_t changed = 0;
    for (int k = 0; k < 2000; ++k) {
        auto const& p1 = pool[pick(rng)];
        auto const& p2 = pool[pick(rng)];
        auto child = egraph_crossover(p1, p2, cfg, g, rng);
        if (child != p1) {
            ++changed;
            ASSERT_FALSE(g.lookup_expr(child)) << to_string(child);
            EXPECT_LE(child.size(), cfg.gen.max_size);
            EXPECT_LE(child.depth(), cfg.gen.max_depth);
        }
    }
    EXPECT_GT(changed, 500u);
}

TEST(CrossoverProperty, DeterministicUnderSeed)
{
    std::vector<Expr> pool;
    auto g = support::random_graph(50, 12, 8, &pool);
    auto cfg = config(2);
    Rng a(4);
    Rng b(4);
    for (std::size_t k = 0; k + 1 < pool.size(); ++k) {
        EXPECT_EQ(egraph_crossover(pool[k], pool[k + 1], cfg, g, a), egraph_crossover(pool[k], pool[k + 1], cfg, g, b));
    }
}

TEST(Mutation, WorkedExampleRootSwap)
{
    EGraph g;
    auto e = parse("(x0 + exp(x0))");
    g.add_expr(e);
    g.add_expr(parse("(x0 + (2 + x0))"));
    g.add_expr(parse("(x0 + (2 - x0))"));
    g.add_expr(parse("(x0 + (2 / x0))"));
    g.add_expr(parse("(x0 + (abs(2) ^ x0))"));
    auto cfg = config();
    Rng rng(1);
    auto out = mutate_with_subtree(e, 2, parse("(2 + x0)"), cfg, g, rng);
    EXPECT_EQ(out, parse("(x0 + (2 * x0))"));
}

TEST(Mutation, NovelSubtreeKeptAsIs)
{
    EGraph g;
    auto e = parse("(x0 + exp(x0))");
    g.add_expr(e);
    auto cfg = config();
    Rng rng(1);
    EXPECT_EQ(mutate_with_subtree(e, 2, parse("(2 + x0)"), cfg, g, rng), parse("(x0 + (2 + x0))"));
}

TEST(Mutation, FallbackWhenEverySwapVisited)
{
    EGraph g;
    auto e = parse("(x0 + exp(x0))");
    g.add_expr(e);
    for (auto const* s : { "(x0 + (2 + x0))", "(x0 + (2 - x0))", "(x0 + (2 * x0))", "(x0 + (2 / x0))", "(x0 + (abs(2) ^ x0))" }) {
        g.add_expr(parse(s));
    }
    auto cfg = config();
    Rng rng(1);
    EXPECT_EQ(mutate_with_subtree(e, 2, parse("(2 + x0)"), cfg, g, rng), parse("(x0 + (2 + x0))"));
}

TEST(Mutation, TerminalSwapUsesVariablesAndTheta)
{
    EGraph g;
    auto e = parse("(x0 * x1)");
    g.add_expr(e);
    g.add_expr(parse("(x0 * t0)"));
    auto cfg = config(2);
    Rng rng(1);
    // x1 at position 2 regenerated as x1: visited; x0 is the only novel swap left
    EXPECT_EQ(mutate_with_subtree(e, 2, parse("x1"), cfg, g, rng), parse("(x0 * x0)"));
}

TEST(Mutation, SwapRespectsNonterminalSet)
{
    EGraph g;
    auto e = parse("(x0 + exp(x0))");
    g.add_expr(e);
    g.add_expr(parse("(x0 + (2 + x0))"));
    auto cfg = config();
    cfg.gen.nonterminals = { Op::Add, Op::Sub };
    Rng rng(1);
    EXPECT_EQ(mutate_with_subtree(e, 2, parse("(2 + x0)"), cfg, g, rng), parse("(x0 + (2 - x0))"));
}

TEST(Mutation, ZeroProbabilityIsIdentity)
{
    EGraph g;
    auto e = parse("(x0 + exp(x0))");
    auto cfg = config();
    cfg.pm = 0.0;
    Rng rng(2);
    for (int k = 0; k < 100; ++k) {
        EXPECT_EQ(egraph_mutation(e, cfg, g, rng), e);
    }
}

TEST(MutationProperty, LimitsAndNoConstants)
{
    std::vector<Expr> pool;
    auto g = support::random_graph(100, 15, 9, &pool);
    auto cfg = config(2);
    cfg.gen.max_size = 15;
    cfg.gen.max_depth = 6;
    Rng rng(10);
    GenConfig gen = cfg.gen;
    for (int k = 0; k < 2000; ++k) {
        auto e = k % 2 ? grow(gen, rng) : full(gen, rng);
        auto out = egraph_mutation(e, cfg, g, rng);
        EXPECT_LE(out.size(), cfg.gen.max_size);
        EXPECT_LE(out.depth(), cfg.gen.max_depth);
        EXPECT_FALSE(out.has_op(Op::Const));
    }
}

TEST(Baseline, ClassicOperatorsRespectLimits)
{
    auto cfg = config(2);
    cfg.gen.max_size = 12;
    cfg.gen.max_depth = 5;
    Rng rng(12);
    for (int k = 0; k < 2000; ++k) {
        auto p1 = grow(cfg.gen, rng);
        auto p2 = full(cfg.gen, rng);
        auto child = subtree_mutation(subtree_crossover(p1, p2, cfg, rng), cfg, rng);
        EXPECT_LE(child.size(), cfg.gen.max_size);
        EXPECT_LE(child.depth(), cfg.gen.max_depth);
    }
}
