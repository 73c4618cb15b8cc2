#include <limits>
#include <map>

#include <gtest/gtest.h>

#include "eggp/egraph.hpp"
#include "eggp/rewrite.hpp"
#include "support.hpp"

using namespace eggp;

namespace {

// Graph holding (2/x)(x+x), 2x and sqrt(|x|), with x+x and 2x merged.
struct Fig2a {
    EGraph g;
    EClassId x, two, twox, product, root_sqrt;

    Fig2a()
    {
        product = g.add_expr(parse("((2 / x0) * (x0 + x0))"));
        twox = g.add_expr(parse("(2 * x0)"));
        root_sqrt = g.add_expr(parse("sqrt(abs(x0))"));
        x = *g.lookup_expr(parse("x0"));
        two = *g.lookup_expr(parse("2"));
        g.merge(*g.lookup_expr(parse("(x0 + x0)")), twox);
        g.rebuild();
    }
};

// Smallest member size by depth-bounded enumeration of member trees,
// memoized on (class, depth).
auto brute_min_size(EGraph const& g, EClassId c, int depth, std::map<std::pair<std::uint32_t, int>, std::size_t>& memo) -> std::size_t
{
    constexpr auto inf = std::numeric_limits<std::size_t>::max();
    if (depth == 0) {
        return inf;
    }
    c = g.find(c);
    if (auto it = memo.find({ c.value, depth }); it != memo.end()) {
        return it->second;
    }
    auto best = inf;
    for (auto const& n : g.eclass(c).nodes) {
        std::size_t total = 1;
        for (auto kid : n.children()) {
            auto s = brute_min_size(g, kid, depth - 1, memo);
            if (s == inf) {
                total = inf;
                break;
            }
            total += s;
        }
        best = std::min(best, total);
    }
    memo[{ c.value, depth }] = best;
    return best;
}

auto brute_min_size(EGraph const& g, EClassId c, int depth) -> std::size_t
{
    std::map<std::pair<std::uint32_t, int>, std::size_t> memo;
    return brute_min_size(g, c, depth, memo);
}

} // namespace

TEST(EGraph, EmptyGraph)
{
    EGraph g;
    EXPECT_EQ(g.class_count(), 0u);
    EXPECT_EQ(g.node_count(), 0u);
    EXPECT_FALSE(g.lookup_expr(parse("x0")));
}

TEST(EGraph, AddIsIdempotent)
{
    EGraph g;
    auto e = parse("((x0 + t0) * log(abs(x1)))");
    auto a = g.add_expr(e);
    auto classes = g.class_count();
    auto b = g.add_expr(e);
    EXPECT_EQ(a, b);
    EXPECT_EQ(g.class_count(), classes);
    EXPECT_EQ(g.roots().size(), 2u);
}

TEST(EGraph, SharedSubtreesShareClasses)
{
    EGraph g;
    g.add_expr(parse("((x0 + x1) * (x0 + x1))"));
    EXPECT_EQ(g.class_count(), 4u); // x0, x1, +, *
}

TEST(EGraph, SingleThetaNode)
{
    EGraph g;
    g.add_expr(parse("((t0 * x0) + t1)"));
    EXPECT_EQ(g.class_count(), 4u); // θ, x0, *, +
}

TEST(EGraph, Fig2aRootsAndLookups)
{
    Fig2a f;
    EXPECT_EQ(f.g.roots(), (std::vector<EClassId> { f.g.find(f.product), f.g.find(f.twox), f.g.find(f.root_sqrt) }));
    EXPECT_EQ(f.g.lookup_expr(parse("(2 * x0)")), f.g.find(f.twox));
    EXPECT_EQ(f.g.lookup_expr(parse("(x0 + x0)")), f.g.find(f.twox));
    EXPECT_FALSE(f.g.lookup_expr(parse("(x0 + 5)")));
    EXPECT_TRUE(f.g.check_congruence());
}

TEST(EGraph, Fig2aAddingKnownExpressionCreatesNothing)
{
    Fig2a f;
    auto before = f.g.class_count();
    EXPECT_EQ(f.g.add_expr(parse("(2 * x0)")), f.g.find(f.twox));
    EXPECT_EQ(f.g.class_count(), before);
}

TEST(EGraph, Fig2aAddingXPlus2X)
{
    Fig2a f;
    auto before = f.g.class_count();
    auto nodes_before = f.g.node_count();
    auto id = f.g.add_expr(parse("(x0 + (2 * x0))"));
    EXPECT_EQ(f.g.class_count(), before + 1);
    EXPECT_EQ(f.g.node_count(), nodes_before + 1);
    auto const& cls = f.g.eclass(id);
    ASSERT_EQ(cls.nodes.size(), 1u);
    EXPECT_EQ(cls.nodes[0], ENode::binary(Op::Add, f.g.find(f.x), f.g.find(f.twox)));
}

TEST(EGraph, Fig2MergedClassHoldsBothForms)
{
    Fig2a f;
    auto const& cls = f.g.eclass(f.twox);
    ASSERT_EQ(cls.nodes.size(), 2u);
    std::vector<Op> ops { cls.nodes[0].sym.op, cls.nodes[1].sym.op };
    std::sort(ops.begin(), ops.end());
    EXPECT_EQ(ops, (std::vector<Op> { Op::Add, Op::Mul }));
    EXPECT_EQ(f.g.smallest_size(f.twox), 3u);
    // tie between 2*x and x+x resolves to the lower symbol ordinal
    EXPECT_EQ(f.g.extract_smallest(f.twox), parse("(x0 + x0)"));
}

TEST(EGraph, Fig2ProductSizeMatchesBruteForce)
{
    Fig2a f;
    EXPECT_EQ(f.g.smallest_size(f.product), brute_min_size(f.g, f.g.find(f.product), 5));
    EXPECT_EQ(f.g.smallest_size(f.product), 7u);
    EXPECT_EQ(f.g.extract_smallest(f.product).size(), 7u);
}

TEST(EGraph, MergeSelfIsNoop)
{
    EGraph g;
    auto a = g.add_expr(parse("(x0 * x1)"));
    auto classes = g.class_count();
    EXPECT_EQ(g.merge(a, a), a);
    EXPECT_FALSE(g.needs_rebuild());
    EXPECT_EQ(g.class_count(), classes);
}

TEST(EGraph, CongruenceAfterMerge)
{
    EGraph g;
    auto fa = g.add_expr(parse("exp(x0)"));
    auto fb = g.add_expr(parse("exp(x1)"));
    g.merge(*g.lookup_expr(parse("x0")), *g.lookup_expr(parse("x1")));
    g.rebuild();
    EXPECT_EQ(g.find(fa), g.find(fb));
    EXPECT_TRUE(g.check_congruence());
}

TEST(EGraph, UnionFindIdempotent)
{
    auto g = support::random_graph(100, 12, 5);
    for (std::uint32_t i = 0; i < g.id_bound(); ++i) {
        auto c = g.find(EClassId { i });
        EXPECT_EQ(g.find(c), c);
    }
}

TEST(EGraph, ExtractTieBreakDeterministic)
{
    EGraph g;
    auto a = g.add_expr(parse("(x0 * 2)"));
    auto b = g.add_expr(parse("(2 * x0)"));
    g.merge(a, b);
    g.rebuild();
    // Mul nodes tie; the lower child ids decide: leaves are added right to left, so 2 comes first
    EXPECT_EQ(g.extract_smallest(a), parse("(2 * x0)"));
}

TEST(EGraphProperty, AddThenLookup)
{
    Rng rng(17);
    GenConfig cfg;
    cfg.feature_count = 3;
    cfg.max_size = 20;
    EGraph g;
    auto rules = default_rules();
    std::vector<Expr> seen;
    for (int k = 0; k < 1000; ++k) {
        auto e = support::random_expr(cfg, rng);
        auto id = g.add_expr(e);
        if (k % 10 == 0) {
            saturate_one_step(g, rules, support::quiet());
        }
        auto hit = g.lookup_expr(e);
        ASSERT_TRUE(hit);
        EXPECT_EQ(*hit, g.find(id));
        seen.push_back(e);
    }
    // monotone history
    for (auto const& e : seen) {
        EXPECT_TRUE(g.lookup_expr(e));
    }
}

TEST(EGraphProperty, HashConsUniqueAfterEveryRebuild)
{
    Rng rng(23);
    GenConfig cfg;
    cfg.feature_count = 2;
    cfg.max_size = 15;
    EGraph g;
    auto rules = default_rules();
    for (int k = 0; k < 300; ++k) {
        g.add_expr(support::random_expr(cfg, rng));
        saturate_one_step(g, rules, support::quiet());
        ASSERT_TRUE(g.check_congruence()) << "after insertion " << k;
    }
}

TEST(EGraphProperty, AnalysisMatchesBruteForce)
{
    auto g = support::random_graph(150, 12, 31);
    for (auto id : g.class_ids()) {
        auto brute = brute_min_size(g, id, 14);
        ASSERT_EQ(g.smallest_size(id), brute) << "class " << id.value;
        EXPECT_EQ(g.extract_smallest(id).size(), brute);
        EXPECT_EQ(g.lookup_expr(g.extract_smallest(id)), id);
    }
}

TEST(EGraphProperty, RandomMergesKeepInvariants)
{
    Rng rng(41);
    auto g = support::random_graph(80, 10, 41);
    for (int k = 0; k < 40; ++k) {
        auto ids = g.class_ids();
        std::uniform_int_distribution<std::size_t> d(0, ids.size() - 1);
        g.merge(ids[d(rng)], ids[d(rng)]);
        if (k % 5 == 4) {
            g.rebuild();
            ASSERT_TRUE(g.check_congruence());
            for (auto id : g.class_ids()) {
                ASSERT_EQ(g.smallest_size(id), brute_min_size(g, id, 12));
            }
        }
    }
}

TEST(EGraphProperty, LookupDoesNotMutate)
{
    auto g = support::random_graph(100, 12, 8);
    Rng rng(9);
    GenConfig cfg;
    cfg.feature_count = 2;
    auto classes = g.class_count();
    auto nodes = g.node_count();
    auto roots = g.roots();
    for (int k = 0; k < 200; ++k) {
        static_cast<void>(g.lookup_expr(support::random_expr(cfg, rng)));
    }
    EXPECT_EQ(g.class_count(), classes);
    EXPECT_EQ(g.node_count(), nodes);
    EXPECT_EQ(g.roots(), roots);
}

TEST(Spine, Fig2bExample)
{
    Fig2a f;
    f.g.add_expr(parse("(x0 + (2 * x0))"));
    auto host = parse("(x0 + x1)"); // hole at x1
    auto spine = build_spine(f.g, host, 2);
    ASSERT_TRUE(spine);
    EXPECT_TRUE(contains_with_context(f.g, *spine, f.g.find(f.twox)));
    EXPECT_FALSE(contains_with_context(f.g, *spine, f.g.find(f.root_sqrt)));
}

TEST(Spine, AbsentSiblingMeansAbsent)
{
    Fig2a f;
    auto host = parse("(x5 + x0)");
    EXPECT_FALSE(build_spine(f.g, host, 2));
    EXPECT_FALSE(contains_with_context(f.g, build_spine(f.g, host, 2), f.g.find(f.x)));
}

TEST(SpineProperty, AgreesWithFullLookup)
{
    std::vector<Expr> inserted;
    auto g = support::random_graph(200, 15, 77, &inserted);
    Rng rng(78);
    GenConfig cfg;
    cfg.feature_count = 2;
    cfg.max_size = 15;
    auto ids = g.class_ids();
    std::uniform_int_distribution<std::size_t> pick_class(0, ids.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_host(0, inserted.size() - 1);
    std::bernoulli_distribution coin(0.5);
    std::size_t positives = 0;
    for (int k = 0; k < 1000; ++k) {
        auto host = coin(rng) ? inserted[pick_host(rng)] : support::random_expr(cfg, rng);
        std::uniform_int_distribution<std::size_t> pick_hole(0, host.size() - 1);
        auto hole = pick_hole(rng);
        EClassId cand;
        auto sub = g.lookup_expr(host.subtree_at(hole));
        cand = (sub && coin(rng)) ? *sub : ids[pick_class(rng)];
        auto fast = contains_with_context(g, build_spine(g, host, hole), cand);
        auto slow = g.lookup_expr(host.replace_at(hole, g.extract_smallest(cand))).has_value();
        ASSERT_EQ(fast, slow) << to_string(host) << " hole " << hole;
        positives += fast ? 1 : 0;
    }
    EXPECT_GT(positives, 100u);
}
