#include <cstdio>
#include <filesystem>

#include <gtest/gtest.h>

#include "eggp/egraph_io.hpp"
#include "support.hpp"

using namespace eggp;

namespace {

void expect_same_answers(EGraph const& a, EGraph const& b, std::uint64_t seed, int probes)
{
    Rng rng(seed);
    GenConfig cfg;
    cfg.feature_count = 2;
    cfg.max_size = 12;
    for (int k = 0; k < probes; ++k) {
        auto e = support::random_expr(cfg, rng);
        ASSERT_EQ(a.lookup_expr(e).has_value(), b.lookup_expr(e).has_value()) << to_string(e);
    }
}

} // namespace

TEST(EGraphIO, EmptyRoundTrip)
{
    EGraph g;
    auto back = deserialize(serialize(g));
    EXPECT_EQ(back.class_count(), 0u);
    EXPECT_EQ(back.node_count(), 0u);
    EXPECT_TRUE(back.roots().empty());
}

TEST(EGraphIO, HeaderLayout)
{
    EGraph g;
    auto bytes = serialize(g);
    ASSERT_GE(bytes.size(), 8u);
    EXPECT_EQ(bytes.substr(0, 4), "EGG1");
    EXPECT_EQ(bytes[4], '\x01');
    EXPECT_EQ(bytes[5], '\x00');
}

TEST(EGraphIO, RoundTripPreservesEverything)
{
    std::vector<Expr> inserted;
    auto g = support::random_graph(300, 15, 12, &inserted);
    for (std::size_t k = 0; k < inserted.size(); k += 3) {
        auto id = *g.lookup_expr(inserted[k]);
        std::vector<double> p(inserted[k].slot_count(), 0.25);
        g.record_evaluation({ id, inserted[k].consts_to_params(), p, 0.125 * static_cast<double>(k) });
    }
    auto bytes = serialize(g);
    auto back = deserialize(bytes);
    EXPECT_EQ(back.class_count(), g.class_count());
    EXPECT_EQ(back.node_count(), g.node_count());
    EXPECT_EQ(back.roots(), g.roots());
    EXPECT_EQ(back.evaluated(), g.evaluated());
    ASSERT_EQ(back.evaluations().size(), g.evaluations().size());
    for (std::size_t k = 0; k < g.evaluations().size(); ++k) {
        EXPECT_EQ(back.evaluations()[k].expr, g.evaluations()[k].expr);
        EXPECT_EQ(back.evaluations()[k].params, g.evaluations()[k].params);
        EXPECT_EQ(back.evaluations()[k].fitness, g.evaluations()[k].fitness);
    }
    for (auto id : g.class_ids()) {
        EXPECT_EQ(back.smallest_size(id), g.smallest_size(id));
        EXPECT_EQ(back.extract_smallest(id), g.extract_smallest(id));
    }
    for (auto const& e : inserted) {
        EXPECT_EQ(back.lookup_expr(e), g.lookup_expr(e));
    }
    expect_same_answers(g, back, 99, 1000);
    EXPECT_TRUE(back.check_congruence());
    EXPECT_EQ(serialize(back), bytes);
}

TEST(EGraphIO, LoadedGraphKeepsGrowing)
{
    auto g = support::random_graph(50, 10, 4);
    auto back = deserialize(serialize(g));
    auto rules = default_rules();
    Rng rng(5);
    GenConfig cfg;
    cfg.feature_count = 2;
    for (int k = 0; k < 50; ++k) {
        auto e = support::random_expr(cfg, rng);
        g.add_expr(e);
        back.add_expr(e);
        saturate_one_step(g, rules, support::quiet());
        saturate_one_step(back, rules, support::quiet());
    }
    EXPECT_EQ(g.class_count(), back.class_count());
    EXPECT_EQ(g.node_count(), back.node_count());
    expect_same_answers(g, back, 6, 300);
}

TEST(EGraphIO, BadMagic)
{
    auto bytes = serialize(support::random_graph(10, 8, 1));
    bytes[0] = 'X';
    try {
        static_cast<void>(deserialize(bytes));
        FAIL();
    } catch (EGraphFormatError const& e) {
        EXPECT_EQ(e.offset(), 0u);
        EXPECT_NE(std::string(e.what()).find("offset 0"), std::string::npos);
    }
}

TEST(EGraphIO, VersionMismatch)
{
    auto bytes = serialize(EGraph {});
    bytes[4] = '\x02';
    try {
        static_cast<void>(deserialize(bytes));
        FAIL();
    } catch (EGraphFormatError const& e) {
        EXPECT_EQ(e.offset(), 4u);
    }
}

TEST(EGraphIO, TruncationEverywhereIsAnError)
{
    auto bytes = serialize(support::random_graph(20, 8, 2));
    for (std::size_t cut = 0; cut < bytes.size(); cut += 7) {
        EXPECT_THROW(static_cast<void>(deserialize(std::string_view(bytes).substr(0, cut))), EGraphFormatError) << cut;
    }
}

TEST(EGraphIO, RequiresRebuiltGraph)
{
    EGraph g;
    auto a = g.add_expr(parse("x0"));
    auto b = g.add_expr(parse("x1"));
    g.merge(a, b);
    EXPECT_THROW(static_cast<void>(serialize(g)), std::logic_error);
}

TEST(EGraphIO, FileRoundTrip)
{
    auto g = support::random_graph(40, 10, 3);
    auto path = (std::filesystem::temp_directory_path() / "eggp_io_test.egg").string();
    save_egraph(g, path);
    auto back = load_egraph(path);
    std::remove(path.c_str());
    EXPECT_EQ(serialize(back), serialize(g));
    EXPECT_THROW(static_cast<void>(load_egraph(path)), std::runtime_error);
}
