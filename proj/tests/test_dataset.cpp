#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include <gtest/gtest.h>

#include "eggp/dataset.hpp"
#include "support.hpp"

using namespace eggp;

namespace {

auto spec() -> DataSpec { return DataSpec {}; }

auto make(std::size_t n) -> Dataset
{
    Dataset d;
    d.x.resize(static_cast<Eigen::Index>(n), 1);
    d.y.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        d.x(static_cast<Eigen::Index>(i), 0) = static_cast<double>(i);
        d.y(static_cast<Eigen::Index>(i)) = static_cast<double>(i);
    }
    d.names = { "x0" };
    return d;
}

auto ids(Dataset const& d) -> std::vector<int>
{
    std::vector<int> out;
    for (Eigen::Index i = 0; i < d.y.size(); ++i) {
        out.push_back(static_cast<int>(d.y(i)));
    }
    return out;
}

} // namespace

TEST(Csv, HeaderAndLastColumnTarget)
{
    auto d = parse_csv("a,b,y\n1,2,3\n4,5,6\n7,8,9\n", spec());
    EXPECT_EQ(d.rows(), 3u);
    EXPECT_EQ(d.features(), 2u);
    EXPECT_EQ(d.names, (std::vector<std::string> { "a", "b" }));
    EXPECT_EQ(d.x(2, 1), 8.0);
    EXPECT_EQ(d.y(1), 6.0);
}

TEST(Csv, NamedTargetAndIndex)
{
    auto s = spec();
    s.target = "a";
    auto d = parse_csv("a,b,y\n1,2,3\n4,5,6\n", s);
    EXPECT_EQ(d.names, (std::vector<std::string> { "b", "y" }));
    EXPECT_EQ(d.y(1), 4.0);
    s.target = "1";
    d = parse_csv("a,b,y\n1,2,3\n4,5,6\n", s);
    EXPECT_EQ(d.y(0), 2.0);
    s.target = "zzz";
    EXPECT_THROW(static_cast<void>(parse_csv("a,b,y\n1,2,3\n4,5,6\n", s)), DataError);
}

TEST(Csv, NoHeaderNamesAndNotation)
{
    auto s = spec();
    s.has_header = false;
    s.delimiter = ';';
    auto d = parse_csv("1e-3; +2.5 ;-7\r\n4;5;6\n\n", s);
    EXPECT_EQ(d.names, (std::vector<std::string> { "x0", "x1" }));
    EXPECT_EQ(d.x(0, 0), 1e-3);
    EXPECT_EQ(d.x(0, 1), 2.5);
    EXPECT_EQ(d.y(0), -7.0);
}

TEST(Csv, NonNumericCellReportsPosition)
{
    std::string text = "a,b,y\n";
    for (int r = 1; r <= 8; ++r) {
        text += (r == 7 ? "1,abc,3\n" : "1,2,3\n");
    }
    try {
        static_cast<void>(parse_csv(text, spec()));
        FAIL();
    } catch (DataError const& e) {
        EXPECT_NE(std::string(e.what()).find("(7,2)"), std::string::npos) << e.what();
    }
}

TEST(Csv, RaggedAndEmpty)
{
    EXPECT_THROW(static_cast<void>(parse_csv("a,b,y\n1,2,3\n4,5\n", spec())), DataError);
    EXPECT_THROW(static_cast<void>(parse_csv("", spec())), DataError);
    EXPECT_THROW(static_cast<void>(parse_csv("a,b,y\n1,2,3\n", spec())), DataError); // one row
    EXPECT_THROW(static_cast<void>(parse_csv("a,b,y\n1,,3\n1,2,3\n", spec())), DataError);
}

TEST(Csv, RowCapDeterministic)
{
    std::string text = "x,y\n";
    for (int r = 0; r < 5; ++r) {
        text += std::to_string(r) + "," + std::to_string(r) + "\n";
    }
    auto s = spec();
    s.row_cap = 2;
    s.cap_seed = 42;
    auto a = parse_csv(text, s);
    auto b = parse_csv(text, s);
    EXPECT_EQ(a.rows(), 2u);
    EXPECT_EQ(ids(a), ids(b));
    s.row_cap = 10;
    EXPECT_EQ(parse_csv(text, s).rows(), 5u);
}

TEST(Csv, LoadFromFile)
{
    auto path = (std::filesystem::temp_directory_path() / "eggp_csv_test.csv").string();
    {
        std::ofstream out(path);
        out << "a,b,y\n1,2,3\n4,5,6\n7,8,9\n";
    }
    auto s = spec();
    s.path = path;
    auto d = load_csv(s);
    std::remove(path.c_str());
    EXPECT_EQ(d.rows(), 3u);
    EXPECT_THROW(static_cast<void>(load_csv(s)), DataError);
}

TEST(Split, TrainTestSizes)
{
    Rng rng(1);
    auto [train, test] = train_test_split(make(99), 1.0 / 3.0, rng);
    EXPECT_EQ(train.rows(), 66u);
    EXPECT_EQ(test.rows(), 33u);
    Rng a(5);
    Rng b(5);
    EXPECT_EQ(ids(train_test_split(make(50), 0.2, a).first), ids(train_test_split(make(50), 0.2, b).first));
    Rng c(1);
    EXPECT_THROW(static_cast<void>(train_test_split(make(1), 0.5, c)), DataError);
    EXPECT_THROW(static_cast<void>(train_test_split(make(10), 1.0, c)), std::invalid_argument);
}

TEST(Split, FitValSizesAndPartition)
{
    for (std::size_t n : { 3u, 4u, 10u, 100u, 300u, 301u }) {
        Rng rng(n);
        auto s = split_fit_val(make(n), rng);
        EXPECT_FALSE(s.degenerate);
        auto val = static_cast<std::size_t>(std::llround(static_cast<double>(n) / 3.0));
        EXPECT_EQ(s.val.rows(), val);
        EXPECT_EQ(s.fit.rows(), n - val);
        std::set<int> all;
        for (auto i : ids(s.fit)) {
            all.insert(i);
        }
        for (auto i : ids(s.val)) {
            EXPECT_TRUE(all.insert(i).second) << "row in both halves";
        }
        EXPECT_EQ(all.size(), n);
    }
    Rng rng(1);
    auto s = split_fit_val(make(300), rng);
    EXPECT_EQ(s.fit.rows(), 200u);
    EXPECT_EQ(s.val.rows(), 100u);
}

TEST(Split, FitValDegenerate)
{
    Rng rng(1);
    auto s = split_fit_val(make(2), rng);
    EXPECT_TRUE(s.degenerate);
    EXPECT_EQ(s.fit.rows(), 2u);
    EXPECT_EQ(s.val.rows(), 2u);
}

TEST(Split, FitValDeterministic)
{
    Rng a(7);
    Rng b(7);
    EXPECT_EQ(ids(split_fit_val(make(60), a).val), ids(split_fit_val(make(60), b).val));
}
