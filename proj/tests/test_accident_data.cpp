#include <catch2/catch_amalgamated.hpp>

#include <boost/math/distributions/chi_squared.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "scenegen/accident_data.hpp"
#include "scenegen/defaults.hpp"

using namespace scenegen;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& content) {
        path = (std::filesystem::temp_directory_path() /
                ("scenegen_test_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++) + ".csv"))
                   .string();
        std::ofstream out(path);
        out << content;
    }
    ~TempFile() { std::remove(path.c_str()); }
    static inline int counter = 0;
};

VariableSchema small_schema() {
    return VariableSchema({
        {"weather", {"clear", "rain"}},
        {"surface", {"dry", "wet"}},
        {"lighting", {"daylight", "dark_unlit"}},
    });
}

}  // namespace

TEST_CASE("parse_records") {
    auto schema = small_schema();

    SECTION("header-only file gives an empty dataset") {
        TempFile f("weather,surface,lighting\n");
        auto data = parse_records(f.path, schema);
        CHECK(data.size() == 0);
    }

    SECTION("labels map to state indices, columns in any order") {
        TempFile f(
            "lighting,weather,surface\n"
            "dark_unlit,rain,wet\n"
            "daylight,clear,dry\n"
            "dark_unlit,clear,wet\n");
        auto data = parse_records(f.path, schema);
        REQUIRE(data.size() == 3);
        CHECK(data.rows()[0].values == std::vector<int>{1, 1, 1});
        CHECK(data.rows()[1].values == std::vector<int>{0, 0, 0});
        CHECK(data.rows()[2].values == std::vector<int>{0, 1, 1});
    }

    SECTION("unknown label reports row and column") {
        TempFile f(
            "weather,surface,lighting\n"
            "clear,dry,daylight\n"
            "hail,dry,daylight\n");
        try {
            parse_records(f.path, schema);
            FAIL("expected error");
        } catch (const InvalidInput& e) {
            std::string msg = e.what();
            CHECK(msg.find("row 3") != std::string::npos);
            CHECK(msg.find("weather") != std::string::npos);
            CHECK(msg.find("hail") != std::string::npos);
        }
    }

    SECTION("missing column is an error") {
        TempFile f("weather,surface\nclear,dry\n");
        CHECK_THROWS_AS(parse_records(f.path, schema), InvalidInput);
    }

    SECTION("empty header is an error") {
        TempFile f("");
        CHECK_THROWS_AS(parse_records(f.path, schema), InvalidInput);
    }

    SECTION("rows with missing cells are dropped") {
        TempFile f(
            "weather,surface,lighting\n"
            "clear,,daylight\n"
            "rain,wet,dark_unlit\n");
        auto data = parse_records(f.path, schema);
        REQUIRE(data.size() == 1);
        CHECK(data.rows()[0].values == std::vector<int>{1, 1, 1});
    }
}

TEST_CASE("csv round trip") {
    std::mt19937_64 rng(5);
    auto dag = oracles::random_dag(3, 0.5, rng);
    auto net = oracles::random_net(dag, {2, 3, 2}, rng);
    auto data = sample(net, 200, 11);

    auto tmp = (std::filesystem::temp_directory_path() / "scenegen_roundtrip.csv").string();
    write_records(tmp, data);
    auto back = parse_records(tmp, data.schema());
    std::remove(tmp.c_str());

    REQUIRE(back.size() == data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
        CHECK(back.rows()[i].values == data.rows()[i].values);
}

TEST_CASE("synthesize_dataset contract") {
    auto net = default_net();
    CHECK(synthesize_dataset(net, 0, 1).size() == 0);
    auto a = synthesize_dataset(net, 300, 42);
    auto b = synthesize_dataset(net, 300, 42);
    for (std::size_t i = 0; i < a.size(); ++i)
        REQUIRE(a.rows()[i].values == b.rows()[i].values);
}

TEST_CASE("synthesized joint frequencies pass chi-square goodness of fit") {
    std::mt19937_64 rng(17);
    auto dag = oracles::random_dag(6, 0.3, rng);
    auto net = oracles::random_net(dag, std::vector<std::size_t>(6, 2), rng);
    const std::size_t n = 50000;
    auto data = synthesize_dataset(net, n, 99);

    std::vector<std::size_t> counts(1u << 6, 0);
    for (const auto& row : data.rows()) {
        std::size_t idx = 0;
        for (int v : row.values) idx = idx * 2 + static_cast<std::size_t>(v);
        ++counts[idx];
    }
    double stat = 0;
    std::size_t cells = 0;
    oracles::for_each_assignment(net.schema(), [&](const std::vector<int>& a) {
        std::size_t idx = 0;
        for (int v : a) idx = idx * 2 + static_cast<std::size_t>(v);
        double expected = oracles::joint_probability(net, a) * static_cast<double>(n);
        if (expected < 1e-9) return;
        double diff = static_cast<double>(counts[idx]) - expected;
        stat += diff * diff / expected;
        ++cells;
    });
    boost::math::chi_squared dist(static_cast<double>(cells - 1));
    double p = boost::math::cdf(boost::math::complement(dist, stat));
    CHECK(p >= 0.01);
}

TEST_CASE("mine_static_patterns") {
    auto schema = small_schema();

    SECTION("k = 0 gives an empty catalog") {
        Dataset data(schema);
        data.add_row({{0, 0, 0}});
        auto cat = mine_static_patterns(data, {"weather", "surface"}, 0, 0.0);
        CHECK(cat.patterns.empty());
    }

    SECTION("dominant combination found with exact support") {
        Dataset data(schema);
        for (int i = 0; i < 60; ++i) data.add_row({{1, 1, 1}});  // rain, wet, dark_unlit
        for (int i = 0; i < 25; ++i) data.add_row({{0, 0, 0}});
        for (int i = 0; i < 15; ++i) data.add_row({{0, 1, 0}});
        auto cat = mine_static_patterns(data, {"weather", "surface", "lighting"}, 1, 0.5);
        REQUIRE(cat.patterns.size() == 1);
        CHECK(cat.patterns[0].support == Catch::Approx(0.6));
        CHECK(cat.patterns[0].pattern.assignments.at("weather") == 1);
        CHECK(cat.patterns[0].pattern.assignments.at("surface") == 1);
        CHECK(cat.patterns[0].pattern.assignments.at("lighting") == 1);
    }

    SECTION("supports descending, exact fractions, disjoint sum <= 1") {
        Dataset data(schema);
        std::mt19937_64 rng(3);
        for (int i = 0; i < 400; ++i) {
            int c = static_cast<int>(rng() % 4);
            if (c == 0)
                data.add_row({{1, 1, 1}});
            else if (c == 1)
                data.add_row({{0, 0, 0}});
            else
                data.add_row({{static_cast<int>(rng() % 2), static_cast<int>(rng() % 2),
                               static_cast<int>(rng() % 2)}});
        }
        auto cat = mine_static_patterns(data, {"weather", "surface", "lighting"}, 4, 0.01);
        double total = 0;
        double prev = 1.0;
        for (const auto& e : cat.patterns) {
            CHECK(e.support <= prev);
            prev = e.support;
            total += e.support;
            // support equals the exact matching fraction (brute force)
            std::size_t match = 0;
            for (const auto& row : data.rows()) {
                bool ok = true;
                for (const auto& [name, state] : e.pattern.assignments)
                    if (row.values[schema.index_of(name)] != state) ok = false;
                if (ok) ++match;
            }
            CHECK(e.support ==
                  Catch::Approx(static_cast<double>(match) / static_cast<double>(data.size())));
        }
        CHECK(total <= 1.0 + 1e-12);
    }

    SECTION("unknown static variable is an error") {
        Dataset data(schema);
        data.add_row({{0, 0, 0}});
        CHECK_THROWS_AS(mine_static_patterns(data, {"nope"}, 1, 0.0), InvalidInput);
    }
}

TEST_CASE("shipped default patterns match the catalog contract") {
    auto cat = default_pattern_catalog();
    REQUIRE(cat.patterns.size() == 6);
    std::vector<std::string> labels;
    for (const auto& e : cat.patterns) labels.push_back(e.pattern.label);
    CHECK(labels[0] == "Heavy Rain + Flooded Road");
    CHECK(labels[1] == "Night without Streetlights");
    CHECK(labels[2] == "Dense Fog + Construction Area");

    auto schema = canonical_schema();
    double prev = 1.0;
    for (const auto& e : cat.patterns) {
        CHECK(e.support <= prev);
        prev = e.support;
        for (const auto& [name, state] : e.pattern.assignments) {
            // only static environment variables may appear
            auto statics = static_factor_names();
            CHECK(std::find(statics.begin(), statics.end(), name) != statics.end());
            CHECK(state < static_cast<int>(schema.arity(schema.index_of(name))));
        }
    }
}
