#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "covshap/common.hpp"
#include "covshap/ordering.hpp"

using namespace covshap;

namespace {
std::vector<std::string> metric_universe() {
    return {metric_names().begin(), metric_names().end()};
}
std::vector<size_t> component_sizes(const CausalOrdering& o) {
    std::vector<size_t> s;
    for (const auto& c : o.components()) s.push_back(c.features.size());
    return s;
}
}  // namespace

TEST_CASE("parse the primary ordering") {
    auto o = CausalOrdering::parse(
        "[NW, [SC, Emp, Uemp], [Inc, Lab], [Uins, Com, Pov, GI], [Den, MC, Tran]]",
        metric_universe());
    CHECK(component_sizes(o) == std::vector<size_t>{1, 3, 2, 4, 3});
    CHECK_FALSE(o.components()[0].confounded);
}

TEST_CASE("parse a two-component ordering over a small universe") {
    auto o = CausalOrdering::parse("[NW, [SC, Emp]]", {"NW", "SC", "Emp"});
    CHECK(o.components().size() == 2);
    CHECK(o.components()[1].features == std::vector<std::string>{"SC", "Emp"});
}

TEST_CASE("confounded group suffix") {
    auto o = CausalOrdering::parse("[[A, B]!, C]", {"A", "B", "C"});
    CHECK(o.components()[0].confounded);
    CHECK_FALSE(o.components()[1].confounded);
    CHECK(o.print() == "[[A, B]!, C]");
}

TEST_CASE("parse errors name the problem") {
    CHECK_THROWS_WITH_AS(CausalOrdering::parse("[[A]]", {"A", "B"}),
                         doctest::Contains("missing: B"), ValidationError);
    CHECK_THROWS_WITH_AS(CausalOrdering::parse("[A, Q]", {"A", "B"}),
                         doctest::Contains("unknown feature symbol: Q"), ValidationError);
    CHECK_THROWS_WITH_AS(CausalOrdering::parse("[A, A]", {"A"}),
                         doctest::Contains("duplicate feature symbol: A"), ValidationError);
    CHECK_THROWS_AS(CausalOrdering::parse("[A, [B]", {"A", "B"}), ValidationError);
    CHECK_THROWS_AS(CausalOrdering::parse("", {"A"}), ValidationError);
    CHECK_THROWS_AS(CausalOrdering::parse("[A] trailing", {"A"}), ValidationError);
}

TEST_CASE("builtin orderings match the published structure") {
    const auto& b = builtin_orderings();
    REQUIRE(b.count("CO1") == 1);
    REQUIRE(b.count("CO2") == 1);
    REQUIRE(b.count("CO3") == 1);
    CHECK(component_sizes(b.at("CO1")) == std::vector<size_t>{1, 3, 2, 4, 3});
    CHECK(component_sizes(b.at("CO2")) == std::vector<size_t>{2, 2, 1, 1, 4, 3});
    CHECK(component_sizes(b.at("CO3")) == std::vector<size_t>{1, 1, 4, 4, 3});
}

TEST_CASE("print then parse is identity for every builtin") {
    for (const auto& [label, o] : builtin_orderings()) {
        auto round = CausalOrdering::parse(o.print(), o.universe());
        CHECK(round == o);
    }
}

TEST_CASE("shuffle preserves groups and flags, permutes order") {
    auto base = builtin_orderings().at("CO1");
    auto shuffles = shuffle_components(base, 20, 123);
    REQUIRE(shuffles.size() == 20);
    std::set<std::string> distinct;
    for (const auto& s : shuffles) {
        distinct.insert(s.print());
        // partition preserved
        std::multiset<std::string> feats;
        for (const auto& c : s.components())
            feats.insert(c.features.begin(), c.features.end());
        CHECK(feats.size() == 13);
        // each component appears unchanged (as an ordered list + flag)
        std::multiset<std::string> base_comps, shuf_comps;
        for (const auto& c : base.components()) {
            std::string k = c.confounded ? "!" : "";
            for (const auto& f : c.features) k += f + ",";
            base_comps.insert(k);
        }
        for (const auto& c : s.components()) {
            std::string k = c.confounded ? "!" : "";
            for (const auto& f : c.features) k += f + ",";
            shuf_comps.insert(k);
        }
        CHECK(base_comps == shuf_comps);
    }
    CHECK(distinct.size() == 20);  // 5! = 120 >= 20, sampled without replacement
}

TEST_CASE("shuffle determinism and small permutation spaces") {
    auto base = builtin_orderings().at("CO1");
    auto a = shuffle_components(base, 1, 7);
    auto b = shuffle_components(base, 1, 7);
    CHECK(a[0] == b[0]);

    auto two = CausalOrdering::parse("[[A, B], C]", {"A", "B", "C"});
    auto s = shuffle_components(two, 20, 99);
    std::set<std::string> distinct;
    for (const auto& o : s) distinct.insert(o.print());
    CHECK(distinct.size() == 2);  // 2! = 2, sampling with replacement kicked in

    auto single = CausalOrdering::parse("[[A, B]]", {"A", "B"});
    auto copies = shuffle_components(single, 5, 1);
    CHECK(copies.size() == 5);
    for (const auto& o : copies) CHECK(o == single);
}
