#include "kakeya/ifs.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "kakeya/errors.hpp"
#include "kakeya/rng.hpp"

using namespace kakeya;

namespace {

IfsSystem unit_interval() {
    return IfsSystem::from_maps({{Mat2::diagonal(0.5, 0.5), {0.0, 0.0}},
                                 {Mat2::diagonal(0.5, 0.5), {0.5, 0.0}}});
}

IfsSystem edgar_like(double r, double eps) {
    return IfsSystem::from_maps({{Mat2{r, r + eps, eps, r}, {-0.3, -0.3}},
                                 {Mat2{r, eps, r + eps, r}, {0.3, 0.3}}});
}

constexpr const char* kPair64Config = R"({"maps":[
  {"A":[[0.35,0.40],[0.30,0.35]],"t":[0,0]},
  {"A":[[0.40,0.45],[0.45,0.50]],"t":[1,1]}
]})";

}  // namespace

TEST_CASE("load_system accepts the two-map positive config") {
    const IfsSystem sys = load_system(kPair64Config);
    CHECK(sys.size() == 2);
    CHECK(sys.map(0).linear.a == doctest::Approx(0.35));
    CHECK(sys.map(1).translation.x == doctest::Approx(1.0));
    CHECK(sys.alpha_bar() < 1.0);
    CHECK(sys.alpha_lower() > 0.0);
}

TEST_CASE("load_system rejects bad documents") {
    CHECK_THROWS_AS(load_system("not json"), ParseError);
    CHECK_THROWS_AS(load_system(R"({"maps":"nope"})"), ParseError);
    CHECK_THROWS_AS(load_system(R"({"maps":[{"A":[[0.5,0],[0,0.5]]}]})"), ParseError);
    // kappa = 1
    CHECK_THROWS_AS(load_system(R"({"maps":[{"A":[[0.5,0],[0,0.5]],"t":[0,0]}]})"), ValidationError);
    // operator norm 1.2
    CHECK_THROWS_AS(load_system(R"({"maps":[
        {"A":[[1.2,0],[0,0.5]],"t":[0,0]},
        {"A":[[0.5,0],[0,0.5]],"t":[1,0]}]})"),
                    ValidationError);
    // singular linear part
    CHECK_THROWS_AS(load_system(R"({"maps":[
        {"A":[[0.5,0.5],[0.5,0.5]],"t":[0,0]},
        {"A":[[0.5,0],[0,0.5]],"t":[1,0]}]})"),
                    ValidationError);
}

TEST_CASE("validation error names the offending map") {
    try {
        load_system(R"({"maps":[
            {"A":[[0.5,0],[0,0.5]],"t":[0,0]},
            {"A":[[1.2,0],[0,0.5]],"t":[1,0]}]})");
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.map_index == 1);
        CHECK(std::string(e.what()).find("map 2") != std::string::npos);
    }
}

TEST_CASE("cylinder of the empty word is the identity") {
    const IfsSystem sys = unit_interval();
    const Cylinder c = cylinder(sys, Word{});
    CHECK(c.product.exponent == 0);
    CHECK(c.offset.x == 0.0);
    CHECK(c.offset.y == 0.0);
    CHECK(c.singular.alpha1 == doctest::Approx(1.0));
}

TEST_CASE("cylinder of a single symbol is the map itself") {
    const IfsSystem sys = load_system(kPair64Config);
    const Cylinder c = cylinder(sys, Word{{1}});
    const Mat2 m = c.product.to_mat2();
    CHECK(m.a == doctest::Approx(0.40).epsilon(1e-15));
    CHECK(m.d == doctest::Approx(0.50).epsilon(1e-15));
    CHECK(c.offset.x == doctest::Approx(1.0));
    CHECK(c.offset.y == doctest::Approx(1.0));
}

TEST_CASE("cylinder of a two-symbol word matches direct composition") {
    const IfsSystem sys = load_system(kPair64Config);
    const Cylinder c = cylinder(sys, Word{{0, 1}});
    const Mat2 a1 = sys.map(0).linear;
    const Mat2 a2 = sys.map(1).linear;
    const Mat2 expect_lin = a1 * a2;
    const Vec2 expect_off = sys.map(0).translation + a1 * sys.map(1).translation;
    const Mat2 got = c.product.to_mat2();
    CHECK(std::fabs(got.a - expect_lin.a) <= 1e-14);
    CHECK(std::fabs(got.b - expect_lin.b) <= 1e-14);
    CHECK(std::fabs(got.c - expect_lin.c) <= 1e-14);
    CHECK(std::fabs(got.d - expect_lin.d) <= 1e-14);
    CHECK(std::fabs(c.offset.x - expect_off.x) <= 1e-14);
    CHECK(std::fabs(c.offset.y - expect_off.y) <= 1e-14);
}

TEST_CASE("word_endpoints: all translations zero collapse to the origin") {
    const IfsSystem sys = IfsSystem::from_maps(
        {{Mat2{0.3, 0.1, 0.1, 0.3}, {0.0, 0.0}}, {Mat2{0.2, 0.1, 0.05, 0.4}, {0.0, 0.0}}});
    const auto [x, y] = word_endpoints(sys, 0);
    CHECK(x.norm() == 0.0);
    CHECK(y.norm() == 0.0);
}

TEST_CASE("word_endpoints of the unit-interval system") {
    const IfsSystem sys = unit_interval();
    const auto [x1, y1] = word_endpoints(sys, 0);
    const auto [x2, y2] = word_endpoints(sys, 1);
    CHECK(x1.x == doctest::Approx(0.0));
    CHECK(y1.x == doctest::Approx(0.5));
    CHECK(x2.x == doctest::Approx(0.5));
    CHECK(y2.x == doctest::Approx(1.0));
    CHECK(std::fabs(y2.y) < 1e-15);
}

TEST_CASE("word_endpoints against a truncated-series oracle") {
    const IfsSystem sys = load_system(kPair64Config);
    for (std::size_t i : {std::size_t{0}, std::size_t{1}}) {
        const auto [x, y] = word_endpoints(sys, i);
        // x_i = a_i + sum_{n>=0} A_i A_1^n a_1 ; y_i with the last map.
        // 600 terms: norm(A_2) ~ 0.903, tail below 1e-12 needs ~270 terms.
        Vec2 xs = sys.map(i).translation;
        Vec2 ys = sys.map(i).translation;
        Mat2 p1 = sys.map(i).linear;
        Mat2 p2 = sys.map(i).linear;
        for (int n = 0; n < 600; ++n) {
            xs += p1 * sys.map(0).translation;
            ys += p2 * sys.map(1).translation;
            p1 = p1 * sys.map(0).linear;
            p2 = p2 * sys.map(1).linear;
        }
        CHECK((x - xs).norm() <= 1e-12);
        CHECK((y - ys).norm() <= 1e-12);
    }
}

TEST_CASE("enumerate_level visits kappa^n words exactly once, lexicographically") {
    const IfsSystem sys = unit_interval();

    int visits = 0;
    enumerate_level(sys, 0, kDefaultCylinderBudget, [&](const Cylinder& c) {
        ++visits;
        CHECK(c.word.empty());
    });
    CHECK(visits == 1);

    std::vector<Word> seen;
    enumerate_level(sys, 10, kDefaultCylinderBudget,
                    [&](const Cylinder& c) { seen.push_back(c.word); });
    CHECK(seen.size() == 1024);
    CHECK(std::is_sorted(seen.begin(), seen.end()));
    CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
    CHECK(seen.front().symbols == std::vector<std::uint32_t>(10, 0));
    CHECK(seen.back().symbols == std::vector<std::uint32_t>(10, 1));
}

TEST_CASE("level-2 alpha1 sum equals brute force over the four products") {
    const IfsSystem sys = edgar_like(0.4, 0.1);
    double via_enum = 0.0;
    enumerate_level(sys, 2, kDefaultCylinderBudget,
                    [&](const Cylinder& c) { via_enum += c.singular.alpha1; });
    double brute = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            brute += svd2(sys.map(i).linear * sys.map(j).linear).alpha1;
    CHECK(via_enum == doctest::Approx(brute).epsilon(1e-13));
}

TEST_CASE("enumerate_level enforces the cylinder budget") {
    const IfsSystem sys = unit_interval();
    CHECK_THROWS_AS(enumerate_level(sys, 30, 1u << 20, [](const Cylinder&) {}), BudgetExceeded);
}

TEST_CASE("stopping_set boundary conventions") {
    const IfsSystem sys = unit_interval();
    const auto ge1 = stopping_set(sys, 1.0, 1.0);
    REQUIRE(ge1.size() == 1);
    CHECK(ge1.front().word.empty());

    // Uniform similitudes, ratio 1/2, t = 1: words of length ceil(log r / log s).
    const auto z = stopping_set(sys, 1.0, 0.1);
    const std::size_t want_len = 4;  // 0.5^4 = 0.0625 <= 0.1 < 0.125
    CHECK(z.size() == (1u << want_len));
    for (const auto& c : z) CHECK(c.word.length() == want_len);
}

TEST_CASE("stopping_set satisfies the sandwich inequality and incomparability") {
    const IfsSystem sys = edgar_like(0.4, 0.1);
    const double t = 1.2, r = 1e-3;
    const auto z = stopping_set(sys, t, r);
    CHECK(z.size() > 10);
    const double logr = std::log(r);
    for (const auto& c : z) {
        CHECK(log_phi(c.singular, t) <= logr);
        const Cylinder parent = cylinder(sys, c.word.parent());
        CHECK(log_phi(parent.singular, t) > logr);
    }
    for (std::size_t a = 0; a < z.size(); ++a)
        for (std::size_t b = a + 1; b < z.size(); ++b) {
            CHECK(!z[a].word.is_prefix_of(z[b].word));
            CHECK(!z[b].word.is_prefix_of(z[a].word));
        }
}

TEST_CASE("stopping_set covers the full tree on a small instance") {
    const IfsSystem sys = edgar_like(0.4, 0.1);
    const auto z = stopping_set(sys, 1.0, 0.15);
    std::size_t max_len = 0;
    for (const auto& c : z) max_len = std::max(max_len, c.word.length());
    REQUIRE(max_len <= 8);
    // Every word of length max_len has exactly one stopping prefix.
    enumerate_level(sys, static_cast<int>(max_len), kDefaultCylinderBudget, [&](const Cylinder& leaf) {
        int hits = 0;
        for (const auto& c : z)
            if (c.word.is_prefix_of(leaf.word)) ++hits;
        CHECK(hits == 1);
    });
}

TEST_CASE("projection map is Lipschitz in the symbolic metric") {
    const IfsSystem sys = edgar_like(0.4, 0.1);
    const double bound =
        2.0 * std::max(sys.map(0).translation.norm(), sys.map(1).translation.norm()) /
        (1.0 - sys.alpha_bar());
    RngStream rng(33);
    const int len = 48;
    for (int it = 0; it < 1000; ++it) {
        const std::size_t agree = rng.next_below(12);
        Word u, v;
        for (int k = 0; k < len; ++k) {
            const auto s = static_cast<std::uint32_t>(rng.next_below(2));
            u.symbols.push_back(s);
            v.symbols.push_back(k < static_cast<int>(agree)
                                    ? s
                                    : static_cast<std::uint32_t>(rng.next_below(2)));
        }
        if (Word::common_prefix(u, v).length() != agree) continue;  // random tail matched
        const Vec2 pu = cylinder(sys, u).offset;
        const Vec2 pv = cylinder(sys, v).offset;
        // Truncation at `len` adds at most 2 R alpha_bar^len on each side.
        const double slack = 4.0 * sys.invariant_set_radius() * std::pow(sys.alpha_bar(), len);
        CHECK((pu - pv).norm() <= bound * std::pow(sys.alpha_bar(), agree) + slack);
    }
}

TEST_CASE("word helpers") {
    const Word u{{0, 1, 1}};
    const Word v{{0, 1, 0, 1}};
    CHECK(Word::common_prefix(u, v).symbols == std::vector<std::uint32_t>{0, 1});
    CHECK(u.parent().symbols == std::vector<std::uint32_t>{0, 1});
    CHECK(u.concat(v).length() == 7);
    CHECK(Word{}.parent().empty());
    CHECK(Word{{0, 1}}.is_prefix_of(u));
    CHECK(!u.is_prefix_of(v));
}
