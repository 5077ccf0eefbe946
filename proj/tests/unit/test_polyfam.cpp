// Copyright 2026 The rmvlab Authors
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <random>

#include "doctest.h"
#include "rmv/error.hpp"
#include "rmv/polyfam.hpp"

using namespace rmv;

namespace
{
EmpiricalMeasure random_measure(std::mt19937_64& gen, std::size_t n, Domain const& dom)
{
    std::uniform_real_distribution<double> u(0, 1);
    std::size_t d = dom.dim();
    std::vector<double> pts(n * d), w(n);
    double s = 0;
    for (std::size_t i = 0; i < n; ++i)
    {
        for (std::size_t k = 0; k < d; ++k)
            pts[i * d + k] = dom.lower()[k] + u(gen) * (dom.upper()[k] - dom.lower()[k]);
        s += (w[i] = u(gen) + 0.05);
    }
    for (auto& x : w)
        x /= s;
    return EmpiricalMeasure(d, pts, w);
}
}  // namespace

TEST_CASE("chi")
{
    auto c = chi(Poly1D::monomial(1, 1));
    REQUIRE(c.size() == 2);
    CHECK(c[1] == Poly1D::monomial(1, 0));
    c = chi(Poly1D::monomial(1, 3));
    REQUIRE(c.size() == 4);
    CHECK(c[1] == Poly1D::monomial(3, 2));
    CHECK(c[2] == Poly1D::monomial(6, 1));
    CHECK(c[3] == Poly1D::monomial(6, 0));
    CHECK(chi(Poly1D{}).empty());
}

TEST_CASE("canonical enumeration")
{
    auto e1 = build_enumeration(1);
    REQUIRE(e1.size() == 2);
    CHECK(e1[0].to_string() == "x");
    CHECK(e1[1].to_string() == "1");
    auto e = build_enumeration(3);
    std::vector<std::string> want{"x", "1", "x^2", "2x", "2", "x^3", "3x^2", "6x", "6"};
    REQUIRE(e.size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i)
        CHECK(e[i].to_string() == want[i]);
    PolyFamily fam(Domain::interval(0, 1), 5, 2);
    CHECK(fam.lookup(Poly1D::monomial(2, 1)) == 4);
    CHECK(fam.lookup(Poly1D::monomial(5, 1)) == 0);
}

TEST_CASE("coefficients on the unit interval")
{
    PolyFamily fam(Domain::interval(0, 1), 6);
    CHECK(fam.s_coefficient({1}) == 2);
    CHECK(fam.s_coefficient({2}) == 2);
    CHECK(fam.s_coefficient({4}) == 5);
    CHECK(fam.index_set({1}) == std::vector<MultiIndex>{{1}, {2}});
    CHECK(fam.index_set({2}) == std::vector<MultiIndex>{{2}});
    CHECK(fam.c_coefficient({1}) == doctest::Approx(1.0 / 24).epsilon(1e-15));
    CHECK(fam.c_coefficient({2}) == doctest::Approx(1.0 / 8).epsilon(1e-15));
    CHECK(fam.c_coefficient({2}) >= fam.c_coefficient({1}));
    CHECK_THROWS_AS(fam.s_coefficient({100}), Error);
}

TEST_CASE("S and its derivative by hand")
{
    auto dom = Domain::interval(0, 1);
    PolyFamily fam(dom, 6);
    auto d0 = EmpiricalMeasure::dirac({0.0});
    auto s = fam.S(d0, 2);
    CHECK(s.value == doctest::Approx(1.0 / 8));
    CHECK(s.tail_bound == doctest::Approx(0.25));
    CHECK(fam.S(SignedCombo::difference(d0, d0)).value == 0);
    CHECK(fam.S(SignedCombo::difference(d0, d0), 2).tail_bound == doctest::Approx(1.0));
    auto phi = fam.dl_S(d0, 2);
    std::vector<double> g(1);
    for (double x : {0.0, 0.3, 1.0})
    {
        phi.gradient(std::vector<double>{x}, g);
        CHECK(g[0] == 0);
    }
    CHECK(fam.gradient_sum(d0, 2) == doctest::Approx(1.0 / 24));
}

TEST_CASE("closure and monotonicity in d = 1 and d = 2")
{
    for (auto const& [dom, k] : {std::pair{Domain::interval(0, 1), 8},
                                 std::pair{Domain::box({-1, 0}, {1, 2}), 5}})
    {
        PolyFamily fam(dom, k);
        for (auto const& n : fam.indices())
        {
            auto I = fam.index_set(n);
            for (std::size_t i = 0; i < fam.dim(); ++i)
            {
                auto m = fam.derivative_of(n, i);
                if (m.empty())
                    continue;
                CHECK(std::find(I.begin(), I.end(), m) != I.end());
                auto p = fam.f(n[i]).derivative();
                CHECK(fam.f(m[i]) == p);
            }
            double cn = fam.c_coefficient(n);
            for (auto const& l : I)
                CHECK(fam.c_coefficient(l) >= cn);
            int lv = level(n);
            double binom = 1;
            for (std::size_t j = 1; j < fam.dim(); ++j)
                binom = binom * (lv + j) / j;
            CHECK(cn <= std::ldexp(1.0, -lv) / binom);
        }
        for (int lv = static_cast<int>(fam.dim()); lv <= k; ++lv)
        {
            double mass = 0;
            for (std::size_t j = 0; j < fam.indices().size(); ++j)
                if (level(fam.indices()[j]) == lv)
                    mass += fam.c_cached(j);
            CHECK(mass <= std::ldexp(1.0, -lv));
        }
    }
}

TEST_CASE("S bounds on random measures")
{
    std::mt19937_64 gen(21);
    auto dom1 = Domain::interval(0, 1);
    PolyFamily f1(dom1, 6);
    for (int t = 0; t < 1000; ++t)
    {
        auto mu = random_measure(gen, 1 + t % 9, dom1);
        auto s = f1.S(mu);
        CHECK(s.value <= 1);
        CHECK(s.value + s.tail_bound <= 1 + std::ldexp(1.0, -6));
        CHECK(f1.gradient_sum(mu) <= 1 + std::ldexp(1.0, -6));
    }
    auto dom2 = Domain::box({0, 0}, {1, 1});
    PolyFamily f2(dom2, 4);
    for (int t = 0; t < 100; ++t)
        CHECK(f2.gradient_sum(random_measure(gen, 8, dom2)) <= 2 + std::ldexp(1.0, 1 - 4));
}

TEST_CASE("S separates measures with distinct low moments")
{
    std::mt19937_64 gen(22);
    auto dom = Domain::interval(0, 1);
    PolyFamily fam(dom, 6);
    for (int t = 0; t < 100; ++t)
    {
        auto a = random_measure(gen, 8, dom), b = random_measure(gen, 8, dom);
        CHECK(fam.S(SignedCombo::difference(a, b)).value > 0);
    }
}

TEST_CASE("D^L S by central differences")
{
    std::mt19937_64 gen(23);
    for (auto const& [dom, k] : {std::pair{Domain::interval(0, 1), 6},
                                 std::pair{Domain::box({0, 0}, {1, 1}), 4}})
    {
        PolyFamily fam(dom, k);
        auto mu = random_measure(gen, 12, dom);
        auto nu = random_measure(gen, 12, dom);
        auto combo = SignedCombo::difference(mu, nu);
        std::size_t d = dom.dim();
        VectorField v = [d](std::span<const double> x, std::span<double> out) {
            double bump = 1;
            for (std::size_t i = 0; i < d; ++i)
                bump *= std::sin(M_PI * x[i]);
            for (std::size_t i = 0; i < d; ++i)
                out[i] = bump * bump * (i + 1.0);
        };
        double eps = 1e-4;
        auto plus = SignedCombo::difference(pushforward(mu, v, eps, dom), nu);
        auto minus = SignedCombo::difference(pushforward(mu, v, -eps, dom), nu);
        double fd = (fam.S(plus).value - fam.S(minus).value) / (2 * eps);
        auto phi = fam.dl_S(combo);
        std::vector<double> g(d), vel(d);
        double ip = 0;
        for (std::size_t i = 0; i < mu.size(); ++i)
        {
            phi.gradient(mu.point(i), g);
            v(mu.point(i), vel);
            for (std::size_t a = 0; a < d; ++a)
                ip += mu.weight(i) * g[a] * vel[a];
        }
        CHECK(std::abs(fd - ip) <= 1e-3 * std::abs(ip));
    }
}

TEST_CASE("potential derivatives by finite differences")
{
    std::mt19937_64 gen(24);
    auto dom = Domain::box({0, 0}, {1, 1});
    PolyFamily fam(dom, 5);
    auto phi = fam.dl_S(random_measure(gen, 5, dom));
    std::vector<double> x{0.3, 0.7}, g(2), h(4), gp(2), gm(2);
    phi.gradient(x, g);
    phi.hessian(x, h);
    double e = 1e-6;
    for (std::size_t a = 0; a < 2; ++a)
    {
        auto xp = x, xm = x;
        xp[a] += e;
        xm[a] -= e;
        CHECK(g[a] == doctest::Approx((phi.value(xp) - phi.value(xm)) / (2 * e)).epsilon(1e-6));
        phi.gradient(xp, gp);
        phi.gradient(xm, gm);
        for (std::size_t b = 0; b < 2; ++b)
            CHECK(h[b * 2 + a] == doctest::Approx((gp[b] - gm[b]) / (2 * e)).epsilon(1e-6));
    }
}

TEST_CASE("determinism")
{
    PolyFamily a(Domain::box({0, 0}, {1, 1}), 4), b(Domain::box({0, 0}, {1, 1}), 4);
    REQUIRE(a.indices() == b.indices());
    for (std::size_t k = 0; k < a.indices().size(); ++k)
        CHECK(a.c_cached(k) == b.c_cached(k));
}
