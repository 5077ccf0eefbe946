// Copyright 2026 The rmvlab Authors
// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <random>

#include "doctest.h"
#include "rmv/error.hpp"
#include "rmv/geometry.hpp"

using namespace rmv;

namespace
{
double dist(Point const& a, Point const& b)
{
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}
}  // namespace

TEST_CASE("membership")
{
    auto ball = Domain::ball({0, 0}, 1);
    CHECK(ball.contains(Point{0.3, 0.4}) == Membership::interior);
    CHECK(ball.contains(Point{1, 0}) == Membership::boundary);
    auto box = Domain::box({0, 0}, {1, 1});
    CHECK(box.contains(Point{1.5, 0.5}) == Membership::exterior);
    CHECK_THROWS_AS(box.contains(Point{0.5}), Error);
}

TEST_CASE("projection examples")
{
    auto ball = Domain::ball({0, 0}, 1);
    double delta = -1;
    auto p = ball.project(Point{2, 0}, &delta);
    CHECK(p[0] == doctest::Approx(1));
    CHECK(p[1] == doctest::Approx(0));
    CHECK(delta == doctest::Approx(1));

    auto box = Domain::box({0, 0}, {1, 1});
    p = box.project(Point{1.5, -0.2}, &delta);
    CHECK(p == Point{1, 0});
    CHECK(delta == doctest::Approx(std::sqrt(0.29)));

    p = box.project(Point{0.3, 0.6}, &delta);
    CHECK(p == Point{0.3, 0.6});
    CHECK(delta == 0);
}

TEST_CASE("outward normals")
{
    auto ball = Domain::ball({0, 0}, 1);
    auto n = ball.outward_normal(Point{0, 1});
    CHECK(n[0] == doctest::Approx(0));
    CHECK(n[1] == doctest::Approx(1));
    auto box = Domain::box({0, 0}, {1, 1});
    CHECK(box.outward_normal(Point{0, 0.5}) == Point{-1, 0});
    n = box.outward_normal(Point{1, 1});
    CHECK(n[0] == doctest::Approx(1 / std::sqrt(2.0)));
    CHECK(n[1] == doctest::Approx(1 / std::sqrt(2.0)));
    auto iv = Domain::interval(0, 1);
    CHECK(iv.outward_normal(Point{0})[0] == -1);
    CHECK(iv.outward_normal(Point{1})[0] == 1);
    CHECK_THROWS_AS(box.outward_normal(Point{0.5, 0.5}), Error);
}

TEST_CASE("distance to boundary")
{
    CHECK(Domain::ball({0, 0}, 1).distance_to_boundary(Point{0, 0}) == doctest::Approx(1));
    auto box = Domain::box({0, 0}, {1, 1});
    CHECK(box.distance_to_boundary(Point{0.2, 0.7}) == doctest::Approx(0.2));
    CHECK(box.distance_to_boundary(Point{1, 0.7}) == 0);
    CHECK_THROWS_AS(box.distance_to_boundary(Point{2, 0.7}), Error);
}

TEST_CASE("diameter")
{
    CHECK(Domain::interval(-1, 2).diameter() == doctest::Approx(3));
    CHECK(Domain::ball({0, 0, 0}, 0.5).diameter() == doctest::Approx(1));
    CHECK(Domain::box({0, 0}, {1, 2}).diameter() == doctest::Approx(std::sqrt(5.0)));
}

TEST_CASE("projection properties on random points")
{
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(-3, 3);
    for (auto const& dom : {Domain::ball({0.5, -0.2}, 1.3), Domain::box({0, -1}, {1, 2}),
                            Domain::interval(0, 1)})
    {
        std::size_t d = dom.dim();
        for (int k = 0; k < 10000; ++k)
        {
            Point x(d), y(d);
            for (auto& v : x)
                v = u(gen);
            for (auto& v : y)
                v = u(gen);
            auto px = dom.project(x), py = dom.project(y);
            REQUIRE(dom.in_closure(px));
            CHECK(dom.project(px) == px);
            CHECK(dist(px, py) <= dist(x, y) + 1e-12);
            if (dom.contains(x) == Membership::exterior)
            {
                auto nrm = dom.outward_normal(px);
                double ip = 0;
                for (std::size_t i = 0; i < d; ++i)
                    ip += nrm[i] * (x[i] - px[i]);
                CHECK(ip >= -1e-12);
            }
        }
    }
}

TEST_CASE("normal consistency and convexity inequality")
{
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(0, 1);
    auto ball = Domain::ball({0, 0}, 1);
    for (int k = 0; k < 2000; ++k)
    {
        double th = 2 * M_PI * u(gen);
        Point p{std::cos(th), std::sin(th)};
        p = ball.project(p);
        auto n = ball.outward_normal(p);
        Point q{p[0] + 1e-3 * n[0], p[1] + 1e-3 * n[1]};
        CHECK(dist(ball.project(q), p) <= 1e-12);
        Point y{2 * u(gen) - 1, 2 * u(gen) - 1};
        y = ball.project(y);
        CHECK(n[0] * (y[0] - p[0]) + n[1] * (y[1] - p[1]) <= 1e-12);
    }
    auto box = Domain::box({0, 0}, {1, 1});
    for (int k = 0; k < 2000; ++k)
    {
        Point p{u(gen), 0.0};
        if (k % 2)
            p = {1.0, u(gen)};
        auto n = box.outward_normal(p);
        Point q{p[0] + 1e-3 * n[0], p[1] + 1e-3 * n[1]};
        CHECK(dist(box.project(q), p) <= 1e-12);
        Point y{u(gen), u(gen)};
        CHECK(n[0] * (y[0] - p[0]) + n[1] * (y[1] - p[1]) <= 1e-12);
    }
}

TEST_CASE("invalid construction")
{
    CHECK_THROWS_AS(Domain::interval(1, 0), Error);
    CHECK_THROWS_AS(Domain::ball({0}, -1), Error);
    CHECK_THROWS_AS(Domain::box({0, 0}, {1}), Error);
}
