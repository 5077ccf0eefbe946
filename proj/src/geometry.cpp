// Copyright 2026 The rmvlab Authors
// SPDX-License-Identifier: Apache-2.0
#include "rmv/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "rmv/error.hpp"

namespace rmv
{
namespace
{
double norm(std::span<const double> v)
{
    double s = 0;
    for (double x : v)
        s += x * x;
    return std::sqrt(s);
}
}  // namespace

Domain::Domain(Kind kind, Point lo, Point hi, Point center, double radius)
    : kind_(kind), lo_(std::move(lo)), hi_(std::move(hi)), center_(std::move(center)), radius_(radius)
{
}

Domain Domain::interval(double a, double b)
{
    require(std::isfinite(a) && std::isfinite(b) && a < b, ErrorCode::invalid_argument,
            "interval requires finite endpoints a < b");
    return Domain(Kind::interval, {a}, {b}, {0.5 * (a + b)}, 0.5 * (b - a));
}

Domain Domain::ball(Point center, double radius)
{
    require(!center.empty(), ErrorCode::invalid_argument, "ball center must have dimension >= 1");
    require(std::isfinite(radius) && radius > 0, ErrorCode::invalid_argument,
            "ball radius must be positive");
    Point lo(center.size()), hi(center.size());
    for (std::size_t i = 0; i < center.size(); ++i)
    {
        require(std::isfinite(center[i]), ErrorCode::invalid_argument, "ball center must be finite");
        lo[i] = center[i] - radius;
        hi[i] = center[i] + radius;
    }
    return Domain(Kind::ball, std::move(lo), std::move(hi), std::move(center), radius);
}

Domain Domain::box(Point lo, Point hi)
{
    require(!lo.empty() && lo.size() == hi.size(), ErrorCode::invalid_argument,
            "box corners must have equal dimension >= 1");
    Point c(lo.size());
    for (std::size_t i = 0; i < lo.size(); ++i)
    {
        require(std::isfinite(lo[i]) && std::isfinite(hi[i]) && lo[i] < hi[i],
                ErrorCode::invalid_argument, "box requires lo_i < hi_i");
        c[i] = 0.5 * (lo[i] + hi[i]);
    }
    return Domain(Kind::box, std::move(lo), std::move(hi), std::move(c), 0);
}

std::string Domain::kind_name() const
{
    switch (kind_)
    {
        case Kind::interval: return "interval";
        case Kind::ball: return "ball";
        case Kind::box: return "box";
    }
    return "?";
}

double Domain::diameter() const
{
    if (kind_ == Kind::ball)
        return 2 * radius_;
    double s = 0;
    for (std::size_t i = 0; i < dim(); ++i)
        s += (hi_[i] - lo_[i]) * (hi_[i] - lo_[i]);
    return std::sqrt(s);
}

void Domain::check_dim(std::span<const double> x) const
{
    if (x.size() != dim())
        fail(ErrorCode::dimension_mismatch, "point has dimension " + std::to_string(x.size())
                                                + ", domain has " + std::to_string(dim()));
}

Membership Domain::contains(std::span<const double> x) const
{
    check_dim(x);
    if (kind_ == Kind::ball)
    {
        double r = 0;
        for (std::size_t i = 0; i < dim(); ++i)
            r += (x[i] - center_[i]) * (x[i] - center_[i]);
        r = std::sqrt(r);
        if (std::abs(r - radius_) <= kBoundaryTol)
            return Membership::boundary;
        return r < radius_ ? Membership::interior : Membership::exterior;
    }
    bool on_face = false;
    for (std::size_t i = 0; i < dim(); ++i)
    {
        if (x[i] < lo_[i] - kBoundaryTol || x[i] > hi_[i] + kBoundaryTol)
            return Membership::exterior;
        if (x[i] - lo_[i] <= kBoundaryTol || hi_[i] - x[i] <= kBoundaryTol)
            on_face = true;
    }
    return on_face ? Membership::boundary : Membership::interior;
}

double Domain::project(std::span<const double> x, std::span<double> p) const
{
    check_dim(x);
    require(p.size() == dim(), ErrorCode::dimension_mismatch, "projection output has wrong dimension");
    double d2 = 0;
    if (kind_ == Kind::ball)
    {
        double r = 0;
        for (std::size_t i = 0; i < dim(); ++i)
            r += (x[i] - center_[i]) * (x[i] - center_[i]);
        r = std::sqrt(r);
        // Points already in the closure (tolerance included) are fixed, which
        // makes the projection exactly idempotent.
        if (r <= radius_ + kBoundaryTol)
        {
            std::copy(x.begin(), x.end(), p.begin());
            return 0;
        }
        for (std::size_t i = 0; i < dim(); ++i)
        {
            double pi = center_[i] + radius_ * (x[i] - center_[i]) / r;
            d2 += (x[i] - pi) * (x[i] - pi);
            p[i] = pi;
        }
        return std::sqrt(d2);
    }
    for (std::size_t i = 0; i < dim(); ++i)
    {
        double pi = std::clamp(x[i], lo_[i], hi_[i]);
        d2 += (x[i] - pi) * (x[i] - pi);
        p[i] = pi;
    }
    return std::sqrt(d2);
}

Point Domain::project(std::span<const double> x, double* delta) const
{
    Point p(dim());
    double d = project(x, std::span<double>(p));
    if (delta)
        *delta = d;
    return p;
}

void Domain::outward_normal(std::span<const double> x, std::span<double> n) const
{
    if (contains(x) != Membership::boundary)
        fail(ErrorCode::not_on_boundary, "outward normal requested at a point off the boundary");
    require(n.size() == dim(), ErrorCode::dimension_mismatch, "normal output has wrong dimension");
    if (kind_ == Kind::ball)
    {
        double r = 0;
        for (std::size_t i = 0; i < dim(); ++i)
            r += (x[i] - center_[i]) * (x[i] - center_[i]);
        r = std::sqrt(r);
        for (std::size_t i = 0; i < dim(); ++i)
            n[i] = (x[i] - center_[i]) / r;
        return;
    }
    for (std::size_t i = 0; i < dim(); ++i)
    {
        n[i] = 0;
        if (x[i] - lo_[i] <= kBoundaryTol)
            n[i] -= 1;
        if (hi_[i] - x[i] <= kBoundaryTol)
            n[i] += 1;
    }
    double len = norm(n);
    for (auto& v : n)
        v /= len;
}

Point Domain::outward_normal(std::span<const double> x) const
{
    Point n(dim());
    outward_normal(x, std::span<double>(n));
    return n;
}

double Domain::distance_to_boundary(std::span<const double> x) const
{
    if (contains(x) == Membership::exterior)
        fail(ErrorCode::out_of_domain, "distance_to_boundary requires a point in the closure");
    if (kind_ == Kind::ball)
    {
        double r = 0;
        for (std::size_t i = 0; i < dim(); ++i)
            r += (x[i] - center_[i]) * (x[i] - center_[i]);
        return std::max(0.0, radius_ - std::sqrt(r));
    }
    double d = hi_[0] - lo_[0];
    for (std::size_t i = 0; i < dim(); ++i)
        d = std::min({d, x[i] - lo_[i], hi_[i] - x[i]});
    return std::max(0.0, d);
}

double Domain::max_sq_distance_from(std::span<const double> c) const
{
    check_dim(c);
    if (kind_ == Kind::ball)
    {
        double r = 0;
        for (std::size_t i = 0; i < dim(); ++i)
            r += (c[i] - center_[i]) * (c[i] - center_[i]);
        double far = std::sqrt(r) + radius_;
        return far * far;
    }
    double s = 0;
    for (std::size_t i = 0; i < dim(); ++i)
    {
        double far = std::max(std::abs(c[i] - lo_[i]), std::abs(c[i] - hi_[i]));
        s += far * far;
    }
    return s;
}

std::pair<double, double> Domain::linear_range(std::span<const double> l) const
{
    check_dim(l);
    if (kind_ == Kind::ball)
    {
        double c = 0;
        for (std::size_t i = 0; i < dim(); ++i)
            c += l[i] * center_[i];
        double len = norm(l);
        return {c - radius_ * len, c + radius_ * len};
    }
    double lo = 0, hi = 0;
    for (std::size_t i = 0; i < dim(); ++i)
    {
        lo += std::min(l[i] * lo_[i], l[i] * hi_[i]);
        hi += std::max(l[i] * lo_[i], l[i] * hi_[i]);
    }
    return {lo, hi};
}
}  // namespace rmv
