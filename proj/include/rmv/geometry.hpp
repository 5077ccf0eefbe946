// Copyright 2026 The rmvlab Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace rmv
{
using Point = std::vector<double>;

enum class Membership
{
    interior,
    boundary,
    exterior
};

//! Absolute tolerance for boundary classification.
inline constexpr double kBoundaryTol = 1e-12;

/*!
 * Bounded convex domain: an interval, a Euclidean ball, or an axis-aligned box.
 *
 * Values are immutable after construction. The closure includes points that
 * classify as boundary, i.e. within kBoundaryTol outside the exact set.
 *
 * At box edges and corners the outward normal is the normalized sum of the
 * active face normals, one selection from the normal cone.
 */
class Domain
{
  public:
    enum class Kind
    {
        interval,
        ball,
        box
    };

    static Domain interval(double a, double b);
    static Domain ball(Point center, double radius);
    static Domain box(Point lo, Point hi);

    Kind kind() const { return kind_; }
    std::size_t dim() const { return lo_.size(); }
    std::string kind_name() const;

    //! Bounding box of the closure (exact for interval and box).
    Point const& lower() const { return lo_; }
    Point const& upper() const { return hi_; }
    Point const& center() const { return center_; }
    double radius() const { return radius_; }
    double diameter() const;

    Membership contains(std::span<const double> x) const;
    bool in_closure(std::span<const double> x) const
    {
        return contains(x) != Membership::exterior;
    }

    //! Write the metric projection onto the closure into p; return |x - p|.
    double project(std::span<const double> x, std::span<double> p) const;
    Point project(std::span<const double> x, double* delta = nullptr) const;

    //! Unit outward normal at a boundary point.
    void outward_normal(std::span<const double> x, std::span<double> n) const;
    Point outward_normal(std::span<const double> x) const;

    double distance_to_boundary(std::span<const double> x) const;

    //! Largest |x - c|^2 over the closure.
    double max_sq_distance_from(std::span<const double> c) const;
    //! Min and max of <l, x> over the closure.
    std::pair<double, double> linear_range(std::span<const double> l) const;

  private:
    Domain(Kind kind, Point lo, Point hi, Point center, double radius);
    void check_dim(std::span<const double> x) const;

    Kind kind_;
    Point lo_;
    Point hi_;
    Point center_;
    double radius_ = 0;
};
}  // namespace rmv
