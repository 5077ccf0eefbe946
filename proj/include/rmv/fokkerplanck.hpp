// Copyright 2026 The rmvlab Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "rmv/dynamics.hpp"
#include "rmv/geometry.hpp"
#include "rmv/stats.hpp"

namespace rmv
{
//! Floor for the logarithmic derivative in the velocity field.
inline constexpr double kRhoMin = 1e-12;

//! Uniform cell grid on an interval or a box (d <= 2), x index fastest.
struct Grid
{
    Point lo;
    Point hi;
    std::vector<std::size_t> n;

    static Grid on(Domain const& domain, std::size_t cells_per_axis);

    std::size_t dim() const { return n.size(); }
    std::size_t cells() const;
    double h(std::size_t axis) const { return (hi[axis] - lo[axis]) / n[axis]; }
    double cell_volume() const;
    void center(std::size_t cell, std::span<double> out) const;
    std::vector<std::size_t> coords(std::size_t cell) const;
    //! Cell containing x (clamped to the grid).
    std::size_t locate(std::span<const double> x) const;
    //! Flattened cell centers, cells() x dim().
    std::vector<double> centers() const;
};

struct GridDensity
{
    Grid grid;
    std::vector<double> rho;  //!< cell averages
    double t = 0;

    double mass() const;
    double min_value() const;
};

GridDensity uniform_density(Grid const& grid);
//! Cell averages of f by a 4-point Gauss rule per axis, normalized to unit mass.
GridDensity density_from(Grid const& grid, std::function<double(std::span<const double>)> const& f,
                         bool normalize = true);
//! Normalized histogram of a point cloud.
GridDensity histogram(Grid const& grid, EmpiricalMeasure const& mu);
//! sum |rho_a - rho_b| * cell volume.
double l1_distance(GridDensity const& a, GridDensity const& b);

struct FpOptions
{
    std::vector<double> snapshot_times;
    //! Store every k-th step in addition to the snapshots; 0 stores only snapshots.
    std::size_t store_every = 0;
};

struct DensityTrajectory
{
    std::vector<GridDensity> densities;
    double dt = 0;
    double max_mass_error = 0;
    double min_value = 0;
    std::size_t steps = 0;

    std::size_t index_of(double t) const;
};

//! Largest stable step: dt * sum_a (A_aa / h_a^2 + |b_a| / h_a) <= 1.
double fp_stable_step(Grid const& grid, std::vector<double> const& a, double max_abs_drift);

/*!
 * Explicit conservative finite-volume solve of the nonlinear Fokker-Planck
 * equation with zero total flux through the boundary.
 *
 * Fluxes are central (b rho - A grad rho / 2) at cell faces. The step is
 * rejected with cfl_violation unless dt * sum_a (A_aa / h_a^2 + |b_a| / h_a)
 * <= 1 and the cell Peclet condition A_aa / h_a >= |b_a| hold; together they
 * keep the update a convex combination, hence positive. The law entering
 * the drift is the grid measure at the start of each step.
 */
DensityTrajectory fp_solve(ControlProblem const& prob, FeedbackPolicy const& pol,
                           GridDensity rho0, double dt, double t_end, FpOptions const& opts = {});

struct GridVelocity
{
    std::vector<double> v;      //!< cells x d
    std::vector<char> valid;    //!< rho > kRhoMin
    std::size_t masked = 0;
};

//! v = b - (1/2) A grad rho / rho; central differences, one-sided at boundary cells.
GridVelocity velocity_field(GridDensity const& rho, ControlProblem const& prob,
                            FeedbackPolicy const& pol, double t);

struct ContinuityReport
{
    double residual = 0;               //!< max over the test battery
    std::vector<double> per_test;
};

/*!
 * max over a fixed battery of 10 smooth, compactly supported test functions
 * psi(t, x) = eta(t) phi(x) of |int int (d_t psi + <v, grad psi>) dmu_t dt|,
 * with midpoint quadrature in space and the trapezoid rule over the stored
 * densities in time.
 */
ContinuityReport continuity_residual(DensityTrajectory const& traj, ControlProblem const& prob,
                                     FeedbackPolicy const& pol);

//! Reflected Brownian motion density on [a, b] by the method of images.
double reflected_bm_density_1d(double t, double x, double y, double sigma, double a, double b);

struct HeatSample
{
    double x;
    double y;
    double t;  //!< elapsed time t - s
    double p;
};

struct HeatFit
{
    bool feasible = false;
    double kappa1 = 0;
    double kappa2 = 0;
};

/*!
 * Grid search over kappa2 for the smallest kappa1 >= 1 with
 * kappa1^-1 t^-d/2 exp(-r^2/(kappa2 t)) <= p <= kappa1 t^-d/2 exp(-kappa2 r^2/t).
 */
//! Smallest kappa1 >= 1 for a fixed kappa2; infinite if some sample has p <= 0.
double heat_bound_kappa1(std::vector<HeatSample> const& samples, std::size_t dim, double kappa2);

HeatFit heat_bound_fit(std::vector<HeatSample> const& samples, std::size_t dim,
                       std::vector<double> kappa2_grid = {});
}  // namespace rmv
