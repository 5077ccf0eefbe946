// Copyright 2026 The rmvlab Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "rmv/dynamics.hpp"
#include "rmv/measures.hpp"
#include "rmv/polyfam.hpp"

namespace rmv
{
/*!
 * Parameters of the doubling-of-variables penalty. One time grid serves both
 * t and s; it must lie in (0, T].
 */
struct DoublingConfig
{
    double beta = 0.1;
    double lambda = 0.01;
    double delta = 0.1;
    int truncation = 6;
    double horizon = 1;
    std::vector<double> times;
    std::vector<EmpiricalMeasure> family;

    //! Throws invalid_argument naming the offending field.
    void validate() const;
};

//! Values on times x family, row-major by time.
struct ValueSurface
{
    std::vector<double> times;
    std::size_t family_size = 0;
    std::vector<double> values;

    static ValueSurface constant(std::vector<double> times, std::size_t family_size, double c);
    double at(std::size_t ti, std::size_t mi) const { return values.at(ti * family_size + mi); }
};

//! S(mu_i - mu_j; K) and its truncation tail over all family pairs.
class SeparationTable
{
  public:
    SeparationTable(std::shared_ptr<PolyFamily const> fam, std::vector<EmpiricalMeasure> const& family,
                    int kmax = -1);

    std::size_t size() const { return n_; }
    double s(std::size_t i, std::size_t j) const { return s_[i * n_ + j]; }
    double tail(std::size_t i, std::size_t j) const { return tail_[i * n_ + j]; }
    std::shared_ptr<PolyFamily const> const& poly_family() const { return fam_; }
    int kmax() const { return kmax_; }
    std::vector<EmpiricalMeasure> const& family() const { return family_; }

  private:
    std::shared_ptr<PolyFamily const> fam_;
    std::vector<EmpiricalMeasure> family_;
    int kmax_ = -1;
    std::size_t n_ = 0;
    std::vector<double> s_, tail_;
};

struct PhiTerms
{
    double value = 0;       //!< W(t, mu) - V(s, nu) - penalty
    double gap = 0;         //!< W(t, mu) - V(s, nu)
    double penalty = 0;     //!< (|t-s|^2 + S) / (2 delta) + beta (2T - t - s) + lambda/t + lambda/s
    double separation = 0;  //!< |t-s|^2 + S(mu - nu)
    double s_tail = 0;
};

PhiTerms phi_eval(ValueSurface const& w, ValueSurface const& v, std::size_t ti, std::size_t si,
                  std::size_t mi, std::size_t ni, DoublingConfig const& cfg,
                  SeparationTable const& table);

struct DoublingResult
{
    double delta = 0;
    std::size_t ti = 0, si = 0, mi = 0, ni = 0;
    double t0 = 0, s0 = 0;
    PhiTerms at;
    //! separation / delta at the maximizer.
    double quantity = 0;
    //! W(t0,mu0) - W(s0,nu0) + V(t0,mu0) - V(s0,nu0); bounds 'quantity' from above.
    double value_difference = 0;
    bool at_horizon = false;  //!< t0 or s0 equals T
};

//! Exhaustive maximization of Phi; ties go to the lexicographically smallest (ti, si, mi, ni).
DoublingResult doubling_maximize(ValueSurface const& w, ValueSurface const& v,
                                 DoublingConfig const& cfg, SeparationTable const& table);

struct DeltaSweep
{
    std::vector<DoublingResult> results;  //!< in the order of the deltas given
    bool quantity_monotone = false;       //!< nonincreasing as delta decreases
    bool separation_monotone = false;
    double final_quantity = 0;
    //! Smallest positive family separation; below it 'quantity' is forced to 0.
    double resolution = 0;
};

//! deltas must be strictly decreasing.
DeltaSweep delta_sweep(ValueSurface const& w, ValueSurface const& v, DoublingConfig cfg,
                       SeparationTable const& table, std::vector<double> const& deltas);

/*!
 * The Hamiltonian difference at a maximizer, split as
 *   (I)   int <b(s0,nu0,a), D> dnu0 - int <b(t0,mu0,a), D> dmu0
 *   (II)  1/2 int tr(A grad D) d(nu0 - mu0)
 *   (III) int theta(s0,.,nu0,a) dnu0 - int theta(t0,.,mu0,a) dmu0
 * with D = D^L S(mu0 - nu0) / (2 delta), minimized over an alpha grid.
 */
struct HamiltonianDifference
{
    std::vector<double> totals;  //!< per alpha
    std::size_t best = 0;
    double term_i = 0, term_ii = 0, term_iii = 0;  //!< at the minimizing alpha
    double inf_total = 0;
    //! d_t psi(t0) - d_s psi~(s0) = -2 beta - lambda/t0^2 - lambda/s0^2.
    double time_gap = 0;
    //! Viscosity sub/super inequalities at the maximizer would give time_gap >= inf_total.
    bool consistent = false;
};

HamiltonianDifference hamiltonian_difference(ControlProblem const& prob, DoublingResult const& r,
                                             DoublingConfig const& cfg,
                                             SeparationTable const& table,
                                             std::vector<Point> const& alphas);

struct CoefficientReport
{
    int truncation = 0;
    std::size_t indices = 0;
    std::size_t pairs_checked = 0;
    double min_coefficient_ratio = 0;  //!< min c_l / c_n over l in I_n
    double max_gradient_sum = 0;
    double gradient_bound = 0;  //!< d + d 2^-K
    double max_difference_s = 0;
    double difference_bound = 0;  //!< 4 + 4 2^-K
    std::size_t measures_checked = 0;
};

/*!
 * c_l >= c_n for l in I_n, the gradient sum bound on random measures and on
 * corner point masses, and S(mu - nu) <= 4 + 4 2^-K on random pairs. Throws
 * check_failed naming the first violation.
 */
CoefficientReport coefficient_inequality_suite(Domain const& domain, PolyFamily const& fam,
                                               std::uint64_t seed,
                                               std::size_t random_measures = 100);
}  // namespace rmv
