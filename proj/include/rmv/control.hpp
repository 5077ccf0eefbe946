// Copyright 2026 The rmvlab Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "rmv/dynamics.hpp"

namespace rmv
{
//! Monte Carlo estimate of a cost; std_error from the per-particle spread.
struct CostEstimate
{
    double value = 0;
    double std_error = 0;
    double running = 0;   //!< mean running part
    double terminal = 0;  //!< mean terminal part
    std::size_t n = 0;
};

/*!
 * E[int_s^T running dt + g(X_T, mu_T)] by left-endpoint quadrature on the
 * particle system; costs see the empirical law of the same system.
 */
CostEstimate evaluate_cost(ControlProblem const& prob, FeedbackPolicy const& pol, double s,
                           InitialLaw const& law, SimParams const& params);
//! Same, continuing an existing ensemble from ens.t to the horizon.
CostEstimate evaluate_cost(ControlProblem const& prob, FeedbackPolicy const& pol,
                           ParticleEnsemble ens, double dt);

struct SegmentRun
{
    CostEstimate cost;  //!< running part only
    ParticleEnsemble end;
};

//! Running cost over [ens.t, t_end] and the ensemble at t_end.
SegmentRun run_segment(ControlProblem const& prob, FeedbackPolicy const& pol,
                       ParticleEnsemble ens, double dt, double t_end);

/*!
 * Finite policy class. A closed catalog is built from base policies and one
 * breakpoint: it holds every base member and every switch P|Q (P before the
 * breakpoint, Q from it on) for P != Q.
 */
class PolicyCatalog
{
  public:
    explicit PolicyCatalog(std::vector<FeedbackPolicy> members);
    static PolicyCatalog closed(std::vector<FeedbackPolicy> base, double breakpoint);

    std::size_t size() const { return members_.size(); }
    FeedbackPolicy const& member(std::size_t i) const { return members_.at(i); }
    std::vector<FeedbackPolicy> const& members() const { return members_; }
    bool is_closed() const { return closed_; }
    double breakpoint() const { return breakpoint_; }
    std::size_t base_size() const { return base_; }
    //! Base member used before / after the breakpoint by member i.
    std::size_t head(std::size_t i) const { return head_.at(i); }
    std::size_t tail(std::size_t i) const { return tail_.at(i); }

  private:
    std::vector<FeedbackPolicy> members_;
    std::vector<std::size_t> head_, tail_;
    std::size_t base_ = 0;
    bool closed_ = false;
    double breakpoint_ = 0;
};

struct ValueEstimate
{
    double value = 0;
    double std_error = 0;
    std::size_t best = 0;
    std::string policy;
    double s = 0;
    SimParams params;
    std::vector<CostEstimate> costs;  //!< per catalog member
};

//! min over the catalog of evaluate_cost; all members share the seed.
ValueEstimate value_estimate(ControlProblem const& prob, PolicyCatalog const& catalog, double s,
                             InitialLaw const& law, SimParams const& params);

struct DppParams
{
    SimParams outer{10000, 1e-3, 0, 0};
    std::size_t inner_n = 1000;
};

struct DppHead
{
    std::string policy;
    CostEstimate running;  //!< over [s, t]
    ValueEstimate inner;   //!< value at t from the simulated law
    double total = 0;
    double std_error = 0;
};

struct DppReport
{
    double s = 0;
    double t = 0;
    ValueEstimate lhs;  //!< value at (s, mu)
    std::vector<DppHead> heads;
    std::size_t best_head = 0;
    double rhs = 0;
    double residual = 0;   //!< lhs - rhs
    double std_error = 0;  //!< combined
    //! J(best member) - (running + V(t)) for its head; the proof's ">=" side.
    double ge_gap = 0;
    double ge_std_error = 0;
    //! V(s) - (running + V(t)) at the best head; the concatenation side.
    double le_gap = 0;
    bool within(double z = 3) const;
};

/*!
 * Nested Monte Carlo check of the dynamic programming identity on a closed
 * catalog with breakpoint t. Inner values start fresh systems of inner_n
 * particles resampled from the outer law at t; inner seeds follow the head
 * index.
 */
DppReport dpp_check(ControlProblem const& prob, PolicyCatalog const& catalog, double s, double t,
                    InitialLaw const& law, DppParams const& params);

struct ValuePoint
{
    double s = 0;
    InitialLaw law;
};

struct RegularityPair
{
    std::size_t a = 0;
    std::size_t b = 0;
    double ds = 0;
    double w2 = 0;
    double dv = 0;
    double ratio = 0;
    bool time_only = false;
};

struct RegularityReport
{
    double c_hat = 0;
    double eps0 = 1e-6;
    std::vector<ValueEstimate> values;  //!< per point
    std::vector<RegularityPair> pairs;
    double time_only_max_ratio = 0;  //!< max |dV| / sqrt|ds| over time-only pairs
    double time_only_slope = 0;      //!< log-log slope of |dV| against |ds|; NaN if undetermined
};

/*!
 * C = max |V(a) - V(b)| / (sqrt|ds| + W2 + eps0) over the index pairs. W2 is
 * computed between samples of the two initial laws drawn with common seeds
 * (at most 512 points when d > 1).
 */
RegularityReport regularity_check(ControlProblem const& prob, PolicyCatalog const& catalog,
                                  std::vector<ValuePoint> const& points,
                                  std::vector<std::pair<std::size_t, std::size_t>> const& pairs,
                                  SimParams const& params);
}  // namespace rmv
