// Copyright 2026 The rmvlab Authors
// SPDX-License-Identifier: Apache-2.0
// Experiment pieces shared by the subcommands and the acceptance suite.
#pragma once

#include <random>
#include <vector>

#include "rmv/comparison.hpp"
#include "rmv/experiments.hpp"
#include "rmv/fokkerplanck.hpp"

namespace rmv
{
Report coupling_report(ControlProblem const& prob, FeedbackPolicy const& pol, InitialLaw const& a,
                       InitialLaw const& b, SimParams base, std::size_t seeds,
                       std::size_t checkpoints_count, double slack, double w2_tolerance);

Report regularity_report(ControlProblem const& prob, std::vector<double> const& controls,
                         std::vector<double> const& times, std::vector<InitialLaw> const& laws,
                         std::size_t max_pairs, SimParams p, bool doubling, double stability);

EmpiricalMeasure random_measure(std::mt19937_64& gen, std::size_t n, Domain const& dom);
EmpiricalMeasure window_cloud(Domain const& dom, double center_frac, double width_frac,
                              std::size_t n);
std::vector<EmpiricalMeasure> shifted_family(Domain const& dom, std::size_t count,
                                             std::size_t cloud);

//! Samples on an 11 x 11 grid of [a, b]^2 at each time, then the sandwich fit.
HeatFit heat_sandwich(double sigma, double a, double b, std::vector<double> const& times,
                      std::vector<HeatSample>& samples);
//! log-log slope of p(t, m, m) at the midpoint m.
double heat_short_slope(double sigma, double a, double b, std::vector<double> const& ts);

ValueSurface restricted_value(ControlProblem const& prob, std::vector<double> const& controls,
                              std::vector<double> const& times,
                              std::vector<EmpiricalMeasure> const& family, SimParams p,
                              double* max_std_error = nullptr);

Json doubling_json(DoublingResult const& d);
}  // namespace rmv
