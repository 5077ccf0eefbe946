// Copyright 2026 The rmvlab Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

namespace rmv
{
struct MeanStderr
{
    double mean = 0;
    double std_error = 0;  //!< sample standard deviation / sqrt(n)
};

//! Compensated mean and standard error of the mean; the error is 0 for n < 2.
MeanStderr mean_stderr(std::span<const double> values);

//! Least-squares slope of log(values) against log(ts).
double loglog_slope(std::vector<double> const& ts, std::vector<double> const& values);
}  // namespace rmv
