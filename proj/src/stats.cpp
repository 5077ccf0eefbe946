// Copyright 2026 The rmvlab Authors
// SPDX-License-Identifier: Apache-2.0
#include "rmv/stats.hpp"

#include <cmath>

#include "rmv/error.hpp"

namespace rmv
{
MeanStderr mean_stderr(std::span<const double> values)
{
    MeanStderr r;
    std::size_t n = values.size();
    if (n == 0)
        return r;
    double sum = 0, comp = 0;
    for (double v : values)
    {
        double t = sum + v;
        comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
        sum = t;
    }
    r.mean = (sum + comp) / static_cast<double>(n);
    if (n < 2)
        return r;
    double ss = 0;
    for (double v : values)
        ss += (v - r.mean) * (v - r.mean);
    r.std_error = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
    return r;
}

double loglog_slope(std::vector<double> const& ts, std::vector<double> const& values)
{
    require(ts.size() == values.size() && ts.size() >= 2, ErrorCode::invalid_argument,
            "slope fit needs at least two matching points");
    double n = static_cast<double>(ts.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < ts.size(); ++i)
    {
        double lx = std::log(ts[i]), ly = std::log(values[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}
}  // namespace rmv
