// Copyright 2026 The rmvlab Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rmv/config.hpp"

namespace rmv
{
//! Fixed column layout; written as CSV with a version header.
struct Table
{
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void add(std::vector<double> row);
};

struct Series
{
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct Plot
{
    std::string name;
    std::string title;
    std::string xlabel;
    std::string ylabel;
    bool logx = false;
    bool logy = false;
    std::vector<Series> series;
};

//! One pass/fail line of the acceptance battery. margin >= 0 iff passed.
struct Criterion
{
    int id = 0;
    std::string name;
    bool passed = false;
    double margin = 0;
    std::string detail;
    double seconds = 0;  //!< wall time; console only, never written to reports
};

struct Report
{
    std::string command;
    Json summary = Json::object();
    std::vector<Table> tables;
    std::vector<Plot> plots;
    std::vector<Criterion> criteria;
    //! Set by commands that assert something; 'passed' is meaningful only then.
    bool has_verdict = false;
    bool passed = true;
};

using CriterionCallback = std::function<void(Criterion const&)>;

//! Subcommands in a fixed order, suite last.
std::vector<std::string> const& command_names();

//! Parse an experiment block strictly; throws config_error naming the field.
void validate_experiment(std::string const& command, Json const& block, ControlProblem const& prob);

//! Run one subcommand on the configuration. The suite reports each criterion as it finishes.
Report run_command(std::string const& command, RunConfig const& cfg,
                   CriterionCallback const& on_criterion = {});

//! The acceptance battery; seed offsets every Monte Carlo seed it uses.
Report run_suite(std::uint64_t seed, CriterionCallback const& on_criterion = {});
}  // namespace rmv
