// Copyright 2026 The rmvlab Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rmv/dynamics.hpp"

namespace rmv
{
using Json = nlohmann::json;

struct SchemeConfig
{
    std::size_t n = 10000;
    double dt = 1e-3;
    std::uint64_t seed = 0;
    int truncation = 6;
};

/*!
 * A validated run configuration.
 *
 * 'effective' is the fully expanded document (builtins resolved, defaults
 * filled, overrides applied); the hash is taken over its canonical dump.
 */
struct RunConfig
{
    std::string name;
    ControlProblem problem;
    SchemeConfig scheme;
    InitialLaw law;
    FeedbackPolicy policy;
    Json experiments;  //!< per-subcommand blocks, each already validated
    Json effective;
    std::string hash;

    //! Experiment block for a subcommand, or an empty object.
    Json experiment(std::string const& name) const;
};

//! Parse and validate; errors carry code config_error and name the field or line.
RunConfig parse_config(std::string const& text, std::string const& source = "<config>");
RunConfig load_config(std::string const& path);
//! "MR1" or "D1".
RunConfig builtin_config(std::string const& name);
//! Re-validate with a new seed; the hash changes accordingly.
RunConfig with_seed(RunConfig const& cfg, std::uint64_t seed);

//! "fnv1a64:" followed by 16 hex digits.
std::string content_hash(std::string const& bytes);

//---------------------------------------------------------------------------//
/*!
 * Strict reader over one JSON object. Accessors mark keys as used; finish()
 * rejects anything left over. Messages are prefixed with the dotted path.
 */
class Fields
{
  public:
    Fields(Json const& j, std::string path);

    std::string const& path() const { return path_; }
    std::string at(std::string const& key) const;
    bool has(std::string const& key) const;
    Json const& need(std::string const& key);
    Json const* get(std::string const& key);

    double number(std::string const& key);
    double number(std::string const& key, double fallback);
    double positive(std::string const& key, std::optional<double> fallback = std::nullopt);
    std::size_t count(std::string const& key, std::optional<std::size_t> fallback = std::nullopt);
    std::string text(std::string const& key, std::optional<std::string> fallback = std::nullopt);
    bool flag(std::string const& key, bool fallback);
    //! A number or an array of numbers; length checked when len > 0.
    std::vector<double> numbers(std::string const& key, std::size_t len = 0);
    std::vector<double> numbers(std::string const& key, std::vector<double> fallback,
                                std::size_t len = 0);

    void finish() const;

  private:
    Json const& j_;
    std::string path_;
    std::vector<std::string> used_;
};

[[noreturn]] void config_fail(std::string const& path, std::string const& what);

//! Shared sub-schemas.
InitialLaw parse_law(Json const& j, std::string const& path, std::size_t dim);
FeedbackPolicy parse_policy(Json const& j, std::string const& path, std::size_t dim,
                            std::size_t control_dim);
}  // namespace rmv
