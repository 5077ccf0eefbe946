// Copyright 2026 The rmvlab Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace rmv
{
enum class ErrorCode
{
    invalid_argument = 1,
    dimension_mismatch,
    out_of_domain,
    not_on_boundary,
    support_too_large,
    depth_exceeded,
    cfl_violation,
    config_error,
    check_failed,
    io_error,
};

//! Base exception carrying a stable code that the C API maps to status values.
class Error : public std::runtime_error
{
  public:
    Error(ErrorCode code, std::string const& what)
        : std::runtime_error(what), code_(code)
    {
    }
    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, std::string const& what)
{
    throw Error(code, what);
}

// Literal messages take this overload so passing checks allocate nothing.
inline void require(bool cond, ErrorCode code, char const* what)
{
    if (!cond) [[unlikely]]
        fail(code, what);
}

inline void require(bool cond, ErrorCode code, std::string const& what)
{
    if (!cond) [[unlikely]]
        fail(code, what);
}
}  // namespace rmv
