// Copyright 2026 The rmvlab Authors
// SPDX-License-Identifier: Apache-2.0
#include "rmv/rmv.h"

#include <exception>
#include <new>
#include <string>

#include "rmv/config.hpp"
#include "rmv/error.hpp"
#include "rmv/experiments.hpp"
#include "rmv/output.hpp"

struct rmv_config
{
    rmv::RunConfig cfg;
};

struct rmv_report
{
    rmv::Report report;
    rmv::RunConfig cfg;
    std::string json;
};

namespace
{
thread_local std::string last_error;

rmv_status set_error(rmv_status s, char const* what)
{
    last_error = what;
    return s;
}

rmv_status map(rmv::ErrorCode c)
{
    return static_cast<rmv_status>(static_cast<int>(c));
}

// Run body, translating exceptions to status codes.
template<class F>
rmv_status guarded(F&& body)
{
    try
    {
        body();
        last_error.clear();
        return RMV_OK;
    }
    catch (rmv::Error const& e)
    {
        return set_error(map(e.code()), e.what());
    }
    catch (std::bad_alloc const&)
    {
        return set_error(RMV_ERR_INTERNAL, "out of memory");
    }
    catch (std::exception const& e)
    {
        return set_error(RMV_ERR_INTERNAL, e.what());
    }
    catch (...)
    {
        return set_error(RMV_ERR_INTERNAL, "unknown exception");
    }
}

#define RMV_REQUIRE_ARG(p)                                                    \
    do                                                                        \
    {                                                                         \
        if (!(p))                                                             \
            return set_error(RMV_ERR_NULL_ARGUMENT, #p " must not be null"); \
    } while (0)
}  // namespace

extern "C" {

const char* rmv_version(void)
{
    return "0.1.0";
}

const char* rmv_last_error(void)
{
    return last_error.c_str();
}

const char* rmv_status_name(rmv_status s)
{
    switch (s)
    {
    case RMV_OK: return "ok";
    case RMV_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case RMV_ERR_DIMENSION_MISMATCH: return "dimension_mismatch";
    case RMV_ERR_OUT_OF_DOMAIN: return "out_of_domain";
    case RMV_ERR_NOT_ON_BOUNDARY: return "not_on_boundary";
    case RMV_ERR_SUPPORT_TOO_LARGE: return "support_too_large";
    case RMV_ERR_DEPTH_EXCEEDED: return "depth_exceeded";
    case RMV_ERR_CFL_VIOLATION: return "cfl_violation";
    case RMV_ERR_CONFIG: return "config_error";
    case RMV_ERR_CHECK_FAILED: return "check_failed";
    case RMV_ERR_IO: return "io_error";
    case RMV_ERR_NULL_ARGUMENT: return "null_argument";
    case RMV_ERR_INTERNAL: return "internal_error";
    }
    return "unknown";
}

size_t rmv_command_count(void)
{
    return rmv::command_names().size();
}

const char* rmv_command_name(size_t index)
{
    auto const& n = rmv::command_names();
    return index < n.size() ? n[index].c_str() : nullptr;
}

rmv_status rmv_config_load(const char* path, rmv_config** out)
{
    RMV_REQUIRE_ARG(path);
    RMV_REQUIRE_ARG(out);
    *out = nullptr;
    return guarded([&] { *out = new rmv_config{rmv::load_config(path)}; });
}

rmv_status rmv_config_parse(const char* json_text, rmv_config** out)
{
    RMV_REQUIRE_ARG(json_text);
    RMV_REQUIRE_ARG(out);
    *out = nullptr;
    return guarded([&] { *out = new rmv_config{rmv::parse_config(json_text)}; });
}

rmv_status rmv_config_builtin(const char* name, rmv_config** out)
{
    RMV_REQUIRE_ARG(name);
    RMV_REQUIRE_ARG(out);
    *out = nullptr;
    return guarded([&] { *out = new rmv_config{rmv::builtin_config(name)}; });
}

rmv_status rmv_config_set_seed(rmv_config* cfg, uint64_t seed)
{
    RMV_REQUIRE_ARG(cfg);
    return guarded([&] { cfg->cfg = rmv::with_seed(cfg->cfg, seed); });
}

const char* rmv_config_hash(const rmv_config* cfg)
{
    return cfg ? cfg->cfg.hash.c_str() : "";
}

const char* rmv_config_name(const rmv_config* cfg)
{
    return cfg ? cfg->cfg.name.c_str() : "";
}

void rmv_config_free(rmv_config* cfg)
{
    delete cfg;
}

rmv_status rmv_run(const rmv_config* cfg, const char* command, rmv_criterion_fn on_criterion,
                   void* user, rmv_report** out)
{
    RMV_REQUIRE_ARG(cfg);
    RMV_REQUIRE_ARG(command);
    RMV_REQUIRE_ARG(out);
    *out = nullptr;
    return guarded([&] {
        rmv::CriterionCallback cb;
        if (on_criterion)
            cb = [&](rmv::Criterion const& c) {
                on_criterion(c.id, c.name.c_str(), c.passed ? 1 : 0, c.margin, c.seconds,
                             c.detail.c_str(), user);
            };
        auto rep = rmv::run_command(command, cfg->cfg, cb);
        auto json = rmv::report_json(rep, cfg->cfg);
        *out = new rmv_report{std::move(rep), cfg->cfg, std::move(json)};
    });
}

int rmv_report_verdict(const rmv_report* report)
{
    if (!report || !report->report.has_verdict)
        return -1;
    return report->report.passed ? 1 : 0;
}

const char* rmv_report_json(const rmv_report* report)
{
    return report ? report->json.c_str() : "";
}

size_t rmv_report_criterion_count(const rmv_report* report)
{
    return report ? report->report.criteria.size() : 0;
}

rmv_status rmv_report_criterion(const rmv_report* report, size_t index, int* id,
                                const char** name, int* passed, double* margin)
{
    RMV_REQUIRE_ARG(report);
    if (index >= report->report.criteria.size())
        return set_error(RMV_ERR_INVALID_ARGUMENT, "criterion index out of range");
    auto const& c = report->report.criteria[index];
    if (id)
        *id = c.id;
    if (name)
        *name = c.name.c_str();
    if (passed)
        *passed = c.passed ? 1 : 0;
    if (margin)
        *margin = c.margin;
    last_error.clear();
    return RMV_OK;
}

rmv_status rmv_report_write(const rmv_report* report, const char* out_dir, const char* format,
                            int plots)
{
    RMV_REQUIRE_ARG(report);
    RMV_REQUIRE_ARG(out_dir);
    RMV_REQUIRE_ARG(format);
    return guarded(
        [&] { rmv::write_report(report->report, report->cfg, out_dir, format, plots != 0); });
}

void rmv_report_free(rmv_report* report)
{
    delete report;
}
}  // extern "C"
