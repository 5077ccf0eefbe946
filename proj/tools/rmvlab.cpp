// Copyright 2026 The rmvlab Authors
// SPDX-License-Identifier: Apache-2.0
//
// Batch front-end. Talks to the library only through the C interface.
#include <cstdio>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "rmv/rmv.h"

namespace
{
struct Options
{
    std::string config;
    std::string out_dir = "rmvlab-out";
    std::optional<std::uint64_t> seed;
    std::string format = "json";
    bool plot = false;
};

void print_criterion(int id, const char* name, int passed, double margin, double seconds,
                     const char* detail, void*)
{
    std::printf("[%s] %2d %-22s margin %+.3e  (%.1f s)  %s\n", passed ? "PASS" : "FAIL", id, name,
                margin, seconds, detail);
    std::fflush(stdout);
}

// 0 ok, 1 failed assertion, 2 configuration or usage error, 3 anything else.
int exit_code(rmv_status s)
{
    if (s == RMV_OK)
        return 0;
    return s == RMV_ERR_CONFIG || s == RMV_ERR_INVALID_ARGUMENT ? 2 : 3;
}

int run(std::string const& command, Options const& o)
{
    rmv_config* cfg = nullptr;
    rmv_status s = o.config.empty() ? rmv_config_builtin("MR1", &cfg)
                                    : rmv_config_load(o.config.c_str(), &cfg);
    if (s == RMV_OK && o.seed)
        s = rmv_config_set_seed(cfg, *o.seed);
    if (s != RMV_OK)
    {
        std::fprintf(stderr, "rmvlab: %s\n", rmv_last_error());
        rmv_config_free(cfg);
        return s == RMV_ERR_IO ? 2 : exit_code(s);
    }
    std::printf("rmvlab %s: config %s (%s)\n", command.c_str(), rmv_config_name(cfg),
                rmv_config_hash(cfg));
    std::fflush(stdout);

    rmv_report* rep = nullptr;
    s = rmv_run(cfg, command.c_str(), command == "suite" ? print_criterion : nullptr, nullptr, &rep);
    if (s == RMV_OK)
        s = rmv_report_write(rep, o.out_dir.c_str(), o.format.c_str(), o.plot ? 1 : 0);
    if (s != RMV_OK)
    {
        std::fprintf(stderr, "rmvlab: %s: %s\n", rmv_status_name(s), rmv_last_error());
        rmv_report_free(rep);
        rmv_config_free(cfg);
        return exit_code(s);
    }
    int verdict = rmv_report_verdict(rep);
    std::printf("report written to %s (%s%s)\n", o.out_dir.c_str(), o.format.c_str(),
                o.plot ? ", svg" : "");
    if (verdict >= 0)
        std::printf("%s: %s\n", command.c_str(), verdict ? "PASS" : "FAIL");
    rmv_report_free(rep);
    rmv_config_free(cfg);
    return verdict == 0 ? 1 : 0;
}
}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"rmvlab: verification workbench for controlled reflected mean-field diffusions"};
    app.set_version_flag("--version", std::string(rmv_version()));
    app.require_subcommand(1, 1);

    Options o;
    std::string chosen;
    for (std::size_t i = 0; i < rmv_command_count(); ++i)
    {
        std::string name = rmv_command_name(i);
        auto* sub = app.add_subcommand(name, name == "suite" ? "run the acceptance battery"
                                                             : "run the " + name + " experiment");
        sub->add_option("--config", o.config, "JSON run configuration (default: builtin MR1)");
        sub->add_option("--out-dir", o.out_dir, "directory for reports")->capture_default_str();
        sub->add_option("--seed", o.seed, "override scheme.seed");
        sub->add_option("--format", o.format, "report format")
            ->check(CLI::IsMember({"csv", "json"}))
            ->capture_default_str();
        sub->add_flag("--plot", o.plot, "also write SVG plots");
        sub->callback([&chosen, name] { chosen = name; });
    }
    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::ParseError const& e)
    {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    return run(chosen, o);
}
