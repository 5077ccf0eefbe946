// Copyright 2026 The rmvlab Authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance gate: runs the full battery through the C interface and prints
// one line per criterion. Exit status is nonzero if any criterion fails.
//
//   acceptance [seed]
#include <cstdio>
#include <cstdlib>

#include "rmv/rmv.h"

namespace
{
struct Tally
{
    int passed = 0;
    int failed = 0;
};

void on_criterion(int id, const char* name, int passed, double margin, double seconds,
                  const char* detail, void* user)
{
    auto* t = static_cast<Tally*>(user);
    (passed ? t->passed : t->failed)++;
    std::printf("%s criterion %2d %-22s margin %+.3e  %7.1f s  %s\n", passed ? "PASS" : "FAIL",
                id, name, margin, seconds, detail);
    std::fflush(stdout);
}
}  // namespace

int main(int argc, char** argv)
{
    rmv_config* cfg = nullptr;
    if (rmv_config_builtin("MR1", &cfg) != RMV_OK)
    {
        std::fprintf(stderr, "acceptance: %s\n", rmv_last_error());
        return 2;
    }
    if (argc > 1 && rmv_config_set_seed(cfg, std::strtoull(argv[1], nullptr, 10)) != RMV_OK)
    {
        std::fprintf(stderr, "acceptance: %s\n", rmv_last_error());
        return 2;
    }

    Tally tally;
    rmv_report* rep = nullptr;
    rmv_status s = rmv_run(cfg, "suite", on_criterion, &tally, &rep);
    if (s != RMV_OK)
    {
        std::fprintf(stderr, "acceptance: %s: %s\n", rmv_status_name(s), rmv_last_error());
        rmv_config_free(cfg);
        return 3;
    }
    int verdict = rmv_report_verdict(rep);
    std::printf("%d passed, %d failed: %s\n", tally.passed, tally.failed,
                verdict == 1 ? "ACCEPTED" : "REJECTED");
    rmv_report_free(rep);
    rmv_config_free(cfg);
    return verdict == 1 ? 0 : 1;
}
