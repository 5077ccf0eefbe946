/* Copyright 2026 The rmvlab Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the rmvlab verification workbench. Objects are opaque and
 * owned by the caller once returned; every fallible call returns a status and
 * leaves a message for rmv_last_error() on the calling thread.
 */
#ifndef RMV_RMV_H
#define RMV_RMV_H

#include <stddef.h>
#include <stdint.h>

#if defined(RMV_BUILDING_LIBRARY)
#define RMV_API __attribute__((visibility("default")))
#else
#define RMV_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rmv_status
{
    RMV_OK = 0,
    RMV_ERR_INVALID_ARGUMENT = 1,
    RMV_ERR_DIMENSION_MISMATCH = 2,
    RMV_ERR_OUT_OF_DOMAIN = 3,
    RMV_ERR_NOT_ON_BOUNDARY = 4,
    RMV_ERR_SUPPORT_TOO_LARGE = 5,
    RMV_ERR_DEPTH_EXCEEDED = 6,
    RMV_ERR_CFL_VIOLATION = 7,
    RMV_ERR_CONFIG = 8,
    RMV_ERR_CHECK_FAILED = 9,
    RMV_ERR_IO = 10,
    RMV_ERR_NULL_ARGUMENT = 20,
    RMV_ERR_INTERNAL = 99
} rmv_status;

typedef struct rmv_config rmv_config;
typedef struct rmv_report rmv_report;

/* Called once per acceptance criterion as the suite finishes it. */
typedef void (*rmv_criterion_fn)(int id, const char* name, int passed, double margin,
                                 double seconds, const char* detail, void* user);

RMV_API const char* rmv_version(void);
/* Message of the last failed call on this thread; empty after a success. */
RMV_API const char* rmv_last_error(void);
RMV_API const char* rmv_status_name(rmv_status status);

RMV_API size_t rmv_command_count(void);
RMV_API const char* rmv_command_name(size_t index);

RMV_API rmv_status rmv_config_load(const char* path, rmv_config** out);
RMV_API rmv_status rmv_config_parse(const char* json_text, rmv_config** out);
/* "MR1" or "D1". */
RMV_API rmv_status rmv_config_builtin(const char* name, rmv_config** out);
RMV_API rmv_status rmv_config_set_seed(rmv_config* cfg, uint64_t seed);
RMV_API const char* rmv_config_hash(const rmv_config* cfg);
RMV_API const char* rmv_config_name(const rmv_config* cfg);
RMV_API void rmv_config_free(rmv_config* cfg);

RMV_API rmv_status rmv_run(const rmv_config* cfg, const char* command,
                           rmv_criterion_fn on_criterion, void* user, rmv_report** out);
/* 1 passed, 0 failed, -1 when the command asserts nothing. */
RMV_API int rmv_report_verdict(const rmv_report* report);
/* The JSON report as written by rmv_report_write with format "json". */
RMV_API const char* rmv_report_json(const rmv_report* report);
RMV_API size_t rmv_report_criterion_count(const rmv_report* report);
RMV_API rmv_status rmv_report_criterion(const rmv_report* report, size_t index, int* id,
                                        const char** name, int* passed, double* margin);
/* format is "json" or "csv"; plots nonzero also writes SVG files. */
RMV_API rmv_status rmv_report_write(const rmv_report* report, const char* out_dir,
                                    const char* format, int plots);
RMV_API void rmv_report_free(rmv_report* report);

#ifdef __cplusplus
}
#endif

#endif /* RMV_RMV_H */
