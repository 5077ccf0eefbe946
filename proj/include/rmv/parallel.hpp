// Copyright 2026 The rmvlab Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rmv
{
//! Worker count: hardware concurrency capped by MFC_THREADS when set.
inline unsigned thread_count()
{
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (char const* env = std::getenv("MFC_THREADS"))
    {
        int cap = std::atoi(env);
        if (cap >= 1)
            n = std::min(n, static_cast<unsigned>(cap));
    }
    return n;
}

/*!
 * Run body(i) for i in [0, count) on a static partition of worker threads.
 *
 * Each index is handled by exactly one call, so bodies that write only to
 * slot i give results independent of the thread count.
 */
template<class F>
void parallel_for(std::size_t count, F&& body)
{
    unsigned workers = std::min<std::size_t>(thread_count(), count);
    if (workers <= 1)
    {
        for (std::size_t i = 0; i < count; ++i)
            body(i);
        return;
    }
    std::exception_ptr err;
    std::mutex err_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
    {
        pool.emplace_back([&, w] {
            try
            {
                for (std::size_t i = w; i < count; i += workers)
                    body(i);
            }
            catch (...)
            {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!err)
                    err = std::current_exception();
            }
        });
    }
    for (auto& t : pool)
        t.join();
    if (err)
        std::rethrow_exception(err);
}

//! body(begin, end) over fixed blocks of [0, count); the partition ignores the thread count.
template<class F>
void parallel_blocks(std::size_t count, F&& body, std::size_t block = 256)
{
    std::size_t blocks = (count + block - 1) / block;
    parallel_for(blocks, [&](std::size_t b) {
        body(b * block, std::min(count, (b + 1) * block));
    });
}
}  // namespace rmv
