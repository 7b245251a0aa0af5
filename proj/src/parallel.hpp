#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace cbct::detail {

/// Splits [0, count) into `workers` contiguous chunks and runs
/// body(worker, begin, end) on each, chunk 0 on the calling thread.
template <typename Body>
void parallelChunks(unsigned workers, std::size_t count, Body&& body)
{
    workers = std::max(1u, workers);
    auto chunkBegin = [&](unsigned w) { return count * w / workers; };
    if(workers == 1)
    {
        body(0u, std::size_t(0), count);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::jthread> threads;
    threads.reserve(workers - 1);
    for(unsigned w = 1; w < workers; ++w)
    {
        threads.emplace_back([&, w] {
            try
            {
                body(w, chunkBegin(w), chunkBegin(w + 1));
            } catch(...)
            {
                errors[w] = std::current_exception();
            }
        });
    }
    try
    {
        body(0u, chunkBegin(0), chunkBegin(1));
    } catch(...)
    {
        errors[0] = std::current_exception();
    }
    threads.clear();
    for(const auto& e : errors)
    {
        if(e)
        {
            std::rethrow_exception(e);
        }
    }
}

} // namespace cbct::detail
