#include "ssf/parallel.hpp"

#include <algorithm>
#include <thread>
#include <vector>

namespace ssf {

int resolve_jobs(int jobs) {
    if (jobs > 0)
        return jobs;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_chunks(int begin, int end, int jobs,
                     const std::function<void(int, int)>& fn) {
    const int n = end - begin;
    if (n <= 0)
        return;
    jobs = std::min(resolve_jobs(jobs), n);
    if (jobs == 1) {
        fn(begin, end);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(static_cast<size_t>(jobs));
    const int base = n / jobs;
    const int extra = n % jobs;
    int start = begin;
    for (int j = 0; j < jobs; ++j) {
        const int len = base + (j < extra ? 1 : 0);
        const int stop = start + len;
        workers.emplace_back([&fn, start, stop] { fn(start, stop); });
        start = stop;
    }
    for (auto& w : workers)
        w.join();
}

} // namespace ssf
