#include "dime/parallel.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

// When we fan out across spectra ourselves, OpenBLAS must not also fan out
// inside each dsyev call or the machine oversubscribes. The symbol is weak:
// linked BLAS may not be OpenBLAS at all, in which case this is a no-op.
extern "C" void openblas_set_num_threads(int) __attribute__((weak));

namespace dime {

unsigned worker_count() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

namespace {

void pin_blas_threads_once() {
    static std::once_flag flag;
    std::call_once(flag, [] {
        if (openblas_set_num_threads != nullptr) openblas_set_num_threads(1);
    });
}

}  // namespace

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
    if (count == 0) return;
    const unsigned workers = static_cast<unsigned>(
        std::min<std::size_t>(worker_count(), count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    pin_blas_threads_once();

    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(count);
    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(body);
    body();
    for (auto& t : pool) t.join();

    for (auto& err : errors)
        if (err) std::rethrow_exception(err);
}

}  // namespace dime
