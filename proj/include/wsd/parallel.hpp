#ifndef WSD_PARALLEL_HPP
#define WSD_PARALLEL_HPP

#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace wsd {

// Static-chunked parallel loop over [0, n). Work items must be independent
// and write only to their own index slots, so results do not depend on the
// schedule. The first exception thrown by a worker is rethrown here.
inline void parallel_for(long n, int workers, const std::function<void(long)>& body) {
    if (n <= 0) return;
    if (workers <= 1 || n == 1) {
        for (long i = 0; i < n; ++i) body(i);
        return;
    }
    const int used = static_cast<int>(std::min<long>(workers, n));
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(used);
    for (int w = 0; w < used; ++w) {
        pool.emplace_back([&, w]() {
            try {
                for (long i = w; i < n; i += used) body(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

inline int default_workers() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace wsd

#endif
