#include "cohevo/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace cohevo {

unsigned parallel_width(unsigned requested) {
    unsigned cap = requested;
    if (const char* env = std::getenv("COHEVO_THREADS")) {
        try {
            const unsigned env_cap = static_cast<unsigned>(std::stoul(env));
            if (env_cap > 0) cap = std::min(cap, env_cap);
        } catch (...) {
            // unparseable value: ignore, keep requested width
        }
    }
    return std::max(1u, cap);
}

void parallel_for(std::size_t n, unsigned width, const std::function<void(std::size_t)>& body) {
    width = parallel_width(width);
    if (width <= 1 || n < 2 * width) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(width);
    const std::size_t chunk = (n + width - 1) / width;
    for (unsigned w = 0; w < width; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        workers.emplace_back([lo, hi, &body] {
            for (std::size_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& t : workers) t.join();
}

}  // namespace cohevo
