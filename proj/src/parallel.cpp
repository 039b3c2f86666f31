// SPDX-License-Identifier: Apache-2.0
#include "parallel.hpp"

#include <cstdlib>
#include <string>

namespace tailrisk::parallel {
namespace {
std::atomic<unsigned> override_count{0};
}

unsigned thread_count() {
    if (unsigned n = override_count.load()) return n;
    if (const char* env = std::getenv("TAILRISK_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<unsigned>(v);
        } catch (...) {
            // Unparseable values fall back to automatic.
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void set_thread_count(unsigned n) { override_count.store(n); }

}  // namespace tailrisk::parallel
