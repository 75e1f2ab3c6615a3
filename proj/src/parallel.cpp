#include "stroke/parallel.hpp"

#include <cstdlib>

namespace stroke {

namespace {

int g_override = 0;

int env_cap() {
    const char* s = std::getenv("STROKEBENCH_THREADS");
    if (s == nullptr || *s == '\0') {
        return 0;
    }
    const int v = std::atoi(s);
    return v > 0 ? v : 0;
}

} // namespace

int worker_count() {
    if (g_override > 0) {
        return g_override;
    }
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (n <= 0) {
        n = 1;
    }
    const int cap = env_cap();
    if (cap > 0 && cap < n) {
        n = cap;
    }
    return n;
}

void set_worker_count(int n) {
    g_override = n > 0 ? n : 0;
}

} // namespace stroke
