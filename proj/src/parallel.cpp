#include "sjl/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace sjl {

namespace {
int default_threads() {
    static const int n = omp_get_max_threads();
    return n;
}
}  // namespace

void set_thread_count(int n) { omp_set_num_threads(n > 0 ? n : default_threads()); }

int thread_count() { return omp_get_max_threads(); }

int thread_count_from_env() {
    const char* raw = std::getenv("SJL_THREADS");
    if (raw == nullptr) return 0;
    try {
        const int n = std::stoi(raw);
        return n > 0 ? n : 0;
    } catch (const std::exception&) {
        return 0;
    }
}

}  // namespace sjl
