#pragma once

namespace sjl {

// Caps OpenMP parallelism for every kernel in the library. n <= 0 restores the runtime default.
void set_thread_count(int n);
int thread_count();

// Thread count from the SJL_THREADS environment variable, or 0 when unset/invalid.
int thread_count_from_env();

}  // namespace sjl
