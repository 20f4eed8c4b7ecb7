#pragma once

// Thin wrapper over the OpenMP runtime so callers need not guard on _OPENMP.

namespace calderon::parallel {

// Corresponds to omp_get_max_threads(); 1 without OpenMP.
int num_threads();

// Corresponds to omp_get_thread_num(); 0 without OpenMP.
int thread_num();

void set_num_threads(int n);

// Applies CALDERON_THREADS from the environment when it is set.
void configure_from_environment();

}  // namespace calderon::parallel
