#include "calderon/parallel.hpp"

#include <cstdlib>
#include <string>

#include "calderon/error.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace calderon::parallel {

#ifdef _OPENMP
int num_threads() { return omp_get_max_threads(); }
int thread_num() { return omp_get_thread_num(); }
void set_num_threads(int n) { omp_set_num_threads(n); }
#else
int num_threads() { return 1; }
int thread_num() { return 0; }
void set_num_threads(int) {}
#endif

void configure_from_environment() {
  const char* value = std::getenv("CALDERON_THREADS");
  if (value == nullptr || *value == '\0') return;
  int n = 0;
  try {
    n = std::stoi(value);
  } catch (const std::exception&) {
    fail(ErrorKind::config, std::string("CALDERON_THREADS is not an integer: ") + value);
  }
  if (n < 1) fail(ErrorKind::config, "CALDERON_THREADS must be at least 1");
  set_num_threads(n);
}

}  // namespace calderon::parallel
