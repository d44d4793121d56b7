#include "qnav/kernels.hpp"

#ifdef QNAV_HAVE_OPENMP
#include <omp.h>
#endif

namespace qnav {

int max_threads() {
#ifdef QNAV_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

std::vector<double> loglik_on_grid(const OutcomeTally& tally, const SphereGrid& grid) {
  std::vector<double> out(grid.size());
  const auto n = static_cast<long long>(grid.size());
#pragma omp parallel for schedule(static)
  for (long long j = 0; j < n; ++j) {
    out[static_cast<std::size_t>(j)] = log_likelihood(grid.points[static_cast<std::size_t>(j)], tally);
  }
  return out;
}

namespace serial {

std::vector<double> loglik_on_grid(const OutcomeTally& tally, const SphereGrid& grid) {
  std::vector<double> out;
  out.reserve(grid.size());
  for (const UnitDirection& p : grid.points) out.push_back(log_likelihood(p, tally));
  return out;
}

}  // namespace serial
}  // namespace qnav
