#pragma once

// Data-parallel kernels. Each has a plain serial twin in qnav::serial that
// is kept as the reference for equivalence tests and benchmarks. Results
// never depend on the thread count: work is written per index and any
// reduction runs in a fixed order.

#include <cstddef>
#include <exception>
#include <type_traits>
#include <vector>

#include "qnav/estimation.hpp"

namespace qnav {

int max_threads();

/// log_likelihood(grid.points[j], tally) for every j.
std::vector<double> loglik_on_grid(const OutcomeTally& tally, const SphereGrid& grid);

/// Runs fn(t) for t in [0, count) and returns results in index order. The
/// first exception thrown (by index) is rethrown after the loop.
template <class Fn>
auto map_trials(std::size_t count, Fn&& fn) -> std::vector<std::invoke_result_t<Fn&, std::size_t>> {
  using Result = std::invoke_result_t<Fn&, std::size_t>;
  std::vector<Result> out(count);
  std::vector<std::exception_ptr> errors(count);
  const auto n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long t = 0; t < n; ++t) {
    try {
      out[static_cast<std::size_t>(t)] = fn(static_cast<std::size_t>(t));
    } catch (...) {
      errors[static_cast<std::size_t>(t)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

namespace serial {

std::vector<double> loglik_on_grid(const OutcomeTally& tally, const SphereGrid& grid);

template <class Fn>
auto map_trials(std::size_t count, Fn&& fn) -> std::vector<std::invoke_result_t<Fn&, std::size_t>> {
  std::vector<std::invoke_result_t<Fn&, std::size_t>> out;
  out.reserve(count);
  for (std::size_t t = 0; t < count; ++t) out.push_back(fn(t));
  return out;
}

}  // namespace serial
}  // namespace qnav
