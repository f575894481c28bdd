#pragma once

#include <algorithm>
#include <exception>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace qg {

inline constexpr const char* kVersion = "0.1.0";

// Bad user input: degenerate domains, unknown scenario names, incompatible
// initial data, nonsensical solver settings.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite data encountered while building matrices or vectors.
struct AssemblyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Linear or nonlinear solve failure.
struct SolveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Newton ran out of iterations; keeps the residual norms seen so far.
struct NewtonError : SolveError {
  NewtonError(const std::string& what, std::vector<double> history)
      : SolveError(what), residual_history(std::move(history)) {}
  std::vector<double> residual_history;
};

// Diagnostics called on data outside their fit domain (empty windows,
// nonpositive energies, zero errors in a rate computation).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Static partition of [0, n) over nthreads workers. Each worker only writes
// to its own slots, so results never depend on scheduling; callers that sum
// partial results must reduce in index order to keep runs bit-reproducible
// across thread counts. A worker exception is captured and rethrown on the
// calling thread (lowest worker index wins).
template <class Fn>
void parallel_for(int n, int nthreads, Fn&& body) {
  if (n <= 0) return;
  if (nthreads < 1) nthreads = 1;
  nthreads = std::min(nthreads, n);
  if (nthreads == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  const int chunk = (n + nthreads - 1) / nthreads;
  std::vector<std::exception_ptr> errors(nthreads);
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (int w = 0; w < nthreads; ++w) {
    const int lo = w * chunk;
    const int hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, w, &body, &errors] {
      try {
        for (int i = lo; i < hi; ++i) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);
}

}  // namespace qg
