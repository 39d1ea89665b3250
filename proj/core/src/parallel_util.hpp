#pragma once

#include <cstdint>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "wavemc/errors.hpp"

namespace wavemc::detail {

// Runs body(k) for k in [0, n) over `threads` workers (0 = hardware
// concurrency). Bodies write to disjoint per-index slots, so results never
// depend on the partition. If several indices fail, the lowest index wins,
// which keeps error reporting schedule-independent; the error is rethrown
// with that index prefixed.
template <typename Body>
void parallel_indexed(std::int64_t n, unsigned threads, Body&& body) {
  unsigned t = threads != 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
  t = static_cast<unsigned>(std::min<std::int64_t>(t, n));

  struct Failure {
    std::int64_t index = -1;
    std::exception_ptr error;
  };
  std::vector<Failure> failures(std::max(t, 1u));

  auto run_range = [&](unsigned w, std::int64_t lo, std::int64_t hi) {
    for (std::int64_t k = lo; k < hi; ++k) {
      try {
        body(k);
      } catch (...) {
        failures[w] = {k, std::current_exception()};
        return;
      }
    }
  };

  if (t <= 1) {
    run_range(0, 0, n);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(t);
    for (unsigned w = 0; w < t; ++w)
      pool.emplace_back(run_range, w, n * w / t, n * (w + 1) / t);
    for (auto& th : pool) th.join();
  }

  const Failure* first = nullptr;
  for (const auto& f : failures)
    if (f.error && (first == nullptr || f.index < first->index)) first = &f;
  if (first != nullptr) {
    try {
      std::rethrow_exception(first->error);
    } catch (const Error& e) {
      throw Error(e.code(), "sample " + std::to_string(first->index) + ": " + e.what());
    } catch (const std::exception& e) {
      throw NumericalError("sample " + std::to_string(first->index) + ": " + e.what());
    }
  }
}

}  // namespace wavemc::detail
