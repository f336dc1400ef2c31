#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

#include <Eigen/Core>

namespace levylab {

struct RunOptions {
  std::size_t n_paths = 100;
  std::uint64_t seed = 1;
  int threads = 1;
  double step = 1e-2;
};

/// Runs fn(i) for i in [0, n) on `threads` workers (static striping) and
/// returns the results in index order, so the outcome never depends on the
/// thread count. The exception of the lowest failing index is rethrown.
template <class Fn>
auto run_paths(std::size_t n, int threads, Fn&& fn) -> std::vector<decltype(fn(std::size_t{}))> {
  using R = decltype(fn(std::size_t{}));
  std::vector<R> out(n);
  std::vector<std::exception_ptr> errors(n);
  const auto workers = static_cast<std::size_t>(std::clamp<std::size_t>(threads < 1 ? 1 : threads, 1, std::max<std::size_t>(n, 1)));
  auto work = [&](std::size_t w) {
    for (std::size_t i = w; i < n; i += workers) {
      try {
        out[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

/// Mean and standard error across paths of per-path vectors of equal length.
struct MeanCurve {
  std::vector<double> times;
  Eigen::VectorXd mean;
  Eigen::VectorXd se;
};

inline MeanCurve mean_curve(const std::vector<Eigen::VectorXd>& samples, std::vector<double> times) {
  MeanCurve c;
  c.times = std::move(times);
  const auto m = static_cast<Eigen::Index>(c.times.size());
  c.mean = Eigen::VectorXd::Zero(m);
  c.se = Eigen::VectorXd::Zero(m);
  const auto n = static_cast<double>(samples.size());
  if (samples.empty()) return c;
  for (const auto& s : samples) c.mean += s;
  c.mean /= n;
  if (samples.size() > 1) {
    Eigen::VectorXd ss = Eigen::VectorXd::Zero(m);
    for (const auto& s : samples) ss += (s - c.mean).cwiseAbs2();
    c.se = (ss / (n - 1.0) / n).cwiseSqrt();
  }
  return c;
}

}  // namespace levylab
