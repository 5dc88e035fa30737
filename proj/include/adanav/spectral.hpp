#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "adanav/errors.hpp"
#include "adanav/mdp.hpp"

namespace adanav {

// Eigenvalue moduli of a row-stochastic matrix, sorted descending. The gap is
// taken against the subdominant modulus after removing exactly one Perron
// root; a repeated unit modulus therefore yields gap 0.
struct SpectrumResult {
  std::vector<double> moduli;
  double subdominant_modulus = 0.0;
  double gap = 0.0;
};

inline SpectrumResult spectrum(const InducedChain& chain) {
  const Eigen::MatrixXd& p = chain.matrix();
  Eigen::EigenSolver<Eigen::MatrixXd> solver(p, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success)
    throw NumericalError(
        "spectrum: eigensolver failed to converge on a " +
        std::to_string(p.rows()) + "x" + std::to_string(p.cols()) +
        " chain (row sum range [" +
        std::to_string(p.rowwise().sum().minCoeff()) + ", " +
        std::to_string(p.rowwise().sum().maxCoeff()) + "])");
  SpectrumResult r;
  r.moduli.resize(static_cast<std::size_t>(p.rows()));
  const auto& ev = solver.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    r.moduli[static_cast<std::size_t>(i)] = std::abs(ev[i]);
  std::sort(r.moduli.begin(), r.moduli.end(), std::greater<>());
  r.subdominant_modulus =
      r.moduli.size() > 1 ? std::clamp(r.moduli[1], 0.0, 1.0) : 0.0;
  r.gap = 1.0 - r.subdominant_modulus;
  return r;
}

// Lower bound on the epsilon-mixing time from an eigenvalue modulus:
// (1/(1-|lambda|) - 1) * ln(1/(2*eps)). Infinite when |lambda| = 1.
inline double mixing_time_lower_bound(double subdominant_modulus,
                                      double epsilon) {
  if (!(subdominant_modulus >= 0.0 && subdominant_modulus <= 1.0))
    throw std::domain_error(
        "mixing_time_lower_bound: modulus must lie in [0, 1]");
  if (!(epsilon > 0.0 && epsilon < 0.5))
    throw std::domain_error(
        "mixing_time_lower_bound: epsilon must lie in (0, 1/2)");
  if (subdominant_modulus == 1.0)
    return std::numeric_limits<double>::infinity();
  return (1.0 / (1.0 - subdominant_modulus) - 1.0) * std::log(1.0 / (2.0 * epsilon));
}

// State-averaged Shannon entropy in nats, with 0*ln(0) taken as 0.
inline double discrete_policy_entropy(const PolicyTable& policy) {
  double total = 0.0;
  for (int s = 0; s < policy.num_states(); ++s)
    for (int a = 0; a < policy.num_actions(); ++a) {
      const double p = policy.prob(s, a);
      if (p > 0.0) total -= p * std::log(p);
    }
  return total / policy.num_states();
}

// State-averaged differential entropy of per-state N-dimensional Gaussian
// action distributions: mean over states of (1/2) ln((2*pi*e)^N det(Sigma)).
inline double gaussian_policy_entropy(
    const std::vector<Eigen::MatrixXd>& covariances) {
  if (covariances.empty())
    throw std::invalid_argument("gaussian_policy_entropy: no covariances");
  const Eigen::Index n = covariances.front().rows();
  double total = 0.0;
  for (const Eigen::MatrixXd& sigma : covariances) {
    if (sigma.rows() != n || sigma.cols() != n)
      throw std::invalid_argument(
          "gaussian_policy_entropy: covariance dimensions disagree");
    if (!sigma.isApprox(sigma.transpose(), 1e-10))
      throw std::domain_error("gaussian_policy_entropy: covariance not symmetric");
    const Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success)
      throw std::domain_error(
          "gaussian_policy_entropy: covariance not positive-definite");
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      log_det += 2.0 * std::log(llt.matrixL()(i, i));
    total += 0.5 * (n * std::log(2.0 * std::numbers::pi * std::numbers::e) + log_det);
  }
  return total / static_cast<double>(covariances.size());
}

struct NamedKernel {
  std::string name;
  TransitionKernel kernel;
};

// One row of the entropy-vs-spectral-gap study.
struct CorrelationRecord {
  std::string kernel_name;
  double beta = 0.0;
  double entropy = 0.0;  // nats
  double gap = 0.0;
  double mixing_lower_bound = 0.0;  // steps; +inf for non-mixing chains
};

// Runs `f(i)` for i in [0, n) on up to `workers` threads. Results must be
// written by index so output is identical to sequential execution.
inline void parallel_for_index(std::size_t n, unsigned workers,
                               const std::function<void(std::size_t)>& f) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          f(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// For each kernel and each beta on an inclusive linspace over [0, 1], builds
// the mixture policy, contracts it with the kernel, and records entropy, gap,
// and the mixing-time lower bound at eps = 1/4. Records are ordered by
// (kernel, beta) regardless of worker count.
inline std::vector<CorrelationRecord> correlation_study(
    const std::vector<NamedKernel>& kernels, int n_policies,
    unsigned workers = 1) {
  if (n_policies < 2)
    throw std::invalid_argument("correlation_study: n_policies must be >= 2");
  struct Job {
    std::size_t kernel_index;
    double beta;
  };
  std::vector<Job> jobs;
  for (std::size_t k = 0; k < kernels.size(); ++k)
    for (int i = 0; i < n_policies; ++i)
      jobs.push_back({k, static_cast<double>(i) / (n_policies - 1)});
  std::vector<CorrelationRecord> records(jobs.size());
  parallel_for_index(jobs.size(), workers, [&](std::size_t j) {
    const auto& [k, beta] = jobs[j];
    const TransitionKernel& kernel = kernels[k].kernel;
    const PolicyTable policy = mixture_policy(kernel.num_states(), beta);
    const SpectrumResult s = spectrum(induced_chain(kernel, policy));
    records[j] = {kernels[k].name, beta, discrete_policy_entropy(policy), s.gap,
                  mixing_time_lower_bound(s.subdominant_modulus, 0.25)};
  });
  return records;
}

}  // namespace adanav
