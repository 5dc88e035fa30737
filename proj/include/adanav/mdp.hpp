#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "adanav/errors.hpp"
#include "adanav/grid.hpp"
#include "adanav/rng.hpp"

namespace adanav {

inline constexpr double kRowSumTol = 1e-12;
inline constexpr double kChainRowSumTol = 1e-10;

// Per-(state, action) next-state distribution. Rows are stored sparsely; a
// deterministic kernel has exactly one entry per row.
class TransitionKernel {
 public:
  struct Entry {
    int next_state;
    double prob;
  };

  TransitionKernel(int num_states, int num_actions,
                   std::vector<std::vector<Entry>> rows)
      : num_states_(num_states),
        num_actions_(num_actions),
        rows_(std::move(rows)) {
    if (rows_.size() != static_cast<std::size_t>(num_states_) * num_actions_)
      throw std::invalid_argument("TransitionKernel: row count mismatch");
    for (const auto& row : rows_) {
      double sum = 0.0;
      for (const Entry& e : row) {
        if (e.next_state < 0 || e.next_state >= num_states_)
          throw std::invalid_argument("TransitionKernel: next state out of range");
        if (e.prob < 0.0)
          throw std::invalid_argument("TransitionKernel: negative probability");
        sum += e.prob;
      }
      if (std::abs(sum - 1.0) > kRowSumTol)
        throw std::invalid_argument("TransitionKernel: row does not sum to 1");
    }
  }

  static TransitionKernel deterministic(int num_states, int num_actions,
                                        const std::vector<int>& next) {
    std::vector<std::vector<Entry>> rows;
    rows.reserve(next.size());
    for (int s : next) rows.push_back({{s, 1.0}});
    return TransitionKernel(num_states, num_actions, std::move(rows));
  }

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }

  std::span<const Entry> row(int state, int action) const {
    return rows_[static_cast<std::size_t>(state) * num_actions_ + action];
  }

  bool is_deterministic() const {
    for (const auto& row : rows_)
      if (row.size() != 1) return false;
    return true;
  }

  std::size_t num_nonzero() const {
    std::size_t n = 0;
    for (const auto& row : rows_) n += row.size();
    return n;
  }

 private:
  int num_states_;
  int num_actions_;
  std::vector<std::vector<Entry>> rows_;  // index: state * num_actions + action
};

// Deterministic gridworld kernel: off-edge and into-wall moves keep the agent
// in place, Stay always self-loops.
inline TransitionKernel build_gridworld_kernel(const GridSpec& spec) {
  std::vector<int> next(static_cast<std::size_t>(spec.num_states()) * kNumActions);
  for (int s = 0; s < spec.num_states(); ++s) {
    const Cell c = spec.cell_of(s);
    for (int a = 0; a < kNumActions; ++a) {
      const Cell t = apply_action(c, static_cast<Action>(a));
      next[static_cast<std::size_t>(s) * kNumActions + a] =
          spec.open(t) ? spec.state_of(t) : s;
    }
  }
  return TransitionKernel::deterministic(spec.num_states(), kNumActions, next);
}

// Tabular policy: one probability row over actions per state.
class PolicyTable {
 public:
  explicit PolicyTable(Eigen::MatrixXd probs) : probs_(std::move(probs)) {
    for (Eigen::Index s = 0; s < probs_.rows(); ++s) {
      if ((probs_.row(s).array() < 0.0).any())
        throw std::invalid_argument("PolicyTable: negative probability in row " +
                                    std::to_string(s));
      if (std::abs(probs_.row(s).sum() - 1.0) > kRowSumTol)
        throw std::invalid_argument("PolicyTable: row " + std::to_string(s) +
                                    " does not sum to 1");
    }
  }

  int num_states() const { return static_cast<int>(probs_.rows()); }
  int num_actions() const { return static_cast<int>(probs_.cols()); }
  double prob(int state, int action) const { return probs_(state, action); }
  const Eigen::MatrixXd& matrix() const { return probs_; }

 private:
  Eigen::MatrixXd probs_;
};

// Row-wise softmax with max subtraction.
inline Eigen::RowVectorXd softmax_row(const Eigen::RowVectorXd& logits) {
  const double m = logits.maxCoeff();
  Eigen::RowVectorXd p = (logits.array() - m).exp();
  return p / p.sum();
}

// Policy parameterized by one logit per (state, action).
class SoftmaxPolicy {
 public:
  explicit SoftmaxPolicy(Eigen::MatrixXd logits) : logits_(std::move(logits)) {}

  static SoftmaxPolicy uniform(int num_states, int num_actions) {
    return SoftmaxPolicy(Eigen::MatrixXd::Zero(num_states, num_actions));
  }

  const Eigen::MatrixXd& logits() const { return logits_; }
  Eigen::MatrixXd& logits() { return logits_; }

  PolicyTable materialize() const {
    Eigen::MatrixXd probs(logits_.rows(), logits_.cols());
    for (Eigen::Index s = 0; s < logits_.rows(); ++s)
      probs.row(s) = softmax_row(logits_.row(s));
    return PolicyTable(std::move(probs));
  }

 private:
  Eigen::MatrixXd logits_;
};

// Interpolation between the deterministic all-Up policy (beta = 0) and the
// uniform policy (beta = 1): pi(a|s) = (1-beta)*[a == Up] + beta/5.
inline PolicyTable mixture_policy(int num_states, double beta) {
  if (!(beta >= 0.0 && beta <= 1.0))
    throw std::domain_error("mixture_policy: beta must lie in [0, 1]");
  Eigen::MatrixXd probs(num_states, kNumActions);
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Constant(kNumActions, beta / kNumActions);
  row(static_cast<int>(Action::Up)) += 1.0 - beta;
  for (int s = 0; s < num_states; ++s) probs.row(s) = row;
  return PolicyTable(std::move(probs));
}

// Row-stochastic state-to-state matrix P_pi(s'|s) = sum_a P(s'|s,a) pi(a|s).
class InducedChain {
 public:
  explicit InducedChain(Eigen::MatrixXd p) : p_(std::move(p)) {
    if (p_.rows() != p_.cols())
      throw std::invalid_argument("InducedChain: matrix must be square");
    if ((p_.array() < -kChainRowSumTol).any() || (p_.array() > 1.0 + kChainRowSumTol).any())
      throw std::invalid_argument("InducedChain: entries must lie in [0, 1]");
    for (Eigen::Index s = 0; s < p_.rows(); ++s)
      if (std::abs(p_.row(s).sum() - 1.0) > kChainRowSumTol)
        throw std::invalid_argument("InducedChain: row " + std::to_string(s) +
                                    " does not sum to 1");
  }

  int num_states() const { return static_cast<int>(p_.rows()); }
  const Eigen::MatrixXd& matrix() const { return p_; }

 private:
  Eigen::MatrixXd p_;
};

inline InducedChain induced_chain(const TransitionKernel& kernel,
                                  const PolicyTable& policy) {
  if (kernel.num_states() != policy.num_states() ||
      kernel.num_actions() != policy.num_actions())
    throw std::invalid_argument(
        "induced_chain: kernel and policy dimensions disagree");
  const int n = kernel.num_states();
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (int s = 0; s < n; ++s)
    for (int a = 0; a < kernel.num_actions(); ++a) {
      const double w = policy.prob(s, a);
      if (w == 0.0) continue;
      for (const auto& e : kernel.row(s, a)) p(s, e.next_state) += w * e.prob;
    }
  return InducedChain(std::move(p));
}

// Stepping state of a goal-reaching episode.
struct EnvState {
  int state = 0;
  int steps_taken = 0;
  bool done = false;
};

inline EnvState env_reset(const GridSpec& spec) {
  EnvState s;
  s.state = spec.start_state();
  s.steps_taken = 0;
  s.done = s.state == spec.goal_state();
  return s;
}

struct StepResult {
  EnvState state;
  double reward = 0.0;
};

// Advances one transition. Reward is 1 on entering the goal cell, else 0; the
// episode terminates at the goal.
inline StepResult env_step(const EnvState& state, Action action,
                           const TransitionKernel& kernel, const GridSpec& spec,
                           Rng& rng) {
  if (state.done) throw std::logic_error("env_step: episode already done");
  const auto row = kernel.row(state.state, static_cast<int>(action));
  int next;
  if (row.size() == 1) {
    next = row[0].next_state;
  } else {
    const double u = rng.uniform01();
    double acc = 0.0;
    next = row.back().next_state;
    for (const auto& e : row) {
      acc += e.prob;
      if (u < acc) {
        next = e.next_state;
        break;
      }
    }
  }
  StepResult r;
  r.state.state = next;
  r.state.steps_taken = state.steps_taken + 1;
  r.state.done = next == spec.goal_state();
  r.reward = r.state.done ? 1.0 : 0.0;
  return r;
}

}  // namespace adanav
