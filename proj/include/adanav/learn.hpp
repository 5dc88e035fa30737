#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "adanav/errors.hpp"
#include "adanav/grid.hpp"
#include "adanav/mdp.hpp"
#include "adanav/rng.hpp"
#include "adanav/schedule.hpp"
#include "adanav/spectral.hpp"

namespace adanav {

struct Transition {
  int state = 0;
  int action = 0;
  double reward = 0.0;
  int next_state = 0;
  bool done = false;
};

// Ordered transitions collected between two gradient updates. Only the final
// transition may carry done = true.
using Trajectory = std::vector<Transition>;

enum class Algorithm { Reinforce, ActorCritic, ActorCriticMaxEnt, Ppo };

inline std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Reinforce: return "reinforce";
    case Algorithm::ActorCritic: return "actor_critic";
    case Algorithm::ActorCriticMaxEnt: return "actor_critic_maxent";
    case Algorithm::Ppo: return "ppo";
  }
  return "?";
}

inline Algorithm algorithm_from_string(const std::string& s) {
  if (s == "reinforce") return Algorithm::Reinforce;
  if (s == "actor_critic") return Algorithm::ActorCritic;
  if (s == "actor_critic_maxent") return Algorithm::ActorCriticMaxEnt;
  if (s == "ppo") return Algorithm::Ppo;
  throw ConfigError("unknown algorithm '" + s +
                    "'; valid: reinforce, actor_critic, actor_critic_maxent, ppo");
}

// Tabular actor logits plus, for the critic-bearing algorithms, one value
// estimate per state.
struct LearnerParams {
  Eigen::MatrixXd actor_logits;
  Eigen::VectorXd critic_values;

  static LearnerParams init(int num_states, int num_actions, bool with_critic) {
    LearnerParams p;
    p.actor_logits = Eigen::MatrixXd::Zero(num_states, num_actions);
    if (with_critic) p.critic_values = Eigen::VectorXd::Zero(num_states);
    return p;
  }

  void check_finite(const char* where) const {
    if (!actor_logits.allFinite())
      throw NumericalError(std::string(where) +
                           ": non-finite actor logits after update");
    if (critic_values.size() > 0 && !critic_values.allFinite())
      throw NumericalError(std::string(where) +
                           ": non-finite critic values after update");
  }
};

// log-softmax of one logits row; probs = exp(log_probs). Computed through
// max subtraction so extreme logits stay finite.
struct RowDistribution {
  Eigen::RowVectorXd log_probs;
  Eigen::RowVectorXd probs;
};

inline RowDistribution row_distribution(const Eigen::RowVectorXd& logits) {
  const double m = logits.maxCoeff();
  Eigen::RowVectorXd shifted = logits.array() - m;
  const double lse = std::log(shifted.array().exp().sum());
  RowDistribution d;
  d.log_probs = shifted.array() - lse;
  d.probs = d.log_probs.array().exp();
  return d;
}

// d/dlogits of log pi(a|s): one-hot(a) minus the softmax row.
inline Eigen::RowVectorXd score_row(const Eigen::RowVectorXd& probs, int action) {
  Eigen::RowVectorXd g = -probs;
  g(action) += 1.0;
  return g;
}

// d/dlogits of the row entropy H = -sum_a pi_a ln pi_a.
inline Eigen::RowVectorXd entropy_gradient_row(const RowDistribution& d) {
  const double h = -(d.probs.array() * d.log_probs.array()).sum();
  return (-d.probs.array() * (d.log_probs.array() + h)).matrix();
}

// Steps the environment for up to t_c transitions, sampling actions from the
// softmax of `logits`, truncating early at the goal.
inline Trajectory sample_trajectory(EnvState& env, const GridSpec& spec,
                                    const TransitionKernel& kernel,
                                    const Eigen::MatrixXd& logits, int t_c,
                                    Rng& rng) {
  if (t_c < 1) throw std::invalid_argument("sample_trajectory: t_c must be >= 1");
  if (env.done) throw std::logic_error("sample_trajectory: episode already done");
  Trajectory traj;
  traj.reserve(static_cast<std::size_t>(t_c));
  for (int i = 0; i < t_c; ++i) {
    const int s = env.state;
    const Eigen::RowVectorXd probs = softmax_row(logits.row(s));
    const int a = rng.sample_categorical(
        std::span<const double>(probs.data(), static_cast<std::size_t>(probs.size())));
    const StepResult step = env_step(env, static_cast<Action>(a), kernel, spec, rng);
    traj.push_back({s, a, step.reward, step.state.state, step.state.done});
    env = step.state;
    if (env.done) break;
  }
  return traj;
}

// Discounted reward-to-go G_k = sum_{j>=k} gamma^{j-k} r_j.
inline std::vector<double> rewards_to_go(const Trajectory& traj, double gamma) {
  std::vector<double> g(traj.size());
  double acc = 0.0;
  for (std::size_t k = traj.size(); k-- > 0;) {
    acc = traj[k].reward + gamma * acc;
    g[k] = acc;
  }
  return g;
}

// Episodic policy-gradient estimate: sum_k gamma^k G_k * dlog pi(a_k|s_k),
// with each action scored by its own discounted tail return.
inline Eigen::MatrixXd reinforce_gradient(const Trajectory& traj,
                                          const Eigen::MatrixXd& logits,
                                          double gamma) {
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(logits.rows(), logits.cols());
  const std::vector<double> g = rewards_to_go(traj, gamma);
  double discount = 1.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const Transition& t = traj[k];
    const Eigen::RowVectorXd probs = softmax_row(logits.row(t.state));
    grad.row(t.state) += discount * g[k] * score_row(probs, t.action);
    discount *= gamma;
  }
  return grad;
}

inline void reinforce_update(const Trajectory& traj, LearnerParams& params,
                             double gamma, double lr) {
  params.actor_logits += lr * reinforce_gradient(traj, params.actor_logits, gamma);
  params.check_finite("reinforce_update");
}

// One TD(0) pass over the trajectory in order: bootstrap the critic, then
// push the actor along delta times the score, plus an optional entropy bonus.
inline void actor_critic_update(const Trajectory& traj, LearnerParams& params,
                                double gamma, double lr_actor, double lr_critic,
                                double entropy_coeff) {
  for (const Transition& t : traj) {
    const double v_next = t.done ? 0.0 : params.critic_values(t.next_state);
    const double delta =
        t.reward + gamma * v_next - params.critic_values(t.state);
    params.critic_values(t.state) += lr_critic * delta;
    const RowDistribution d = row_distribution(params.actor_logits.row(t.state));
    Eigen::RowVectorXd step = delta * score_row(d.probs, t.action);
    if (entropy_coeff > 0.0) step += entropy_coeff * entropy_gradient_row(d);
    params.actor_logits.row(t.state) += lr_actor * step;
  }
  params.check_finite("actor_critic_update");
}

// Gradient of the mean clipped surrogate over the batch at the current
// logits. A sample contributes nothing once the clamp saturates on the
// losing side.
inline Eigen::MatrixXd ppo_surrogate_gradient(
    const Trajectory& batch, const Eigen::MatrixXd& logits,
    const std::vector<double>& old_log_probs,
    const std::vector<double>& advantages, double clip) {
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(logits.rows(), logits.cols());
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const Transition& t = batch[k];
    const RowDistribution d = row_distribution(logits.row(t.state));
    const double ratio = std::exp(d.log_probs(t.action) - old_log_probs[k]);
    const double unclipped = ratio * advantages[k];
    const double clipped =
        std::clamp(ratio, 1.0 - clip, 1.0 + clip) * advantages[k];
    if (unclipped <= clipped)
      grad.row(t.state) +=
          ratio * advantages[k] * score_row(d.probs, t.action);
  }
  return grad / static_cast<double>(batch.size());
}

// Clipped-surrogate update over one collected batch. Advantages and old
// action probabilities are frozen at entry; each epoch takes one ascent step
// on the surrogate and one regression step of the critic toward the returns.
inline void ppo_update(const Trajectory& batch, LearnerParams& params,
                       double gamma, double lr, double clip, int epochs) {
  if (!(clip > 0.0)) throw ConfigError("ppo_update: clip must be > 0");
  if (epochs <= 0) return;
  const std::vector<double> returns = rewards_to_go(batch, gamma);
  std::vector<double> advantages(batch.size());
  std::vector<double> old_log_probs(batch.size());
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const Transition& t = batch[k];
    advantages[k] = returns[k] - params.critic_values(t.state);
    const RowDistribution d = row_distribution(params.actor_logits.row(t.state));
    old_log_probs[k] = d.log_probs(t.action);
  }
  for (int e = 0; e < epochs; ++e) {
    params.actor_logits +=
        lr * ppo_surrogate_gradient(batch, params.actor_logits, old_log_probs,
                                    advantages, clip);
    for (std::size_t k = 0; k < batch.size(); ++k)
      params.critic_values(batch[k].state) +=
          lr * (returns[k] - params.critic_values(batch[k].state));
  }
  params.check_finite("ppo_update");
}

// Full training configuration for one run.
struct TrainConfig {
  explicit TrainConfig(GridSpec g) : grid(std::move(g)) {}

  Algorithm algorithm = Algorithm::ActorCritic;
  GridSpec grid;
  ScheduleSpec schedule;
  double gamma = 0.99;
  double lr_actor = 0.01;
  double lr_critic = 0.01;
  double entropy_coeff = 0.0;
  double ppo_clip = 0.2;
  int ppo_epochs = 4;
  int episodes = 1;
  int max_steps_per_episode = 1;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(gamma > 0.0 && gamma < 1.0))
      throw ConfigError("train: gamma must lie in (0, 1)");
    if (!(lr_actor > 0.0 && std::isfinite(lr_actor)))
      throw ConfigError("train: lr_actor must be positive and finite");
    if (!(lr_critic > 0.0 && std::isfinite(lr_critic)))
      throw ConfigError("train: lr_critic must be positive and finite");
    if (entropy_coeff < 0.0)
      throw ConfigError("train: entropy_coeff must be >= 0");
    if ((algorithm == Algorithm::ActorCriticMaxEnt) != (entropy_coeff > 0.0))
      throw ConfigError(
          "train: entropy_coeff must be > 0 exactly when algorithm is "
          "actor_critic_maxent");
    if (algorithm == Algorithm::Ppo) {
      if (!(ppo_clip > 0.0)) throw ConfigError("train: ppo_clip must be > 0");
      if (ppo_epochs < 1) throw ConfigError("train: ppo_epochs must be >= 1");
    }
    if (episodes < 1) throw ConfigError("train: episodes must be >= 1");
    if (max_steps_per_episode < 1)
      throw ConfigError("train: max_steps_per_episode must be >= 1");
    schedule.validate();
  }
};

// Per-episode training telemetry.
struct EpisodeRecord {
  int episode = 0;
  int t_c = 0;            // length requested for this episode
  double entropy = 0.0;   // policy entropy at episode start, nats
  double episode_return = 0.0;
  long long cumulative_samples = 0;
  bool goal_reached = false;
};

struct EpisodeOutcome {
  std::vector<int> collected_lengths;  // realized length of each trajectory
  double episode_return = 0.0;
  bool goal_reached = false;
  int steps = 0;
};

inline void apply_update(const Trajectory& traj, LearnerParams& params,
                         const TrainConfig& config) {
  switch (config.algorithm) {
    case Algorithm::Reinforce:
      reinforce_update(traj, params, config.gamma, config.lr_actor);
      break;
    case Algorithm::ActorCritic:
      actor_critic_update(traj, params, config.gamma, config.lr_actor,
                          config.lr_critic, 0.0);
      break;
    case Algorithm::ActorCriticMaxEnt:
      actor_critic_update(traj, params, config.gamma, config.lr_actor,
                          config.lr_critic, config.entropy_coeff);
      break;
    case Algorithm::Ppo:
      ppo_update(traj, params, config.gamma, config.lr_actor, config.ppo_clip,
                 config.ppo_epochs);
      break;
  }
}

// One episode of Algorithm-1 style training: repeatedly collect a trajectory
// of the episode's fixed requested length and update after each one. The
// final trajectory is truncated so the episode never exceeds K interactions,
// and the episode ends immediately once the goal is reached.
inline EpisodeOutcome run_episode(const GridSpec& spec,
                                  const TransitionKernel& kernel,
                                  LearnerParams& params,
                                  const TrainConfig& config, int t_c, Rng& rng) {
  EpisodeOutcome out;
  EnvState env = env_reset(spec);
  if (env.done) {  // degenerate start-at-goal grid
    out.goal_reached = true;
    return out;
  }
  const int K = config.max_steps_per_episode;
  int k = 0;
  while (k < K && !env.done) {
    const int requested = std::min(t_c, K - k);
    const Trajectory traj =
        sample_trajectory(env, spec, kernel, params.actor_logits, requested, rng);
    apply_update(traj, params, config);
    const int len = static_cast<int>(traj.size());
    out.collected_lengths.push_back(len);
    k += len;
    for (const Transition& t : traj) out.episode_return += t.reward;
  }
  out.goal_reached = env.done;
  out.steps = k;
  return out;
}

struct TrainResult {
  std::vector<EpisodeRecord> episodes;
  LearnerParams params;
};

// Runs E episodes. Entropy and trajectory length are recomputed once per
// episode; sample accounting counts every environment interaction.
inline TrainResult train(const TrainConfig& config) {
  config.validate();
  const TransitionKernel kernel = build_gridworld_kernel(config.grid);
  const int num_states = config.grid.num_states();
  LearnerParams params = LearnerParams::init(
      num_states, kNumActions, config.algorithm != Algorithm::Reinforce);
  ScheduleSpec schedule = config.schedule;
  if (schedule.needs_reference_entropy())
    schedule.H_i = capture_reference_entropy(
        SoftmaxPolicy(params.actor_logits).materialize());
  Rng rng(config.seed);
  TrainResult result;
  result.episodes.reserve(static_cast<std::size_t>(config.episodes));
  long long cumulative = 0;
  for (int e = 0; e < config.episodes; ++e) {
    const double h_c = discrete_policy_entropy(
        SoftmaxPolicy(params.actor_logits).materialize());
    const int t_c = next_length(schedule, h_c, rng);
    EpisodeOutcome outcome;
    try {
      outcome = run_episode(config.grid, kernel, params, config, t_c, rng);
    } catch (const NumericalError& err) {
      throw NumericalError("episode " + std::to_string(e) + ": " + err.what());
    }
    cumulative += outcome.steps;
    result.episodes.push_back({e, t_c, h_c, outcome.episode_return, cumulative,
                               outcome.goal_reached});
  }
  result.params = std::move(params);
  return result;
}

}  // namespace adanav
