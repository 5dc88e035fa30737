#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "adanav/csv.hpp"
#include "adanav/learn.hpp"
#include "oracles.hpp"

using namespace adanav;

namespace {

GridSpec pair_grid() { return GridSpec(2, 1, {}, {0, 0}, {0, 1}, "pair"); }

Eigen::MatrixXd random_logits(int states, int actions, Rng& rng) {
  Eigen::MatrixXd m(states, actions);
  for (int s = 0; s < states; ++s)
    for (int a = 0; a < actions; ++a) m(s, a) = 2.0 * rng.uniform01() - 1.0;
  return m;
}

}  // namespace

TEST_CASE("row distribution is a stable log-softmax") {
  Eigen::RowVectorXd logits(4);
  logits << 0.5, -1.0, 2.0, 0.0;
  const RowDistribution d = row_distribution(logits);
  CHECK(d.probs.sum() == Catch::Approx(1.0).margin(1e-14));
  for (int a = 0; a < 4; ++a)
    CHECK(d.log_probs(a) == Catch::Approx(std::log(d.probs(a))).margin(1e-12));
  logits << 5000.0, 0.0, -5000.0, 1.0;
  const RowDistribution extreme = row_distribution(logits);
  CHECK(extreme.log_probs.allFinite());
  CHECK(extreme.probs.allFinite());
  CHECK(extreme.log_probs(2) < -9000.0);
}

TEST_CASE("score gradient matches central finite differences") {
  Rng rng(3);
  Eigen::RowVectorXd logits(5);
  for (int a = 0; a < 5; ++a) logits(a) = 2.0 * rng.uniform01() - 1.0;
  const int action = 3;
  const Eigen::RowVectorXd analytic =
      score_row(row_distribution(logits).probs, action);
  const double h = 1e-5;
  for (int a = 0; a < 5; ++a) {
    Eigen::RowVectorXd hi = logits, lo = logits;
    hi(a) += h;
    lo(a) -= h;
    const double fd = (row_distribution(hi).log_probs(action) -
                       row_distribution(lo).log_probs(action)) /
                      (2.0 * h);
    CHECK(analytic(a) == Catch::Approx(fd).margin(1e-5));
  }
}

TEST_CASE("entropy gradient matches central finite differences") {
  Rng rng(5);
  Eigen::RowVectorXd logits(5);
  for (int a = 0; a < 5; ++a) logits(a) = 3.0 * rng.uniform01() - 1.5;
  const Eigen::RowVectorXd analytic =
      entropy_gradient_row(row_distribution(logits));
  const auto entropy_of = [](const Eigen::RowVectorXd& z) {
    const RowDistribution d = row_distribution(z);
    return -(d.probs.array() * d.log_probs.array()).sum();
  };
  const double h = 1e-6;
  for (int a = 0; a < 5; ++a) {
    Eigen::RowVectorXd hi = logits, lo = logits;
    hi(a) += h;
    lo(a) -= h;
    const double fd = (entropy_of(hi) - entropy_of(lo)) / (2.0 * h);
    CHECK(analytic(a) == Catch::Approx(fd).margin(1e-4));
  }
  // Uniform rows sit at the entropy maximum.
  CHECK(entropy_gradient_row(row_distribution(Eigen::RowVectorXd::Zero(5)))
            .norm() == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("rewards-to-go discount the tail") {
  Trajectory traj(3);
  traj[0].reward = 1.0;
  traj[1].reward = 0.0;
  traj[2].reward = 2.0;
  const std::vector<double> g = rewards_to_go(traj, 0.5);
  CHECK(g[2] == 2.0);
  CHECK(g[1] == 1.0);
  CHECK(g[0] == 1.5);
}

TEST_CASE("sample_trajectory respects length, truncation, and preconditions") {
  const GridSpec g = pair_grid();
  const TransitionKernel k = build_gridworld_kernel(g);
  Rng rng(1);
  EnvState env = env_reset(g);
  // Strong Left bias never reaches the goal: full length collected.
  Eigen::MatrixXd left = Eigen::MatrixXd::Zero(2, kNumActions);
  left.col(static_cast<int>(Action::Left)).setConstant(50.0);
  Trajectory traj = sample_trajectory(env, g, k, left, 6, rng);
  CHECK(traj.size() == 6);
  CHECK_FALSE(env.done);
  CHECK(env.steps_taken == 6);
  // Strong Right bias reaches the goal on the first step: truncated.
  Eigen::MatrixXd right = Eigen::MatrixXd::Zero(2, kNumActions);
  right.col(static_cast<int>(Action::Right)).setConstant(50.0);
  env = env_reset(g);
  traj = sample_trajectory(env, g, k, right, 6, rng);
  CHECK(traj.size() == 1);
  CHECK(traj[0].done);
  CHECK(traj[0].reward == 1.0);
  CHECK(env.done);
  CHECK_THROWS_AS(sample_trajectory(env, g, k, right, 3, rng), std::logic_error);
  env = env_reset(g);
  CHECK_THROWS_AS(sample_trajectory(env, g, k, right, 0, rng),
                  std::invalid_argument);
}

TEST_CASE("reinforce gradient weights each step by its tail return") {
  // Single transition: gradient is G0 * (one-hot - pi) in the visited row.
  Eigen::MatrixXd logits = Eigen::MatrixXd::Zero(2, 2);
  Trajectory traj{{0, 1, 2.0, 1, false}};
  const Eigen::MatrixXd grad = reinforce_gradient(traj, logits, 0.9);
  CHECK(grad(0, 0) == Catch::Approx(2.0 * (0.0 - 0.5)));
  CHECK(grad(0, 1) == Catch::Approx(2.0 * (1.0 - 0.5)));
  CHECK(grad.row(1).norm() == 0.0);
  // Second step discounted by gamma and weighted by its own tail.
  Trajectory two{{0, 0, 0.0, 1, false}, {1, 1, 1.0, 0, false}};
  const Eigen::MatrixXd g2 = reinforce_gradient(two, logits, 0.5);
  CHECK(g2(0, 0) == Catch::Approx(0.5 * 0.5));   // G0 = 0.5, score 0.5
  CHECK(g2(1, 1) == Catch::Approx(0.5 * 0.5));   // gamma * G1 * score
}

TEST_CASE("reinforce expectation equals the analytic policy gradient") {
  const oracles::EnumerableMdp mdp;
  Rng rng(17);
  std::vector<std::vector<double>> logits{{0.3, -0.2}, {-0.5, 0.8}};
  Eigen::MatrixXd logits_m(2, 2);
  logits_m << 0.3, -0.2, -0.5, 0.8;
  // E[estimator] over all trajectories, each built as a Trajectory and fed
  // through the production gradient with gamma = 1.
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(2, 2);
  for (const auto& t : mdp.all_trajectories()) {
    Trajectory traj;
    for (int k = 0; k < mdp.kHorizon; ++k)
      traj.push_back({t.states[k], t.actions[k],
                      mdp.reward[t.states[k]][t.actions[k]][t.states[k + 1]],
                      t.states[k + 1], false});
    expected += mdp.probability(t, logits) *
                reinforce_gradient(traj, logits_m, 1.0);
  }
  const auto analytic = mdp.analytic_gradient(logits);
  for (int s = 0; s < 2; ++s)
    for (int a = 0; a < 2; ++a)
      CHECK(expected(s, a) == Catch::Approx(analytic[s][a]).margin(1e-10));
  // The analytic gradient itself agrees with finite differences of J.
  const double h = 1e-5;
  for (int s = 0; s < 2; ++s)
    for (int a = 0; a < 2; ++a) {
      auto hi = logits, lo = logits;
      hi[s][a] += h;
      lo[s][a] -= h;
      const double fd =
          (mdp.expected_return(hi) - mdp.expected_return(lo)) / (2.0 * h);
      CHECK(analytic[s][a] == Catch::Approx(fd).margin(1e-7));
    }
}

TEST_CASE("reinforce update applies lr times the pre-update gradient") {
  Rng rng(23);
  Eigen::MatrixXd logits = random_logits(3, 4, rng);
  Trajectory traj{{0, 1, 1.0, 2, false}, {2, 3, -0.5, 1, false}};
  const Eigen::MatrixXd grad = reinforce_gradient(traj, logits, 0.9);
  LearnerParams params;
  params.actor_logits = logits;
  reinforce_update(traj, params, 0.9, 0.05);
  CHECK((params.actor_logits - (logits + 0.05 * grad)).norm() ==
        Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("actor-critic update bootstraps sequentially") {
  LearnerParams params = LearnerParams::init(2, 2, true);
  params.critic_values << 0.2, 0.4;
  const double gamma = 0.5, lr_a = 0.01, lr_c = 0.1;
  Trajectory traj{{0, 1, 1.0, 1, false}};
  actor_critic_update(traj, params, gamma, lr_a, lr_c, 0.0);
  // delta = 1 + 0.5 * 0.4 - 0.2 = 1.0
  CHECK(params.critic_values(0) == Catch::Approx(0.3));
  CHECK(params.critic_values(1) == 0.4);
  CHECK(params.actor_logits(0, 0) == Catch::Approx(-0.005));
  CHECK(params.actor_logits(0, 1) == Catch::Approx(0.005));
  CHECK(params.actor_logits.row(1).norm() == 0.0);

  // A terminal transition drops the bootstrap term.
  LearnerParams term = LearnerParams::init(2, 2, true);
  term.critic_values << 0.2, 0.9;
  actor_critic_update({{0, 0, 1.0, 1, true}}, term, gamma, lr_a, lr_c, 0.0);
  CHECK(term.critic_values(0) == Catch::Approx(0.2 + 0.1 * 0.8));

  // Two visits to one state: the second delta sees the first critic write.
  LearnerParams seq = LearnerParams::init(1, 2, true);
  Trajectory twice{{0, 0, 1.0, 0, false}, {0, 0, 1.0, 0, false}};
  actor_critic_update(twice, seq, gamma, lr_a, 1.0, 0.0);
  // First: delta = 1 + 0.5*0 - 0 = 1, V -> 1. Second: delta = 1 + 0.5 - 1 = 0.5.
  CHECK(seq.critic_values(0) == Catch::Approx(1.5));
}

TEST_CASE("entropy bonus shifts the actor update by its scaled gradient") {
  Rng rng(29);
  const Eigen::MatrixXd logits = random_logits(1, 5, rng);
  Trajectory traj{{0, 2, 1.0, 0, false}};
  LearnerParams plain = LearnerParams::init(1, 5, true);
  plain.actor_logits = logits;
  LearnerParams bonus = LearnerParams::init(1, 5, true);
  bonus.actor_logits = logits;
  const double lr_a = 0.01, coeff = 0.7;
  actor_critic_update(traj, plain, 0.9, lr_a, 0.1, 0.0);
  actor_critic_update(traj, bonus, 0.9, lr_a, 0.1, coeff);
  const Eigen::RowVectorXd diff = bonus.actor_logits.row(0) - plain.actor_logits.row(0);
  const Eigen::RowVectorXd expected =
      lr_a * coeff * entropy_gradient_row(row_distribution(logits.row(0)));
  CHECK((diff - expected).norm() == Catch::Approx(0.0).margin(1e-14));
  CHECK(bonus.critic_values(0) == plain.critic_values(0));
}

TEST_CASE("runaway critic rate is reported as a numerical failure") {
  LearnerParams params = LearnerParams::init(1, 2, true);
  Trajectory traj{{0, 0, 1.0, 0, false},
                  {0, 0, 1.0, 0, false},
                  {0, 0, 1.0, 0, false}};
  CHECK_THROWS_AS(actor_critic_update(traj, params, 0.5, 0.01, 1e300, 0.0),
                  NumericalError);
}

TEST_CASE("ppo first epoch with zero advantage leaves the actor unchanged") {
  LearnerParams params = LearnerParams::init(2, 2, true);
  params.critic_values << 1.0, 0.0;  // V(s0) equals the return
  Trajectory batch{{0, 1, 1.0, 1, true}};
  ppo_update(batch, params, 0.9, 0.1, 0.2, 1);
  CHECK(params.actor_logits.norm() == 0.0);
  // Critic already exact: regression step is a no-op.
  CHECK(params.critic_values(0) == 1.0);
}

TEST_CASE("ppo single sample moves along the surrogate and fits the critic") {
  LearnerParams params = LearnerParams::init(2, 2, true);
  Trajectory batch{{0, 1, 1.0, 1, true}};
  const double lr = 0.1;
  ppo_update(batch, params, 0.9, lr, 0.2, 1);
  // ratio = 1, advantage = 1: gradient is the plain score at uniform.
  CHECK(params.actor_logits(0, 0) == Catch::Approx(-lr * 0.5));
  CHECK(params.actor_logits(0, 1) == Catch::Approx(lr * 0.5));
  CHECK(params.critic_values(0) == Catch::Approx(lr * 1.0));
  CHECK(params.critic_values(1) == 0.0);
}

TEST_CASE("ppo zero epochs changes nothing") {
  Rng rng(41);
  LearnerParams params = LearnerParams::init(2, 2, true);
  params.actor_logits = random_logits(2, 2, rng);
  const Eigen::MatrixXd before = params.actor_logits;
  ppo_update({{0, 0, 1.0, 1, true}}, params, 0.9, 0.1, 0.2, 0);
  CHECK(params.actor_logits == before);
}

TEST_CASE("clip saturation zeroes a sample's surrogate gradient") {
  const Eigen::MatrixXd logits = Eigen::MatrixXd::Zero(1, 2);
  Trajectory batch{{0, 0, 0.0, 0, false}};
  const RowDistribution d = row_distribution(logits.row(0));
  // ratio 1.5 with positive advantage: surpasses 1 + clip, excluded.
  std::vector<double> old_lp{d.log_probs(0) - std::log(1.5)};
  Eigen::MatrixXd g =
      ppo_surrogate_gradient(batch, logits, old_lp, {1.0}, 0.2);
  CHECK(g.norm() == 0.0);
  // Same ratio with negative advantage stays active at ratio * A * score.
  g = ppo_surrogate_gradient(batch, logits, old_lp, {-1.0}, 0.2);
  CHECK(g(0, 0) == Catch::Approx(1.5 * -1.0 * 0.5));
  CHECK(g(0, 1) == Catch::Approx(1.5 * -1.0 * -0.5));
}

TEST_CASE("train config validation catches inconsistent settings") {
  TrainConfig c(pair_grid());
  c.schedule.kind = ScheduleKind::Fixed;
  c.schedule.t = 2;
  c.schedule.t_cap = 2;
  c.episodes = 1;
  c.max_steps_per_episode = 4;
  CHECK_NOTHROW(c.validate());
  c.gamma = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.gamma = 0.9;
  c.entropy_coeff = 0.1;
  CHECK_THROWS_AS(c.validate(), ConfigError);  // coeff without maxent
  c.algorithm = Algorithm::ActorCriticMaxEnt;
  CHECK_NOTHROW(c.validate());
  c.entropy_coeff = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);  // maxent without coeff
  c.algorithm = Algorithm::Ppo;
  c.ppo_epochs = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("episode splits its budget into requested-length chunks") {
  const GridSpec g = builtin_grid("empty25");
  const TransitionKernel k = build_gridworld_kernel(g);
  TrainConfig c(g);
  c.algorithm = Algorithm::Reinforce;
  c.schedule.kind = ScheduleKind::Fixed;
  c.schedule.t = 4;
  c.schedule.t_cap = 4;
  c.max_steps_per_episode = 10;
  Rng rng(0);
  LearnerParams params = LearnerParams::init(g.num_states(), kNumActions, false);
  // The goal is 48 moves away: a 10-step episode cannot terminate early.
  const EpisodeOutcome out = run_episode(g, k, params, c, 4, rng);
  CHECK(out.collected_lengths == std::vector<int>{4, 4, 2});
  CHECK(out.steps == 10);
  CHECK(out.episode_return == 0.0);
  CHECK_FALSE(out.goal_reached);
}

TEST_CASE("train records one row per episode with consistent accounting") {
  TrainConfig c(pair_grid());
  c.algorithm = Algorithm::ActorCritic;
  c.schedule.kind = ScheduleKind::Fixed;
  c.schedule.t = 3;
  c.schedule.t_cap = 3;
  c.episodes = 40;
  c.max_steps_per_episode = 12;
  c.seed = 4;
  const TrainResult r = train(c);
  REQUIRE(r.episodes.size() == 40);
  long long prev = 0;
  for (const EpisodeRecord& e : r.episodes) {
    CHECK(e.t_c == 3);
    CHECK(e.cumulative_samples > prev);
    CHECK(e.cumulative_samples - prev <= 12);
    CHECK((e.episode_return == 0.0 || e.episode_return == 1.0));
    CHECK(e.goal_reached == (e.episode_return == 1.0));
    prev = e.cumulative_samples;
  }
  // The two-cell task is learned quickly: later entropy drops.
  CHECK(r.episodes.front().entropy == Catch::Approx(std::log(5.0)).margin(1e-9));
  CHECK(r.episodes.back().entropy < r.episodes.front().entropy);
}

TEST_CASE("adaptive schedule lengthens trajectories as entropy collapses") {
  TrainConfig c(pair_grid());
  c.algorithm = Algorithm::ActorCritic;
  c.lr_actor = 0.2;
  c.lr_critic = 0.2;
  c.schedule.kind = ScheduleKind::AdaLinear;
  c.schedule.t_i = 2;
  c.schedule.eta = 4.0;
  c.schedule.t_cap = 8;
  c.episodes = 600;
  c.max_steps_per_episode = 8;
  c.seed = 1;
  const TrainResult r = train(c);
  CHECK(r.episodes.front().t_c == 2);  // anchored at the initial entropy
  CHECK(r.episodes.back().t_c > 2);
  // The goal row never updates, so the state-averaged entropy floors at
  // ln(5)/2; a clear drop below the start is still expected.
  CHECK(r.episodes.back().entropy < 0.95 * std::log(5.0));
}

TEST_CASE("training is bit-deterministic per seed") {
  TrainConfig c(pair_grid());
  c.algorithm = Algorithm::ActorCritic;
  c.schedule.kind = ScheduleKind::RandomUniform;
  c.schedule.t_min = 1;
  c.schedule.t_max = 4;
  c.schedule.t_cap = 4;
  c.episodes = 25;
  c.max_steps_per_episode = 10;
  c.seed = 7;
  const TrainResult a = train(c);
  const TrainResult b = train(c);
  CHECK(learning_curve_csv(7, a.episodes) == learning_curve_csv(7, b.episodes));
  CHECK(a.params.actor_logits == b.params.actor_logits);
  CHECK(a.params.critic_values == b.params.critic_values);
  c.seed = 8;
  const TrainResult other = train(c);
  CHECK(learning_curve_csv(7, a.episodes) !=
        learning_curve_csv(7, other.episodes));
}

TEST_CASE("all four algorithms run and keep finite parameters") {
  for (const Algorithm alg :
       {Algorithm::Reinforce, Algorithm::ActorCritic,
        Algorithm::ActorCriticMaxEnt, Algorithm::Ppo}) {
    TrainConfig c(pair_grid());
    c.algorithm = alg;
    c.entropy_coeff = alg == Algorithm::ActorCriticMaxEnt ? 0.01 : 0.0;
    c.schedule.kind = ScheduleKind::Fixed;
    c.schedule.t = 2;
    c.schedule.t_cap = 2;
    c.episodes = 30;
    c.max_steps_per_episode = 6;
    c.seed = 2;
    const TrainResult r = train(c);
    CHECK(r.params.actor_logits.allFinite());
    if (alg != Algorithm::Reinforce) {
      CHECK(r.params.critic_values.size() == 2);
      CHECK(r.params.critic_values.allFinite());
    } else {
      CHECK(r.params.critic_values.size() == 0);
    }
  }
}

TEST_CASE("training failures name the episode") {
  TrainConfig c(pair_grid());
  c.algorithm = Algorithm::ActorCritic;
  c.lr_critic = 1e300;
  c.schedule.kind = ScheduleKind::Fixed;
  c.schedule.t = 6;
  c.schedule.t_cap = 6;
  c.episodes = 5;
  c.max_steps_per_episode = 6;
  CHECK_THROWS_WITH(train(c), Catch::Matchers::ContainsSubstring("episode"));
}

TEST_CASE("algorithm names round-trip") {
  for (const Algorithm a :
       {Algorithm::Reinforce, Algorithm::ActorCritic,
        Algorithm::ActorCriticMaxEnt, Algorithm::Ppo})
    CHECK(algorithm_from_string(to_string(a)) == a);
  CHECK_THROWS_AS(algorithm_from_string("sarsa"), ConfigError);
}
