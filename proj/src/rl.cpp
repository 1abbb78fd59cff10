#include "normrl/rl.hpp"

#include <algorithm>
#include <memory>
#include <set>

#include "normrl/trajectory.hpp"

namespace normrl {

ObservationMode observation_mode_from_string(const std::string& s) {
  if (s == "abstract") return ObservationMode::Abstract;
  if (s == "full") return ObservationMode::Full;
  if (s == "tabular-abstract") return ObservationMode::TabularAbstract;
  throw ConfigError("unknown observation mode '" + s + "'");
}

std::string to_string(ObservationMode m) {
  switch (m) {
    case ObservationMode::Abstract: return "abstract";
    case ObservationMode::Full: return "full";
    case ObservationMode::TabularAbstract: return "tabular-abstract";
  }
  return "?";
}

double epsilon_at(const TrainingConfig& cfg, int episode) {
  if (cfg.episodes <= 0) return cfg.eps_end;
  double horizon = cfg.eps_decay_fraction * cfg.episodes;
  if (horizon < 1) return cfg.eps_end;
  double frac = episode / horizon;
  if (frac >= 1.0) return cfg.eps_end;
  return cfg.eps_start + frac * (cfg.eps_end - cfg.eps_start);
}

QFunction QFunction::tabular(int num_actions) {
  QFunction q;
  q.tabular_ = true;
  q.num_actions_ = num_actions;
  return q;
}

QFunction QFunction::linear(int num_actions, int feature_len) {
  QFunction q;
  q.tabular_ = false;
  q.num_actions_ = num_actions;
  q.feature_len_ = feature_len;
  q.weights_.assign(num_actions, std::vector<double>(feature_len, 0.0));
  return q;
}

double QFunction::value(const Observation& obs, int action) const {
  if (tabular_) {
    auto it = table_.find(obs.key);
    return it == table_.end() ? 0.0 : it->second[static_cast<size_t>(action)];
  }
  const std::vector<double>& w = weights_[static_cast<size_t>(action)];
  if (obs.features.size() != w.size())
    throw Error("feature length " + std::to_string(obs.features.size()) +
                " does not match weights " + std::to_string(w.size()));
  double v = 0.0;
  for (size_t i = 0; i < w.size(); ++i) v += w[i] * obs.features[i];
  return v;
}

double QFunction::max_value(const Observation& obs) const {
  if (num_actions_ == 0) throw Error("empty action space");
  double best = value(obs, 0);
  for (int a = 1; a < num_actions_; ++a) best = std::max(best, value(obs, a));
  return best;
}

void QFunction::update(const Observation& s, int a, double r, const Observation& s2,
                       bool terminal, double alpha, double gamma) {
  double target = r + (terminal ? 0.0 : gamma * max_value(s2));
  if (tabular_) {
    auto it = table_.find(s.key);
    if (it == table_.end())
      it = table_.emplace(s.key, std::vector<double>(num_actions_, 0.0)).first;
    double& q = it->second[static_cast<size_t>(a)];
    q += alpha * (target - q);
  } else {
    std::vector<double>& w = weights_[static_cast<size_t>(a)];
    double q = 0.0;
    for (size_t i = 0; i < w.size(); ++i) q += w[i] * s.features[i];
    double err = alpha * (target - q);
    for (size_t i = 0; i < w.size(); ++i) w[i] += err * s.features[i];
  }
}

void td_update(QFunction& q, const Observation& s, int a, double r, const Observation& s2,
               bool terminal, const TrainingConfig& cfg) {
  q.update(s, a, r, s2, terminal, cfg.alpha, cfg.gamma);
}

int select_action(const QFunction& q, const Observation& obs, double epsilon,
                  std::mt19937_64& rng) {
  const int n = q.num_actions();
  if (n == 0) throw Error("empty action space");
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (epsilon > 0.0 && coin(rng) < epsilon) {
    std::uniform_int_distribution<int> pick(0, n - 1);
    return pick(rng);
  }
  double best = q.value(obs, 0);
  std::vector<int> arg{0};
  for (int a = 1; a < n; ++a) {
    double v = q.value(obs, a);
    if (v > best) {
      best = v;
      arg.assign(1, a);
    } else if (v == best) {
      arg.push_back(a);
    }
  }
  if (arg.size() == 1) return arg.front();
  std::uniform_int_distribution<size_t> pick(0, arg.size() - 1);
  return arg[pick(rng)];
}

namespace {

struct AgentRuntime {
  std::string id;
  ActionSpace actions;
  QFunction q;
  std::unique_ptr<AbstractEncoder> abstract_enc;
  std::unique_ptr<FullEncoder> full_enc;
  std::unique_ptr<TabularEncoder> tabular_enc;
};

Observation observe(const TrainSetup& setup, const AgentRuntime& rt, const GridWorld& world,
                    const std::vector<NormState>& norm_states) {
  Observation obs;
  switch (setup.mode) {
    case ObservationMode::Abstract:
      obs.features = rt.abstract_enc->encode(world, rt.id);
      break;
    case ObservationMode::Full:
      obs.features = rt.full_enc->encode(world, rt.id);
      break;
    case ObservationMode::TabularAbstract:
      obs.key = rt.tabular_enc->encode(world, rt.id, norm_states);
      break;
  }
  return obs;
}

}  // namespace

TrialResult run_trial(const TrainSetup& setup, int trial_index) {
  if (setup.controlled_agents.empty()) throw ConfigError("no controlled agents");
  const TrainingConfig& tc = setup.training;
  if (tc.alpha <= 0) throw ConfigError("alpha must be positive");
  if (tc.gamma <= 0 || tc.gamma >= 1) throw ConfigError("gamma must be in (0,1)");
  if (tc.eps_start < 0 || tc.eps_start > 1 || tc.eps_end < 0 || tc.eps_end > 1)
    throw ConfigError("epsilon must be in [0,1]");

  const uint64_t trial_seed = mix_seed(tc.seed, static_cast<uint64_t>(trial_index));
  std::mt19937_64 explore_rng(mix_seed(trial_seed, 0x5eedULL));

  GridWorld world(setup.layout, mix_seed(trial_seed, 1));

  std::vector<AgentRuntime> runtimes;
  for (const auto& id : setup.controlled_agents) {
    AgentRuntime rt;
    rt.id = id;
    switch (setup.mode) {
      case ObservationMode::Abstract:
        rt.actions = abstract_action_space(setup.institution, setup.grounding, setup.domain, id);
        rt.abstract_enc = std::make_unique<AbstractEncoder>(setup.institution, setup.grounding);
        rt.q = QFunction::linear(rt.actions.size(), rt.abstract_enc->layout().size());
        break;
      case ObservationMode::Full:
        rt.actions = full_action_space(setup.domain, id);
        rt.full_enc = std::make_unique<FullEncoder>(setup.domain);
        rt.q = QFunction::linear(rt.actions.size(), rt.full_enc->layout().size());
        break;
      case ObservationMode::TabularAbstract:
        rt.actions = abstract_action_space(setup.institution, setup.grounding, setup.domain, id);
        rt.tabular_enc = std::make_unique<TabularEncoder>(setup.institution, setup.grounding);
        rt.q = QFunction::tabular(rt.actions.size());
        break;
    }
    auto it = setup.initial_q.find(id);
    if (it != setup.initial_q.end()) {
      if (it->second.num_actions() != rt.q.num_actions() ||
          it->second.is_tabular() != rt.q.is_tabular() ||
          it->second.feature_len() != rt.q.feature_len())
        throw ConfigError("initial Q-function shape does not match agent '" + id + "'");
      rt.q = it->second;
    }
    runtimes.push_back(std::move(rt));
  }

  InstitutionMonitor monitors(setup.institution, setup.grounding, setup.engine);
  ShapingPolicy shaping(setup.shaping, setup.institution.norms.size(),
                        setup.layout.max_episode_steps);

  TrialResult result;
  result.rows.reserve(static_cast<size_t>(tc.episodes) * runtimes.size());

  for (int episode = 0; episode < tc.episodes; ++episode) {
    uint64_t placement = setup.item_placement_per_episode
                             ? mix_seed(trial_seed, static_cast<uint64_t>(episode) + 1)
                             : mix_seed(trial_seed, 1);
    world.reset(placement);
    Trajectory traj;
    traj.record_step(world.last_assignments());
    monitors.reset();
    monitors.step(traj);  // t=0 is the reset state; no activations, all neutral
    shaping.reset();

    const double eps = setup.learn ? epsilon_at(tc, episode) : setup.eval_epsilon;

    std::vector<Observation> obs;
    obs.reserve(runtimes.size());
    for (const auto& rt : runtimes) obs.push_back(observe(setup, rt, world, monitors.currents()));

    std::map<std::string, double> cum;
    EpisodeControl control = EpisodeControl::Continue;
    int steps = 0;

    while (steps < setup.layout.max_episode_steps) {
      std::map<std::string, BehaviorCommand> commands;
      std::vector<int> chosen(runtimes.size());
      for (size_t i = 0; i < runtimes.size(); ++i) {
        chosen[i] = select_action(runtimes[i].q, obs[i], eps, explore_rng);
        commands[runtimes[i].id] = runtimes[i].actions.dispatch(chosen[i]);
      }

      world.step(commands);
      traj.record_step(world.last_assignments());
      auto transitions = monitors.step(traj);
      ShapingBreakdown breakdown = shaping.step(transitions);
      auto distributed = distribute_rewards(breakdown, setup.institution, setup.grounding);

      ++steps;
      control = breakdown.control;
      const bool terminal =
          control != EpisodeControl::Continue || steps >= setup.layout.max_episode_steps;

      auto currents = monitors.currents();
      for (size_t i = 0; i < runtimes.size(); ++i) {
        auto it = distributed.find(runtimes[i].id);
        double r = (it != distributed.end() ? it->second : 0.0) + breakdown.penalty;
        cum[runtimes[i].id] += r;
        Observation next = observe(setup, runtimes[i], world, currents);
        if (setup.learn)
          runtimes[i].q.update(obs[i], chosen[i], r, next, terminal, tc.alpha, tc.gamma);
        obs[i] = std::move(next);
      }
      if (control != EpisodeControl::Continue) break;
    }

    bool adherent = control == EpisodeControl::TerminateSuccess;
    for (const auto& rt : runtimes)
      result.rows.push_back(
          {episode, trial_index, rt.id, cum[rt.id], adherent, steps});
  }

  for (auto& rt : runtimes) result.q.emplace(rt.id, std::move(rt.q));
  return result;
}

double final_adherence_rate(const std::vector<EpisodeLogRow>& rows, int window) {
  if (rows.empty()) return 0.0;
  // Per-episode flags (rows repeat per agent).
  std::map<int, bool> by_episode;
  for (const auto& r : rows) by_episode[r.episode] = r.adherent;
  int n = 0, hits = 0;
  for (auto it = by_episode.rbegin(); it != by_episode.rend() && n < window; ++it, ++n)
    if (it->second) ++hits;
  return n ? static_cast<double>(hits) / n : 0.0;
}

int episodes_to_adherence(const std::vector<EpisodeLogRow>& rows, int window, double threshold) {
  std::map<int, bool> by_episode;
  for (const auto& r : rows) by_episode[r.episode] = r.adherent;
  std::vector<bool> flags;
  flags.reserve(by_episode.size());
  for (const auto& [e, a] : by_episode) flags.push_back(a);
  int run = 0;
  for (size_t i = 0; i < flags.size(); ++i) {
    if (flags[i]) ++run;
    if (i >= static_cast<size_t>(window) && flags[i - window]) --run;
    size_t have = std::min(i + 1, static_cast<size_t>(window));
    if (have == static_cast<size_t>(window) &&
        static_cast<double>(run) / window >= threshold)
      return static_cast<int>(i);
  }
  return -1;
}

}  // namespace normrl
