#pragma once

#include <map>
#include <random>
#include <string>
#include <vector>

#include "normrl/abstraction.hpp"
#include "normrl/gridworld.hpp"
#include "normrl/institution.hpp"
#include "normrl/norm_engine.hpp"
#include "normrl/reward.hpp"

namespace normrl {

enum class ObservationMode : uint8_t { Abstract, Full, TabularAbstract };
ObservationMode observation_mode_from_string(const std::string& s);
std::string to_string(ObservationMode m);

struct TrainingConfig {
  double alpha = 0.1;
  double gamma = 0.99;
  double eps_start = 1.0;
  double eps_end = 0.05;
  double eps_decay_fraction = 0.5;  // linear decay over this fraction of episodes
  int episodes = 1000;
  int trials = 10;
  uint64_t seed = 1;
};

double epsilon_at(const TrainingConfig& cfg, int episode);

/// Tabular observations carry a state key, linear ones a feature vector.
struct Observation {
  uint64_t key = 0;
  std::vector<double> features;
};

/// Action-value function, tabular or linear, with a fixed action count.
/// Tabular entries default to zero; linear weights are one vector per action
/// with length equal to the feature vector.
class QFunction {
 public:
  static QFunction tabular(int num_actions);
  static QFunction linear(int num_actions, int feature_len);

  bool is_tabular() const { return tabular_; }
  int num_actions() const { return num_actions_; }
  int feature_len() const { return feature_len_; }

  double value(const Observation& obs, int action) const;
  double max_value(const Observation& obs) const;

  const std::map<uint64_t, std::vector<double>>& table() const { return table_; }
  const std::vector<std::vector<double>>& weights() const { return weights_; }
  std::map<uint64_t, std::vector<double>>& mutable_table() { return table_; }
  std::vector<std::vector<double>>& mutable_weights() { return weights_; }

  void update(const Observation& s, int a, double r, const Observation& s2, bool terminal,
              double alpha, double gamma);

  friend bool operator==(const QFunction&, const QFunction&) = default;

 private:
  bool tabular_ = true;
  int num_actions_ = 0;
  int feature_len_ = 0;
  std::map<uint64_t, std::vector<double>> table_;
  std::vector<std::vector<double>> weights_;  // [action][feature]
};

/// One-step temporal-difference backup:
///   Q(s,a) += alpha * (r + gamma * max_a' Q(s',a') - Q(s,a))
/// with a zero bootstrap on terminal transitions. The linear form applies the
/// same error semi-gradient-wise along the features of s.
void td_update(QFunction& q, const Observation& s, int a, double r, const Observation& s2,
               bool terminal, const TrainingConfig& cfg);

/// Epsilon-greedy with uniform tie-breaking among maximizing actions.
int select_action(const QFunction& q, const Observation& obs, double epsilon,
                  std::mt19937_64& rng);

struct EpisodeLogRow {
  int episode = 0;
  int trial = 0;
  std::string agent;
  double cum_reward = 0.0;
  bool adherent = false;
  int steps = 0;
};

/// Everything one trial needs: environment layout, grounded institution,
/// shaping, observation mode and the learner configuration. Controlled
/// agents each learn an independent Q-function.
struct TrainSetup {
  WorldLayout layout;
  Institution institution;
  DomainVocabulary domain;
  Grounding grounding;
  ShapingConfig shaping;
  EngineOptions engine;
  ObservationMode mode = ObservationMode::TabularAbstract;
  TrainingConfig training;
  std::vector<std::string> controlled_agents;
  bool item_placement_per_episode = true;
  std::map<std::string, QFunction> initial_q;  // warm start / evaluation
  bool learn = true;
  double eval_epsilon = 0.0;  // exploration when learn == false
};

struct TrialResult {
  std::vector<EpisodeLogRow> rows;
  std::map<std::string, QFunction> q;
};

/// Runs training (or greedy evaluation when setup.learn is false) for one
/// trial: reset, act, step, monitor, shape, update, log.
TrialResult run_trial(const TrainSetup& setup, int trial_index);

/// Fraction of adherent episodes among the final `window` episodes of a
/// trial (per-episode, not per-agent).
double final_adherence_rate(const std::vector<EpisodeLogRow>& rows, int window);

/// First episode index whose trailing `window` episodes are at least
/// `threshold` adherent; -1 when never reached.
int episodes_to_adherence(const std::vector<EpisodeLogRow>& rows, int window, double threshold);

}  // namespace normrl
