#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "normrl/rl.hpp"

namespace normrl {

/// Serialized policy: the Q payload plus everything needed to rebind it to a
/// new grounding. Loadable only when the target institution's category
/// fingerprint matches.
struct PolicyArtifact {
  int format_version = 1;
  std::string fingerprint;  // Institution::category_fingerprint of the source
  ObservationMode mode = ObservationMode::Abstract;
  std::string agent;
  std::vector<std::string> action_labels;
  QFunction q;

  void save(const std::filesystem::path& file) const;
  static PolicyArtifact load(const std::filesystem::path& file);
};

PolicyArtifact make_policy_artifact(const Institution& inst, ObservationMode mode,
                                    const std::string& agent, const ActionSpace& actions,
                                    QFunction q);

/// Fingerprint + action-space compatibility check; throws Error on mismatch.
/// The Q payload itself is never modified by a rebinding.
void check_policy_compatible(const PolicyArtifact& policy, const Institution& inst,
                             const Grounding& g, const DomainVocabulary& dom,
                             const std::string& agent);

/// Parsed experiment description (institution, domain, grounding, scenario,
/// shaping, observation, training plus per-experiment extras). File paths in
/// the document resolve relative to the document's directory.
struct ExperimentConfig {
  std::string id;  // e1..e5
  std::filesystem::path base_dir;

  Institution institution;
  DomainVocabulary domain;
  Grounding grounding;
  WorldLayout layout;
  bool item_placement_per_episode = true;
  std::vector<std::string> controlled_agents;
  ShapingConfig shaping;
  EngineOptions engine;
  ObservationMode observation = ObservationMode::Abstract;
  TrainingConfig training;
  uint64_t scenario_seed = 0;

  // e3 extras
  std::optional<Grounding> transfer_grounding;  // regrounded in the source domain
  std::optional<DomainVocabulary> transfer_domain;
  std::optional<Grounding> transfer_domain_grounding;
  WorldLayout transfer_layout;
  std::vector<std::string> transfer_agents;
  int eval_episodes = 200;
  int continue_episodes = 0;  // 0 = same as training.episodes

  static ExperimentConfig load(const std::filesystem::path& file);
};

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ExperimentOutcome {
  std::string id;
  std::vector<CheckResult> checks;
  bool ok() const;
};

struct RunOptions {
  std::filesystem::path out_dir;
  int trials = -1;     // -1: from config
  int64_t seed = -1;   // -1: from config
  int workers = 0;     // 0: hardware concurrency
  bool check = false;  // evaluate experiment thresholds
};

/// Runs the configured experiment, writes curves/aggregate CSVs, policy
/// artifacts and summary.json into out_dir, and evaluates the experiment's
/// outcome checks.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg, const RunOptions& opts);

/// Replays a trace against a grounded institution: one CSV row (t,
/// norm_index, state) per norm and step, then a final verdict line.
struct VerifyResult {
  bool adherent = false;
  int steps = 0;
  size_t norm_count = 0;
};
VerifyResult verify_trace(const Institution& inst, const Grounding& g, const Trajectory& traj,
                          std::ostream& csv_out, const EngineOptions& opts = {});

// Shared CSV/statistics helpers (also used by the experiment runner).
void write_curves_csv(const std::filesystem::path& file, const std::vector<TrialResult>& trials);
void write_aggregate_csv(const std::filesystem::path& file,
                         const std::vector<TrialResult>& trials);
std::vector<TrialResult> run_trials(const TrainSetup& base, int trials, int workers);
double median(std::vector<double> values);

}  // namespace normrl
