#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "normrl/experiment.hpp"

namespace fs = std::filesystem;
using namespace normrl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitThreshold = 3;

int cmd_run(const std::string& experiment, const fs::path& config, int trials, int64_t seed,
            const fs::path& out, int workers, bool check) {
  ExperimentConfig cfg = ExperimentConfig::load(config);
  if (!experiment.empty() && experiment != cfg.id)
    throw ConfigError("--experiment " + experiment + " does not match config id " + cfg.id);
  RunOptions opts{out, trials, seed, workers, check};
  ExperimentOutcome outcome = run_experiment(cfg, opts);
  for (const auto& c : outcome.checks)
    std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << " (" << c.detail << ")\n";
  std::cout << "results written to " << out.string() << "\n";
  if (check && !outcome.ok()) return kExitThreshold;
  return kExitOk;
}

int cmd_verify(const fs::path& institution, const fs::path& grounding, const fs::path& trace,
               const fs::path& out) {
  Institution inst = load_institution(institution);
  Grounding g = load_grounding(grounding);
  std::ifstream trace_in(trace);
  if (!trace_in) throw ConfigError("cannot open trace file: " + trace.string());
  Trajectory traj = import_trace(trace_in);

  VerifyResult res;
  if (out.empty()) {
    res = verify_trace(inst, g, traj, std::cout);
  } else {
    std::ofstream csv(out, std::ios::binary);
    if (!csv) throw ConfigError("cannot write file: " + out.string());
    res = verify_trace(inst, g, traj, csv);
  }
  std::cout << "norms: " << res.norm_count << ", steps: " << res.steps
            << ", adherent: " << (res.adherent ? "true" : "false") << "\n";
  return kExitOk;
}

int cmd_policy_load(const fs::path& file) {
  PolicyArtifact p = PolicyArtifact::load(file);
  std::cout << "agent: " << p.agent << "\n"
            << "observation: " << to_string(p.mode) << "\n"
            << "fingerprint: " << p.fingerprint << "\n"
            << "actions:";
  for (const auto& l : p.action_labels) std::cout << " " << l;
  std::cout << "\n";
  if (p.q.is_tabular())
    std::cout << "q: tabular, " << p.q.table().size() << " states\n";
  else
    std::cout << "q: linear, " << p.q.feature_len() << " features\n";
  return kExitOk;
}

int cmd_policy_save(const fs::path& in, const fs::path& out) {
  PolicyArtifact::load(in).save(out);  // validated normalization round-trip
  std::cout << "policy written to " << out.string() << "\n";
  return kExitOk;
}

int cmd_policy_reground(const fs::path& policy_file, const fs::path& institution,
                        const fs::path& grounding, const fs::path& domain,
                        const std::string& agent, const fs::path& out) {
  PolicyArtifact p = PolicyArtifact::load(policy_file);
  Institution inst = load_institution(institution);
  Grounding g = load_grounding(grounding);
  DomainVocabulary dom = load_domain(domain);
  std::string target = agent.empty() ? p.agent : agent;
  check_policy_compatible(p, inst, g, dom, target);
  p.agent = target;
  p.save(out);
  std::cout << "policy rebound to agent '" << target << "' and written to " << out.string()
            << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"institution-grounded norm monitoring and normative reinforcement learning"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "run an experiment from a config file");
  std::string experiment;
  fs::path config, out_dir = "out";
  int trials = -1;
  int64_t seed = -1;
  int workers = 0;
  bool check = false;
  run->add_option("--experiment", experiment, "experiment id (must match the config)");
  run->add_option("--config", config, "experiment config JSON")->required();
  run->add_option("--trials", trials, "override trial count");
  run->add_option("--seed", seed, "override training seed");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--workers", workers, "worker threads (0 = hardware)");
  run->add_flag("--check", check, "exit 3 when an experiment threshold fails");

  // verify
  auto* verify = app.add_subcommand("verify", "replay a trace and report per-norm states");
  fs::path v_inst, v_ground, v_trace, v_out;
  verify->add_option("--institution", v_inst, "institution JSON")->required();
  verify->add_option("--grounding", v_ground, "grounding JSON")->required();
  verify->add_option("--trace", v_trace, "JSON-lines trace file")->required();
  verify->add_option("--out", v_out, "CSV output (default: stdout)");

  // policy
  auto* policy = app.add_subcommand("policy", "inspect, normalize or rebind policy artifacts");
  policy->require_subcommand(1);
  auto* p_load = policy->add_subcommand("load", "load and summarize a policy artifact");
  fs::path pl_file;
  p_load->add_option("--policy", pl_file, "policy artifact JSON")->required();
  auto* p_save = policy->add_subcommand("save", "validate and rewrite a policy artifact");
  fs::path ps_in, ps_out;
  p_save->add_option("--policy", ps_in, "policy artifact JSON")->required();
  p_save->add_option("--out", ps_out, "output path")->required();
  auto* p_reground = policy->add_subcommand("reground", "rebind a policy to a new grounding");
  fs::path pr_policy, pr_inst, pr_ground, pr_dom, pr_out;
  std::string pr_agent;
  p_reground->add_option("--policy", pr_policy, "policy artifact JSON")->required();
  p_reground->add_option("--institution", pr_inst, "institution JSON")->required();
  p_reground->add_option("--grounding", pr_ground, "target grounding JSON")->required();
  p_reground->add_option("--domain", pr_dom, "target domain JSON")->required();
  p_reground->add_option("--agent", pr_agent, "target agent (default: the artifact's)");
  p_reground->add_option("--out", pr_out, "output path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return cmd_run(experiment, config, trials, seed, out_dir, workers, check);
    if (verify->parsed()) return cmd_verify(v_inst, v_ground, v_trace, v_out);
    if (p_load->parsed()) return cmd_policy_load(pl_file);
    if (p_save->parsed()) return cmd_policy_save(ps_in, ps_out);
    if (p_reground->parsed())
      return cmd_policy_reground(pr_policy, pr_inst, pr_ground, pr_dom, pr_agent, pr_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
