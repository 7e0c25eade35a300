// safe_rl command-line tool: train, evaluate, validate-svm, presets.
//
// Exit codes: 0 ok, 1 check failure, 2 usage or configuration error.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "safe_rl/safe_rl.hpp"

namespace fs = std::filesystem;
using namespace safe_rl;

namespace {

constexpr const char* kVersion = "1.0.0";

enum Exit : int { kOk = 0, kCheckFailed = 1, kUsage = 2 };

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

std::string default_out(const std::string& leaf) {
    if (const char* root = std::getenv("SAFE_RL_OUT"); root && *root) return (fs::path(root) / leaf).string();
    return (fs::path("runs") / leaf).string();
}

struct TrainOptions {
    std::string env;
    std::string out;
    std::uint64_t seed = 0;
    trainer::TrainConfig config;
};

int cmd_train(const TrainOptions& o) {
    const auto spec = io::load_spec(o.env);
    const grid::Environment env(spec);
    const std::string out = o.out.empty() ? default_out(spec.name) : o.out;
    fs::create_directories(out);

    auto config = o.config;
    config.exploration.seed = o.seed;
    const std::string started = utc_now();
    const auto result = trainer::train(env, config);
    const std::string finished = utc_now();

    io::write_file((fs::path(out) / "trace.csv").string(), io::dump_trace(result.trace));
    io::write_file((fs::path(out) / "policy.json").string(), io::dump_policy(result.params, spec.name));
    io::write_file((fs::path(out) / "qtable.json").string(), io::dump_qtable(result.q, spec.name));

    io::json manifest;
    manifest["tool"] = "safe_rl";
    manifest["version"] = kVersion;
    manifest["environment"] = {{"name", spec.name}, {"path", o.env}, {"num_states", env.num_states()}};
    manifest["config"] = {
        {"beta", config.learning.beta},
        {"gamma", config.learning.gamma},
        {"epsilon", config.exploration.epsilon},
        {"epsilon_min", config.exploration.epsilon_min},
        {"decay_episodes", config.exploration.decay_episodes},
        {"threshold", config.convergence_threshold},
        {"max_episodes", config.max_episodes},
        {"max_steps", config.step_cap(env.num_states())},
        {"fit_every", config.fit_every},
    };
    manifest["seed"] = o.seed;
    manifest["started_at"] = started;
    manifest["finished_at"] = finished;
    manifest["converged"] = result.trace.converged;
    manifest["episodes"] = result.trace.episodes.size();
    manifest["final_delta"] = result.trace.episodes.empty() ? 0.0 : result.trace.episodes.back().delta;
    manifest["violations"] = result.trace.total_violations();
    manifest["unsafe_greedy_fallbacks"] = result.selection.unsafe_greedy_fallbacks;
    io::write_file((fs::path(out) / "manifest.json").string(), manifest.dump(2) + "\n");

    std::cout << spec.name << ": " << result.trace.episodes.size() << " episodes, "
              << (result.trace.converged ? "converged" : "NOT converged") << ", final delta "
              << io::format_double(manifest["final_delta"].get<double>()) << ", artifacts in " << out << "\n";
    if (!result.trace.converged) std::cerr << "warning: max_episodes reached before convergence\n";
    return kOk;
}

struct EvaluateOptions {
    std::string env;
    std::string policy;
    std::size_t cap = 0;
    std::vector<int> phases;
};

int cmd_evaluate(const EvaluateOptions& o) {
    const grid::Environment env(io::load_spec(o.env));
    const auto policy = io::parse_policy(io::read_file(o.policy));
    if (policy.params.num_states() != env.num_states() || policy.params.num_classes() != env.num_actions()) {
        std::cerr << "error: policy is " << policy.params.num_states() << "x" << policy.params.num_classes()
                  << " but environment '" << env.spec().name << "' is " << env.num_states() << "x"
                  << env.num_actions() << "\n";
        return kUsage;
    }
    const auto report = trainer::evaluate_policy(env, policy.params, o.cap);
    std::cout << io::report_to_json(env, report).dump(2) << "\n";

    std::vector<int> phases = o.phases;
    if (phases.empty()) phases = env.state(env.start_states().front()).phases;
    if (phases.size() != env.spec().movers.size()) {
        std::cerr << "error: --phase needs " << env.spec().movers.size() << " values\n";
        return kUsage;
    }
    std::cout << io::render_policy(env, policy.params, phases);
    return report.safe && report.goal_reaching ? kOk : kCheckFailed;
}

int cmd_validate_svm(const validation::SvmCheckOptions& o) {
    const auto report = validation::check_svm(o);
    io::json j;
    j["trials"] = report.trials;
    j["subproblems"] = report.subproblems;
    j["max_alpha_deviation"] = report.max_alpha_deviation;
    j["max_expansion_deviation"] = report.max_expansion_deviation;
    j["sign_mismatches"] = report.sign_mismatches;
    j["label_reproduction"] = report.reproduction_rate();
    j["qp_label_reproduction"] =
        report.states_checked == 0 ? 1.0
                                   : static_cast<double>(report.qp_labels_reproduced) / static_cast<double>(report.states_checked);
    const bool ok = report.passed(o);
    j["passed"] = ok;
    if (report.first_failure) j["failing_instance"] = validation::instance_to_json(*report.first_failure);
    std::cout << j.dump(2) << "\n";
    return ok ? kOk : kCheckFailed;
}

int cmd_presets(const std::string& out_arg) {
    const std::string out = out_arg.empty() ? default_out("presets") : out_arg;
    fs::create_directories(out);
    for (const auto& spec : presets::all()) {
        const grid::Environment env(spec);
        const auto path = fs::path(out) / (spec.name + ".json");
        io::write_file(path.string(), io::dump_spec(spec));
        std::cout << path.string() << "  (" << env.num_states() << " states, " << env.start_states().size()
                  << " start states)\n";
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Safety-constrained tabular RL with a closed-form multi-class SVM policy"};
    app.set_version_flag("--version", kVersion);
    app.set_config("--config", "", "Read flags from a TOML/INI file; command-line flags take precedence");
    app.require_subcommand(1);

    TrainOptions train;
    auto* train_cmd = app.add_subcommand("train", "Train on an environment and write run artifacts");
    train_cmd->add_option("--env", train.env, "Environment JSON file")->required();
    train_cmd->add_option("--out", train.out, "Output directory (default $SAFE_RL_OUT/<env> or runs/<env>)");
    train_cmd->add_option("--beta", train.config.learning.beta, "Learning rate")->capture_default_str();
    train_cmd->add_option("--gamma", train.config.learning.gamma, "Discount factor")->capture_default_str();
    train_cmd->add_option("--epsilon", train.config.exploration.epsilon, "Exploration probability")
        ->capture_default_str();
    train_cmd->add_option("--epsilon-min", train.config.exploration.epsilon_min, "Floor of the epsilon decay")
        ->capture_default_str();
    train_cmd->add_option("--decay-episodes", train.config.exploration.decay_episodes,
                          "Episodes of linear epsilon decay (0 = off)")
        ->capture_default_str();
    train_cmd->add_option("--threshold", train.config.convergence_threshold, "Episode Q-change threshold")
        ->capture_default_str();
    train_cmd->add_option("--max-episodes", train.config.max_episodes)->capture_default_str();
    train_cmd->add_option("--max-steps", train.config.max_steps_per_episode, "Step cap per episode (0 = 4N)")
        ->capture_default_str();
    train_cmd->add_option("--fit-every", train.config.fit_every, "Policy refit cadence in steps")
        ->capture_default_str();
    train_cmd->add_option("--seed", train.seed)->capture_default_str();

    EvaluateOptions evaluate;
    auto* eval_cmd = app.add_subcommand("evaluate", "Greedy rollouts of a trained policy");
    eval_cmd->add_option("--env", evaluate.env, "Environment JSON file")->required();
    eval_cmd->add_option("--policy", evaluate.policy, "policy.json from a training run")->required();
    eval_cmd->add_option("--cap", evaluate.cap, "Rollout step cap (0 = reachable state count)");
    eval_cmd->add_option("--phase", evaluate.phases, "Mover phases for the arrow rendering");

    validation::SvmCheckOptions svm_opts;
    auto* svm_cmd = app.add_subcommand("validate-svm", "Cross-check the closed-form SVM against the QP solver");
    svm_cmd->add_option("--n", svm_opts.max_states, "Maximum number of states per instance")->capture_default_str();
    svm_cmd->add_option("--trials", svm_opts.trials)->capture_default_str();
    svm_cmd->add_option("--eta", svm_opts.eta, "Gaussian kernel width")->capture_default_str();
    svm_cmd->add_option("--seed", svm_opts.seed)->capture_default_str();
    svm_cmd->add_option("--qp-tol", svm_opts.qp_tolerance, "KKT tolerance of the QP solver")->capture_default_str();
    svm_cmd->add_option("--alpha-tol", svm_opts.alpha_tolerance)->capture_default_str();
    svm_cmd->add_option("--expansion-tol", svm_opts.expansion_tolerance)->capture_default_str();
    svm_cmd->add_flag("--mutate", svm_opts.mutate, "Use a deliberately wrong multiplier formula");

    std::string presets_out;
    auto* presets_cmd = app.add_subcommand("presets", "Write the bundled environment files");
    presets_cmd->add_option("--out", presets_out, "Output directory (default $SAFE_RL_OUT/presets or runs/presets)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*train_cmd) return cmd_train(train);
        if (*eval_cmd) return cmd_evaluate(evaluate);
        if (*svm_cmd) return cmd_validate_svm(svm_opts);
        if (*presets_cmd) return cmd_presets(presets_out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kUsage;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kUsage;
    } catch (const SafetyViolation& e) {
        std::cerr << "SAFETY VIOLATION: " << e.what() << "\n";
        return kCheckFailed;
    } catch (const EmptySafeSet& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const CapacityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kCheckFailed;
    }
    return kUsage;
}
