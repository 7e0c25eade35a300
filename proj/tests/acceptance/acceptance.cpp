// Acceptance checks. One PASS/FAIL line per criterion; exits 1 if any fails.

#include <chrono>
#include <cstdio>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "safe_rl/safe_rl.hpp"

using namespace safe_rl;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, const char* title, bool ok, const std::string& detail) {
    std::printf("[%s] %2d %s: %s\n", ok ? "PASS" : "FAIL", id, title, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

constexpr std::uint64_t kSeed = 42;

trainer::TrainConfig reference_config() {
    trainer::TrainConfig cfg;
    cfg.learning = {0.07, 1.0};
    cfg.exploration.epsilon = 0.1;
    cfg.exploration.seed = kSeed;
    cfg.convergence_threshold = 1e-6;
    return cfg;
}

struct PresetRun {
    trainer::TrainResult result;
    trainer::EvaluationReport report;
    std::optional<std::size_t> bfs;
    double seconds = 0.0;
};

// Training violations surface as SafetyViolation; count them rather than abort.
PresetRun run_preset(const grid::Environment& env, std::size_t& violations, std::string& error) {
    PresetRun run;
    const auto t0 = Clock::now();
    try {
        run.result = trainer::train(env, reference_config());
        violations += run.result.trace.total_violations();
        run.report = trainer::evaluate_policy(env, run.result.params);
        violations += run.report.violations;
    } catch (const SafetyViolation& e) {
        ++violations;
        error = e.what();
    }
    run.bfs = trainer::shortest_safe_path(env.spec());
    run.seconds = seconds_since(t0);
    return run;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), f, args...);
    return buf;
}

void label_reproduction() {
    const auto t0 = Clock::now();
    actor::Rng rng(2024);
    std::size_t states = 0, reproduced = 0;
    for (int t = 0; t < 500; ++t) {
        const std::size_t n = 2 + rng.below(49);
        std::vector<int> labels(n);
        for (auto& y : labels) y = 1 + static_cast<int>(rng.below(4));
        while (std::all_of(labels.begin(), labels.end(), [&](int y) { return y == labels[0]; })) {
            labels[rng.below(n)] = 1 + static_cast<int>(rng.below(4));
        }
        const auto params = actor::fit_policy(labels, 4);
        for (std::size_t i = 0; i < n; ++i) {
            ++states;
            reproduced += actor::policy_action(params, i) == labels[i];
        }
    }
    const double s = seconds_since(t0);
    report(1, "label reproduction", reproduced == states && s < 5.0,
           fmt("%zu/%zu states reproduced over 500 tables in %.3f s", reproduced, states, s));
}

void qp_checks() {
    validation::SvmCheckOptions opts;
    opts.max_states = 12;
    opts.trials = 200;
    opts.eta = 50.0;
    opts.seed = 7;
    opts.qp_tolerance = 1e-12;
    const auto t0 = Clock::now();
    const auto r = validation::check_svm(opts);
    const double s = seconds_since(t0);
    report(2, "analytic vs QP multipliers",
           r.max_alpha_deviation <= 1e-4 && r.sign_mismatches == 0 && s < 30.0,
           fmt("%zu binary problems, max |dα| = %.3g, sign mismatches %zu, %.3f s", r.subproblems,
               r.max_alpha_deviation, r.sign_mismatches, s));

    // Identity on the same instances at the indicator limit.
    actor::Rng rng(opts.seed);
    double worst = 0.0;
    std::size_t checked = 0;
    for (std::size_t t = 0; t < opts.trials; ++t) {
        const auto inst = validation::random_instance(rng, opts.max_states, opts.num_classes);
        const auto kernel = svm::SquareMatrix::identity(inst.labels.size());
        for (int k = 1; k <= opts.num_classes; ++k) {
            svm::BinaryProblem problem(svm::binarize_labels(inst.labels, k, opts.num_classes), kernel);
            if (problem.n_pos == 0 || problem.n_neg == 0) continue;
            const auto sol = svm::solve_binary_qp(problem, {opts.qp_tolerance});
            const double sum = std::accumulate(sol.alphas.begin(), sol.alphas.end(), 0.0);
            for (std::size_t l = 0; l < problem.size(); ++l) {
                const double lhs = svm::h_tilde(sol.alphas, problem, l);
                const double rhs = svm::decision_function(sol, problem, l) * sum;
                worst = std::max(worst, std::abs(lhs - rhs));
                ++checked;
            }
        }
    }
    report(3, "offset-free expansion identity", worst <= 1e-9 && r.max_expansion_deviation <= 1e-9,
           fmt("%zu points at the indicator limit, max deviation %.3g (eta = 50 run %.3g)", checked,
               worst, r.max_expansion_deviation));
}

void spot_values() {
    const auto m = svm::analytic_multipliers(1, 3);
    svm::BinaryProblem problem({+1, -1, -1, -1}, svm::SquareMatrix::identity(4));
    const auto alphas = svm::analytic_alphas(problem);
    const double hp = svm::h_tilde(alphas, problem, 0);
    bool neg_ok = true;
    for (std::size_t l = 1; l < 4; ++l) neg_ok = neg_ok && svm::h_tilde(alphas, problem, l) == -3.0;
    const bool ok = m.alpha_pos == 1.5 && m.alpha_neg == 0.5 && hp == 3.0 && neg_ok &&
                    svm::analytic_decision_value(+1, 1, 3) == 3.0 && svm::analytic_decision_value(-1, 1, 3) == -3.0;
    report(4, "closed-form spot values", ok,
           fmt("alpha = (%g, %g), h = %+g / %+g", m.alpha_pos, m.alpha_neg, hp, svm::h_tilde(alphas, problem, 1)));
}

void determinism(const grid::Environment& env) {
    auto once = [&] {
        const auto r = trainer::train(env, reference_config());
        return io::dump_trace(r.trace) + io::dump_policy(r.params, env.spec().name);
    };
    const auto a = once();
    const auto b = once();
    report(9, "determinism", a == b, fmt("%s: %zu bytes of trace+policy, identical = %s", env.spec().name.c_str(),
                                         a.size(), a == b ? "yes" : "no"));
}

}  // namespace

int main() {
    label_reproduction();
    qp_checks();
    spot_values();

    const std::vector<std::string> eight{"grid4", "grid5", "grid6", "grid7", "grid8", "grid9", "maze15", "moving15x9"};
    std::map<std::string, PresetRun> runs;
    std::size_t violations = 0;
    std::string error;
    for (const auto& name : eight) {
        const grid::Environment env(presets::by_name(name));
        runs[name] = run_preset(env, violations, error);
        const auto& r = runs[name];
        std::printf("       %-11s episodes %6zu converged %-3s length %3zu bfs %3zu  %.2f s\n", name.c_str(),
                    r.result.trace.episodes.size(), r.result.trace.converged ? "yes" : "no",
                    r.report.rollouts.empty() ? 0 : r.report.rollouts.front().length, r.bfs.value_or(0), r.seconds);
    }
    report(5, "zero constraint violations", violations == 0,
           fmt("%zu violations across training and evaluation of 8 presets%s%s", violations,
               error.empty() ? "" : "; ", error.c_str()));

    {
        bool ok = true;
        std::string worst;
        double slowest = 0.0;
        for (const auto& name : eight) {
            if (name == "moving15x9") continue;
            const auto& r = runs[name];
            const bool preset_ok = r.result.trace.converged && r.report.optimal && r.bfs &&
                                   r.report.rollouts.front().length == *r.bfs && r.seconds < 60.0;
            if (!preset_ok && worst.empty()) worst = "; first failure " + name;
            ok = ok && preset_ok;
            slowest = std::max(slowest, r.seconds);
        }
        report(6, "greedy path equals shortest safe path", ok,
               fmt("7 fixed-obstacle presets, slowest %.2f s%s", slowest, worst.c_str()));
    }

    {
        const auto& r = runs["maze15"];
        const std::size_t eps = r.result.trace.episodes.size();
        report(7, "maze convergence", r.result.trace.converged && eps <= 10'000,
               fmt("maze15 converged after %zu episodes", eps));
    }

    {
        const auto& r = runs["moving15x9"];
        std::size_t good = 0;
        for (const auto& ro : r.report.rollouts) good += ro.safe && ro.reached_goal;
        // Exhaustive over every mover phase: 𝒳₀ holds all collision-free phases.
        const grid::Environment env(presets::by_name("moving15x9"));
        const std::size_t phases = env.space().phase_count();
        report(8, "moving obstacle, every phase", r.result.trace.converged && good == r.report.rollouts.size() &&
                                                          r.report.rollouts.size() == phases,
               fmt("%zu/%zu start phases reach the goal without collision (%zu phases total)", good,
                   r.report.rollouts.size(), phases));
    }

    determinism(grid::Environment(presets::by_name("grid6")));

    {
        const auto t0 = Clock::now();
        const grid::Environment env(presets::crossy());
        std::size_t v = 0;
        std::string err;
        const auto r = run_preset(env, v, err);
        const bool ok = r.result.trace.converged && v == 0 && r.report.safe && r.report.goal_reaching &&
                        r.report.optimal && r.bfs && r.report.rollouts.front().length == *r.bfs;
        report(10, "crossing game", ok,
               fmt("%zu states, %zu episodes, length %zu vs bfs %zu, violations %zu, %.2f s", env.num_states(),
                   r.result.trace.episodes.size(), r.report.rollouts.empty() ? 0 : r.report.rollouts.front().length,
                   r.bfs.value_or(0), v, seconds_since(t0)));
    }

    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
