#pragma once

// Randomized cross-checks of the closed-form SVM policy against the
// numerical dual solver.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "safe_rl/actor.hpp"
#include "safe_rl/kernel_svm.hpp"

namespace safe_rl::validation {

struct SvmCheckOptions {
    std::size_t max_states = 12;
    std::size_t trials = 200;
    double eta = 50.0;
    std::uint64_t seed = 7;
    int num_classes = 4;
    double upper_bound = 2.0;
    double qp_tolerance = 1e-12;
    double alpha_tolerance = 1e-4;
    double expansion_tolerance = 1e-9;
    /// Self-test: swaps the two multiplier formulas.
    bool mutate = false;
};

/// One random multi-class instance: labels over distinct integer points.
struct Instance {
    std::vector<int> labels;
    std::vector<svm::Point> points;
};

struct SvmCheckReport {
    std::size_t trials = 0;
    std::size_t subproblems = 0;
    double max_alpha_deviation = 0.0;
    double max_expansion_deviation = 0.0;
    std::size_t sign_mismatches = 0;
    std::size_t states_checked = 0;
    std::size_t labels_reproduced = 0;
    std::size_t qp_labels_reproduced = 0;
    std::optional<Instance> first_failure;

    double reproduction_rate() const {
        return states_checked == 0 ? 1.0 : static_cast<double>(labels_reproduced) / static_cast<double>(states_checked);
    }
    bool passed(const SvmCheckOptions& o) const {
        return max_alpha_deviation <= o.alpha_tolerance && max_expansion_deviation <= o.expansion_tolerance &&
               sign_mismatches == 0 && labels_reproduced == states_checked &&
               qp_labels_reproduced == states_checked;
    }
};

/// N uniform in [2, max_states], labels in 1..M with at least two distinct
/// values, points distinct on the integer lattice.
inline Instance random_instance(actor::Rng& rng, std::size_t max_states, int num_classes) {
    Instance inst;
    const std::size_t n = 2 + static_cast<std::size_t>(rng.below(max_states - 1));
    do {
        inst.labels.clear();
        for (std::size_t i = 0; i < n; ++i) inst.labels.push_back(1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(num_classes))));
    } while (std::all_of(inst.labels.begin(), inst.labels.end(), [&](int y) { return y == inst.labels.front(); }));
    const auto side = static_cast<std::uint64_t>(2 * n);
    std::set<std::pair<std::uint64_t, std::uint64_t>> used;
    while (inst.points.size() < n) {
        const auto p = std::make_pair(rng.below(side), rng.below(side));
        if (used.insert(p).second) inst.points.push_back({static_cast<double>(p.first), static_cast<double>(p.second)});
    }
    return inst;
}

inline nlohmann::json instance_to_json(const Instance& inst) {
    return {{"labels", inst.labels}, {"points", inst.points}};
}

/// Checks one instance and folds the results into `report`. Returns false if
/// any tolerance is exceeded.
inline bool check_instance(const Instance& inst, const SvmCheckOptions& opts, SvmCheckReport& report) {
    const auto kernel = svm::kernel_matrix(inst.points, svm::KernelParams::gaussian(opts.eta));
    const std::size_t n = inst.labels.size();
    bool ok = true;

    // Raw QP decision values per class for the multi-class cross-check.
    std::vector<std::vector<double>> raw(static_cast<std::size_t>(opts.num_classes), std::vector<double>(n, 0.0));

    for (int k = 1; k <= opts.num_classes; ++k) {
        svm::BinaryProblem problem(svm::binarize_labels(inst.labels, k, opts.num_classes), kernel, opts.upper_bound);
        if (problem.n_pos == 0 || problem.n_neg == 0) continue;
        ++report.subproblems;

        auto analytic = svm::analytic_alphas(problem);
        if (opts.mutate) {
            const double n_d = static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i) {
                analytic[i] = problem.labels[i] > 0 ? 2.0 * static_cast<double>(problem.n_pos) / n_d
                                                    : 2.0 * static_cast<double>(problem.n_neg) / n_d;
            }
        }
        const auto sol = svm::solve_binary_qp(problem, {opts.qp_tolerance, 1'000'000});
        double alpha_dev = 0.0;
        double alpha_sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            alpha_dev = std::max(alpha_dev, std::abs(analytic[i] - sol.alphas[i]));
            alpha_sum += sol.alphas[i];
        }
        report.max_alpha_deviation = std::max(report.max_alpha_deviation, alpha_dev);
        if (alpha_dev > opts.alpha_tolerance) ok = false;

        for (std::size_t l = 0; l < n; ++l) {
            const double h = svm::decision_function(sol, problem, l);
            raw[static_cast<std::size_t>(k - 1)][l] = h;
            const double closed = svm::analytic_decision_value(problem.labels[l], problem.n_pos, problem.n_neg);
            if ((h > 0.0) != (closed > 0.0) || h == 0.0) {
                ++report.sign_mismatches;
                ok = false;
            }
            const double gap = std::abs(svm::h_tilde(sol.alphas, problem, l) - h * alpha_sum);
            report.max_expansion_deviation = std::max(report.max_expansion_deviation, gap);
            if (gap > opts.expansion_tolerance) ok = false;
        }
    }

    const auto params = actor::fit_policy(inst.labels, opts.num_classes);
    for (std::size_t i = 0; i < n; ++i) {
        ++report.states_checked;
        if (svm::multiclass_predict(params, i) == inst.labels[i]) {
            ++report.labels_reproduced;
        } else {
            ok = false;
        }
        int best = 1;
        for (int k = 2; k <= opts.num_classes; ++k) {
            if (raw[static_cast<std::size_t>(k - 1)][i] > raw[static_cast<std::size_t>(best - 1)][i]) best = k;
        }
        if (best == inst.labels[i]) {
            ++report.qp_labels_reproduced;
        } else {
            ok = false;
        }
    }
    return ok;
}

inline SvmCheckReport check_svm(const SvmCheckOptions& opts) {
    if (opts.max_states < 2) throw InputError("max_states must be at least 2");
    SvmCheckReport report;
    actor::Rng rng(opts.seed);
    for (std::size_t t = 0; t < opts.trials; ++t) {
        const auto inst = random_instance(rng, opts.max_states, opts.num_classes);
        ++report.trials;
        if (!check_instance(inst, opts, report) && !report.first_failure) report.first_failure = inst;
    }
    return report;
}

}  // namespace safe_rl::validation
