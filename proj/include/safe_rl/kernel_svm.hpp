#pragma once

// Gaussian-kernel binary SVM dual: closed-form multipliers for the
// indicator-kernel limit, a pairwise coordinate-ascent oracle for finite
// kernel widths, and the one-vs-rest multi-class policy built on top.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "safe_rl/errors.hpp"

namespace safe_rl::svm {

struct KernelParams {
    double eta = 0.0;
    /// Limit eta -> infinity: K(a, b) = [a == b].
    bool infinite = false;

    static KernelParams gaussian(double eta) {
        if (!(eta >= 0.0) || std::isinf(eta)) {
            throw InputError("kernel width must be finite and nonnegative");
        }
        return KernelParams{eta, false};
    }
    static KernelParams indicator() { return KernelParams{0.0, true}; }
};

inline double gaussian_kernel(std::span<const double> a, std::span<const double> b,
                              const KernelParams& params) {
    if (a.size() != b.size()) {
        throw InputError("kernel arguments differ in dimension (" + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()) + ")");
    }
    double sq = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
        const double diff = a[d] - b[d];
        sq += diff * diff;
    }
    if (params.infinite) return sq == 0.0 ? 1.0 : 0.0;
    return std::exp(-params.eta * sq);
}

/// Row-major square matrix; only what the dual needs.
class SquareMatrix {
public:
    SquareMatrix() = default;
    explicit SquareMatrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

    static SquareMatrix identity(std::size_t n) {
        SquareMatrix m(n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t size() const { return n_; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * n_, n_}; }

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

using Point = std::vector<double>;

inline SquareMatrix kernel_matrix(std::span<const Point> points, const KernelParams& params) {
    SquareMatrix k(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        k(i, i) = gaussian_kernel(points[i], points[i], params);
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            k(i, j) = k(j, i) = gaussian_kernel(points[i], points[j], params);
        }
    }
    return k;
}

/// ỹ_(k): +1 where the multi-class label equals k, -1 elsewhere.
inline std::vector<int> binarize_labels(std::span<const int> labels, int k, int num_classes) {
    if (k < 1 || k > num_classes) {
        throw InputError("class " + std::to_string(k) + " outside 1.." +
                         std::to_string(num_classes));
    }
    std::vector<int> out;
    out.reserve(labels.size());
    for (int y : labels) {
        if (y < 1 || y > num_classes) {
            throw InputError("label " + std::to_string(y) + " outside 1.." +
                             std::to_string(num_classes));
        }
        out.push_back(y == k ? +1 : -1);
    }
    return out;
}

/// One binary subproblem of the dual QP.
struct BinaryProblem {
    std::vector<int> labels;
    SquareMatrix kernel;
    double upper_bound = 2.0;
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;

    BinaryProblem() = default;
    BinaryProblem(std::vector<int> y, SquareMatrix k, double ub = 2.0)
        : labels(std::move(y)), kernel(std::move(k)), upper_bound(ub) {
        if (kernel.size() != labels.size()) {
            throw InputError("kernel matrix is " + std::to_string(kernel.size()) +
                             "x" + std::to_string(kernel.size()) + " but there are " +
                             std::to_string(labels.size()) + " labels");
        }
        if (!(upper_bound > 0.0)) throw InputError("upper bound must be positive");
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == 1) {
                ++n_pos;
            } else if (labels[i] == -1) {
                ++n_neg;
            } else {
                throw InputError("binary labels must be +1 or -1");
            }
            for (std::size_t j = 0; j < i; ++j) {
                if (kernel(i, j) != kernel(j, i)) throw InputError("kernel matrix not symmetric");
            }
        }
    }

    std::size_t size() const { return labels.size(); }
};

struct SvmSolution {
    std::vector<double> alphas;
    double offset = 0.0;
    double objective = 0.0;
    double kkt_residual = 0.0;
    std::size_t iterations = 0;
};

struct AnalyticMultipliers {
    double alpha_pos;
    double alpha_neg;
};

/// α⁺ = 2N⁻/N, α⁻ = 2N⁺/N. Throws DegenerateClass when either side is empty.
inline AnalyticMultipliers analytic_multipliers(std::size_t n_pos, std::size_t n_neg) {
    if (n_pos == 0 || n_neg == 0) throw DegenerateClass(n_pos, n_neg);
    const double n = static_cast<double>(n_pos + n_neg);
    return {2.0 * static_cast<double>(n_neg) / n, 2.0 * static_cast<double>(n_pos) / n};
}

inline AnalyticMultipliers analytic_multipliers(const BinaryProblem& problem) {
    return analytic_multipliers(problem.n_pos, problem.n_neg);
}

/// Expands the two class-level multipliers to one value per training point.
inline std::vector<double> analytic_alphas(const BinaryProblem& problem) {
    const auto m = analytic_multipliers(problem);
    std::vector<double> alphas(problem.size());
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        alphas[i] = problem.labels[i] > 0 ? m.alpha_pos : m.alpha_neg;
    }
    return alphas;
}

/// Scaled (offset-free) decision value at a training point:
/// sgn(label) · 4N⁺N⁻/(N⁺+N⁻), and 0 when a class side is empty.
inline double analytic_decision_value(int label_sign, std::size_t n_pos, std::size_t n_neg) {
    if (n_pos == 0 || n_neg == 0) return 0.0;
    const double p = static_cast<double>(n_pos);
    const double q = static_cast<double>(n_neg);
    const double magnitude = 4.0 * p * q / (p + q);
    return label_sign > 0 ? magnitude : -magnitude;
}

/// W(α) = ½ ΣΣ αᵢαⱼỹᵢỹⱼKᵢⱼ − Σ αᵢ.
inline double dual_objective(std::span<const double> alphas, const BinaryProblem& problem) {
    if (alphas.size() != problem.size()) throw InputError("alpha vector has wrong length");
    double quad = 0.0;
    double lin = 0.0;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        lin += alphas[i];
        if (alphas[i] == 0.0) continue;
        for (std::size_t j = 0; j < alphas.size(); ++j) {
            quad += alphas[i] * alphas[j] * problem.labels[i] * problem.labels[j] *
                    problem.kernel(i, j);
        }
    }
    return 0.5 * quad - lin;
}

struct QpOptions {
    double tolerance = 1e-8;
    std::size_t max_iterations = 1'000'000;
};

struct OffsetEstimate {
    double value = 0.0;
    /// max - min of the per-support-vector offsets; 0 for an exact KKT point.
    double spread = 0.0;
    std::size_t support_vectors = 0;
};

/// b = ỹⱼ − Σᵢ αᵢỹᵢKᵢⱼ, averaged over every j with αⱼ ≠ 0.
inline OffsetEstimate compute_offset(std::span<const double> alphas, const BinaryProblem& problem) {
    if (alphas.size() != problem.size()) throw InputError("alpha vector has wrong length");
    OffsetEstimate est;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double sum = 0.0;
    for (std::size_t j = 0; j < alphas.size(); ++j) {
        if (alphas[j] == 0.0) continue;
        double s = 0.0;
        for (std::size_t i = 0; i < alphas.size(); ++i) {
            s += alphas[i] * problem.labels[i] * problem.kernel(i, j);
        }
        const double b = problem.labels[j] - s;
        sum += b;
        lo = std::min(lo, b);
        hi = std::max(hi, b);
        ++est.support_vectors;
    }
    if (est.support_vectors == 0) throw NoSupportVectors();
    est.value = sum / static_cast<double>(est.support_vectors);
    est.spread = hi - lo;
    return est;
}

/// Numerical oracle for the dual: pairwise coordinate descent on W(α) with the
/// maximal-violating-pair rule, starting from α = 0. Every step moves two
/// multipliers along the equality constraint and clips to [0, U_b].
inline SvmSolution solve_binary_qp(const BinaryProblem& problem, const QpOptions& opts = {}) {
    if (!(opts.tolerance > 0.0)) throw InputError("QP tolerance must be positive");
    const std::size_t n = problem.size();
    const auto& y = problem.labels;
    const auto& k = problem.kernel;
    const double c = problem.upper_bound;
    constexpr double kTau = 1e-12;

    SvmSolution sol;
    sol.alphas.assign(n, 0.0);
    auto& a = sol.alphas;
    // Gradient of W: G = Qα − 1 with Q_ij = y_i y_j K_ij.
    std::vector<double> grad(n, -1.0);

    auto in_up = [&](std::size_t t) { return y[t] > 0 ? a[t] < c : a[t] > 0.0; };
    auto in_low = [&](std::size_t t) { return y[t] > 0 ? a[t] > 0.0 : a[t] < c; };

    std::size_t iter = 0;
    double residual = 0.0;
    for (;; ++iter) {
        double g_max = -std::numeric_limits<double>::infinity();
        double g_min = std::numeric_limits<double>::infinity();
        std::size_t i = n;
        std::size_t j = n;
        for (std::size_t t = 0; t < n; ++t) {
            const double v = -y[t] * grad[t];
            if (in_up(t) && v > g_max) {
                g_max = v;
                i = t;
            }
            if (in_low(t) && v < g_min) {
                g_min = v;
                j = t;
            }
        }
        residual = (i == n || j == n) ? 0.0 : g_max - g_min;
        if (residual < opts.tolerance) break;
        if (iter >= opts.max_iterations) throw NonConvergence(residual, iter);

        const double old_i = a[i];
        const double old_j = a[j];
        const double qij = y[i] * y[j] * k(i, j);
        if (y[i] != y[j]) {
            double quad = k(i, i) + k(j, j) + 2.0 * qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = a[i] - a[j];
            a[i] += delta;
            a[j] += delta;
            if (diff > 0.0) {
                if (a[j] < 0.0) {
                    a[j] = 0.0;
                    a[i] = diff;
                }
            } else if (a[i] < 0.0) {
                a[i] = 0.0;
                a[j] = -diff;
            }
            if (diff > 0.0) {
                if (a[i] > c) {
                    a[i] = c;
                    a[j] = c - diff;
                }
            } else if (a[j] > c) {
                a[j] = c;
                a[i] = c + diff;
            }
        } else {
            double quad = k(i, i) + k(j, j) - 2.0 * qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = a[i] + a[j];
            a[i] -= delta;
            a[j] += delta;
            if (sum > c) {
                if (a[i] > c) {
                    a[i] = c;
                    a[j] = sum - c;
                }
                if (a[j] > c) {
                    a[j] = c;
                    a[i] = sum - c;
                }
            } else {
                if (a[j] < 0.0) {
                    a[j] = 0.0;
                    a[i] = sum;
                }
                if (a[i] < 0.0) {
                    a[i] = 0.0;
                    a[j] = sum;
                }
            }
        }

        const double di = a[i] - old_i;
        const double dj = a[j] - old_j;
        for (std::size_t t = 0; t < n; ++t) {
            grad[t] += y[t] * (y[i] * k(t, i) * di + y[j] * k(t, j) * dj);
        }
    }

    sol.iterations = iter;
    sol.kkt_residual = residual;
    sol.objective = dual_objective(a, problem);
    const bool any_sv = std::any_of(a.begin(), a.end(), [](double v) { return v != 0.0; });
    sol.offset = any_sv ? compute_offset(a, problem).value : 0.0;
    return sol;
}

/// Raw decision value h(x⁽ˡ⁾) = Σ αᵢỹᵢK(x⁽ˡ⁾, x⁽ⁱ⁾) + b at a training point.
inline double decision_function(std::span<const double> alphas, double offset,
                                const BinaryProblem& problem, std::size_t query) {
    if (alphas.size() != problem.size()) throw InputError("alpha vector has wrong length");
    if (query >= problem.size()) throw InputError("query index out of range");
    double h = offset;
    const auto row = problem.kernel.row(query);
    for (std::size_t i = 0; i < alphas.size(); ++i) h += alphas[i] * problem.labels[i] * row[i];
    return h;
}

inline double decision_function(const SvmSolution& sol, const BinaryProblem& problem,
                                std::size_t query) {
    return decision_function(sol.alphas, sol.offset, problem, query);
}

/// Decision value at an arbitrary point given the training points.
inline double decision_function(std::span<const double> alphas, double offset,
                                std::span<const int> labels, std::span<const Point> points,
                                const KernelParams& params, std::span<const double> query) {
    if (alphas.size() != labels.size() || labels.size() != points.size()) {
        throw InputError("alphas, labels and points differ in length");
    }
    double h = offset;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        if (alphas[i] != 0.0) h += alphas[i] * labels[i] * gaussian_kernel(query, points[i], params);
    }
    return h;
}

/// Offset-free decision value h̃(x⁽ˡ⁾) = h(x⁽ˡ⁾)·Σα, written in terms of
/// ΔKᵢⱼ = 1 − Kᵢⱼ. Valid when α satisfies the equality constraint and every
/// support vector yields the same offset.
inline double h_tilde(std::span<const double> alphas, const BinaryProblem& problem, std::size_t l) {
    const std::size_t n = problem.size();
    if (alphas.size() != n) throw InputError("alpha vector has wrong length");
    if (l >= n) throw InputError("state index out of range");
    const auto& y = problem.labels;
    auto dk = [&](std::size_t i, std::size_t j) { return 1.0 - problem.kernel(i, j); };

    double first = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i == l) continue;
        first += alphas[i] * alphas[i] * (-2.0 * y[i]) * dk(l, i);
    }
    double second = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i == l || alphas[i] == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == l || j == i) continue;
            second += alphas[i] * alphas[j] * (y[i] + y[j]) * (dk(i, j) - dk(l, i) - dk(l, j));
        }
    }
    return first + 0.5 * second;
}

/// θ of the one-vs-rest policy: the label table plus, per class k, the
/// binarized labels ỹ_(k) and their counts. Decision values follow in closed
/// form, so no kernel evaluations are needed at prediction time.
class PolicyParams {
public:
    PolicyParams() = default;

    PolicyParams(std::vector<int> labels, int num_classes)
        : labels_(std::move(labels)), num_classes_(num_classes) {
        if (num_classes < 1) throw InputError("need at least one class");
        binary_.resize(static_cast<std::size_t>(num_classes));
        n_pos_.assign(static_cast<std::size_t>(num_classes), 0);
        for (int k = 1; k <= num_classes; ++k) {
            const auto yk = binarize_labels(labels_, k, num_classes);
            auto& dst = binary_[static_cast<std::size_t>(k - 1)];
            dst.assign(yk.begin(), yk.end());
        }
        for (int y : labels_) ++n_pos_[static_cast<std::size_t>(y - 1)];
    }

    int num_classes() const { return num_classes_; }
    std::size_t num_states() const { return labels_.size(); }
    const std::vector<int>& labels() const { return labels_; }
    int label(std::size_t i) const { return labels_.at(i); }

    std::span<const std::int8_t> binary_labels(int k) const {
        return binary_.at(static_cast<std::size_t>(k - 1));
    }
    int binary_label(int k, std::size_t i) const { return binary_labels(k)[i]; }
    std::size_t n_pos(int k) const { return n_pos_.at(static_cast<std::size_t>(k - 1)); }
    std::size_t n_neg(int k) const { return labels_.size() - n_pos(k); }

    /// Fewer than two distinct labels: every decision value is zero.
    bool degenerate() const {
        return std::count_if(n_pos_.begin(), n_pos_.end(), [](std::size_t c) { return c > 0; }) < 2;
    }

    double decision_value(int k, std::size_t i) const {
        return analytic_decision_value(binary_label(k, i), n_pos(k), n_neg(k));
    }

    /// Changes one state's label and updates ỹ and the counts in O(M).
    /// Equivalent to refitting from the modified label table.
    void relabel(std::size_t i, int k) {
        if (k < 1 || k > num_classes_) throw InputError("label out of range");
        const int old = labels_.at(i);
        if (old == k) return;
        --n_pos_[static_cast<std::size_t>(old - 1)];
        ++n_pos_[static_cast<std::size_t>(k - 1)];
        binary_[static_cast<std::size_t>(old - 1)][i] = -1;
        binary_[static_cast<std::size_t>(k - 1)][i] = +1;
        labels_[i] = k;
    }

    friend bool operator==(const PolicyParams&, const PolicyParams&) = default;

private:
    std::vector<int> labels_;
    int num_classes_ = 0;
    std::vector<std::vector<std::int8_t>> binary_;
    std::vector<std::size_t> n_pos_;
};

/// argmax_k h_(k)(x⁽ⁱ⁾), lowest class on ties. When every decision value is
/// zero (all states share one label) the shared label is returned.
inline int multiclass_predict(const PolicyParams& params, std::size_t i) {
    if (i >= params.num_states()) throw InputError("state index out of range");
    if (params.degenerate()) return params.label(i);
    int best = 1;
    double best_value = params.decision_value(1, i);
    for (int k = 2; k <= params.num_classes(); ++k) {
        const double v = params.decision_value(k, i);
        if (v > best_value) {
            best_value = v;
            best = k;
        }
    }
    return best;
}

}  // namespace safe_rl::svm
