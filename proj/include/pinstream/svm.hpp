#ifndef PINSTREAM_SVM_HPP
#define PINSTREAM_SVM_HPP

// Binary RBF-kernel SVM trained by sequential minimal optimization.
//
// Dual problem:  max_l  sum_i l_i - 1/2 sum_ij l_i l_j y_i y_j K(x_i, x_j)
//                s.t.   sum_i l_i y_i = 0,  0 <= l_i <= C.
// Decision:      f(x) = sum_i l_i y_i K(x_i, x) - b;  class A iff f(x) > 0.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "pinstream/error.hpp"

namespace pinstream {

inline double rbf_kernel(std::span<const double> x, std::span<const double> y, double gamma)
{
    if (x.size() != y.size())
        throw Error(ErrorCode::DimensionMismatch, "kernel arguments differ in dimension");
    if (!(gamma > 0.0))
        throw Error(ErrorCode::InvalidArgument, "gamma must be positive");
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        d2 += d * d;
    }
    return std::exp(-gamma * d2);
}

struct BinarySvm {
    std::vector<std::vector<double>> support_vectors;
    std::vector<double> coef; ///< l_i * y_i for each support vector
    double bias = 0.0;
    double gamma = 1.0;
    double C = 1.0;

    friend bool operator==(const BinarySvm&, const BinarySvm&) = default;
};

struct SmoOptions {
    double C = 1.0;
    double gamma = 1.0;
    double tol = 1e-3;
    /// Iteration budget is max_passes * n pair updates.
    int max_passes = 200;
};

struct SmoResult {
    BinarySvm model;
    std::vector<double> alpha; ///< multipliers for every training row
    double objective = 0.0;    ///< dual objective at the solution
    double violation = 0.0;    ///< final maximal KKT violation
    long iterations = 0;
};

inline double decision(const BinarySvm& m, std::span<const double> x)
{
    double f = 0.0;
    for (std::size_t i = 0; i < m.support_vectors.size(); ++i)
        f += m.coef[i] * rbf_kernel(m.support_vectors[i], x, m.gamma);
    return f - m.bias;
}

/// +1 (class A) when f(x) > 0, otherwise -1 (class B); f(x) == 0 goes to B.
inline int predict_binary(const BinarySvm& m, std::span<const double> x) { return decision(m, x) > 0.0 ? 1 : -1; }

/// Dual objective for multipliers `alpha` on a kernel matrix.
inline double dual_objective(std::span<const double> alpha, std::span<const int> y,
                             const std::vector<std::vector<double>>& K)
{
    double lin = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        lin += alpha[i];
        for (std::size_t j = 0; j < alpha.size(); ++j)
            quad += alpha[i] * alpha[j] * y[i] * y[j] * K[i][j];
    }
    return lin - 0.5 * quad;
}

inline std::vector<std::vector<double>> kernel_matrix(std::span<const std::vector<double>> X, double gamma)
{
    const std::size_t n = X.size();
    std::vector<std::vector<double>> K(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        K[i][i] = 1.0;
        for (std::size_t j = i + 1; j < n; ++j)
            K[i][j] = K[j][i] = rbf_kernel(X[i], X[j], gamma);
    }
    return K;
}

/// SMO with maximal-violating-pair working set selection: the first index is
/// the largest KKT violator, the second maximizes |E_1 - E_2| among the
/// multipliers that can move the other way. Stops once the violation gap
/// m(a) - M(a) drops below tol, which bounds every KKT residual on
/// y_i f(x_i) by tol.
inline SmoResult smo_train(std::span<const std::vector<double>> X, std::span<const int> y, const SmoOptions& opt)
{
    const std::size_t n = X.size();
    if (y.size() != n)
        throw Error(ErrorCode::LengthMismatch, "feature and label counts differ");
    if (!(opt.C > 0.0))
        throw Error(ErrorCode::InvalidArgument, "C must be positive");
    bool pos = false, neg = false;
    for (int v : y) {
        if (v == 1)
            pos = true;
        else if (v == -1)
            neg = true;
        else
            throw Error(ErrorCode::InvalidArgument, "labels must be +1 or -1");
    }
    if (!pos || !neg)
        throw Error(ErrorCode::DegenerateLabels, "both classes must be present");
    for (const auto& r : X)
        if (r.size() != X.front().size())
            throw Error(ErrorCode::DimensionMismatch, "ragged training matrix");

    const auto K = kernel_matrix(X, opt.gamma);
    const double C = opt.C;
    std::vector<double> alpha(n, 0.0);
    // gradient of the minimization form 1/2 a'Qa - e'a, Q_ij = y_i y_j K_ij
    std::vector<double> grad(n, -1.0);

    const auto in_up = [&](std::size_t t) { return (y[t] == 1 && alpha[t] < C) || (y[t] == -1 && alpha[t] > 0.0); };
    const auto in_low = [&](std::size_t t) { return (y[t] == 1 && alpha[t] > 0.0) || (y[t] == -1 && alpha[t] < C); };

    const long budget = static_cast<long>(std::max(opt.max_passes, 1)) * static_cast<long>(std::max<std::size_t>(n, 1));
    constexpr double tau = 1e-12;
    double gap = std::numeric_limits<double>::infinity();
    long it = 0;
    for (;; ++it) {
        double gmax = -std::numeric_limits<double>::infinity();
        double gmin = std::numeric_limits<double>::infinity();
        std::size_t i = n;
        for (std::size_t t = 0; t < n; ++t) {
            if (in_up(t) && -y[t] * grad[t] > gmax) {
                gmax = -y[t] * grad[t];
                i = t;
            }
            if (in_low(t))
                gmin = std::min(gmin, -y[t] * grad[t]);
        }
        gap = gmax - gmin;
        if (i == n || gap < opt.tol)
            break;
        if (it >= budget)
            throw ConvergenceError("SMO did not converge within " + std::to_string(budget) + " iterations (gap " +
                                       std::to_string(gap) + ")",
                                   gap);

        // second choice: largest objective decrease among violating partners
        std::size_t j = n;
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            if (!in_low(t))
                continue;
            const double b = gmax + y[t] * grad[t];
            if (b <= 0.0)
                continue;
            double a = K[i][i] + K[t][t] - 2.0 * K[i][t];
            if (a <= 0.0)
                a = tau;
            const double score = b * b / a;
            if (score > best) {
                best = score;
                j = t;
            }
        }
        if (j == n)
            break;

        const double old_ai = alpha[i], old_aj = alpha[j];
        double quad = K[i][i] + K[j][j] - 2.0 * K[i][j];
        if (quad <= 0.0)
            quad = tau;
        if (y[i] != y[j]) {
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if (diff > 0.0) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = C - diff;
                }
            } else if (alpha[j] > C) {
                alpha[j] = C;
                alpha[i] = C + diff;
            }
        } else {
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > C) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = sum - C;
                }
            } else if (alpha[j] < 0.0) {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if (sum > C) {
                if (alpha[j] > C) {
                    alpha[j] = C;
                    alpha[i] = sum - C;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        const double dai = alpha[i] - old_ai, daj = alpha[j] - old_aj;
        for (std::size_t t = 0; t < n; ++t)
            grad[t] += y[t] * (y[i] * K[t][i] * dai + y[j] * K[t][j] * daj);
    }

    // threshold: average over free multipliers, else midpoint of the bounds
    double ub = std::numeric_limits<double>::infinity(), lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = y[t] * grad[t];
        if (alpha[t] >= C) {
            if (y[t] == -1)
                ub = std::min(ub, yg);
            else
                lb = std::max(lb, yg);
        } else if (alpha[t] <= 0.0) {
            if (y[t] == 1)
                ub = std::min(ub, yg);
            else
                lb = std::max(lb, yg);
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);

    SmoResult r;
    r.alpha = alpha;
    r.violation = gap;
    r.iterations = it;
    r.model.gamma = opt.gamma;
    r.model.C = C;
    r.model.bias = rho;
    for (std::size_t t = 0; t < n; ++t) {
        if (alpha[t] > 0.0) {
            r.model.support_vectors.push_back(X[t]);
            r.model.coef.push_back(alpha[t] * y[t]);
        }
    }
    std::vector<int> yv(y.begin(), y.end());
    r.objective = dual_objective(alpha, yv, K);
    return r;
}

} // namespace pinstream

#endif
