#pragma once

// Binary C-SVM trained by SMO on the dual (maximal violating pair working
// set selection).

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ppgnorm/error.hpp"
#include "ppgnorm/util.hpp"

namespace ppgnorm {

enum class KernelKind { Linear, PolynomialCubic, Gaussian };

constexpr std::string_view kernel_name(KernelKind kind) {
    switch (kind) {
        case KernelKind::Linear: return "linear";
        case KernelKind::PolynomialCubic: return "cubic";
        case KernelKind::Gaussian: return "gaussian";
    }
    return "unknown";
}

struct KernelSpec {
    KernelKind kind = KernelKind::Linear;
    double gaussian_scale = 3.3;
    double poly_offset = 1.0;

    double operator()(std::span<const double> a, std::span<const double> b) const {
        switch (kind) {
            case KernelKind::Linear: return dot(a, b);
            case KernelKind::PolynomialCubic: {
                const double v = dot(a, b) + poly_offset;
                return v * v * v;
            }
            case KernelKind::Gaussian: {
                double d2 = 0.0;
                for (std::size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
                return std::exp(-d2 / (gaussian_scale * gaussian_scale));
            }
        }
        return 0.0;
    }

    static double dot(std::span<const double> a, std::span<const double> b) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
        return s;
    }
};

struct SvmParams {
    double box_constraint = 1.0;
    double tolerance = 1e-3;
    long long max_iterations = 10'000'000;
};

struct SvmModel {
    KernelSpec kernel;
    double box_constraint = 1.0;
    std::size_t dimension = 0;
    std::vector<std::vector<double>> support_vectors;
    std::vector<double> coefficients;  // alpha_i * y_i
    double bias = 0.0;
    long long iterations = 0;
};

struct SvmDecision {
    int label = 1;
    double value = 0.0;
};

inline SvmModel train_svm(std::span<const std::vector<double>> x, std::span<const int> y,
                          const KernelSpec& kernel, const SvmParams& params = {}) {
    const std::size_t n = x.size();
    if (n == 0) throw Error(ErrorCode::EmptyInput, "train_svm: empty training set");
    if (y.size() != n) throw Error(ErrorCode::DimensionMismatch, "train_svm: label count differs from rows");
    bool has_pos = false;
    bool has_neg = false;
    for (int v : y) {
        if (v == 1) has_pos = true;
        else if (v == -1) has_neg = true;
        else throw Error(ErrorCode::InvalidArgument, "train_svm: labels must be +1 or -1");
    }
    if (!has_pos || !has_neg) throw Error(ErrorCode::SingleClassInput, "train_svm: one class only");
    const std::size_t dim = x.front().size();
    for (const auto& row : x) {
        if (row.size() != dim) throw Error(ErrorCode::DimensionMismatch, "train_svm: ragged rows");
    }
    const double c = params.box_constraint;
    if (!(c > 0.0)) throw Error(ErrorCode::InvalidArgument, "train_svm: C must be positive");

    // Q_ij = y_i y_j K(x_i, x_j)
    std::vector<double> q(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const double v = static_cast<double>(y[i] * y[j]) * kernel(x[i], x[j]);
            q[i * n + j] = v;
            q[j * n + i] = v;
        }
    }
    auto qij = [&](std::size_t i, std::size_t j) { return q[i * n + j]; };

    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0);
    auto in_up = [&](std::size_t t) { return y[t] == 1 ? alpha[t] < c : alpha[t] > 0.0; };
    auto in_low = [&](std::size_t t) { return y[t] == 1 ? alpha[t] > 0.0 : alpha[t] < c; };
    constexpr double kTau = 1e-12;

    long long iter = 0;
    for (;; ++iter) {
        if (iter >= params.max_iterations) {
            throw Error(ErrorCode::NoConvergence,
                        "train_svm: no convergence after " + std::to_string(iter) + " iterations");
        }
        std::size_t i = n;
        std::size_t j = n;
        double g_max = -std::numeric_limits<double>::infinity();
        double g_min = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            const double v = -static_cast<double>(y[t]) * grad[t];
            if (in_up(t) && v > g_max) {
                g_max = v;
                i = t;
            }
            if (in_low(t) && v < g_min) {
                g_min = v;
                j = t;
            }
        }
        if (i == n || j == n || g_max - g_min < params.tolerance) break;

        const double old_i = alpha[i];
        const double old_j = alpha[j];
        if (y[i] != y[j]) {
            double quad = qij(i, i) + qij(j, j) + 2.0 * qij(i, j);
            if (quad <= 0.0) quad = kTau;
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
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if (alpha[j] > c) {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            double quad = qij(i, i) + qij(j, j) - 2.0 * qij(i, j);
            if (quad <= 0.0) quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > c) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if (alpha[j] < 0.0) {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if (sum > c) {
                if (alpha[j] > c) {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        const double di = alpha[i] - old_i;
        const double dj = alpha[j] - old_j;
        for (std::size_t t = 0; t < n; ++t) grad[t] += qij(i, t) * di + qij(j, t) * dj;
    }

    // Bias from free support vectors; midpoint of the feasible interval otherwise.
    double free_sum = 0.0;
    std::size_t free_count = 0;
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = static_cast<double>(y[t]) * grad[t];
        if (alpha[t] > 0.0 && alpha[t] < c) {
            free_sum += yg;
            ++free_count;
        } else if ((alpha[t] >= c) == (y[t] == -1)) {
            ub = std::min(ub, yg);
        } else {
            lb = std::max(lb, yg);
        }
    }
    const double rho = free_count > 0 ? free_sum / static_cast<double>(free_count) : 0.5 * (ub + lb);

    SvmModel model;
    model.kernel = kernel;
    model.box_constraint = c;
    model.dimension = dim;
    model.bias = -rho;
    model.iterations = iter;
    for (std::size_t t = 0; t < n; ++t) {
        if (alpha[t] > 0.0) {
            model.support_vectors.push_back(x[t]);
            model.coefficients.push_back(alpha[t] * static_cast<double>(y[t]));
        }
    }
    return model;
}

// sign(sum coef_i K(sv_i, x) + b); a zero decision value maps to +1.
inline SvmDecision predict_svm(const SvmModel& model, std::span<const double> x) {
    if (x.size() != model.dimension) {
        throw Error(ErrorCode::DimensionMismatch, "predict_svm: expected " + std::to_string(model.dimension) +
                                                      " features, got " + std::to_string(x.size()));
    }
    double v = model.bias;
    for (std::size_t i = 0; i < model.support_vectors.size(); ++i) {
        v += model.coefficients[i] * model.kernel(model.support_vectors[i], x);
    }
    return {v >= 0.0 ? 1 : -1, v};
}

inline std::string to_text(const SvmModel& m) {
    std::ostringstream os;
    os << "svm_model 1\n";
    os << "kernel " << kernel_name(m.kernel.kind) << '\n';
    os << "gaussian_scale " << format_double(m.kernel.gaussian_scale) << '\n';
    os << "poly_offset " << format_double(m.kernel.poly_offset) << '\n';
    os << "box_constraint " << format_double(m.box_constraint) << '\n';
    os << "bias " << format_double(m.bias) << '\n';
    os << "dimension " << m.dimension << '\n';
    os << "support_vectors " << m.support_vectors.size() << '\n';
    for (std::size_t i = 0; i < m.support_vectors.size(); ++i) {
        os << format_double(m.coefficients[i]);
        for (double v : m.support_vectors[i]) os << ' ' << format_double(v);
        os << '\n';
    }
    return os.str();
}

inline SvmModel svm_from_text(std::string_view text) {
    std::istringstream is{std::string(text)};
    auto fail = [](const std::string& what) -> SvmModel {
        throw Error(ErrorCode::MalformedRow, "svm model text: " + what);
    };
    std::string key;
    std::string kernel;
    int version = 0;
    SvmModel m;
    std::size_t count = 0;
    if (!(is >> key >> version) || key != "svm_model" || version != 1) return fail("bad header");
    if (!(is >> key >> kernel) || key != "kernel") return fail("missing kernel");
    if (kernel == "linear") m.kernel.kind = KernelKind::Linear;
    else if (kernel == "cubic") m.kernel.kind = KernelKind::PolynomialCubic;
    else if (kernel == "gaussian") m.kernel.kind = KernelKind::Gaussian;
    else return fail("unknown kernel " + kernel);
    if (!(is >> key >> m.kernel.gaussian_scale) || key != "gaussian_scale") return fail("gaussian_scale");
    if (!(is >> key >> m.kernel.poly_offset) || key != "poly_offset") return fail("poly_offset");
    if (!(is >> key >> m.box_constraint) || key != "box_constraint") return fail("box_constraint");
    if (!(is >> key >> m.bias) || key != "bias") return fail("bias");
    if (!(is >> key >> m.dimension) || key != "dimension") return fail("dimension");
    if (!(is >> key >> count) || key != "support_vectors") return fail("support_vectors");
    m.support_vectors.assign(count, std::vector<double>(m.dimension));
    m.coefficients.assign(count, 0.0);
    for (std::size_t i = 0; i < count; ++i) {
        if (!(is >> m.coefficients[i])) return fail("coefficient " + std::to_string(i));
        for (double& v : m.support_vectors[i]) {
            if (!(is >> v)) return fail("support vector " + std::to_string(i));
        }
    }
    return m;
}

}  // namespace ppgnorm
