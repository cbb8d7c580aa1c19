#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "ppgnorm/cart.hpp"
#include "ppgnorm/classifier.hpp"
#include "ppgnorm/svm.hpp"

using namespace ppgnorm;

namespace {

using Matrix = std::vector<std::vector<double>>;

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::IoError;
}

const Matrix kSquare{{0, 0}, {0, 1}, {2, 0}, {2, 1}};
const std::vector<int> kSquareY{-1, -1, 1, 1};

}  // namespace

TEST(Kernel, ValuesAndSymmetry) {
    const std::vector<double> a{1, 2, 3}, b{-1, 0.5, 2};
    const KernelSpec lin{KernelKind::Linear};
    const KernelSpec cub{KernelKind::PolynomialCubic};
    const KernelSpec gau{KernelKind::Gaussian};
    EXPECT_EQ(lin(a, b), 6.0);
    EXPECT_EQ(cub(a, b), 343.0);
    EXPECT_EQ(gau(a, a), 1.0);
    EXPECT_NEAR(gau(a, b), std::exp(-(4 + 2.25 + 1) / (3.3 * 3.3)), 1e-15);
    for (const auto& k : {lin, cub, gau}) EXPECT_EQ(k(a, b), k(b, a));
    EXPECT_GT(gau(a, std::vector<double>{100, 100, 100}), 0.0 - 1e-300);
    EXPECT_LE(gau(a, b), 1.0);
}

TEST(Svm, SquareExampleBoundaryAtOne) {
    const auto m = train_svm(kSquare, kSquareY, {KernelKind::Linear}, {});
    EXPECT_EQ(predict_svm(m, std::vector<double>{3, 0}).label, 1);
    EXPECT_EQ(predict_svm(m, std::vector<double>{-1, 1}).label, -1);
    const auto mid = predict_svm(m, std::vector<double>{1, 0.5});
    EXPECT_NEAR(mid.value, 0.0, 1e-9);
    EXPECT_EQ(mid.label, 1);
    for (std::size_t i = 0; i < kSquare.size(); ++i) {
        EXPECT_NEAR(std::fabs(predict_svm(m, kSquare[i]).value), 1.0, 1e-3);
    }
}

TEST(Svm, ZeroDecisionMapsToPositive) {
    SvmModel m;
    m.kernel = {KernelKind::Linear};
    m.dimension = 1;
    m.support_vectors = {{1.0}};
    m.coefficients = {1.0};
    m.bias = -2.0;
    const auto d = predict_svm(m, std::vector<double>{2.0});
    EXPECT_EQ(d.value, 0.0);
    EXPECT_EQ(d.label, 1);
}

TEST(Svm, DualFeasibilityAndMarginConditions) {
    std::mt19937_64 gen(5);
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix x;
    std::vector<int> y;
    for (int i = 0; i < 60; ++i) {
        const int label = i % 2 ? 1 : -1;
        x.push_back({n(gen) + 0.8 * label, n(gen) - 0.3 * label, n(gen)});
        y.push_back(label);
    }
    for (auto kind : {KernelKind::Linear, KernelKind::PolynomialCubic, KernelKind::Gaussian}) {
        SvmParams params;
        const auto m = train_svm(x, y, {kind}, params);
        double balance = 0;
        for (double c : m.coefficients) {
            EXPECT_LE(std::fabs(c), params.box_constraint + 1e-12);
            balance += c;
        }
        EXPECT_LT(std::fabs(balance), 1e-6);
        // Free support vectors sit on the margin.
        for (std::size_t s = 0; s < m.support_vectors.size(); ++s) {
            const double a = std::fabs(m.coefficients[s]);
            if (a > 1e-8 && a < params.box_constraint - 1e-8) {
                EXPECT_NEAR(std::fabs(predict_svm(m, m.support_vectors[s]).value), 1.0, 2e-3);
            }
        }
    }
}

TEST(Svm, GaussianClusterCentroids) {
    Matrix x;
    std::vector<int> y;
    std::mt19937_64 gen(8);
    std::normal_distribution<double> n(0.0, 0.3);
    for (int i = 0; i < 20; ++i) {
        x.push_back({n(gen), n(gen)});
        y.push_back(-1);
        x.push_back({10 + n(gen), 10 + n(gen)});
        y.push_back(1);
    }
    const auto m = train_svm(x, y, {KernelKind::Gaussian}, {});
    EXPECT_EQ(predict_svm(m, std::vector<double>{0, 0}).label, -1);
    EXPECT_EQ(predict_svm(m, std::vector<double>{10, 10}).label, 1);
}

TEST(Svm, Errors) {
    EXPECT_EQ(code_of([] { train_svm(Matrix{{0.0}, {1.0}}, std::vector<int>{1, 1}, {}, {}); }),
              ErrorCode::SingleClassInput);
    const auto m = train_svm(kSquare, kSquareY, {}, {});
    EXPECT_EQ(code_of([&] { predict_svm(m, std::vector<double>{1.0}); }), ErrorCode::DimensionMismatch);
    SvmParams tiny;
    tiny.max_iterations = 1;
    Matrix noisy;
    std::vector<int> ny;
    std::mt19937_64 gen(1);
    for (int i = 0; i < 40; ++i) {
        noisy.push_back({std::normal_distribution<double>(0, 1)(gen)});
        ny.push_back(i % 2 ? 1 : -1);
    }
    EXPECT_EQ(code_of([&] { train_svm(noisy, ny, {}, tiny); }), ErrorCode::NoConvergence);
}

TEST(Svm, TextRoundTrip) {
    const auto m = train_svm(kSquare, kSquareY, {KernelKind::PolynomialCubic}, {});
    const auto back = svm_from_text(to_text(m));
    for (const auto& p : kSquare) EXPECT_EQ(predict_svm(back, p).value, predict_svm(m, p).value);
}

TEST(Svm, AgreesWithMaxMarginOracle) {
    std::mt19937_64 gen(77);
    int checked = 0;
    while (checked < 25) {
        const std::size_t d = 1 + gen() % 3;
        const std::size_t n = 4 + gen() % 17;
        Matrix x;
        std::vector<int> y;
        std::normal_distribution<double> g(0.0, 1.0);
        std::vector<double> dir(d);
        for (auto& v : dir) v = g(gen);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> p(d);
            for (auto& v : p) v = g(gen) * 2.0;
            double s = 0;
            for (std::size_t k = 0; k < d; ++k) s += p[k] * dir[k];
            if (std::fabs(s) < 0.5) continue;
            x.push_back(p);
            y.push_back(s > 0 ? 1 : -1);
        }
        if (std::count(y.begin(), y.end(), 1) == 0 || std::count(y.begin(), y.end(), -1) == 0) continue;
        const auto ref = oracle::max_margin(x, y);
        ASSERT_TRUE(ref.has_value());
        SvmParams params;
        params.box_constraint = 1e4;
        params.tolerance = 1e-6;
        const auto m = train_svm(x, y, {KernelKind::Linear}, params);
        std::vector<double> w(d, 0.0);
        for (std::size_t s = 0; s < m.support_vectors.size(); ++s) {
            for (std::size_t k = 0; k < d; ++k) w[k] += m.coefficients[s] * m.support_vectors[s][k];
        }
        double wn = 0, rn = 0;
        for (std::size_t k = 0; k < d; ++k) {
            wn += w[k] * w[k];
            rn += ref->w[k] * ref->w[k];
        }
        wn = std::sqrt(wn);
        rn = std::sqrt(rn);
        for (std::size_t k = 0; k < d; ++k) EXPECT_NEAR(w[k] / wn, ref->w[k] / rn, 1e-3);
        EXPECT_NEAR(m.bias / wn, ref->b / rn, 1e-3);
        for (std::size_t i = 0; i < x.size(); ++i) {
            double f = ref->b;
            for (std::size_t k = 0; k < d; ++k) f += ref->w[k] * x[i][k];
            EXPECT_EQ(predict_svm(m, x[i]).label, f >= 0 ? 1 : -1);
        }
        ++checked;
    }
}

TEST(Cart, GiniValues) {
    EXPECT_EQ(gini(ClassCounts{{0, 2}, {1, 2}}), 0.5);
    EXPECT_EQ(gini(ClassCounts{{1, 4}}), 0.0);
}

TEST(Cart, SingleSplitExample) {
    const Matrix x{{0}, {1}, {10}, {11}};
    const std::vector<int> y{-1, -1, 1, 1};
    const auto m = train_cart(x, y, {});
    EXPECT_EQ(m.split_count, 1);
    EXPECT_EQ(m.nodes[0].feature, 0);
    EXPECT_EQ(m.nodes[0].threshold, 5.5);
    EXPECT_EQ(predict_cart(m, std::vector<double>{0}), -1);
    EXPECT_EQ(predict_cart(m, std::vector<double>{12}), 1);
    EXPECT_EQ(predict_cart(m, std::vector<double>{5.5}), -1);
}

TEST(Cart, NoValidSplitGivesMajorityLeaf) {
    const Matrix x{{1, 1}, {1, 1}, {1, 1}, {1, 1}};
    const auto m = train_cart(x, std::vector<int>{1, -1, 1, -1}, {});
    EXPECT_EQ(m.split_count, 0);
    EXPECT_EQ(predict_cart(m, std::vector<double>{9, 9}), -1);
    const auto m2 = train_cart(x, std::vector<int>{1, -1, 1, 1}, {});
    EXPECT_EQ(predict_cart(m2, std::vector<double>{0, 0}), 1);
}

TEST(Cart, RootSplitMatchesExhaustiveOracle) {
    std::mt19937_64 gen(31);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n = 2 + gen() % 29;
        const std::size_t d = 1 + gen() % 4;
        Matrix x(n, std::vector<double>(d));
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (auto& v : x[i]) v = static_cast<double>(gen() % 8);  // many ties
            y[i] = gen() % 2 ? 1 : -1;
        }
        const auto ref = oracle::best_root_split(x, y);
        CartParams one;
        one.max_splits = 1;
        const auto m = train_cart(x, y, one);
        if (!ref) {
            EXPECT_EQ(m.split_count, 0) << rep;
            continue;
        }
        ASSERT_EQ(m.split_count, 1) << rep;
        EXPECT_EQ(m.nodes[0].feature, ref->feature) << rep;
        EXPECT_EQ(m.nodes[0].threshold, ref->threshold) << rep;
    }
}

TEST(Cart, SplitsDecreaseImpurityAndTrainingLossIsMonotone) {
    std::mt19937_64 gen(4);
    Matrix x(120, std::vector<double>(3));
    std::vector<int> y(120);
    for (std::size_t i = 0; i < 120; ++i) {
        for (auto& v : x[i]) v = std::normal_distribution<double>(0, 1)(gen);
        y[i] = (x[i][0] + 0.5 * x[i][1] + std::normal_distribution<double>(0, 0.7)(gen)) > 0 ? 1 : -1;
    }
    std::size_t prev_errors = x.size() + 1;
    for (int splits : {0, 1, 2, 4, 8, 16, 32, 100}) {
        CartParams p;
        p.max_splits = splits;
        const auto m = train_cart(x, y, p);
        EXPECT_LE(m.split_count, splits);
        std::size_t errors = 0;
        for (std::size_t i = 0; i < x.size(); ++i) errors += predict_cart(m, x[i]) != y[i];
        EXPECT_LE(errors, prev_errors);
        prev_errors = errors;
        for (const auto& node : m.nodes) {
            if (node.feature < 0) continue;
            auto counts = [&](int idx) {
                const auto& v = m.nodes[static_cast<std::size_t>(idx)].class_counts;
                return ClassCounts(v.begin(), v.end());
            };
            const ClassCounts l = counts(node.left), r = counts(node.right);
            const ClassCounts parent(node.class_counts.begin(), node.class_counts.end());
            std::size_t nl = 0, nr = 0, np = 0;
            for (auto [k, c] : l) nl += c;
            for (auto [k, c] : r) nr += c;
            for (auto [k, c] : parent) np += c;
            EXPECT_TRUE(gini_decrease(l, nl, r, nr, sum_of_squares(parent), np).positive());
        }
    }
}

TEST(Cart, TextRoundTrip) {
    const Matrix x{{0, 3}, {1, 2}, {10, 1}, {11, 0}, {5, 5}};
    const std::vector<int> y{-1, -1, 1, 1, -1};
    const auto m = train_cart(x, y, {});
    const auto back = cart_from_text(to_text(m));
    for (const auto& p : x) EXPECT_EQ(predict_cart(back, p), predict_cart(m, p));
}

TEST(Classifier, NamesAndDispatch) {
    for (const auto& [kind, name] : kClassifierNames) EXPECT_EQ(parse_classifier(name), kind);
    for (auto kind : {ClassifierKind::SvmLinear, ClassifierKind::SvmCubic, ClassifierKind::SvmGaussian, ClassifierKind::Cart}) {
        ClassifierSpec spec;
        spec.kind = kind;
        const auto model = train_model(spec, kSquare, kSquareY);
        EXPECT_EQ(predict_model(model, std::vector<double>{3, 0}), 1);
        EXPECT_EQ(predict_model(model, std::vector<double>{-1, 0}), -1);
        EXPECT_FALSE(model_to_text(model).empty());
    }
}
