#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "pinstream/metrics.hpp"
#include "pinstream/multiclass.hpp"
#include "pinstream/random.hpp"
#include "pinstream/svm.hpp"

using namespace pinstream;

namespace {

using Matrix = std::vector<std::vector<double>>;

// Projected gradient ascent on the dual. The projection onto
// {0 <= a <= C, y'a = 0} shifts by lambda * y, found by bisection.
std::vector<double> projected_gradient(const Matrix& X, const std::vector<int>& y, double C, double gamma)
{
    const std::size_t n = X.size();
    Matrix Q(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double d2 = 0;
            for (std::size_t k = 0; k < X[i].size(); ++k)
                d2 += (X[i][k] - X[j][k]) * (X[i][k] - X[j][k]);
            Q[i][j] = y[i] * y[j] * std::exp(-gamma * d2);
        }
    const auto project = [&](std::vector<double> v) {
        const auto clipped = [&](double lam) {
            std::vector<double> a(n);
            double s = 0;
            for (std::size_t i = 0; i < n; ++i) {
                a[i] = std::clamp(v[i] - lam * y[i], 0.0, C);
                s += y[i] * a[i];
            }
            return std::pair{a, s};
        };
        double lo = -1e3, hi = 1e3;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (clipped(mid).second > 0 ? lo : hi) = mid;
        }
        return clipped(0.5 * (lo + hi)).first;
    };
    std::vector<double> a(n, 0.0);
    const double step = 1.0 / static_cast<double>(n);
    for (int it = 0; it < 200000; ++it) {
        std::vector<double> g(n, 1.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                g[i] -= Q[i][j] * a[j];
        for (std::size_t i = 0; i < n; ++i)
            g[i] = a[i] + step * g[i];
        a = project(g);
    }
    return a;
}

OvoSvmModel fixed_model(double f01, double f02, double f12)
{
    OvoSvmModel m;
    m.labels = {"a", "b", "c"};
    m.scaler.mean = {0.0};
    m.scaler.std = {0.0};
    for (auto [a, b, f] : {std::tuple{0, 1, f01}, std::tuple{0, 2, f02}, std::tuple{1, 2, f12}}) {
        PairClassifier p;
        p.class_a = a;
        p.class_b = b;
        p.svm.bias = -f; // no support vectors, so f(x) = -bias
        m.classifiers.push_back(p);
    }
    return m;
}

struct Clusters {
    Matrix X;
    std::vector<int> y;
};

Clusters clusters(std::size_t per_class, double spread, std::uint64_t seed)
{
    Rng rng(seed);
    Clusters c;
    const double centres[3][2] = {{0, 0}, {4, 0}, {0, 4}};
    for (int k = 0; k < 3; ++k)
        for (std::size_t i = 0; i < per_class; ++i) {
            c.X.push_back({centres[k][0] + spread * rng.normal(), centres[k][1] + spread * rng.normal()});
            c.y.push_back(k);
        }
    return c;
}

} // namespace

TEST(RbfKernel, Examples)
{
    const std::vector<double> x{1.0, -2.0, 0.5};
    EXPECT_EQ(rbf_kernel(x, x, 3.0), 1.0);
    EXPECT_NEAR(rbf_kernel(std::vector<double>{0.0}, std::vector<double>{1.0}, std::log(2.0)), 0.5, 1e-15);
    EXPECT_NEAR(rbf_kernel(std::vector<double>{0.0, 0.0}, std::vector<double>{1.0, 1.0}, 0.5), std::exp(-1.0), 1e-15);
    EXPECT_THROW(rbf_kernel(x, std::vector<double>{1.0}, 1.0), Error);
    EXPECT_THROW(rbf_kernel(x, x, 0.0), Error);
}

TEST(Smo, SeparableSymmetricSet)
{
    const Matrix X{{-2.0}, {-1.0}, {1.0}, {2.0}};
    const std::vector<int> y{-1, -1, 1, 1};
    const SmoResult r = smo_train(X, y, {1e3, 1.0, 1e-6, 200});
    EXPECT_NEAR(decision(r.model, std::vector<double>{0.0}), 0.0, 1e-6);
    for (std::size_t i = 0; i < X.size(); ++i) {
        EXPECT_EQ(predict_binary(r.model, X[i]), y[i]);
        EXPECT_GE(y[i] * decision(r.model, X[i]), 1.0 - 1e-5);
    }
    // the inner points sit on the margin
    EXPECT_NEAR(decision(r.model, X[1]), -1.0, 1e-5);
    EXPECT_NEAR(decision(r.model, X[2]), 1.0, 1e-5);
}

TEST(Smo, MatchesProjectedGradientOracle)
{
    const Matrix X{{0.0, 0.0}, {1.0, 0.2}, {0.3, 1.1}, {1.2, 1.0}, {0.6, 0.5}, {2.0, 0.1}};
    const std::vector<int> y{1, -1, 1, -1, 1, -1};
    const double C = 2.0, gamma = 0.8;
    const SmoResult r = smo_train(X, y, {C, gamma, 1e-6, 1000});
    const std::vector<double> a = projected_gradient(X, y, C, gamma);
    const auto K = kernel_matrix(X, gamma);
    EXPECT_NEAR(r.objective, dual_objective(a, y, K), 1e-6);
    for (std::size_t i = 0; i < X.size(); ++i)
        EXPECT_NEAR(r.alpha[i], a[i], 1e-3) << i;
}

TEST(Smo, AlphaWithinBoxAndBalanced)
{
    Rng rng(4);
    Matrix X;
    std::vector<int> y;
    for (int i = 0; i < 40; ++i) {
        X.push_back({rng.normal(), rng.normal()});
        y.push_back(X.back()[0] + 0.5 * rng.normal() > 0 ? 1 : -1);
    }
    const double C = 0.7;
    const SmoResult r = smo_train(X, y, {C, 0.5, 1e-3, 200});
    double s = 0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        EXPECT_GE(r.alpha[i], 0.0);
        EXPECT_LE(r.alpha[i], C);
        s += r.alpha[i] * y[i];
    }
    EXPECT_NEAR(s, 0.0, 1e-10);
    EXPECT_LT(r.violation, 1e-3);
}

TEST(Smo, ConflictingDuplicatesHitTheBox)
{
    const Matrix X{{1.0, 1.0}, {1.0, 1.0}};
    const std::vector<int> y{1, -1};
    const SmoResult r = smo_train(X, y, {0.5, 1.0, 1e-3, 200});
    EXPECT_DOUBLE_EQ(r.alpha[0], 0.5);
    EXPECT_DOUBLE_EQ(r.alpha[1], 0.5);
}

TEST(Smo, DegenerateLabels)
{
    const Matrix X{{0.0}, {1.0}};
    try {
        smo_train(X, std::vector<int>{1, 1}, {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DegenerateLabels);
    }
    EXPECT_THROW(smo_train(X, std::vector<int>{1, 0}, {}), Error);
    EXPECT_THROW(smo_train(X, std::vector<int>{1}, {}), Error);
}

TEST(Smo, BudgetExhaustionIsConvergenceError)
{
    Rng rng(8);
    Matrix X;
    std::vector<int> y;
    for (int i = 0; i < 60; ++i) {
        X.push_back({rng.normal(), rng.normal()});
        y.push_back(i % 2 ? 1 : -1);
    }
    try {
        smo_train(X, y, {100.0, 1.0, 1e-9, 1});
        FAIL();
    } catch (const ConvergenceError& e) {
        EXPECT_EQ(e.code(), ErrorCode::ConvergenceFailure);
        EXPECT_GT(e.violation(), 1e-9);
    }
}

TEST(OvoVote, MajorityWins)
{
    EXPECT_EQ(ovo_vote_scaled(fixed_model(1, 1, 1), std::vector<double>{0.0}).label, 0);
    EXPECT_EQ(ovo_vote_scaled(fixed_model(-1, -1, 1), std::vector<double>{0.0}).label, 1);
    EXPECT_EQ(ovo_vote_scaled(fixed_model(-1, -1, -1), std::vector<double>{0.0}).label, 2);
}

TEST(OvoVote, TieGoesToStrongestThenLowest)
{
    const OvoVote v = ovo_vote_scaled(fixed_model(0.5, -2.0, 1.0), std::vector<double>{0.0});
    EXPECT_EQ(v.votes, (std::vector<int>{1, 1, 1}));
    EXPECT_EQ(v.label, 2);
    EXPECT_EQ(ovo_vote_scaled(fixed_model(1.0, -1.0, 1.0), std::vector<double>{0.0}).label, 0);
}

TEST(OvoVote, ZeroDecisionGoesToSecondClass)
{
    const OvoVote v = ovo_vote_scaled(fixed_model(0.0, 1.0, 1.0), std::vector<double>{0.0});
    EXPECT_EQ(v.votes, (std::vector<int>{1, 2, 0}));
    EXPECT_EQ(v.label, 1);
}

TEST(OvoSvm, SeparatesClustersAndScalesInternally)
{
    const Clusters c = clusters(20, 0.4, 1);
    const OvoSvmModel m = ovo_train(c.X, c.y, {"a", "b", "c"}, {10.0, 0.5, 1e-3, 200});
    EXPECT_NO_THROW(m.validate());
    EXPECT_EQ(m.scaler, StandardScaler::fit(c.X));
    EXPECT_EQ(ovo_predict_rows(m, c.X), c.y);
    for (const auto& x : c.X)
        EXPECT_EQ(ovo_predict(m, x), ovo_vote_scaled(m, m.scaler.transform(x)).label);
}

TEST(StratifiedFolds, EveryFoldHoldsEveryClass)
{
    const Clusters c = clusters(23, 1.0, 2);
    const std::vector<int> fold = stratified_folds(c.y, 10, 7);
    for (int f = 0; f < 10; ++f) {
        std::vector<int> count(3, 0);
        for (std::size_t i = 0; i < fold.size(); ++i)
            if (fold[i] == f)
                ++count[c.y[i]];
        for (int k = 0; k < 3; ++k) {
            EXPECT_GE(count[k], 2);
            EXPECT_LE(count[k], 3);
        }
    }
    EXPECT_EQ(fold, stratified_folds(c.y, 10, 7));
}

TEST(StratifiedFolds, TooFewRowsOfAClass)
{
    std::vector<int> y(30, 0);
    y[0] = 1;
    y[1] = 1;
    try {
        stratified_folds(y, 5, 0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::StratificationFailure);
    }
}

TEST(StratifiedSplit, PerClassFractionAndPartition)
{
    const Clusters c = clusters(23, 1.0, 3);
    const SplitIndices s = stratified_split(c.y, 0.2, 5);
    std::vector<int> count(3, 0);
    for (std::size_t i : s.test)
        ++count[c.y[i]];
    EXPECT_EQ(count, (std::vector<int>{5, 5, 5}));
    std::vector<std::size_t> all = s.train;
    all.insert(all.end(), s.test.begin(), s.test.end());
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> want(c.y.size());
    std::iota(want.begin(), want.end(), 0);
    EXPECT_EQ(all, want);
    EXPECT_EQ(stratified_split(c.y, 0.2, 5).test, s.test);
    EXPECT_THROW(stratified_split(c.y, 1.0, 5), Error);
}

TEST(GridSearch, SingleCell)
{
    const Clusters c = clusters(10, 0.5, 4);
    GridSearchOptions opt;
    opt.C_grid = {1.0};
    opt.gamma_grid = {0.1};
    opt.folds = 5;
    const GridSearchResult r = grid_search_cv(c.X, c.y, {"a", "b", "c"}, opt);
    ASSERT_EQ(r.table.size(), 1u);
    EXPECT_EQ(r.best_C, 1.0);
    EXPECT_EQ(r.best_gamma, 0.1);
    EXPECT_EQ(r.table[0].fold_f1.size(), 5u);
}

TEST(GridSearch, TiesGoToSmallerCThenGamma)
{
    const Clusters c = clusters(10, 0.2, 5);
    GridSearchOptions opt;
    opt.C_grid = {100.0, 10.0};
    opt.gamma_grid = {1.0, 0.1};
    opt.folds = 5;
    const GridSearchResult r = grid_search_cv(c.X, c.y, {"a", "b", "c"}, opt);
    for (const CvCell& cell : r.table)
        EXPECT_EQ(cell.mean_f1, 1.0);
    EXPECT_EQ(r.best_C, 10.0);
    EXPECT_EQ(r.best_gamma, 0.1);
}

TEST(GridSearch, DeterministicForSeed)
{
    const Clusters c = clusters(12, 1.5, 6);
    GridSearchOptions opt;
    opt.C_grid = {0.1, 1.0, 10.0};
    opt.gamma_grid = {0.01, 0.1, 1.0};
    opt.folds = 4;
    opt.seed = 11;
    const GridSearchResult a = grid_search_cv(c.X, c.y, {"a", "b", "c"}, opt);
    const GridSearchResult b = grid_search_cv(c.X, c.y, {"a", "b", "c"}, opt);
    ASSERT_EQ(a.table.size(), 9u);
    for (std::size_t i = 0; i < a.table.size(); ++i)
        EXPECT_EQ(a.table[i].fold_f1, b.table[i].fold_f1);
    EXPECT_EQ(a.best_C, b.best_C);
    EXPECT_EQ(a.best_gamma, b.best_gamma);
}

TEST(GridSearch, FailedCellsAreSkipped)
{
    const Clusters c = clusters(10, 1.5, 7);
    GridSearchOptions opt;
    opt.C_grid = {1.0, 1e6};
    opt.gamma_grid = {1.0};
    opt.folds = 3;
    opt.tol = 1e-12;
    opt.max_passes = 1;
    EXPECT_THROW(grid_search_cv(c.X, c.y, {"a", "b", "c"}, opt), Error);
}

TEST(Metrics, HandCountedThreeClass)
{
    const std::vector<int> t{0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 2, 2};
    const std::vector<int> p{0, 0, 0, 0, 0, 0, 0, 2, 1, 1, 0, 0, 0, 2, 2, 2, 2, 1, 1, 0};
    const MetricsReport r = metrics(t, p, 3);
    using Row = std::vector<std::size_t>;
    EXPECT_EQ(r.confusion, (std::vector<Row>{{7, 0, 1}, {3, 2, 0}, {1, 2, 4}}));
    EXPECT_NEAR(r.precision[0], 7.0 / 11, 1e-15);
    EXPECT_NEAR(r.precision[1], 0.5, 1e-15);
    EXPECT_NEAR(r.precision[2], 0.8, 1e-15);
    EXPECT_NEAR(r.recall[0], 7.0 / 8, 1e-15);
    EXPECT_NEAR(r.recall[1], 0.4, 1e-15);
    EXPECT_NEAR(r.recall[2], 4.0 / 7, 1e-15);
    EXPECT_NEAR(r.f1[0], 14.0 / 19, 1e-15);
    EXPECT_NEAR(r.f1[1], 4.0 / 9, 1e-15);
    EXPECT_NEAR(r.f1[2], 2.0 / 3, 1e-15);
    EXPECT_NEAR(r.macro_precision, 0.6454545454545454, 1e-12);
    EXPECT_NEAR(r.macro_recall, 0.6154761904761904, 1e-12);
    EXPECT_NEAR(r.macro_f1, 0.6159844054580895, 1e-12);
    EXPECT_NEAR(r.weighted_precision, 0.6595454545454545, 1e-12);
    EXPECT_NEAR(r.weighted_recall, 0.65, 1e-12);
    EXPECT_NEAR(r.weighted_f1, 0.6391812865497075, 1e-12);
    EXPECT_NEAR(r.accuracy, 0.65, 1e-15);
    EXPECT_EQ(r.support, (std::vector<std::size_t>{8, 5, 7}));
    EXPECT_FALSE(r.any_undefined());
}

TEST(Metrics, NeverPredictedClassIsUndefined)
{
    const std::vector<int> t{0, 1, 1, 2}, p{0, 0, 0, 2};
    const MetricsReport r = metrics(t, p, 3);
    EXPECT_TRUE(r.precision_undefined[1]);
    EXPECT_EQ(r.precision[1], 0.0);
    EXPECT_FALSE(r.recall_undefined[1]);
    EXPECT_TRUE(r.any_undefined());
    EXPECT_THROW(metrics(t, std::vector<int>{0, 0, 0}, 3), Error);
    EXPECT_THROW(metrics(t, std::vector<int>{0, 0, 0, 3}, 3), Error);
}
