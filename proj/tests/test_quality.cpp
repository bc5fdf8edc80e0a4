#include <cmath>
#include <functional>
#include <limits>

#include <gtest/gtest.h>

#include "pinstream/dtw.hpp"
#include "pinstream/protocol.hpp"
#include "pinstream/quality.hpp"
#include "pinstream/random.hpp"
#include "support.hpp"

using namespace pinstream;

namespace {

// Minimum over every monotone warping path, enumerated recursively.
double brute_dtw(const std::vector<double>& a, const std::vector<double>& b, bool l2 = false, long band = -1)
{
    const long n = static_cast<long>(a.size()), m = static_cast<long>(b.size());
    const long w = band < 0 ? std::max(n, m) : std::max(band, std::abs(n - m));
    double best = std::numeric_limits<double>::infinity();
    std::function<void(long, long, double)> walk = [&](long i, long j, double acc) {
        if (std::abs(i - j) > w)
            return;
        const double d = a[static_cast<std::size_t>(i)] - b[static_cast<std::size_t>(j)];
        acc += l2 ? d * d : std::abs(d);
        if (i == n - 1 && j == m - 1) {
            best = std::min(best, acc);
            return;
        }
        if (i + 1 < n)
            walk(i + 1, j, acc);
        if (j + 1 < m)
            walk(i, j + 1, acc);
        if (i + 1 < n && j + 1 < m)
            walk(i + 1, j + 1, acc);
    };
    walk(0, 0, 0.0);
    return best;
}

} // namespace

TEST(Dtw, HandExamples)
{
    EXPECT_EQ(dtw({0, 1, 2}, {0, 1, 2}), 0.0);
    EXPECT_EQ(dtw({1, 2, 3}, {1, 2, 2, 3}), 0.0);
    EXPECT_EQ(dtw({0, 0}, {1}), 2.0);
    EXPECT_EQ(dtw({0, 3}, {1}, {DtwCost::L2, -1}), 5.0);
    EXPECT_EQ(dtw({1, 5, 2}, {1, 2}), 3.0);
}

TEST(Dtw, Symmetric)
{
    const std::vector<double> a{0.1, 0.9, 1.4, 0.3}, b{0.0, 1.2, 0.2};
    EXPECT_DOUBLE_EQ(dtw(a, b), dtw(b, a));
}

TEST(Dtw, MatchesBruteForce)
{
    Rng rng(21);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> a(1 + rng.below(6)), b(1 + rng.below(6));
        for (double& v : a)
            v = rng.uniform(-2, 2);
        for (double& v : b)
            v = rng.uniform(-2, 2);
        const bool l2 = trial % 2;
        const long band = trial % 3 == 0 ? static_cast<long>(rng.below(3)) : -1;
        const DtwOptions opt{l2 ? DtwCost::L2 : DtwCost::L1, band};
        EXPECT_NEAR(dtw(a, b, opt), brute_dtw(a, b, l2, band), 1e-12) << trial;
    }
}

TEST(Dtw, ZeroBandOnEqualLengthIsPointwise)
{
    const std::vector<double> a{0, 1, 0, 2}, b{1, 0, 0, 2};
    EXPECT_EQ(dtw(a, b, {DtwCost::L1, 0}), 2.0);
    EXPECT_LT(dtw(a, b), 2.0);
}

TEST(Dtw, EmptySeries)
{
    try {
        dtw({}, {1.0});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptySeries);
    }
}

TEST(DtwCostTag, RoundTrip)
{
    EXPECT_EQ(parse_dtw_cost(to_string(DtwCost::L2)), DtwCost::L2);
    EXPECT_THROW(parse_dtw_cost("l3"), Error);
}

TEST(QualityDegree, IdenticalToOneTemplateIsHundred)
{
    const std::vector<double> u{0.1, 0.5, 1.0, 0.4};
    const std::vector<std::vector<double>> t{u, {1.0, 1.0, 1.0, 1.0}, {0.0, 0.0, 0.0}};
    const QualityResult r = quality_degree(u, t);
    EXPECT_EQ(r.md, 0.0);
    EXPECT_EQ(r.qd, 100.0);
}

TEST(QualityDegree, EquidistantTemplatesGiveZero)
{
    const QualityResult r = quality_from_distances({2.0, 2.0, 2.0});
    EXPECT_EQ(r.md, 2.0);
    EXPECT_EQ(r.ad, 2.0);
    EXPECT_EQ(r.qd, 0.0);
}

TEST(QualityDegree, MeanOfRemainingDistances)
{
    const QualityResult r = quality_from_distances({4.0, 1.0, 6.0});
    EXPECT_EQ(r.md, 1.0);
    EXPECT_EQ(r.ad, 5.0);
    EXPECT_DOUBLE_EQ(r.qd, 80.0);
    EXPECT_EQ(r.distances, (std::vector<double>{4.0, 1.0, 6.0}));
}

TEST(QualityDegree, AllZeroDistances)
{
    EXPECT_EQ(quality_from_distances({0.0, 0.0}).qd, 100.0);
}

TEST(QualityDegree, SingleTemplateNeedsCalibration)
{
    try {
        quality_from_distances({1.0});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MissingCalibration);
    }
    EXPECT_DOUBLE_EQ(quality_from_distances({1.0}, 4.0).qd, 75.0);
    EXPECT_EQ(quality_from_distances({5.0}, 4.0).qd, 0.0);
    EXPECT_THROW(quality_from_distances({}), Error);
}

TEST(AssessThrow, OwnTemplateScoresHundred)
{
    const ThrowRecord rec = test::record_of(nominal_script());
    const Template t = calibrated_template(rec, 20, 1);
    const QualityReport rep = assess_throw(rec, std::span<const Template>(&t, 1));
    ASSERT_EQ(rep.qd.size(), 3u);
    for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_EQ(rep.qd[k], 100.0);
        EXPECT_EQ(rep.md[k], 0.0);
        EXPECT_GT(rep.ad[k], 0.0);
    }
}

TEST(AssessThrow, TimingErrorLowersOnlyItsPhase)
{
    const Template t = calibrated_template(test::record_of(nominal_script()), 20, 1);
    ThrowScript s = nominal_script();
    s.noise_seed = 9;
    const QualityReport clean = assess_throw(test::record_of(s), std::span<const Template>(&t, 1));
    s.lag_s[1] = 0.16;
    const QualityReport off = assess_throw(test::record_of(s), std::span<const Template>(&t, 1));
    EXPECT_LT(off.qd[1], clean.qd[1] - 30.0);
    EXPECT_LT(off.qd[1], off.qd[0]);
}

TEST(AssessThrow, PhaseCountMismatch)
{
    const ThrowRecord rec = test::record_of(nominal_script());
    Template t = make_template(rec);
    t.segments.pop_back();
    EXPECT_THROW(assess_throw(rec, std::span<const Template>(&t, 1)), Error);
}

TEST(Calibrate, MeanDistanceToPerturbations)
{
    Template t;
    t.segments = {{0, 1, 2}, {2, 1}};
    const std::vector<std::vector<std::vector<double>>> p{{{0, 1, 3}, {2, 1}}, {{0, 1, 2}, {2, 3}}};
    calibrate(t, p);
    EXPECT_EQ(t.ad_ref, (std::vector<double>{0.5, 1.0}));
}

TEST(MakeTemplate, StatisticsFromRecord)
{
    const ThrowScript s = test::quiet(nominal_script());
    const ThrowRecord rec = test::record_of(s);
    const Template t = make_template(rec);
    EXPECT_NO_THROW(t.validate());
    EXPECT_NEAR(t.a_max, s.a_max, 0.01);
    for (std::size_t k = 0; k < 3; ++k)
        EXPECT_NEAR(t.a_contact[k], s.contact_angle[k], 0.05);
}
