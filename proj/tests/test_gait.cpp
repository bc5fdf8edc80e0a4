#include <cmath>

#include <gtest/gtest.h>

#include "pinstream/gait.hpp"
#include "pinstream/sim.hpp"
#include "support.hpp"

using namespace pinstream;

namespace {

std::vector<double> bump_series(std::size_t n, std::size_t centre, double amp, double width)
{
    std::vector<double> x(n, 9.81);
    for (std::size_t i = 0; i < n; ++i)
        x[i] += amp * std::exp(-0.5 * std::pow((static_cast<double>(i) - static_cast<double>(centre)) / width, 2));
    return x;
}

AccelStream stream_from_magnitude(const std::vector<double>& m)
{
    AccelStream a;
    for (std::size_t i = 0; i < m.size(); ++i) {
        a.t_ms.push_back(20.0 * static_cast<double>(i));
        a.accel.push_back({0.0, 0.0, m[i]});
    }
    return a;
}

} // namespace

TEST(Magnitude, Examples)
{
    AccelStream a;
    a.t_ms = {0, 20, 40};
    a.accel = {{0, 0, 0}, {3, 4, 0}, {0, 0, 9.81}};
    EXPECT_EQ(magnitude(a), (std::vector<double>{0.0, 5.0, 9.81}));
}

TEST(ValidateSampling, RejectsJitterAndBackwardsTime)
{
    EXPECT_NO_THROW(validate_sampling(std::vector<double>{0, 20, 40, 61}, 50.0));
    EXPECT_THROW(validate_sampling(std::vector<double>{0, 20, 40, 70}, 50.0), Error);
    EXPECT_THROW(validate_sampling(std::vector<double>{0, 20, 10}, 50.0), Error);
}

TEST(DetectStrides, ConstantSeriesHasNone)
{
    const std::vector<double> x(200, 9.81);
    try {
        detect_strides(x);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NoStrides);
    }
}

TEST(DetectStrides, SingleBumpIsOneStride)
{
    const std::vector<double> x = bump_series(200, 90, 15.0, 4.0);
    const std::vector<Stride> s = detect_strides(x);
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s[0].mid_swing_idx, 90u);
    EXPECT_LT(s[0].is_idx, 90u);
    EXPECT_GT(s[0].ic_idx, 90u);
}

TEST(DetectStrides, SmallBumpBelowPeakProminenceIgnored)
{
    const std::vector<double> x = bump_series(200, 90, 4.0, 4.0);
    EXPECT_THROW(detect_strides(x), Error);
}

TEST(DetectStrides, SimulatedThrowRecoversScriptedEvents)
{
    const ThrowScript s = test::quiet(nominal_script());
    const SynthesizedThrow th = synthesize(s);
    const std::vector<Stride> st = detect_strides(magnitude(th.leg));
    ASSERT_EQ(st.size(), 3u);
    for (std::size_t k = 0; k < 3; ++k) {
        const auto idx = [](double t) { return std::lround(t * 50.0); };
        EXPECT_LE(std::abs(static_cast<long>(st[k].is_idx) - idx(th.truth.strides[k].is_s)), 2);
        EXPECT_LE(std::abs(static_cast<long>(st[k].ic_idx) - idx(th.truth.strides[k].ic_s)), 2);
        EXPECT_LE(std::abs(static_cast<long>(st[k].mid_swing_idx) - idx(th.truth.strides[k].mid_s)), 2);
    }
}

TEST(StrideVelocity, ZeroSignal)
{
    const std::vector<double> f(50, 0.0);
    const StrideVelocity v = stride_velocity(f, {5, 30, 5, 15, 30});
    for (double x : v.velocity)
        EXPECT_EQ(x, 0.0);
    EXPECT_EQ(v.average, 0.0);
}

TEST(StrideVelocity, ConstantGivesLinearRamp)
{
    const double c = 2.5, fs = 50.0;
    const std::vector<double> f(60, c);
    const StrideVelocity v = stride_velocity(f, {10, 29, 10, 20, 29}, fs);
    const std::size_t n = 20;
    ASSERT_EQ(v.velocity.size(), n);
    for (std::size_t i = 0; i < n; ++i)
        EXPECT_NEAR(v.velocity[i], c * static_cast<double>(i) / fs, 1e-12);
    EXPECT_NEAR(v.velocity.back(), c * static_cast<double>(n - 1) / fs, 1e-12);
    EXPECT_NEAR(v.average, c * static_cast<double>(n - 1) / (2.0 * fs), 1e-12);
}

TEST(StrideVelocity, BoundsChecked)
{
    const std::vector<double> f(10, 1.0);
    EXPECT_THROW(stride_velocity(f, {2, 10, 2, 5, 10}), Error);
}

TEST(GaitProfile, StationaryStreamHasNoStrides)
{
    EXPECT_THROW(gait_profile(stream_from_magnitude(std::vector<double>(300, 9.81))), Error);
}

TEST(GaitProfile, NominalSixtyFortySplit)
{
    const ThrowScript s = test::quiet(nominal_script());
    const GaitProfile g = gait_profile(synthesize(s).leg);
    ASSERT_EQ(g.strides.size(), 3u);
    for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_NEAR(g.swing_period_s[k], 0.4, 0.021);
        EXPECT_NEAR(g.stance_period_s[k], 0.6, 0.021);
        EXPECT_NEAR(g.swing_stance_ratio[k], 0.667, 0.05);
    }
}

TEST(GaitProfile, VelocityMatchesScriptedIntegral)
{
    ThrowScript s = test::quiet(nominal_script());
    s.speed = 1.1;
    const SynthesizedThrow th = synthesize(s);
    const GaitProfile g = gait_profile(th.leg);
    ASSERT_EQ(g.avg_velocity.size(), 3u);
    for (std::size_t k = 0; k < 3; ++k)
        EXPECT_NEAR(g.avg_velocity[k], th.truth.strides[k].avg_velocity, 0.05 * th.truth.strides[k].avg_velocity);
}

TEST(GaitProfile, ExpertThrowRatiosWithinBand)
{
    CorpusOptions opt;
    opt.athletes = 9;
    opt.throws_each = 3;
    for (const ThrowScript& s : corpus_scripts(opt)) {
        if (s.skill != Skill::Expert)
            continue;
        const SynthesizedThrow th = synthesize(s);
        const GaitProfile g = gait_profile(th.leg);
        ASSERT_EQ(g.strides.size(), 3u);
        for (std::size_t k = 0; k + 1 < 3; ++k) {
            const double want =
                (th.truth.strides[k].ic_s - th.truth.strides[k].is_s) /
                (th.truth.strides[k + 1].is_s - th.truth.strides[k].ic_s);
            EXPECT_GE(g.swing_stance_ratio[k], want / 3.0);
            EXPECT_LE(g.swing_stance_ratio[k], want * 3.0);
        }
    }
}

TEST(GaitProfile, VelocityAlignsWithStrides)
{
    const GaitProfile g = gait_profile(synthesize(nominal_script()).leg);
    for (std::size_t k = 0; k < g.strides.size(); ++k) {
        EXPECT_EQ(g.velocity[k].size(), g.strides[k].end_idx - g.strides[k].start_idx + 1);
        EXPECT_EQ(g.velocity[k].front(), 0.0);
    }
    EXPECT_EQ(g.magnitude.size(), g.filtered.size());
}
