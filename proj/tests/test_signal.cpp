#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "pinstream/gait.hpp"
#include "pinstream/signal.hpp"

using namespace pinstream;

namespace {

const std::vector<double> kSeries{0.0, 1, 3, 2, 5, 4, 4, 1, 0, 2, 6, 3, 2, 1, 0, 0, 1, 2, 1, 0.5};

} // namespace

// Reference values from scipy.signal.butter(2, 1/25, 'high').
TEST(Butterworth, CoefficientsMatchReference)
{
    const Biquad b = butterworth_highpass(1.0, 50.0);
    EXPECT_NEAR(b.b0, 0.91496914, 1e-8);
    EXPECT_NEAR(b.b1, -1.82993829, 1e-8);
    EXPECT_NEAR(b.b2, 0.91496914, 1e-8);
    EXPECT_NEAR(b.a1, -1.82269493, 1e-8);
    EXPECT_NEAR(b.a2, 0.83718165, 1e-8);
}

TEST(Butterworth, InvalidCutoff)
{
    EXPECT_THROW(butterworth_highpass(0.0, 50.0), Error);
    EXPECT_THROW(butterworth_highpass(25.0, 50.0), Error);
}

TEST(Butterworth, MagnitudeMatchesAnalyticResponse)
{
    const Biquad b = butterworth_highpass(1.0, 50.0);
    const double tc = std::tan(std::numbers::pi / 50.0);
    for (double f : {0.25, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0}) {
        const double t = std::tan(std::numbers::pi * f / 50.0);
        const double want = std::pow(t, 4) / (std::pow(t, 4) + std::pow(tc, 4));
        EXPECT_NEAR(magnitude_squared(b, f, 50.0), want, 1e-12) << f;
    }
    EXPECT_NEAR(magnitude_squared(b, 1.0, 50.0), 0.5, 1e-12);
}

// Reference values from scipy.signal.filtfilt(b, a, x, padlen=6).
TEST(Filtfilt, MatchesReference)
{
    const std::vector<double> want{0.37790774,  1.11467022,  2.86336273,  1.62772847,  4.41099459,
                                   3.21571147,  3.04361873,  -0.10433736, -1.22774152, 0.67365661,
                                   4.60006735,  1.55140367,  0.52701765,  -0.47420893, -1.45356064,
                                   -1.41222157, -0.35112372, 0.7290428,   -0.17231084, -0.55577836};
    const std::vector<double> got = filtfilt(butterworth_highpass(1.0, 50.0), kSeries, 6);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i)
        EXPECT_NEAR(got[i], want[i], 1e-7) << i;
}

TEST(Filtfilt, TooShort)
{
    const std::vector<double> x(6, 1.0);
    EXPECT_THROW(filtfilt(butterworth_highpass(1.0, 50.0), x, 6), Error);
}

// Reference values from scipy.signal.find_peaks / peak_prominences.
TEST(Peaks, ProminencesMatchReference)
{
    const std::vector<std::size_t> peaks = local_maxima(kSeries);
    EXPECT_EQ(peaks, (std::vector<std::size_t>{2, 4, 10, 17}));
    const std::vector<double> prom = prominences(kSeries, peaks);
    EXPECT_EQ(prom, (std::vector<double>{1.0, 5.0, 6.0, 1.5}));
}

TEST(Peaks, ProminenceAndDistanceFilter)
{
    EXPECT_EQ(find_peaks(kSeries, 2.0, 3), (std::vector<std::size_t>{4, 10}));
}

TEST(Peaks, PlateauCountsOnceAtItsMiddle)
{
    const std::vector<double> x{0, 1, 3, 3, 3, 1, 0};
    EXPECT_EQ(local_maxima(x), (std::vector<std::size_t>{3}));
    const std::vector<double> edge{3, 3, 1, 0};
    EXPECT_TRUE(local_maxima(edge).empty());
}

TEST(Peaks, DistanceKeepsTallerPeak)
{
    const std::vector<double> x{0, 5, 0, 7, 0, 0, 0, 4, 0};
    EXPECT_EQ(find_peaks(x, 0.0, 3), (std::vector<std::size_t>{3, 7}));
}

TEST(Valleys, AreNegatedPeaks)
{
    std::vector<double> neg;
    for (double v : kSeries)
        neg.push_back(-v);
    EXPECT_EQ(find_valleys(neg, 2.0, 3), find_peaks(kSeries, 2.0, 3));
}

TEST(Highpass, ConstantIsRejected)
{
    const std::vector<double> x(400, 9.81);
    const std::vector<double> y = highpass_zero_phase(x);
    for (std::size_t i = 50; i < 350; ++i)
        EXPECT_LT(std::abs(y[i]), 1e-6 * 9.81);
}

TEST(Highpass, TenHertzPassesWithAnalyticGain)
{
    const std::size_t n = 1000;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i)
        x[i] = std::sin(2 * std::numbers::pi * 10.0 * static_cast<double>(i) / 50.0 + 0.3);
    const std::vector<double> y = highpass_zero_phase(x);
    double s = 0, c = 0;
    for (std::size_t i = 200; i < 800; ++i) {
        const double ph = 2 * std::numbers::pi * 10.0 * static_cast<double>(i) / 50.0 + 0.3;
        s += y[i] * std::sin(ph);
        c += y[i] * std::cos(ph);
    }
    const double amp = 2.0 * std::hypot(s, c) / 600.0;
    const double t = std::tan(std::numbers::pi * 10.0 / 50.0), tc = std::tan(std::numbers::pi / 50.0);
    EXPECT_NEAR(amp, std::pow(t, 4) / (std::pow(t, 4) + std::pow(tc, 4)), 0.02);
    EXPECT_GE(amp, 0.95);
    EXPECT_LE(amp, 1.0);
    // zero phase: output stays in phase with the input
    EXPECT_NEAR(c / std::hypot(s, c), 0.0, 1e-3);
}

TEST(Highpass, SymmetricPulseKeepsPeakIndex)
{
    for (double width : {2.0, 5.0, 12.0}) {
        std::vector<double> x(241);
        for (std::size_t i = 0; i < x.size(); ++i)
            x[i] = std::exp(-0.5 * std::pow((static_cast<double>(i) - 120.0) / width, 2));
        const std::vector<double> y = highpass_zero_phase(x);
        EXPECT_EQ(std::max_element(y.begin(), y.end()) - y.begin(), 120) << width;
    }
}

TEST(Highpass, TooShort)
{
    const std::vector<double> x(6, 1.0);
    try {
        highpass_zero_phase(x);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InsufficientSamples);
    }
}
