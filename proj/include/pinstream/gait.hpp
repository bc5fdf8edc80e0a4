#ifndef PINSTREAM_GAIT_HPP
#define PINSTREAM_GAIT_HPP

// Stride detection, gait-event extraction, zero-phase filtering and per-stride
// velocity from the leg accelerometer.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "pinstream/error.hpp"
#include "pinstream/quaternion.hpp"
#include "pinstream/signal.hpp"

namespace pinstream {

/// Timestamped accelerometer samples (ms, m/s^2).
struct AccelStream {
    std::vector<double> t_ms;
    std::vector<Vec3> accel;

    std::size_t size() const { return accel.size(); }
};

/// Rejects streams whose timestamps are not increasing or whose sample
/// spacing strays more than `max_jitter` (fraction of the nominal period)
/// from 1000/fs ms.
inline void validate_sampling(std::span<const double> t_ms, double fs_hz, double max_jitter = 0.2)
{
    const double period = 1000.0 / fs_hz;
    for (std::size_t i = 1; i < t_ms.size(); ++i) {
        const double dt = t_ms[i] - t_ms[i - 1];
        if (!(dt > 0.0))
            throw Error(ErrorCode::InvalidStream, "timestamps must be strictly increasing");
        if (std::abs(dt - period) > max_jitter * period)
            throw Error(ErrorCode::InvalidStream, "sampling jitter exceeds tolerance at sample " + std::to_string(i));
    }
}

struct Stride {
    std::size_t start_idx = 0;
    std::size_t end_idx = 0;
    std::size_t is_idx = 0;        ///< initial swing (lift-off)
    std::size_t mid_swing_idx = 0; ///< maximum acceleration magnitude
    std::size_t ic_idx = 0;        ///< initial contact

    friend bool operator==(const Stride&, const Stride&) = default;
};

struct GaitParams {
    double fs_hz = 50.0;
    double cutoff_hz = 1.0;
    /// Minimum prominence of the minima that bound a swing (m/s^2).
    double min_prominence = 1.5;
    /// Minimum prominence of a mid-swing acceleration peak (m/s^2). Must
    /// exceed the stance plateau between a contact dip and the next lift-off
    /// dip, which otherwise reads as a peak of about the dip depth.
    double min_peak_prominence = 8.0;
    /// Minimum spacing between events of the same kind (s).
    double min_separation_s = 0.3;

    std::size_t min_separation_samples() const
    {
        return static_cast<std::size_t>(std::lround(min_separation_s * fs_hz));
    }
};

struct GaitProfile {
    std::vector<Stride> strides;
    std::vector<double> swing_period_s;
    std::vector<double> stance_period_s;
    std::vector<double> swing_stance_ratio;
    std::vector<std::vector<double>> velocity; ///< per stride, m/s
    std::vector<double> avg_velocity;          ///< per stride, m/s
    std::vector<double> magnitude;             ///< raw |a| over the whole stream
    std::vector<double> filtered;              ///< high-passed magnitude
};

inline std::vector<double> magnitude(const AccelStream& a)
{
    std::vector<double> out;
    out.reserve(a.accel.size());
    for (const Vec3& v : a.accel)
        out.push_back(norm(v));
    return out;
}

inline constexpr int kHighpassOrder = 2;

/// Second-order Butterworth high-pass run forward then backward, with odd
/// reflective padding of 3x the filter order at both ends.
inline std::vector<double> highpass_zero_phase(std::span<const double> x, double fc_hz = 1.0, double fs_hz = 50.0)
{
    constexpr std::size_t padlen = 3 * kHighpassOrder;
    if (x.size() <= padlen)
        throw Error(ErrorCode::InsufficientSamples, "need more than " + std::to_string(padlen) + " samples");
    return filtfilt(butterworth_highpass(fc_hz, fs_hz), x, padlen);
}

namespace detail {

// argmin over [lo, hi); ties resolve toward `prefer_high` end.
inline std::size_t argmin_range(std::span<const double> x, std::size_t lo, std::size_t hi, bool prefer_high)
{
    std::size_t best = lo;
    for (std::size_t i = lo; i < hi; ++i) {
        if (x[i] < x[best] || (prefer_high && x[i] == x[best]))
            best = i;
    }
    return best;
}

} // namespace detail

/// Detects strides of the instrumented foot on the raw acceleration magnitude.
///
/// Each stride is anchored on a prominent acceleration peak (mid-swing). Its
/// initial swing is the last prominent minimum before the peak and its
/// initial contact the first prominent minimum after it. When no prominent
/// minimum exists on a side (for instance a burst rising out of a perfectly
/// flat rest) the lowest sample on that side is used, preferring the one
/// closest to the peak. Strides never share samples.
inline std::vector<Stride> detect_strides(std::span<const double> mag, const GaitParams& params = {})
{
    const std::size_t sep = std::max<std::size_t>(params.min_separation_samples(), 1);
    const std::vector<std::size_t> peaks = find_peaks(mag, params.min_peak_prominence, sep);
    const std::vector<std::size_t> valleys = find_valleys(mag, params.min_prominence, sep);

    std::vector<Stride> strides;
    std::size_t floor_idx = 0; // first index available to the next stride
    for (std::size_t j = 0; j < peaks.size(); ++j) {
        const std::size_t p = peaks[j];
        if (p < floor_idx || p == 0)
            continue;
        const std::size_t ceiling = j + 1 < peaks.size() ? peaks[j + 1] : mag.size();

        std::optional<std::size_t> is;
        for (std::size_t v : valleys)
            if (v >= floor_idx && v < p)
                is = v;
        if (!is) {
            if (floor_idx >= p)
                continue;
            is = detail::argmin_range(mag, floor_idx, p, true);
        }

        std::optional<std::size_t> ic;
        for (std::size_t v : valleys) {
            if (v > p && v < ceiling) {
                ic = v;
                break;
            }
        }
        if (!ic) {
            if (p + 1 >= ceiling)
                continue;
            ic = detail::argmin_range(mag, p + 1, ceiling, false);
        }

        Stride s;
        s.start_idx = s.is_idx = *is;
        s.end_idx = s.ic_idx = *ic;
        s.mid_swing_idx = *is;
        for (std::size_t i = *is; i <= *ic; ++i)
            if (mag[i] > mag[s.mid_swing_idx])
                s.mid_swing_idx = i;
        if (mag[s.mid_swing_idx] - std::max(mag[*is], mag[*ic]) < params.min_peak_prominence)
            continue;
        strides.push_back(s);
        floor_idx = *ic + 1;
    }
    if (strides.empty())
        throw Error(ErrorCode::NoStrides, "no stride found in acceleration magnitude");
    return strides;
}

struct StrideVelocity {
    std::vector<double> velocity;
    double average = 0.0;
};

/// Cumulative trapezoidal integral of the filtered magnitude over the stride,
/// starting from zero at the stride start.
inline StrideVelocity stride_velocity(std::span<const double> filtered, const Stride& s, double fs_hz = 50.0)
{
    if (s.end_idx >= filtered.size() || s.start_idx > s.end_idx)
        throw Error(ErrorCode::InvalidArgument, "stride bounds outside the filtered series");
    StrideVelocity out;
    out.velocity.reserve(s.end_idx - s.start_idx + 1);
    double v = 0.0;
    out.velocity.push_back(v);
    for (std::size_t i = s.start_idx + 1; i <= s.end_idx; ++i) {
        v += 0.5 * (filtered[i - 1] + filtered[i]) / fs_hz;
        out.velocity.push_back(v);
    }
    out.average = std::accumulate(out.velocity.begin(), out.velocity.end(), 0.0) / static_cast<double>(out.velocity.size());
    return out;
}

/// Full gait analysis of one segmented throw.
///
/// Swing period is t(IC_k) - t(IS_k); stance period is t(IS_k+1) - t(IC_k).
/// The final stride has no following lift-off, so its stance is the mean of
/// the earlier stances, or the time to the end of the stream for a single
/// stride.
inline GaitProfile gait_profile(const AccelStream& a, const GaitParams& params = {})
{
    if (a.t_ms.size() != a.accel.size())
        throw Error(ErrorCode::LengthMismatch, "timestamp and sample counts differ");
    GaitProfile g;
    g.magnitude = magnitude(a);
    g.strides = detect_strides(g.magnitude, params);
    g.filtered = highpass_zero_phase(g.magnitude, params.cutoff_hz, params.fs_hz);

    const auto t = [&](std::size_t i) { return a.t_ms[i] / 1000.0; };
    const std::size_t k = g.strides.size();
    for (std::size_t i = 0; i < k; ++i) {
        const Stride& s = g.strides[i];
        g.swing_period_s.push_back(t(s.ic_idx) - t(s.is_idx));
        if (i + 1 < k)
            g.stance_period_s.push_back(t(g.strides[i + 1].is_idx) - t(s.ic_idx));
        StrideVelocity v = stride_velocity(g.filtered, s, params.fs_hz);
        g.avg_velocity.push_back(v.average);
        g.velocity.push_back(std::move(v.velocity));
    }
    if (k == 1) {
        g.stance_period_s.push_back(t(a.t_ms.size() - 1) - t(g.strides[0].ic_idx));
    } else {
        const double mean_stance =
            std::accumulate(g.stance_period_s.begin(), g.stance_period_s.end(), 0.0) / static_cast<double>(k - 1);
        g.stance_period_s.push_back(mean_stance);
    }
    for (std::size_t i = 0; i < k; ++i) {
        const double st = g.stance_period_s[i];
        g.swing_stance_ratio.push_back(st > 0.0 ? g.swing_period_s[i] / st : 0.0);
    }
    return g;
}

} // namespace pinstream

#endif
