#ifndef PINSTREAM_SIGNAL_HPP
#define PINSTREAM_SIGNAL_HPP

// Small DSP toolkit: biquad Butterworth design, zero-phase filtering, and
// peak / prominence search on sampled series.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "pinstream/error.hpp"

namespace pinstream {

/// Second-order section, a0 normalized to 1.
struct Biquad {
    double b0, b1, b2;
    double a1, a2;
};

/// Second-order Butterworth high-pass via the bilinear transform with
/// frequency prewarping.
inline Biquad butterworth_highpass(double cutoff_hz, double fs_hz)
{
    if (!(cutoff_hz > 0.0) || !(fs_hz > 2.0 * cutoff_hz))
        throw Error(ErrorCode::InvalidArgument, "cutoff must lie in (0, fs/2)");
    const double k = std::tan(std::numbers::pi * cutoff_hz / fs_hz);
    const double norm = 1.0 / (1.0 + std::numbers::sqrt2 * k + k * k);
    return {
        norm,
        -2.0 * norm,
        norm,
        2.0 * (k * k - 1.0) * norm,
        (1.0 - std::numbers::sqrt2 * k + k * k) * norm,
    };
}

/// Squared magnitude of a biquad at frequency f (one pass).
inline double magnitude_squared(const Biquad& s, double f_hz, double fs_hz)
{
    const double w = 2.0 * std::numbers::pi * f_hz / fs_hz;
    const auto re = [&](double c0, double c1, double c2) { return c0 + c1 * std::cos(w) + c2 * std::cos(2 * w); };
    const auto im = [&](double c1, double c2) { return -c1 * std::sin(w) - c2 * std::sin(2 * w); };
    const double nr = re(s.b0, s.b1, s.b2), ni = im(s.b1, s.b2);
    const double dr = re(1.0, s.a1, s.a2), di = im(s.a1, s.a2);
    return (nr * nr + ni * ni) / (dr * dr + di * di);
}

namespace detail {

// Direct form II transposed, state initialized to the step steady state
// scaled by x0 (the usual lfilter_zi construction).
inline void biquad_run(const Biquad& s, std::vector<double>& x)
{
    if (x.empty())
        return;
    const double gain = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
    double z2 = (s.b2 - s.a2 * gain) * x.front();
    double z1 = (s.b1 - s.a1 * gain) * x.front() + z2;
    for (double& v : x) {
        const double in = v;
        const double out = s.b0 * in + z1;
        z1 = s.b1 * in - s.a1 * out + z2;
        z2 = s.b2 * in - s.a2 * out;
        v = out;
    }
}

} // namespace detail

/// Forward-backward application of a biquad with odd reflective padding of
/// `padlen` samples at both ends. Net phase is zero and the magnitude
/// response is squared.
inline std::vector<double> filtfilt(const Biquad& s, std::span<const double> x, std::size_t padlen)
{
    if (x.size() <= padlen)
        throw Error(ErrorCode::InsufficientSamples, "series too short for forward-backward filtering");
    const std::size_t n = x.size();
    std::vector<double> ext;
    ext.reserve(n + 2 * padlen);
    for (std::size_t i = padlen; i >= 1; --i)
        ext.push_back(2.0 * x[0] - x[i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t i = 1; i <= padlen; ++i)
        ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

    detail::biquad_run(s, ext);
    std::reverse(ext.begin(), ext.end());
    detail::biquad_run(s, ext);
    std::reverse(ext.begin(), ext.end());
    return {ext.begin() + static_cast<std::ptrdiff_t>(padlen), ext.begin() + static_cast<std::ptrdiff_t>(padlen + n)};
}

/// Indices of local maxima. A flat top counts once, at the middle of the
/// plateau (left-middle for even widths); plateaus touching either end of the
/// series are not maxima.
inline std::vector<std::size_t> local_maxima(std::span<const double> x)
{
    std::vector<std::size_t> peaks;
    if (x.size() < 3)
        return peaks;
    std::size_t i = 1;
    const std::size_t last = x.size() - 1;
    while (i < last) {
        if (x[i - 1] < x[i]) {
            std::size_t ahead = i + 1;
            while (ahead < last && x[ahead] == x[i])
                ++ahead;
            if (x[ahead] < x[i]) {
                peaks.push_back((i + ahead - 1) / 2);
                i = ahead;
                continue;
            }
        }
        ++i;
    }
    return peaks;
}

/// Topographic prominence of each peak: height above the higher of the two
/// lowest points reached before meeting a strictly higher sample (or an end
/// of the series) on either side.
inline std::vector<double> prominences(std::span<const double> x, std::span<const std::size_t> peaks)
{
    std::vector<double> out;
    out.reserve(peaks.size());
    for (std::size_t p : peaks) {
        double left_min = x[p];
        for (std::size_t i = p; i-- > 0;) {
            if (x[i] > x[p])
                break;
            left_min = std::min(left_min, x[i]);
        }
        double right_min = x[p];
        for (std::size_t i = p + 1; i < x.size(); ++i) {
            if (x[i] > x[p])
                break;
            right_min = std::min(right_min, x[i]);
        }
        out.push_back(x[p] - std::max(left_min, right_min));
    }
    return out;
}

/// Removes peaks closer than `distance` samples to a higher kept peak. Ties in
/// height keep the earlier peak.
inline std::vector<std::size_t> select_by_distance(std::span<const double> x, std::vector<std::size_t> peaks,
                                                   std::size_t distance)
{
    if (distance <= 1 || peaks.size() < 2)
        return peaks;
    std::vector<std::size_t> order(peaks.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[peaks[a]] > x[peaks[b]]; });
    std::vector<bool> keep(peaks.size(), true);
    for (std::size_t idx : order) {
        if (!keep[idx])
            continue;
        for (std::size_t j = idx; j-- > 0;) {
            if (peaks[idx] - peaks[j] >= distance)
                break;
            keep[j] = false;
        }
        for (std::size_t j = idx + 1; j < peaks.size(); ++j) {
            if (peaks[j] - peaks[idx] >= distance)
                break;
            keep[j] = false;
        }
    }
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < peaks.size(); ++i)
        if (keep[i])
            out.push_back(peaks[i]);
    return out;
}

/// Local maxima with prominence >= min_prominence, thinned to `distance`.
inline std::vector<std::size_t> find_peaks(std::span<const double> x, double min_prominence, std::size_t distance)
{
    std::vector<std::size_t> peaks = local_maxima(x);
    const std::vector<double> prom = prominences(x, peaks);
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < peaks.size(); ++i)
        if (prom[i] >= min_prominence)
            kept.push_back(peaks[i]);
    return select_by_distance(x, std::move(kept), distance);
}

/// Prominent local minima (peaks of the negated series).
inline std::vector<std::size_t> find_valleys(std::span<const double> x, double min_prominence, std::size_t distance)
{
    std::vector<double> neg(x.size());
    std::transform(x.begin(), x.end(), neg.begin(), [](double v) { return -v; });
    return find_peaks(neg, min_prominence, distance);
}

} // namespace pinstream

#endif
