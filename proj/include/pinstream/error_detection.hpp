#ifndef PINSTREAM_ERROR_DETECTION_HPP
#define PINSTREAM_ERROR_DETECTION_HPP

// Rule-based detection of the four common delivery errors. Each detector
// compares one statistic of the throw with the mean of the same statistic
// over the templates and flags the throw when the absolute deviation exceeds
// its threshold (strictly).

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "pinstream/error.hpp"
#include "pinstream/segment.hpp"
#include "pinstream/template.hpp"

namespace pinstream {

struct DetectorResult {
    bool flag = false;
    double deviation = 0.0;
};

struct GaitSpeedResult {
    bool flag = false;
    std::vector<double> deviations; ///< per stride, m/s
};

struct ErrorOptions {
    /// 1-based stride ordinal whose initial contact is checked for error 4.
    /// The third step of a five-step approach is the second stride of the
    /// instrumented foot.
    std::size_t error4_stride = 2;
};

struct ErrorFlags {
    bool e1 = false, e2 = false, e3 = false, e4 = false;
    std::vector<double> d1;
    double d2 = 0.0, d3 = 0.0, d4 = 0.0;
};

namespace detail {

template <class F>
double template_mean(std::span<const Template> templates, F&& get)
{
    if (templates.empty())
        throw Error(ErrorCode::InvalidArgument, "no templates supplied");
    double s = 0.0;
    for (const auto& t : templates)
        s += get(t);
    return s / static_cast<double>(templates.size());
}

inline void require_strides(const ThrowRecord& rec, std::span<const Template> templates)
{
    for (const auto& t : templates)
        if (t.strides() != rec.gait.strides.size())
            throw Error(ErrorCode::StyleMismatch, "stride count differs between throw and template");
}

inline DetectorResult contact_deviation(const ThrowRecord& rec, std::span<const Template> templates, std::size_t stride,
                                        double eps)
{
    if (stride >= rec.gait.strides.size())
        throw Error(ErrorCode::NoStrides, "designated stride " + std::to_string(stride + 1) + " is missing");
    for (const auto& t : templates)
        if (stride >= t.a_contact.size())
            throw Error(ErrorCode::StyleMismatch, "template lacks the designated stride");
    const std::size_t ic = rec.gait.strides[stride].ic_idx;
    if (ic >= rec.swing.size())
        throw Error(ErrorCode::NoStrides, "initial contact outside the swing series");
    const double a = centered_angle(rec.swing.angle[ic]);
    const double ref = template_mean(templates, [&](const Template& t) { return t.a_contact[stride]; });
    const double d = std::abs(a - ref);
    return {d > eps, d};
}

} // namespace detail

/// Error 1: gait speed of the instrumented foot too fast or too slow.
inline GaitSpeedResult detect_error1(const ThrowRecord& rec, std::span<const Template> templates, double eps1)
{
    detail::require_strides(rec, templates);
    GaitSpeedResult r;
    for (std::size_t k = 0; k < rec.gait.avg_velocity.size(); ++k) {
        const double ref = detail::template_mean(templates, [&](const Template& t) { return t.avg_velocity[k]; });
        const double d = std::abs(rec.gait.avg_velocity[k] - ref);
        r.deviations.push_back(d);
        r.flag = r.flag || d > eps1;
    }
    return r;
}

/// Error 2: backswing (maximum swing angle) too high or too low.
inline DetectorResult detect_error2(const ThrowRecord& rec, std::span<const Template> templates, double eps2)
{
    const std::vector<double> ang = rec.centered_swing();
    if (ang.empty())
        throw Error(ErrorCode::EmptySeries, "throw has no swing samples");
    const double a_max = *std::max_element(ang.begin(), ang.end());
    const double ref = detail::template_mean(templates, [](const Template& t) { return t.a_max; });
    const double d = std::abs(a_max - ref);
    return {d > eps2, d};
}

/// Error 3: arm position at the initial contact of the last stride.
inline DetectorResult detect_error3(const ThrowRecord& rec, std::span<const Template> templates, double eps3)
{
    if (rec.gait.strides.empty())
        throw Error(ErrorCode::NoStrides, "throw has no strides");
    return detail::contact_deviation(rec, templates, rec.gait.strides.size() - 1, eps3);
}

/// Error 4: arm position at the initial contact of the designated early
/// stride.
inline DetectorResult detect_error4(const ThrowRecord& rec, std::span<const Template> templates, double eps4,
                                    const ErrorOptions& opt = {})
{
    if (opt.error4_stride == 0)
        throw Error(ErrorCode::InvalidArgument, "stride ordinal is 1-based");
    return detail::contact_deviation(rec, templates, opt.error4_stride - 1, eps4);
}

inline ErrorFlags detect_all(const ThrowRecord& rec, std::span<const Template> templates, const ErrorThresholds& eps,
                             const ErrorOptions& opt = {})
{
    ErrorFlags f;
    GaitSpeedResult r1 = detect_error1(rec, templates, eps.eps1);
    f.e1 = r1.flag;
    f.d1 = std::move(r1.deviations);
    const DetectorResult r2 = detect_error2(rec, templates, eps.eps2);
    f.e2 = r2.flag;
    f.d2 = r2.deviation;
    const DetectorResult r3 = detect_error3(rec, templates, eps.eps3);
    f.e3 = r3.flag;
    f.d3 = r3.deviation;
    const DetectorResult r4 = detect_error4(rec, templates, eps.eps4, opt);
    f.e4 = r4.flag;
    f.d4 = r4.deviation;
    return f;
}

} // namespace pinstream

#endif
