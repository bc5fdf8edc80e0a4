#ifndef PINSTREAM_TEMPLATE_HPP
#define PINSTREAM_TEMPLATE_HPP

// Coach reference throws and the thresholds that travel with them.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "pinstream/error.hpp"
#include "pinstream/segment.hpp"

namespace pinstream {

/// Upper bounds of the acceptable deviation ranges [0, eps_i] of the four
/// error detectors. Infinity disables a detector.
struct ErrorThresholds {
    double eps1 = 0.2;  ///< gait speed, m/s
    double eps2 = 0.17; ///< backswing, rad
    double eps3 = 0.15; ///< arm angle at last initial contact, rad
    double eps4 = 0.15; ///< arm angle at the third-step contact, rad

    void validate() const
    {
        for (double e : {eps1, eps2, eps3, eps4})
            if (!(e > 0.0))
                throw Error(ErrorCode::InvalidArgument, "error thresholds must be positive");
    }

    friend bool operator==(const ErrorThresholds&, const ErrorThresholds&) = default;
};

/// One coach reference throw, reduced to what the quality and error stages
/// need.
struct Template {
    Style style = Style::FiveStep;
    std::vector<std::vector<double>> segments; ///< swing angle per stride (rad)
    std::vector<double> avg_velocity;          ///< per stride (m/s)
    double a_max = 0.0;                        ///< maximum swing angle (rad)
    std::vector<double> a_contact;             ///< swing angle at each initial contact (rad)
    /// Per-phase calibration distance for single-template scoring.
    std::vector<double> ad_ref;

    std::size_t strides() const { return segments.size(); }

    void validate() const
    {
        const std::size_t k = segments.size();
        if (k == 0 || k != expected_strides(style))
            throw Error(ErrorCode::StyleMismatch, "template stride count does not match its style");
        if (avg_velocity.size() != k || a_contact.size() != k || (!ad_ref.empty() && ad_ref.size() != k))
            throw Error(ErrorCode::SchemaError, "template statistics do not match its stride count");
        for (const auto& s : segments)
            if (s.empty())
                throw Error(ErrorCode::SchemaError, "template segment is empty");
        const auto finite = [](double v) { return std::isfinite(v); };
        if (!std::all_of(avg_velocity.begin(), avg_velocity.end(), finite) || !std::isfinite(a_max) ||
            !std::all_of(a_contact.begin(), a_contact.end(), finite))
            throw Error(ErrorCode::SchemaError, "template statistics must be finite");
    }

    friend bool operator==(const Template&, const Template&) = default;
};

/// Template file contents: the coach's references for one style plus the
/// coach-owned error thresholds.
struct TemplateSet {
    Style style = Style::FiveStep;
    std::vector<Template> templates;
    ErrorThresholds thresholds;

    void validate() const
    {
        if (templates.empty())
            throw Error(ErrorCode::SchemaError, "template set is empty");
        for (const auto& t : templates) {
            t.validate();
            if (t.style != style)
                throw Error(ErrorCode::StyleMismatch, "template style differs from set style");
        }
        thresholds.validate();
    }

    friend bool operator==(const TemplateSet&, const TemplateSet&) = default;
};

/// Builds a template from a partitioned coach throw (no calibration yet).
inline Template make_template(const ThrowRecord& rec)
{
    Template t;
    t.style = rec.meta.style;
    const std::vector<double> ang = rec.centered_swing();
    for (std::size_t k = 0; k < rec.phases.size(); ++k) {
        t.segments.push_back(rec.phase_segment(k));
        t.a_contact.push_back(ang.at(rec.gait.strides.at(k).ic_idx));
    }
    t.avg_velocity = rec.gait.avg_velocity;
    t.a_max = ang.empty() ? 0.0 : *std::max_element(ang.begin(), ang.end());
    return t;
}

} // namespace pinstream

#endif
