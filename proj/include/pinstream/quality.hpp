#ifndef PINSTREAM_QUALITY_HPP
#define PINSTREAM_QUALITY_HPP

// Per-phase quality degree of a throw against coach templates.

#include <algorithm>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "pinstream/dtw.hpp"
#include "pinstream/error.hpp"
#include "pinstream/segment.hpp"
#include "pinstream/template.hpp"

namespace pinstream {

struct QualityResult {
    double qd = 0.0;  ///< percent, [0, 100]
    double md = 0.0;  ///< minimum template distance
    double ad = 0.0;  ///< reference distance (mean of the others, or AD_ref)
    std::vector<double> distances;
};

/// Quality degree from already computed template distances.
///
/// With two or more distances: MD is the minimum, AD the mean of the
/// remaining ones and QD = (AD - MD) / AD * 100 (100 when every distance is
/// zero). With a single distance there are no remaining templates, so AD is
/// the calibration distance `ad_ref` and QD = (1 - MD / AD_ref) * 100.
/// The result is clamped to [0, 100].
inline QualityResult quality_from_distances(std::vector<double> distances, std::optional<double> ad_ref = std::nullopt)
{
    if (distances.empty())
        throw Error(ErrorCode::InvalidArgument, "quality degree needs at least one template");
    QualityResult r;
    const auto min_it = std::min_element(distances.begin(), distances.end());
    r.md = *min_it;
    if (distances.size() == 1) {
        if (!ad_ref || !(*ad_ref > 0.0))
            throw Error(ErrorCode::MissingCalibration, "single-template scoring needs a positive AD_ref");
        r.ad = *ad_ref;
    } else {
        double sum = 0.0;
        for (auto it = distances.begin(); it != distances.end(); ++it)
            if (it != min_it)
                sum += *it;
        r.ad = sum / static_cast<double>(distances.size() - 1);
    }
    const double qd = r.ad > 0.0 ? (r.ad - r.md) / r.ad * 100.0 : (r.md == 0.0 ? 100.0 : 0.0);
    r.qd = std::clamp(qd, 0.0, 100.0);
    r.distances = std::move(distances);
    return r;
}

inline QualityResult quality_degree(std::span<const double> user_segment,
                                    std::span<const std::vector<double>> template_segments,
                                    std::optional<double> ad_ref = std::nullopt, const DtwOptions& dtw_opt = {})
{
    std::vector<double> d;
    d.reserve(template_segments.size());
    for (const auto& t : template_segments)
        d.push_back(dtw<double>(user_segment, std::span<const double>(t), dtw_opt));
    return quality_from_distances(std::move(d), ad_ref);
}

struct QualityReport {
    std::vector<double> qd;                      ///< one per phase
    std::vector<double> md;
    std::vector<double> ad;
    std::vector<std::vector<double>> distances;  ///< [phase][template]
    std::size_t template_count = 0;
};

/// Scores every phase of a throw against the matching phase of each template.
inline QualityReport assess_throw(const ThrowRecord& rec, std::span<const Template> templates,
                                  const DtwOptions& dtw_opt = {})
{
    if (templates.empty())
        throw Error(ErrorCode::InvalidArgument, "no templates supplied");
    const std::size_t k = rec.phases.size();
    for (const auto& t : templates)
        if (t.strides() != k)
            throw Error(ErrorCode::StyleMismatch, "record has " + std::to_string(k) + " phases, template has " +
                                                      std::to_string(t.strides()));
    QualityReport rep;
    rep.template_count = templates.size();
    for (std::size_t phase = 0; phase < k; ++phase) {
        const std::vector<double> user = rec.phase_segment(phase);
        std::vector<double> dist;
        for (const auto& t : templates)
            dist.push_back(dtw<double>(std::span<const double>(user), std::span<const double>(t.segments[phase]), dtw_opt));
        std::optional<double> ad_ref;
        if (templates.size() == 1 && !templates[0].ad_ref.empty())
            ad_ref = templates[0].ad_ref[phase];
        QualityResult r = quality_from_distances(std::move(dist), ad_ref);
        rep.qd.push_back(r.qd);
        rep.md.push_back(r.md);
        rep.ad.push_back(r.ad);
        rep.distances.push_back(std::move(r.distances));
    }
    return rep;
}

/// Sets the template's per-phase AD_ref to the mean DTW distance between its
/// segments and the given perturbed copies of itself.
inline void calibrate(Template& t, std::span<const std::vector<std::vector<double>>> perturbed,
                      const DtwOptions& dtw_opt = {})
{
    if (perturbed.empty())
        throw Error(ErrorCode::InvalidArgument, "calibration needs at least one perturbation");
    t.ad_ref.assign(t.strides(), 0.0);
    for (const auto& p : perturbed) {
        if (p.size() != t.strides())
            throw Error(ErrorCode::StyleMismatch, "perturbation phase count differs from template");
        for (std::size_t k = 0; k < t.strides(); ++k)
            t.ad_ref[k] += dtw<double>(std::span<const double>(t.segments[k]), std::span<const double>(p[k]), dtw_opt);
    }
    for (double& v : t.ad_ref)
        v /= static_cast<double>(perturbed.size());
}

} // namespace pinstream

#endif
