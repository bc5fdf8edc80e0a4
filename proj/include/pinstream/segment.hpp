#ifndef PINSTREAM_SEGMENT_HPP
#define PINSTREAM_SEGMENT_HPP

// Throw boundary detection on the swing-angle stream, cross-sensor
// synchronization and phase partitioning by gait events.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "pinstream/error.hpp"
#include "pinstream/gait.hpp"
#include "pinstream/quaternion.hpp"

namespace pinstream {

/// Half-open index range [start, end).
struct IndexRange {
    std::size_t start = 0;
    std::size_t end = 0;

    std::size_t size() const { return end - start; }
    friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

struct SyncedStreams {
    SwingAngleSeries swing;
    AccelStream leg;
};

namespace detail {

template <class Times>
std::size_t nearest_index(const Times& t, double target)
{
    auto it = std::lower_bound(t.begin(), t.end(), target);
    if (it == t.begin())
        return 0;
    if (it == t.end())
        return t.size() - 1;
    const std::size_t hi = static_cast<std::size_t>(it - t.begin());
    // ties go to the earlier sample
    return (*it - target) < (target - t[hi - 1]) ? hi : hi - 1;
}

} // namespace detail

/// Crops both streams to their common time window and resamples them onto a
/// shared grid by nearest-timestamp matching. The grid starts at the first
/// wrist timestamp inside the window and advances by 1000/fs ms.
inline SyncedStreams synchronize(const SwingAngleSeries& wrist, const AccelStream& leg, double max_skew_ms = 10.0,
                                 double fs_hz = 50.0)
{
    if (wrist.t_ms.size() != wrist.angle.size() || leg.t_ms.size() != leg.accel.size())
        throw Error(ErrorCode::LengthMismatch, "stream timestamp/sample counts differ");
    if (wrist.empty() || leg.t_ms.empty())
        throw Error(ErrorCode::NoCommonWindow, "empty stream");
    const double lo = std::max(wrist.t_ms.front(), leg.t_ms.front());
    const double hi = std::min(wrist.t_ms.back(), leg.t_ms.back());
    auto first = std::lower_bound(wrist.t_ms.begin(), wrist.t_ms.end(), lo);
    if (lo > hi || first == wrist.t_ms.end() || *first > hi)
        throw Error(ErrorCode::NoCommonWindow, "streams do not overlap in time");

    const double period = 1000.0 / fs_hz;
    SyncedStreams out;
    const double origin = *first;
    for (std::size_t k = 0;; ++k) {
        const double t = origin + static_cast<double>(k) * period;
        if (t > hi + 1e-9)
            break;
        const std::size_t wi = detail::nearest_index(wrist.t_ms, t);
        const std::size_t li = detail::nearest_index(leg.t_ms, t);
        const double skew = std::max(std::abs(wrist.t_ms[wi] - t), std::abs(leg.t_ms[li] - t));
        if (skew > max_skew_ms + 1e-9)
            throw Error(ErrorCode::ClockSkew, "sample skew " + std::to_string(skew) + " ms exceeds limit at t=" +
                                                  std::to_string(t));
        out.swing.t_ms.push_back(t);
        out.swing.angle.push_back(wrist.angle[wi]);
        out.leg.t_ms.push_back(t);
        out.leg.accel.push_back(leg.accel[li]);
    }
    return out;
}

struct ThrowBoundParams {
    double theta_on = 0.26; ///< rad
    double t_on_ms = 200.0;
    double t_off_ms = 500.0;
};

/// True when the angle sits inside the rest band around the baseline. The
/// band is measured as circular distance from zero, so small negative
/// excursions (wrapped to just under 2*pi) still count as rest.
inline bool in_rest_band(double omega, double theta_on)
{
    const double d = std::min(omega, 2.0 * std::numbers::pi - omega);
    return d < theta_on;
}

/// Incremental throw detector. Feed samples in time order; a completed range
/// is returned as soon as the closing dwell has elapsed. Memory is bounded by
/// the look-back needed for the leading pad.
///
/// A throw opens once the angle has stayed outside the rest band for at least
/// t_on and closes once it has stayed inside for at least t_off. Reported
/// ranges are padded by t_on on both sides and never overlap.
class ThrowBoundDetector {
public:
    explicit ThrowBoundDetector(ThrowBoundParams params = {}) : params_(params) {}

    std::optional<IndexRange> push(double t_ms, double omega)
    {
        const std::size_t idx = count_++;
        history_.push_back({idx, t_ms});
        trim_history(t_ms);
        const bool rest = in_rest_band(omega, params_.theta_on);

        if (!open_) {
            if (rest) {
                run_start_.reset();
                return std::nullopt;
            }
            if (!run_start_)
                run_start_ = Mark{idx, t_ms};
            if (t_ms - run_start_->t >= params_.t_on_ms) {
                open_ = true;
                onset_ = *run_start_;
                last_active_ = Mark{idx, t_ms};
                rest_start_.reset();
                pad_start_ = first_index_at_or_after(onset_.t - params_.t_on_ms);
                if (pad_start_ < next_free_)
                    pad_start_ = next_free_;
            }
            return std::nullopt;
        }

        if (!rest) {
            rest_start_.reset();
            last_active_ = Mark{idx, t_ms};
            return std::nullopt;
        }
        if (!rest_start_)
            rest_start_ = Mark{idx, t_ms};
        if (t_ms - rest_start_->t >= params_.t_off_ms) {
            const double pad_end_t = last_active_.t + params_.t_on_ms;
            std::size_t end = last_active_.idx + 1;
            for (const auto& h : history_)
                if (h.idx > last_active_.idx && h.t <= pad_end_t)
                    end = h.idx + 1;
            open_ = false;
            run_start_.reset();
            rest_start_.reset();
            next_free_ = end;
            return IndexRange{pad_start_, end};
        }
        return std::nullopt;
    }

    std::size_t samples_seen() const { return count_; }

private:
    struct Mark {
        std::size_t idx;
        double t;
    };

    std::size_t first_index_at_or_after(double t) const
    {
        for (const auto& h : history_)
            if (h.t >= t)
                return h.idx;
        return history_.empty() ? 0 : history_.back().idx;
    }

    void trim_history(double now)
    {
        // keep enough for the leading pad of a throw that opens now and for
        // the trailing pad search at close time
        const double keep = std::max(params_.t_on_ms, params_.t_off_ms) + params_.t_on_ms + 1.0;
        while (history_.size() > 1 && now - history_.front().t > keep)
            history_.pop_front();
    }

    ThrowBoundParams params_;
    std::deque<Mark> history_;
    std::size_t count_ = 0;
    std::size_t next_free_ = 0;
    bool open_ = false;
    std::optional<Mark> run_start_;
    std::optional<Mark> rest_start_;
    Mark onset_{0, 0.0};
    Mark last_active_{0, 0.0};
    std::size_t pad_start_ = 0;
};

/// Batch form of ThrowBoundDetector over a whole series.
inline std::vector<IndexRange> detect_throw_bounds(const SwingAngleSeries& swing, const ThrowBoundParams& params = {})
{
    ThrowBoundDetector det(params);
    std::vector<IndexRange> out;
    for (std::size_t i = 0; i < swing.size(); ++i)
        if (auto r = det.push(swing.t_ms[i], swing.angle[i]))
            out.push_back(*r);
    return out;
}

/// Delivery technique; fixes the number of instrumented-foot strides.
enum class Style { FiveStep };

inline std::string to_string(Style s)
{
    switch (s) {
    case Style::FiveStep: return "five-step";
    }
    return "unknown";
}

inline Style parse_style(const std::string& s)
{
    if (s == "five-step")
        return Style::FiveStep;
    throw Error(ErrorCode::SchemaError, "unknown style tag '" + s + "'");
}

constexpr std::size_t expected_strides(Style s)
{
    switch (s) {
    case Style::FiveStep: return 3;
    }
    return 0;
}

struct ThrowMeta {
    std::string athlete_id;
    Style style = Style::FiveStep;
    std::int64_t throw_index = 0;
};

/// One segmented, synchronized throw.
struct ThrowRecord {
    SwingAngleSeries swing;
    GaitProfile gait;
    std::vector<IndexRange> phases; ///< one per stride, [start, end] of the stride
    ThrowMeta meta;

    /// Swing angles mapped around the baseline (see centered_angle).
    std::vector<double> centered_swing() const { return centered_angles(swing.angle); }

    std::vector<double> phase_segment(std::size_t k) const
    {
        const IndexRange r = phases.at(k);
        std::vector<double> out;
        out.reserve(r.size());
        for (std::size_t i = r.start; i < r.end; ++i)
            out.push_back(centered_angle(swing.angle[i]));
        return out;
    }
};

/// Cuts the swing series into one phase per stride.
inline ThrowRecord partition_phases(const SwingAngleSeries& swing, const GaitProfile& gait, ThrowMeta meta = {})
{
    if (gait.strides.empty())
        throw Error(ErrorCode::NoStrides, "gait profile has no strides");
    const std::size_t k = expected_strides(meta.style);
    if (gait.strides.size() != k)
        throw Error(ErrorCode::StyleMismatch, "style " + to_string(meta.style) + " expects " + std::to_string(k) +
                                                  " strides, found " + std::to_string(gait.strides.size()));
    ThrowRecord rec;
    rec.swing = swing;
    rec.gait = gait;
    rec.meta = std::move(meta);
    for (const Stride& s : gait.strides) {
        if (s.end_idx >= swing.size())
            throw Error(ErrorCode::LengthMismatch, "stride exceeds the swing series");
        rec.phases.push_back({s.start_idx, s.end_idx + 1});
    }
    return rec;
}

} // namespace pinstream

#endif
