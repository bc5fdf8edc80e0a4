#ifndef PINSTREAM_PIPELINE_HPP
#define PINSTREAM_PIPELINE_HPP

// Raw dual-sensor streams to partitioned throw records.

#include <algorithm>
#include <span>
#include <vector>

#include "pinstream/error.hpp"
#include "pinstream/gait.hpp"
#include "pinstream/quaternion.hpp"
#include "pinstream/segment.hpp"

namespace pinstream {

struct PipelineParams {
    ThrowBoundParams bounds;
    GaitParams gait;
    double baseline_ms = 1000.0; ///< leading rest used to estimate the baseline
    double max_skew_ms = 10.0;
    double max_jitter = 0.2;     ///< tolerated sampling jitter, fraction of a period
};

struct SegmentedThrow {
    ThrowRecord record;
    IndexRange bounds;     ///< in wrist samples
    BaselineFrame baseline;
};

/// Baseline from the mean orientation over the leading rest window.
inline BaselineFrame estimate_baseline(const OrientationStream& wrist, double window_ms)
{
    if (wrist.q.empty() || wrist.t_ms.size() != wrist.q.size())
        throw Error(ErrorCode::InvalidStream, "wrist stream is empty or ragged");
    std::vector<Quaternion> head;
    for (std::size_t i = 0; i < wrist.q.size() && wrist.t_ms[i] - wrist.t_ms.front() < window_ms; ++i)
        head.push_back(normalize(wrist.q[i]));
    if (head.empty())
        head.push_back(normalize(wrist.q.front()));
    return {average(head)};
}

/// Slice of the leg stream covering [t_lo, t_hi] widened by the skew limit.
inline AccelStream crop(const AccelStream& leg, double t_lo, double t_hi, double margin_ms)
{
    AccelStream out;
    for (std::size_t i = 0; i < leg.t_ms.size(); ++i) {
        if (leg.t_ms[i] >= t_lo - margin_ms && leg.t_ms[i] <= t_hi + margin_ms) {
            out.t_ms.push_back(leg.t_ms[i]);
            out.accel.push_back(leg.accel[i]);
        }
    }
    return out;
}

/// Segments one throw window and runs gait analysis and phase partitioning
/// on it.
inline ThrowRecord build_record(const SwingAngleSeries& swing, const AccelStream& leg, IndexRange bounds,
                                const ThrowMeta& meta, const PipelineParams& p = {})
{
    if (bounds.end > swing.size() || bounds.start >= bounds.end)
        throw Error(ErrorCode::InvalidArgument, "throw bounds outside the swing series");
    SwingAngleSeries win;
    win.t_ms.assign(swing.t_ms.begin() + static_cast<std::ptrdiff_t>(bounds.start),
                    swing.t_ms.begin() + static_cast<std::ptrdiff_t>(bounds.end));
    win.angle.assign(swing.angle.begin() + static_cast<std::ptrdiff_t>(bounds.start),
                     swing.angle.begin() + static_cast<std::ptrdiff_t>(bounds.end));
    const AccelStream leg_win = crop(leg, win.t_ms.front(), win.t_ms.back(), p.max_skew_ms);
    const SyncedStreams synced = synchronize(win, leg_win, p.max_skew_ms, p.gait.fs_hz);
    const GaitProfile gait = gait_profile(synced.leg, p.gait);
    return partition_phases(synced.swing, gait, meta);
}

/// Every throw found in a pair of raw streams, in time order.
inline std::vector<SegmentedThrow> segment_streams(const OrientationStream& wrist, const AccelStream& leg,
                                                   const ThrowMeta& meta, const PipelineParams& p = {})
{
    validate_sampling(wrist.t_ms, p.gait.fs_hz, p.max_jitter);
    validate_sampling(leg.t_ms, p.gait.fs_hz, p.max_jitter);
    const BaselineFrame base = estimate_baseline(wrist, p.baseline_ms);
    const SwingAngleSeries swing = swing_angles(wrist.t_ms, wrist.q, base);
    std::vector<SegmentedThrow> out;
    std::int64_t k = 0;
    for (const IndexRange& r : detect_throw_bounds(swing, p.bounds)) {
        ThrowMeta m = meta;
        m.throw_index = meta.throw_index + k++;
        out.push_back({build_record(swing, leg, r, m, p), r, base});
    }
    return out;
}

/// The single throw expected in a per-throw recording.
inline SegmentedThrow analyze_recording(const OrientationStream& wrist, const AccelStream& leg, const ThrowMeta& meta,
                                        const PipelineParams& p = {})
{
    std::vector<SegmentedThrow> t = segment_streams(wrist, leg, meta, p);
    if (t.empty())
        throw Error(ErrorCode::InvalidStream, "no throw detected in the recording");
    if (t.size() > 1)
        throw Error(ErrorCode::InvalidStream, std::to_string(t.size()) + " throws detected where one was expected");
    return std::move(t.front());
}

} // namespace pinstream

#endif
