#ifndef PINSTREAM_TEST_SUPPORT_HPP
#define PINSTREAM_TEST_SUPPORT_HPP

#include "pinstream/pipeline.hpp"
#include "pinstream/sim.hpp"

namespace pinstream::test {

inline ThrowScript quiet(ThrowScript s)
{
    s.angle_noise = 0.0;
    s.twist_noise = 0.0;
    s.accel_noise = 0.0;
    return s;
}

inline SegmentedThrow run_pipeline(const ThrowScript& s)
{
    const SynthesizedThrow th = synthesize(s);
    return analyze_recording(th.wrist, th.leg, {s.athlete_id, Style::FiveStep, s.throw_index});
}

inline ThrowRecord record_of(const ThrowScript& s) { return run_pipeline(s).record; }

/// Nearest sample index of a ground-truth time (seconds) in a record.
inline long sample_of(const ThrowRecord& rec, double t_s)
{
    return std::lround((t_s * 1000.0 - rec.swing.t_ms.front()) / 20.0);
}

} // namespace pinstream::test

#endif
