#ifndef PINSTREAM_SIM_HPP
#define PINSTREAM_SIM_HPP

// Parametric five-step throw simulator.
//
// Wrist: the swing angle follows a monotone cubic (PCHIP) through keyframes
//   rest 0 -> contact angle at IC1 -> contact angle at IC2 -> backswing peak
//   just before IS3 -> contact angle at IC3 -> follow-through -> rest 0,
// with every keyframe after the first shifted by the arm lag of its stride.
// The orientation is q_baseline * R_x(angle + n) * R_y(twist noise).
//
// Leg: |a| = g + d(t), where each stride adds a Gaussian burst centred in the
// swing and a short dip at lift-off and at contact. The vector is that
// magnitude along the mount's z axis plus per-axis Gaussian noise.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

// Boost 1.74 pchip calls unqualified isnan
#include <math.h>

#include <boost/math/interpolators/pchip.hpp>

#include "pinstream/error.hpp"
#include "pinstream/gait.hpp"
#include "pinstream/quaternion.hpp"
#include "pinstream/random.hpp"
#include "pinstream/segment.hpp"
#include "pinstream/skill.hpp"

namespace pinstream {

inline constexpr double kGravity = 9.81;
inline constexpr std::size_t kErrorKinds = 4;

/// E1 gait speed, E2 backswing, E3 arm at last contact, E4 arm at third step.
using ErrorSet = std::array<bool, kErrorKinds>;

struct ThrowScript {
    Skill skill = Skill::Expert;
    std::string athlete_id = "coach";
    std::int64_t throw_index = 0;

    double rest_before_s = 2.0; ///< arm onset time
    double rest_after_s = 2.0;
    std::vector<double> is_s;   ///< lift-off times, seconds from stream start
    std::vector<double> ic_s;   ///< contact times

    std::array<double, 3> contact_angle = {0.8, 2.2, 1.6};
    double a_max = 3.3;
    double peak_lead_s = 0.05; ///< backswing peak this long before IS3
    double follow_angle = 0.6;
    double follow_s = 0.5;
    double settle_s = 1.1;
    std::array<double, 3> lag_s{}; ///< arm lag per stride

    double speed = 1.0;
    double burst_amp = 28.0; ///< m/s^2 at speed 1
    double dip_amp = 5.0;
    double burst_width_s = 0.055;
    double dip_width_s = 0.02;
    double mid_fraction = 0.5;  ///< burst centre within the swing
    std::size_t leg_strides = 3;
    double leg_offset_ms = 0.0;

    Quaternion baseline = normalize({0.95, 0.12, -0.2, 0.18});
    Quaternion leg_mount = normalize({0.9, -0.3, 0.25, 0.1});

    double angle_noise = 0.01; ///< rad RMS
    double twist_noise = 0.01;
    double accel_noise = 0.3;  ///< m/s^2 RMS per axis
    std::uint64_t noise_seed = 0;

    ErrorSet errors{};
};

/// Lift-off/contact times from swing and stance durations. The first
/// lift-off follows arm onset by `lead_s`.
inline void set_timing(ThrowScript& s, double lead_s, const std::array<double, 3>& swing,
                       const std::array<double, 2>& stance)
{
    s.is_s.assign(3, 0.0);
    s.ic_s.assign(3, 0.0);
    double t = s.rest_before_s + lead_s;
    for (std::size_t k = 0; k < 3; ++k) {
        s.is_s[k] = t;
        s.ic_s[k] = t + swing[k];
        if (k < 2)
            t = s.ic_s[k] + stance[k];
    }
}

/// Moves lift-off and contact times onto the leg sensor's sample grid. Average stride
/// velocity integrates from zero at lift-off, so a half-sample ambiguity in
/// the scripted event would shift the reference by a whole sample of
/// integrated acceleration.
inline void snap_events(ThrowScript& s, double fs_hz)
{
    const double off = s.leg_offset_ms / 1000.0;
    for (double& t : s.is_s)
        t = std::round((t - off) * fs_hz) / fs_hz + off;
    for (double& t : s.ic_s)
        t = std::round((t - off) * fs_hz) / fs_hz + off;
}

inline ThrowScript nominal_script()
{
    ThrowScript s;
    set_timing(s, 0.8, {0.4, 0.4, 0.4}, {0.6, 0.6});
    return s;
}

struct Keyframe {
    double t;
    double angle;
};

inline std::vector<Keyframe> arm_keyframes(const ThrowScript& s)
{
    if (s.is_s.size() != 3 || s.ic_s.size() != 3)
        throw Error(ErrorCode::InvalidArgument, "script needs three lift-off and contact times");
    const double end = s.ic_s[2] + s.lag_s[2];
    return {{s.rest_before_s, 0.0},
            {s.ic_s[0] + s.lag_s[0], s.contact_angle[0]},
            {s.ic_s[1] + s.lag_s[1], s.contact_angle[1]},
            {s.is_s[2] - s.peak_lead_s + s.lag_s[2], s.a_max},
            {end, s.contact_angle[2]},
            {end + s.follow_s, s.follow_angle},
            {end + s.settle_s, 0.0}};
}

inline double stream_duration_s(const ThrowScript& s) { return arm_keyframes(s).back().t + s.rest_after_s; }

inline void validate(const ThrowScript& s)
{
    const auto kf = arm_keyframes(s);
    for (std::size_t i = 1; i < kf.size(); ++i)
        if (!(kf[i].t > kf[i - 1].t))
            throw Error(ErrorCode::InvalidArgument, "arm keyframes out of order at " + std::to_string(i));
    for (std::size_t k = 0; k < 3; ++k) {
        if (!(s.ic_s[k] > s.is_s[k]) || (k > 0 && !(s.is_s[k] > s.ic_s[k - 1])))
            throw Error(ErrorCode::InvalidArgument, "gait events out of order");
    }
    if (s.is_s[0] <= s.rest_before_s)
        throw Error(ErrorCode::InvalidArgument, "first lift-off precedes arm onset");
    if (s.leg_strides == 0 || s.leg_strides > 3)
        throw Error(ErrorCode::InvalidArgument, "leg stride count must be 1..3");
    if (s.angle_noise < 0.0 || s.twist_noise < 0.0 || s.accel_noise < 0.0)
        throw Error(ErrorCode::InvalidArgument, "noise levels must be non-negative");
    if (!(s.dip_amp < kGravity))
        throw Error(ErrorCode::InvalidArgument, "dips must keep |a| positive");
}

/// Noise-free swing angle of the script at time t (seconds).
class ArmTrajectory {
public:
    explicit ArmTrajectory(const ThrowScript& s)
    {
        std::vector<double> x, y;
        for (const Keyframe& k : arm_keyframes(s)) {
            x.push_back(k.t);
            y.push_back(k.angle);
        }
        t0_ = x.front();
        t1_ = x.back();
        spline_.emplace(std::move(x), std::move(y), 0.0, 0.0);
    }

    double operator()(double t) const
    {
        if (t <= t0_ || t >= t1_)
            return 0.0;
        return (*spline_)(t);
    }

private:
    double t0_ = 0.0, t1_ = 0.0;
    std::optional<boost::math::interpolators::pchip<std::vector<double>>> spline_;
};

/// Scripted dynamic part d(t) of the leg acceleration magnitude.
inline double leg_dynamic(const ThrowScript& s, double t)
{
    const auto gauss = [](double x, double c, double w) { return std::exp(-0.5 * ((x - c) / w) * ((x - c) / w)); };
    double d = 0.0;
    for (std::size_t k = 0; k < s.leg_strides; ++k) {
        const double mid = s.is_s[k] + s.mid_fraction * (s.ic_s[k] - s.is_s[k]);
        d += s.speed * s.burst_amp * gauss(t, mid, s.burst_width_s);
        d -= s.dip_amp * (gauss(t, s.is_s[k], s.dip_width_s) + gauss(t, s.ic_s[k], s.dip_width_s));
    }
    return d;
}

/// Applies the squared magnitude response of the zero-phase 2nd-order
/// Butterworth high-pass in the frequency domain (direct DFT, periodic
/// extension). Used as an independent reference for the recursive filter.
inline std::vector<double> ideal_highpass(const std::vector<double>& x, double fc_hz, double fs_hz)
{
    const std::size_t n = x.size();
    std::vector<std::complex<double>> tw(n);
    for (std::size_t i = 0; i < n; ++i)
        tw[i] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
    const double kc = std::pow(std::tan(std::numbers::pi * fc_hz / fs_hz), 4);
    std::vector<std::complex<double>> X(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> acc = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            acc += x[i] * tw[(k * i) % n];
        // bin k and n - k share |f|; the digital response depends on tan(w/2)
        const std::size_t kk = std::min(k, n - k);
        const double w = 2.0 * std::numbers::pi * static_cast<double>(kk) / static_cast<double>(n);
        const double t4 = 2 * kk == n ? std::numeric_limits<double>::infinity() : std::pow(std::tan(0.5 * w), 4);
        const double h2 = std::isinf(t4) ? 1.0 : t4 / (t4 + kc);
        X[k] = acc * h2;
    }
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::complex<double> acc = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            acc += X[k] * std::conj(tw[(k * i) % n]);
        y[i] = acc.real() / static_cast<double>(n);
    }
    return y;
}

struct StrideTruth {
    double is_s = 0.0;
    double ic_s = 0.0;
    double mid_s = 0.0;
    double avg_velocity = 0.0; ///< m/s
};

struct GroundTruth {
    Skill skill = Skill::Expert;
    std::string athlete_id;
    std::int64_t throw_index = 0;
    double onset_s = 0.0; ///< arm leaves rest
    double end_s = 0.0;   ///< arm back at rest
    std::vector<StrideTruth> strides;
    double a_max = 0.0;
    std::array<double, 3> a_contact{}; ///< noise-free swing angle at each IC
    ErrorSet errors{};
    Quaternion baseline;
};

struct SynthesizedThrow {
    ThrowScript script;
    OrientationStream wrist;
    AccelStream leg;
    GroundTruth truth;
};

inline SynthesizedThrow synthesize(const ThrowScript& script, double fs_hz = 50.0)
{
    validate(script);
    SynthesizedThrow out;
    out.script = script;
    const ArmTrajectory arm(script);
    const double dur = stream_duration_s(script);
    const auto n = static_cast<std::size_t>(std::floor(dur * fs_hz)) + 1;
    Rng rng(script.noise_seed);
    const Vec3 xaxis{1, 0, 0}, yaxis{0, 1, 0};
    const Quaternion base = normalize(script.baseline);
    const Quaternion mount = normalize(script.leg_mount);
    std::vector<double> dyn(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / fs_hz;
        const double t_ms = static_cast<double>(i) * 1000.0 / fs_hz;
        const double ang = arm(t) + script.angle_noise * rng.normal();
        const double tw = script.twist_noise * rng.normal();
        out.wrist.t_ms.push_back(t_ms);
        out.wrist.q.push_back(normalize(base * from_axis_angle(xaxis, ang) * from_axis_angle(yaxis, tw)));

        const double t_leg = t + script.leg_offset_ms / 1000.0;
        dyn[i] = leg_dynamic(script, t_leg);
        Vec3 a = rotate(mount, Vec3{0, 0, kGravity + dyn[i]});
        a.x += script.accel_noise * rng.normal();
        a.y += script.accel_noise * rng.normal();
        a.z += script.accel_noise * rng.normal();
        out.leg.t_ms.push_back(t_ms + script.leg_offset_ms);
        out.leg.accel.push_back(a);
    }

    GroundTruth& g = out.truth;
    g.skill = script.skill;
    g.athlete_id = script.athlete_id;
    g.throw_index = script.throw_index;
    const auto kf = arm_keyframes(script);
    g.onset_s = kf.front().t;
    g.end_s = kf.back().t;
    g.a_max = script.a_max;
    for (std::size_t k = 0; k < 3; ++k)
        g.a_contact[k] = arm(script.ic_s[k]);
    g.errors = script.errors;
    g.baseline = base;

    const std::vector<double> hp = ideal_highpass(dyn, 1.0, fs_hz);
    for (std::size_t k = 0; k < script.leg_strides; ++k) {
        StrideTruth st;
        st.is_s = script.is_s[k];
        st.ic_s = script.ic_s[k];
        st.mid_s = st.is_s + script.mid_fraction * (st.ic_s - st.is_s);
        const double off = script.leg_offset_ms / 1000.0;
        const auto i0 = static_cast<std::size_t>(std::lround((st.is_s - off) * fs_hz));
        const auto i1 = static_cast<std::size_t>(std::lround((st.ic_s - off) * fs_hz));
        double v = 0.0, sum = 0.0;
        for (std::size_t i = i0 + 1; i <= i1; ++i) {
            v += 0.5 * (hp[i - 1] + hp[i]) / fs_hz;
            sum += v;
        }
        st.avg_velocity = sum / static_cast<double>(i1 - i0 + 1);
        g.strides.push_back(st);
    }
    return out;
}

struct ErrorMagnitudes {
    double speed_factor = 0.4;    ///< E1: speed scaled by 1 +- this
    double backswing_rad = 0.436; ///< E2: about 25 degrees
    double last_contact_s = 0.15; ///< E3: lag of the final arm phase
    double early_steps_s = 0.25;  ///< E4: lag of the first two arm phases
};

/// Injects error `kind` (0..3 for E1..E4); direction is +1 or -1.
inline void inject_error(ThrowScript& s, std::size_t kind, int direction, const ErrorMagnitudes& mag = {})
{
    const double d = direction >= 0 ? 1.0 : -1.0;
    switch (kind) {
    case 0: s.speed *= 1.0 + d * mag.speed_factor; break;
    case 1: s.a_max += d * mag.backswing_rad; break;
    case 2: s.lag_s[2] += d * mag.last_contact_s; break;
    case 3:
        s.lag_s[0] += d * mag.early_steps_s;
        s.lag_s[1] += d * mag.early_steps_s;
        break;
    default: throw Error(ErrorCode::InvalidArgument, "error kind must be 0..3");
    }
    s.errors[kind] = true;
}

/// Athlete-level means and per-throw spread for one skill level.
struct SkillPrior {
    double speed, a_max, swing_s, stance_s, lead_s;
    double athlete_sd;  ///< scale of athlete offsets from the class mean
    double throw_sd;    ///< scale of per-throw jitter
    double error_rate;  ///< probability that a throw carries one injected error
};

inline SkillPrior default_prior(Skill s)
{
    switch (s) {
    case Skill::Novice: return {0.95, 3.12, 0.44, 0.62, 0.85, 1.0, 2.5, 0.3};
    case Skill::Intermediate: return {1.05, 3.2, 0.415, 0.59, 0.82, 1.0, 1.6, 0.1};
    case Skill::Expert: return {1.15, 3.3, 0.39, 0.56, 0.8, 1.0, 1.0, 0.03};
    }
    return {};
}

/// Base standard deviations scaled by SkillPrior::athlete_sd / throw_sd.
struct SpreadUnits {
    double speed = 0.03, a_max = 0.03, swing_s = 0.008, stance_s = 0.01, lag_s = 0.008;
};

struct AthleteProfile {
    std::string id;
    Skill skill = Skill::Expert;
    double speed = 1.0, a_max = 3.3, swing_s = 0.4, stance_s = 0.6, lead_s = 0.8;
};

inline AthleteProfile sample_athlete(const std::string& id, Skill skill, Rng& rng, const SpreadUnits& u = {})
{
    const SkillPrior p = default_prior(skill);
    AthleteProfile a;
    a.id = id;
    a.skill = skill;
    a.speed = p.speed + p.athlete_sd * u.speed * rng.normal();
    a.a_max = p.a_max + p.athlete_sd * u.a_max * rng.normal();
    a.swing_s = p.swing_s + p.athlete_sd * u.swing_s * rng.normal();
    a.stance_s = p.stance_s + p.athlete_sd * u.stance_s * rng.normal();
    a.lead_s = p.lead_s;
    return a;
}

struct NoiseLevels {
    double angle = 0.01;
    double twist = 0.01;
    double accel = 0.3;
};

/// Draws one clean throw for an athlete. The script is redrawn (with the
/// same generator) until its keyframes are ordered.
inline ThrowScript sample_throw(const AthleteProfile& a, std::int64_t index, Rng& rng, const NoiseLevels& noise = {},
                                const SpreadUnits& u = {}, double grid_hz = 50.0)
{
    const SkillPrior p = default_prior(a.skill);
    const double j = p.throw_sd;
    for (;;) {
        ThrowScript s;
        s.skill = a.skill;
        s.athlete_id = a.id;
        s.throw_index = index;
        std::array<double, 3> swing{};
        std::array<double, 2> stance{};
        for (double& v : swing)
            v = a.swing_s + j * u.swing_s * rng.normal();
        for (double& v : stance)
            v = a.stance_s + j * u.stance_s * rng.normal();
        set_timing(s, a.lead_s, swing, stance);
        s.leg_offset_ms = rng.uniform(-4.0, 4.0);
        snap_events(s, grid_hz);
        s.speed = a.speed + j * u.speed * rng.normal();
        s.a_max = a.a_max + j * u.a_max * rng.normal();
        for (double& l : s.lag_s)
            l = j * u.lag_s * rng.normal();
        s.angle_noise = noise.angle;
        s.twist_noise = noise.twist;
        s.accel_noise = noise.accel;
        s.noise_seed = rng.next();
        try {
            validate(s);
            return s;
        } catch (const Error&) {
        }
    }
}

struct CorpusOptions {
    std::size_t athletes = 9;
    std::size_t throws_each = 50;
    std::uint64_t seed = 0;
    NoiseLevels noise;
    ErrorMagnitudes magnitudes;
    /// Throws whose leg stream carries only two strides (appended, labelled
    /// like the athlete's other throws).
    std::size_t two_stride_throws = 0;
};

/// Skill of athlete `i` when athletes are split evenly into thirds.
inline Skill athlete_skill(std::size_t i, std::size_t athletes)
{
    const std::size_t third = std::max<std::size_t>(athletes / 3, 1);
    return static_cast<Skill>(std::min<std::size_t>(i / third, 2));
}

/// Per-throw scripts of a corpus. Every throw draws from its own generator
/// seeded by (seed, athlete, throw), so order of synthesis never matters.
inline std::vector<ThrowScript> corpus_scripts(const CorpusOptions& opt)
{
    std::vector<ThrowScript> out;
    std::vector<AthleteProfile> athletes;
    for (std::size_t a = 0; a < opt.athletes; ++a) {
        Rng rng(derive_seed(opt.seed, 0x617468, a));
        char id[16];
        std::snprintf(id, sizeof id, "A%02zu", a + 1);
        athletes.push_back(sample_athlete(id, athlete_skill(a, opt.athletes), rng));
    }
    for (std::size_t a = 0; a < opt.athletes; ++a) {
        const SkillPrior prior = default_prior(athletes[a].skill);
        for (std::size_t t = 0; t < opt.throws_each; ++t) {
            Rng rng(derive_seed(opt.seed, 0x746872, a, t));
            ThrowScript s = sample_throw(athletes[a], static_cast<std::int64_t>(t), rng, opt.noise);
            if (rng.bernoulli(prior.error_rate)) {
                ThrowScript e = s;
                inject_error(e, rng.below(kErrorKinds), rng.bernoulli(0.5) ? 1 : -1, opt.magnitudes);
                try {
                    validate(e);
                    s = e;
                } catch (const Error&) {
                }
            }
            out.push_back(std::move(s));
        }
    }
    for (std::size_t i = 0; i < opt.two_stride_throws && !athletes.empty(); ++i) {
        const std::size_t a = i % athletes.size();
        Rng rng(derive_seed(opt.seed, 0x74776f, i));
        ThrowScript s = sample_throw(athletes[a], static_cast<std::int64_t>(opt.throws_each + i), rng, opt.noise);
        s.leg_strides = 2;
        out.push_back(std::move(s));
    }
    return out;
}

/// Phase segments cut from a template throw with both bounds shifted by a
/// random 5..10 samples in either direction, plus angle noise. Used to
/// calibrate single-template scoring.
inline std::vector<std::vector<std::vector<double>>> timing_perturbations(std::span<const double> centered,
                                                                           std::span<const IndexRange> phases,
                                                                           std::size_t count, std::uint64_t seed,
                                                                           double noise_rad = 0.01)
{
    Rng rng(derive_seed(seed, 0x70657274));
    std::vector<std::vector<std::vector<double>>> out;
    for (std::size_t p = 0; p < count; ++p) {
        std::vector<std::vector<double>> set;
        for (const IndexRange& r : phases) {
            const std::size_t start = r.start, end = r.end;
            const auto mag = static_cast<std::ptrdiff_t>(5 + rng.below(6));
            const std::ptrdiff_t shift = rng.bernoulli(0.5) ? mag : -mag;
            const auto lo = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(start) + shift, 0,
                                                       static_cast<std::ptrdiff_t>(centered.size()) - 1);
            const auto hi = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(end) + shift, lo + 1,
                                                       static_cast<std::ptrdiff_t>(centered.size()));
            std::vector<double> seg;
            for (std::ptrdiff_t i = lo; i < hi; ++i)
                seg.push_back(centered[static_cast<std::size_t>(i)] + noise_rad * rng.normal());
            set.push_back(std::move(seg));
        }
        out.push_back(std::move(set));
    }
    return out;
}

} // namespace pinstream

#endif
