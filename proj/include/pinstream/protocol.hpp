#ifndef PINSTREAM_PROTOCOL_HPP
#define PINSTREAM_PROTOCOL_HPP

// Simulator study designs: coach templates, the labelled error-detection set
// and the clean/timing-error quality-degree set.

#include <cstdint>
#include <string>
#include <vector>

#include "pinstream/pipeline.hpp"
#include "pinstream/quality.hpp"
#include "pinstream/random.hpp"
#include "pinstream/sim.hpp"
#include "pinstream/template.hpp"

namespace pinstream {

/// The coach throws at the expert class means.
inline AthleteProfile coach_profile()
{
    const SkillPrior p = default_prior(Skill::Expert);
    AthleteProfile a;
    a.id = "coach";
    a.skill = Skill::Expert;
    a.speed = p.speed;
    a.a_max = p.a_max;
    a.swing_s = p.swing_s;
    a.stance_s = p.stance_s;
    a.lead_s = p.lead_s;
    return a;
}

/// Template from one analysed throw, calibrated on shifted copies of itself.
inline Template calibrated_template(const ThrowRecord& rec, std::size_t perturbations, std::uint64_t seed,
                                    const DtwOptions& dtw_opt = {})
{
    Template t = make_template(rec);
    const std::vector<double> centered = rec.centered_swing();
    calibrate(t, timing_perturbations(centered, rec.phases, perturbations, seed), dtw_opt);
    return t;
}

inline std::vector<ThrowScript> coach_scripts(std::size_t count, std::uint64_t seed, const NoiseLevels& noise = {})
{
    std::vector<ThrowScript> out;
    const AthleteProfile coach = coach_profile();
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng(derive_seed(seed, 0x636f6163, i));
        out.push_back(sample_throw(coach, static_cast<std::int64_t>(i), rng, noise));
    }
    return out;
}

inline TemplateSet coach_templates(std::size_t count, std::uint64_t seed, std::size_t perturbations = 20,
                                   const NoiseLevels& noise = {}, const PipelineParams& params = {},
                                   const DtwOptions& dtw_opt = {})
{
    TemplateSet ts;
    for (const ThrowScript& s : coach_scripts(count, seed, noise)) {
        const SynthesizedThrow th = synthesize(s);
        const ThrowRecord rec =
            analyze_recording(th.wrist, th.leg, {s.athlete_id, Style::FiveStep, s.throw_index}, params).record;
        ts.templates.push_back(calibrated_template(rec, perturbations, derive_seed(seed, 0x63616c, ts.templates.size()),
                                                   dtw_opt));
    }
    return ts;
}

/// Labelled error-detection set: `clean` error-free throws plus `per_type`
/// throws of each single error, all by expert-class athletes drawn like
/// corpus athletes. Error direction alternates.
inline std::vector<ThrowScript> error_protocol_scripts(std::uint64_t seed, std::size_t per_type = 50,
                                                       std::size_t clean = 50, std::size_t athletes = 3,
                                                       const NoiseLevels& noise = {})
{
    std::vector<AthleteProfile> pool;
    for (std::size_t a = 0; a < athletes; ++a) {
        Rng rng(derive_seed(seed, 0x65617468, a));
        pool.push_back(sample_athlete("E" + std::to_string(a + 1), Skill::Expert, rng));
    }
    std::vector<ThrowScript> out;
    std::int64_t index = 0;
    const auto draw = [&](std::size_t group, std::size_t i) {
        Rng rng(derive_seed(seed, 0x657272, group, i));
        return sample_throw(pool[i % pool.size()], index++, rng, noise);
    };
    for (std::size_t i = 0; i < clean; ++i)
        out.push_back(draw(0, i));
    for (std::size_t kind = 0; kind < kErrorKinds; ++kind) {
        for (std::size_t i = 0; i < per_type; ++i) {
            for (int attempt = 0;; ++attempt) {
                ThrowScript s = draw(kind + 1, i + 1000 * static_cast<std::size_t>(attempt));
                inject_error(s, kind, i % 2 == 0 ? 1 : -1);
                try {
                    validate(s);
                    out.push_back(std::move(s));
                    break;
                } catch (const Error&) {
                }
            }
        }
    }
    return out;
}

struct QualityProtocolThrow {
    ThrowScript script;
    std::size_t phase = 0;     ///< phase under study
    bool timing_error = false; ///< arm lag of `phase` shifted by 120..200 ms
};

/// Per athlete and phase: `clean` throws and `errors` throws whose arm
/// timing in that phase is off by 120..200 ms (either direction).
inline std::vector<QualityProtocolThrow> quality_protocol_scripts(std::uint64_t seed, std::size_t athletes = 9,
                                                                  std::size_t clean = 10, std::size_t errors = 10,
                                                                  const NoiseLevels& noise = {})
{
    std::vector<QualityProtocolThrow> out;
    for (std::size_t a = 0; a < athletes; ++a) {
        Rng arng(derive_seed(seed, 0x71617468, a));
        char id[16];
        std::snprintf(id, sizeof id, "Q%02zu", a + 1);
        const AthleteProfile ath = sample_athlete(id, athlete_skill(a, athletes), arng);
        std::int64_t index = 0;
        for (std::size_t phase = 0; phase < 3; ++phase) {
            for (std::size_t i = 0; i < clean + errors; ++i) {
                Rng rng(derive_seed(seed, 0x716474, a, phase * 1000 + i));
                QualityProtocolThrow q;
                q.phase = phase;
                q.timing_error = i >= clean;
                q.script = sample_throw(ath, index++, rng, noise);
                if (q.timing_error) {
                    const double mag = rng.uniform(0.12, 0.2);
                    const double dir = rng.bernoulli(0.5) ? 1.0 : -1.0;
                    ThrowScript s = q.script;
                    s.lag_s[phase] += dir * mag;
                    try {
                        validate(s);
                    } catch (const Error&) {
                        s.lag_s[phase] -= 2.0 * dir * mag;
                        validate(s);
                    }
                    q.script = s;
                }
                out.push_back(std::move(q));
            }
        }
    }
    return out;
}

} // namespace pinstream

#endif
