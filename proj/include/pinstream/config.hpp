#ifndef PINSTREAM_CONFIG_HPP
#define PINSTREAM_CONFIG_HPP

// Run configuration: one JSON object with optional sections. Unknown keys,
// wrong types and out-of-range values are rejected with the offending field
// path; syntax errors carry the parser's line and column.

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "json.hpp"

#include "pinstream/dtw.hpp"
#include "pinstream/error.hpp"
#include "pinstream/error_detection.hpp"
#include "pinstream/io.hpp"
#include "pinstream/multiclass.hpp"
#include "pinstream/pipeline.hpp"
#include "pinstream/sim.hpp"
#include "pinstream/template.hpp"

namespace pinstream {

struct SvmConfig {
    GridSearchOptions grid;
    double test_fraction = 0.2;
};

struct SimConfig {
    std::size_t athletes = 9;
    std::size_t throws_each = 50;
    NoiseLevels noise;
    std::size_t two_stride_throws = 0;
    std::size_t coach_templates = 5;
    std::size_t calibration_perturbations = 20;
};

struct Config {
    PipelineParams pipeline;
    ErrorThresholds thresholds;
    ErrorOptions errors;
    DtwOptions dtw;
    SvmConfig svm;
    SimConfig sim;
    std::uint64_t seed = 0;
};

namespace detail {

using nlohmann::json;

class FieldReader {
public:
    FieldReader(const json& j, std::string path, std::string source)
        : j_(j), path_(std::move(path)), source_(std::move(source))
    {
        if (!j_.is_object())
            fail(path_.empty() ? "config root" : path_, "must be an object");
        for (auto it = j_.begin(); it != j_.end(); ++it)
            unseen_.insert(it.key());
    }

    template <class T>
    void read(const char* key, T& out, const std::function<bool(const T&)>& ok = nullptr, const char* rule = "")
    {
        if (!j_.contains(key))
            return;
        unseen_.erase(key);
        T v;
        try {
            v = j_.at(key).get<T>();
        } catch (const json::exception&) {
            fail(name(key), "has the wrong type (" + std::string(j_.at(key).type_name()) + ")");
        }
        if (ok && !ok(v))
            fail(name(key), rule);
        out = v;
    }

    FieldReader section(const char* key)
    {
        unseen_.erase(key);
        static const json empty = json::object();
        return FieldReader(j_.contains(key) ? j_.at(key) : empty, name(key), source_);
    }

    void finish() const
    {
        if (!unseen_.empty())
            fail(name(unseen_.begin()->c_str()), "is not a known setting");
    }

private:
    std::string name(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

    [[noreturn]] void fail(const std::string& field, const std::string& msg) const
    {
        throw Error(ErrorCode::SchemaError, source_ + ": field '" + field + "' " + msg);
    }

    const json& j_;
    std::string path_;
    std::string source_;
    std::set<std::string> unseen_;
};

inline bool positive(const double& v) { return v > 0.0; }
inline bool non_negative(const double& v) { return v >= 0.0; }

} // namespace detail

inline Config parse_config(const std::string& text, const std::string& source = "config")
{
    const nlohmann::json root = io::parse_json(text, source);
    Config c;
    detail::FieldReader r(root, "", source);
    const std::function<bool(const double&)> pos = detail::positive, nonneg = detail::non_negative;
    const std::function<bool(const std::size_t&)> pos_n = [](const std::size_t& v) { return v > 0; };

    std::uint64_t seed = c.seed;
    r.read("seed", seed);
    c.seed = seed;

    {
        auto s = r.section("segmentation");
        s.read("theta_on", c.pipeline.bounds.theta_on, pos, "must be positive");
        s.read("t_on_ms", c.pipeline.bounds.t_on_ms, nonneg, "must be non-negative");
        s.read("t_off_ms", c.pipeline.bounds.t_off_ms, nonneg, "must be non-negative");
        s.read("baseline_ms", c.pipeline.baseline_ms, pos, "must be positive");
        s.read("max_skew_ms", c.pipeline.max_skew_ms, nonneg, "must be non-negative");
        s.read("max_jitter", c.pipeline.max_jitter, nonneg, "must be non-negative");
        s.finish();
    }
    {
        auto s = r.section("gait");
        s.read("fs_hz", c.pipeline.gait.fs_hz, pos, "must be positive");
        s.read("cutoff_hz", c.pipeline.gait.cutoff_hz, pos, "must be positive");
        s.read("min_prominence", c.pipeline.gait.min_prominence, nonneg, "must be non-negative");
        s.read("min_peak_prominence", c.pipeline.gait.min_peak_prominence, nonneg, "must be non-negative");
        s.read("min_separation_s", c.pipeline.gait.min_separation_s, nonneg, "must be non-negative");
        s.finish();
        if (!(c.pipeline.gait.cutoff_hz < c.pipeline.gait.fs_hz / 2.0))
            throw Error(ErrorCode::SchemaError, source + ": field 'gait.cutoff_hz' must lie below Nyquist");
    }
    {
        auto s = r.section("thresholds");
        s.read("eps1", c.thresholds.eps1, pos, "must be positive");
        s.read("eps2", c.thresholds.eps2, pos, "must be positive");
        s.read("eps3", c.thresholds.eps3, pos, "must be positive");
        s.read("eps4", c.thresholds.eps4, pos, "must be positive");
        s.read("error4_stride", c.errors.error4_stride, pos_n, "must be a 1-based stride ordinal");
        s.finish();
    }
    {
        auto s = r.section("dtw");
        std::string cost = to_string(c.dtw.cost);
        s.read("cost", cost);
        try {
            c.dtw.cost = parse_dtw_cost(cost);
        } catch (const Error&) {
            throw Error(ErrorCode::SchemaError, source + ": field 'dtw.cost' must be \"l1\" or \"l2\"");
        }
        s.read("band", c.dtw.band);
        s.finish();
    }
    {
        auto s = r.section("svm");
        const std::function<bool(const std::vector<double>&)> grid_ok = [](const std::vector<double>& g) {
            return !g.empty() && std::all_of(g.begin(), g.end(), [](double v) { return v > 0.0; });
        };
        s.read("C_grid", c.svm.grid.C_grid, grid_ok, "must be a non-empty list of positive values");
        s.read("gamma_grid", c.svm.grid.gamma_grid, grid_ok, "must be a non-empty list of positive values");
        s.read("folds", c.svm.grid.folds, std::function<bool(const std::size_t&)>([](const std::size_t& v) {
                   return v >= 2;
               }),
               "must be at least 2");
        s.read("tol", c.svm.grid.tol, pos, "must be positive");
        s.read("max_passes", c.svm.grid.max_passes, std::function<bool(const int&)>([](const int& v) { return v > 0; }),
               "must be positive");
        s.read("test_fraction", c.svm.test_fraction,
               std::function<bool(const double&)>([](const double& v) { return v > 0.0 && v < 1.0; }),
               "must lie in (0, 1)");
        s.finish();
    }
    {
        auto s = r.section("sim");
        s.read("athletes", c.sim.athletes, pos_n, "must be positive");
        s.read("throws_each", c.sim.throws_each, pos_n, "must be positive");
        s.read("angle_noise", c.sim.noise.angle, nonneg, "must be non-negative");
        s.read("twist_noise", c.sim.noise.twist, nonneg, "must be non-negative");
        s.read("accel_noise", c.sim.noise.accel, nonneg, "must be non-negative");
        s.read("two_stride_throws", c.sim.two_stride_throws);
        s.read("coach_templates", c.sim.coach_templates, pos_n, "must be positive");
        s.read("calibration_perturbations", c.sim.calibration_perturbations, pos_n, "must be positive");
        s.finish();
    }
    r.finish();
    return c;
}

inline nlohmann::json to_json(const Config& c)
{
    return {{"seed", c.seed},
            {"segmentation",
             {{"theta_on", c.pipeline.bounds.theta_on},
              {"t_on_ms", c.pipeline.bounds.t_on_ms},
              {"t_off_ms", c.pipeline.bounds.t_off_ms},
              {"baseline_ms", c.pipeline.baseline_ms},
              {"max_skew_ms", c.pipeline.max_skew_ms},
              {"max_jitter", c.pipeline.max_jitter}}},
            {"gait",
             {{"fs_hz", c.pipeline.gait.fs_hz},
              {"cutoff_hz", c.pipeline.gait.cutoff_hz},
              {"min_prominence", c.pipeline.gait.min_prominence},
              {"min_peak_prominence", c.pipeline.gait.min_peak_prominence},
              {"min_separation_s", c.pipeline.gait.min_separation_s}}},
            {"thresholds",
             {{"eps1", c.thresholds.eps1},
              {"eps2", c.thresholds.eps2},
              {"eps3", c.thresholds.eps3},
              {"eps4", c.thresholds.eps4},
              {"error4_stride", c.errors.error4_stride}}},
            {"dtw", {{"cost", to_string(c.dtw.cost)}, {"band", c.dtw.band}}},
            {"svm",
             {{"C_grid", c.svm.grid.C_grid},
              {"gamma_grid", c.svm.grid.gamma_grid},
              {"folds", c.svm.grid.folds},
              {"tol", c.svm.grid.tol},
              {"max_passes", c.svm.grid.max_passes},
              {"test_fraction", c.svm.test_fraction}}},
            {"sim",
             {{"athletes", c.sim.athletes},
              {"throws_each", c.sim.throws_each},
              {"angle_noise", c.sim.noise.angle},
              {"twist_noise", c.sim.noise.twist},
              {"accel_noise", c.sim.noise.accel},
              {"two_stride_throws", c.sim.two_stride_throws},
              {"coach_templates", c.sim.coach_templates},
              {"calibration_perturbations", c.sim.calibration_perturbations}}}};
}

inline Config load_config_file(const std::filesystem::path& p) { return parse_config(io::read_file(p), p.string()); }

/// Explicit path first, then $PINSTREAM_CONFIG, then built-in defaults.
inline Config resolve_config(const std::optional<std::filesystem::path>& explicit_path)
{
    if (explicit_path)
        return load_config_file(*explicit_path);
    if (const char* env = std::getenv("PINSTREAM_CONFIG"); env && *env)
        return load_config_file(env);
    return Config{};
}

} // namespace pinstream

#endif
