// pinstream command-line interface.
//
// Exit codes: 0 success, 1 input error, 2 analysis failure, 3 internal
// invariant violation.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "pinstream/config.hpp"
#include "pinstream/error_detection.hpp"
#include "pinstream/features.hpp"
#include "pinstream/io.hpp"
#include "pinstream/metrics.hpp"
#include "pinstream/multiclass.hpp"
#include "pinstream/pipeline.hpp"
#include "pinstream/protocol.hpp"
#include "pinstream/quality.hpp"
#include "pinstream/sim.hpp"

namespace fs = std::filesystem;
using namespace pinstream;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kInputError = 1, kAnalysisFailure = 2, kInternal = 3 };

int exit_code_for(ErrorCode c)
{
    switch (c) {
    case ErrorCode::NoStrides:
    case ErrorCode::StyleMismatch:
    case ErrorCode::NoCommonWindow:
    case ErrorCode::ClockSkew:
    case ErrorCode::InsufficientSamples:
    case ErrorCode::EmptySeries:
    case ErrorCode::DegenerateQuaternion:
    case ErrorCode::ConvergenceFailure: return kAnalysisFailure;
    default: return kInputError;
    }
}

struct Globals {
    std::optional<fs::path> config_path;
    std::optional<std::uint64_t> seed;
    std::optional<fs::path> out;
};

Config load(const Globals& g)
{
    Config c = resolve_config(g.config_path);
    if (g.seed)
        c.seed = *g.seed;
    return c;
}

fs::path require_out(const Globals& g, const char* what)
{
    if (!g.out)
        throw Error(ErrorCode::InvalidArgument, std::string("--out is required (") + what + ")");
    return *g.out;
}

// ---------------------------------------------------------------- simulate

std::string corpus_readme(const Config& c)
{
    std::string s = "# Synthetic pinstream corpus\n\n"
                    "Generated by `pinstream simulate` (seed " +
                    std::to_string(c.seed) + ", " + std::to_string(c.sim.athletes) + " athletes x " +
                    std::to_string(c.sim.throws_each) +
                    " throws).\n\n"
                    "Every throw is a five-step delivery synthesized from a script. Skill levels differ only in\n"
                    "the parameter distributions below; they are invented for this simulator and are not\n"
                    "measurements. Accuracy figures obtained on this corpus are synthetic analogues.\n\n"
                    "| level | speed | backswing (rad) | swing (s) | stance (s) | athlete spread | throw jitter | error rate |\n"
                    "|---|---|---|---|---|---|---|---|\n";
    for (Skill sk : {Skill::Novice, Skill::Intermediate, Skill::Expert}) {
        const SkillPrior p = default_prior(sk);
        s += "| " + to_string(sk) + " | " + io::fmt(p.speed) + " | " + io::fmt(p.a_max) + " | " + io::fmt(p.swing_s) +
             " | " + io::fmt(p.stance_s) + " | " + io::fmt(p.athlete_sd) + " | " + io::fmt(p.throw_sd) + " | " +
             io::fmt(p.error_rate) + " |\n";
    }
    const SpreadUnits u;
    s += "\nSpread columns multiply the base deviations speed " + io::fmt(u.speed) + ", backswing " + io::fmt(u.a_max) +
         " rad, swing " + io::fmt(u.swing_s) + " s, stance " + io::fmt(u.stance_s) + " s, arm lag " +
         io::fmt(u.lag_s) +
         " s.\n"
         "Injected errors: E1 gait speed x(1 +- 0.4), E2 backswing +-25 deg, E3 final arm phase +-150 ms,\n"
         "E4 first two arm phases +-250 ms.\n"
         "Noise: angle " +
         io::fmt(c.sim.noise.angle) + " rad, twist " + io::fmt(c.sim.noise.twist) + " rad, acceleration " +
         io::fmt(c.sim.noise.accel) + " m/s^2 per axis.\n\n"
         "Layout: `manifest.csv`, `streams/<id>.wrist.jsonl`, `streams/<id>.leg.jsonl`, `truth/<id>.json`,\n"
         "`templates.json` (coach templates). See docs/formats.md in the pinstream repository.\n";
    return s;
}

int cmd_simulate(const Globals& g, std::optional<std::size_t> athletes, std::optional<std::size_t> throws,
                 std::optional<std::size_t> two_stride)
{
    Config c = load(g);
    if (athletes)
        c.sim.athletes = *athletes;
    if (throws)
        c.sim.throws_each = *throws;
    if (two_stride)
        c.sim.two_stride_throws = *two_stride;
    const fs::path out = require_out(g, "corpus directory");
    fs::create_directories(out / "streams");
    fs::create_directories(out / "truth");

    CorpusOptions opt;
    opt.athletes = c.sim.athletes;
    opt.throws_each = c.sim.throws_each;
    opt.seed = c.seed;
    opt.noise = c.sim.noise;
    opt.two_stride_throws = c.sim.two_stride_throws;
    const std::vector<ThrowScript> scripts = corpus_scripts(opt);

    std::vector<io::ManifestEntry> manifest;
    std::size_t per_skill[3] = {0, 0, 0};
    for (const ThrowScript& s : scripts) {
        const SynthesizedThrow th = synthesize(s, c.pipeline.gait.fs_hz);
        char id[48];
        std::snprintf(id, sizeof id, "%s_T%03lld", s.athlete_id.c_str(), static_cast<long long>(s.throw_index));
        io::ManifestEntry e;
        e.throw_id = id;
        e.athlete_id = s.athlete_id;
        e.skill = s.skill;
        e.throw_index = s.throw_index;
        e.errors = s.errors;
        e.leg_strides = s.leg_strides;
        e.wrist_file = "streams/" + e.throw_id + ".wrist.jsonl";
        e.leg_file = "streams/" + e.throw_id + ".leg.jsonl";
        e.truth_file = "truth/" + e.throw_id + ".json";
        io::write_file(out / e.wrist_file, io::to_jsonl(th.wrist, c.pipeline.gait.fs_hz));
        io::write_file(out / e.leg_file, io::to_jsonl(th.leg, c.pipeline.gait.fs_hz));
        io::write_file(out / e.truth_file, io::to_json(th.truth).dump(1) + "\n");
        ++per_skill[static_cast<int>(s.skill)];
        manifest.push_back(std::move(e));
    }
    const std::string man = io::manifest_csv(manifest);
    io::write_file(out / "manifest.csv", man);

    TemplateSet ts = coach_templates(c.sim.coach_templates, derive_seed(c.seed, 0x74706c), c.sim.calibration_perturbations,
                                     c.sim.noise, c.pipeline, c.dtw);
    ts.thresholds = c.thresholds;
    io::write_file(out / "templates.json", io::to_json(ts).dump(1) + "\n");
    io::write_file(out / "README.md", corpus_readme(c));

    std::printf("wrote %zu throws to %s (novice %zu, intermediate %zu, expert %zu)\n", manifest.size(),
                out.string().c_str(), per_skill[0], per_skill[1], per_skill[2]);
    std::printf("templates: %zu coach throws\n", ts.templates.size());
    std::printf("manifest fnv1a %s\n", io::hex64(io::fnv1a(man)).c_str());
    return kOk;
}

// ---------------------------------------------------------------- analyze

struct Recording {
    std::string id;
    fs::path wrist, leg;
    ThrowMeta meta;
};

std::vector<Recording> recordings_from_manifest(const fs::path& dir)
{
    const fs::path mp = dir / "manifest.csv";
    std::vector<Recording> out;
    for (const auto& e : io::parse_manifest(io::read_file(mp), mp.string()))
        out.push_back({e.throw_id, dir / e.wrist_file, dir / e.leg_file, {e.athlete_id, Style::FiveStep, e.throw_index}});
    return out;
}

std::string plot_csv(const ThrowRecord& rec)
{
    std::vector<std::string> event(rec.swing.size());
    std::vector<std::optional<double>> vel(rec.swing.size());
    for (std::size_t k = 0; k < rec.gait.strides.size(); ++k) {
        const Stride& s = rec.gait.strides[k];
        const std::string n = std::to_string(k + 1);
        const auto tag = [&](std::size_t i, const std::string& t) { event[i] += (event[i].empty() ? "" : "+") + t; };
        tag(s.is_idx, "IS" + n);
        tag(s.mid_swing_idx, "MS" + n);
        tag(s.ic_idx, "IC" + n);
        for (std::size_t i = s.start_idx; i <= s.end_idx; ++i)
            vel[i] = rec.gait.velocity[k][i - s.start_idx];
    }
    std::string out = io::csv_schema_line("pinstream.plot") + "t_ms,swing_angle,accel_magnitude,velocity,event\n";
    for (std::size_t i = 0; i < rec.swing.size(); ++i)
        out += io::fmt(rec.swing.t_ms[i]) + "," + io::fmt(centered_angle(rec.swing.angle[i])) + "," +
               io::fmt(rec.gait.magnitude[i]) + "," + (vel[i] ? io::fmt(*vel[i]) : "") + "," + event[i] + "\n";
    return out;
}

json throw_report(const ThrowRecord& rec, const IndexRange& bounds, const std::vector<double>& wrist_t,
                  const TemplateSet& ts, const Config& c)
{
    json j;
    j["bounds_ms"] = {wrist_t.at(bounds.start), wrist_t.at(bounds.end - 1)};
    const QualityReport q = assess_throw(rec, ts.templates, c.dtw);
    j["quality"] = {{"qd", q.qd}, {"md", q.md}, {"ad", q.ad}, {"templates", q.template_count}};
    const ErrorFlags f = detect_all(rec, ts.templates, c.thresholds, c.errors);
    j["errors"] = {{"e1", {{"flag", f.e1}, {"deviation", f.d1}}},
                   {"e2", {{"flag", f.e2}, {"deviation", f.d2}}},
                   {"e3", {{"flag", f.e3}, {"deviation", f.d3}}},
                   {"e4", {{"flag", f.e4}, {"deviation", f.d4}}}};
    json strides = json::array();
    for (std::size_t k = 0; k < rec.gait.strides.size(); ++k) {
        const Stride& s = rec.gait.strides[k];
        strides.push_back({{"is_ms", rec.swing.t_ms[s.is_idx]},
                           {"mid_ms", rec.swing.t_ms[s.mid_swing_idx]},
                           {"ic_ms", rec.swing.t_ms[s.ic_idx]},
                           {"swing_s", rec.gait.swing_period_s[k]},
                           {"stance_s", rec.gait.stance_period_s[k]},
                           {"ratio", rec.gait.swing_stance_ratio[k]},
                           {"avg_velocity", rec.gait.avg_velocity[k]}});
    }
    j["gait"] = {{"strides", strides}};
    return j;
}

void print_throw_row(const std::string& id, const json& t)
{
    if (t.at("status") != "ok") {
        std::printf("%-16s FAILED  %s\n", id.c_str(), t.at("error").get<std::string>().c_str());
        return;
    }
    const auto& qd = t.at("quality").at("qd");
    std::string flags;
    for (const char* e : {"e1", "e2", "e3", "e4"})
        if (t.at("errors").at(e).at("flag").get<bool>())
            flags += std::string(flags.empty() ? "" : ",") + e;
    std::printf("%-16s %6.1f %6.1f %6.1f  %s\n", id.c_str(), qd[0].get<double>(), qd[1].get<double>(),
                qd[2].get<double>(), flags.empty() ? "-" : flags.c_str());
}

json follow(const Recording& r, const TemplateSet& ts, const Config& c, double idle_ms, const fs::path* plot_dir,
            bool& any_failed);

int cmd_analyze(const Globals& g, const std::string& templates_path, const std::optional<fs::path>& corpus,
                const std::vector<std::string>& files, bool follow_mode, double idle_ms)
{
    const Config c = load(g);
    TemplateSet ts = io::templates_from_json(io::parse_json(io::read_file(templates_path), templates_path),
                                             templates_path);
    std::vector<Recording> recs;
    if (corpus)
        recs = recordings_from_manifest(*corpus);
    if (files.size() % 2 != 0)
        throw Error(ErrorCode::InvalidArgument, "stream files must be given as wrist/leg pairs");
    for (std::size_t i = 0; i < files.size(); i += 2)
    {
        std::string id = fs::path(files[i]).stem().string();
        if (id.size() > 6 && id.ends_with(".wrist"))
            id.resize(id.size() - 6);
        recs.push_back({id, files[i], files[i + 1], {}});
    }
    if (recs.empty())
        throw Error(ErrorCode::InvalidArgument, "nothing to analyze; pass --corpus or wrist/leg file pairs");

    std::optional<fs::path> out = g.out;
    if (out)
        fs::create_directories(*out);

    json report = io::schema_header("pinstream.report");
    report["config"] = to_json(c);
    report["templates"] = templates_path;
    json items = json::array();
    std::size_t ok = 0, failed = 0;
    std::printf("%-16s %6s %6s %6s  %s\n", "throw", "QD1", "QD2", "QD3", "errors");
    for (const Recording& r : recs) {
        if (follow_mode) {
            bool any_failed = false;
            json f = follow(r, ts, c, idle_ms, out ? &*out : nullptr, any_failed);
            for (auto& t : f) {
                print_throw_row(t.at("id").get<std::string>(), t);
                (t.at("status") == "ok" ? ok : failed)++;
                items.push_back(std::move(t));
            }
            continue;
        }
        json t;
        t["id"] = r.id;
        t["wrist"] = r.wrist.string();
        t["leg"] = r.leg.string();
        try {
            const io::LoadedStream w = io::load_stream(r.wrist);
            const io::LoadedStream l = io::load_stream(r.leg);
            if (w.sensor != io::Sensor::Wrist || l.sensor != io::Sensor::Leg)
                throw Error(ErrorCode::SchemaError, r.id + ": expected a wrist stream then a leg stream");
            const SegmentedThrow seg = analyze_recording(w.wrist, l.leg, r.meta, c.pipeline);
            json body = throw_report(seg.record, seg.bounds, w.wrist.t_ms, ts, c);
            t.update(body);
            t["status"] = "ok";
            if (out) {
                const std::string name = r.id + ".plot.csv";
                io::write_file(*out / name, plot_csv(seg.record));
                t["plot_csv"] = name;
            }
            ++ok;
        } catch (const Error& e) {
            t["status"] = "failed";
            t["error_code"] = std::string(to_string(e.code()));
            t["error"] = e.what();
            ++failed;
        }
        print_throw_row(r.id, t);
        items.push_back(std::move(t));
    }
    report["throws"] = items;
    report["summary"] = {{"total", ok + failed}, {"ok", ok}, {"failed", failed}};
    std::printf("%zu analyzed, %zu failed\n", ok, failed);
    if (out)
        io::write_file(*out / "report.json", report.dump(1) + "\n");
    else
        std::cout << report.dump(1) << "\n";
    return failed ? kAnalysisFailure : kOk;
}

// Tail mode: read two growing JSONL files, segment throws as they close and
// analyze each one immediately.
json follow(const Recording& r, const TemplateSet& ts, const Config& c, double idle_ms, const fs::path* plot_dir,
            bool& any_failed)
{
    struct Tail {
        std::ifstream in;
        std::string partial;
        io::StreamParser parser;
    };
    Tail wt{std::ifstream(r.wrist), {}, io::StreamParser(r.wrist.string())};
    Tail lt{std::ifstream(r.leg), {}, io::StreamParser(r.leg.string())};
    if (!wt.in || !lt.in)
        throw Error(ErrorCode::IoError, "cannot open follow streams " + r.wrist.string() + ", " + r.leg.string());

    OrientationStream head;
    std::optional<BaselineFrame> base;
    SwingAngleSeries swing;
    AccelStream leg;
    ThrowBoundDetector det(c.pipeline.bounds);
    std::vector<IndexRange> pending;
    json out = json::array();
    std::int64_t count = 0;

    const auto push_angle = [&](double t, const Quaternion& q) {
        swing.t_ms.push_back(t);
        swing.angle.push_back(swing_angle(q, *base));
        if (auto rg = det.push(t, swing.angle.back()))
            pending.push_back(*rg);
    };
    const auto pump = [](Tail& tail, auto&& on_sample) {
        bool progressed = false;
        std::string chunk;
        while (std::getline(tail.in, chunk)) {
            if (tail.in.eof()) {
                // no trailing newline yet: keep the fragment for later
                tail.partial += chunk;
                break;
            }
            const std::string line = tail.partial + chunk;
            tail.partial.clear();
            if (auto s = tail.parser.feed(line))
                on_sample(*s);
            progressed = true;
        }
        tail.in.clear();
        return progressed;
    };

    auto last_progress = std::chrono::steady_clock::now();
    for (;;) {
        const bool pw = pump(wt, [&](const io::StreamSample& s) {
            if (s.sensor != io::Sensor::Wrist)
                throw Error(ErrorCode::SchemaError, "follow: first stream must be the wrist sensor");
            if (!base) {
                head.t_ms.push_back(s.t_ms);
                head.q.push_back(s.q);
                if (s.t_ms - head.t_ms.front() >= c.pipeline.baseline_ms) {
                    base = estimate_baseline(head, c.pipeline.baseline_ms);
                    for (std::size_t i = 0; i < head.q.size(); ++i)
                        push_angle(head.t_ms[i], head.q[i]);
                }
            } else {
                push_angle(s.t_ms, s.q);
            }
        });
        const bool pl = pump(lt, [&](const io::StreamSample& s) {
            if (s.sensor != io::Sensor::Leg)
                throw Error(ErrorCode::SchemaError, "follow: second stream must be the leg sensor");
            leg.t_ms.push_back(s.t_ms);
            leg.accel.push_back(s.a);
        });
        const auto now = std::chrono::steady_clock::now();
        if (pw || pl)
            last_progress = now;
        const bool idle = std::chrono::duration<double, std::milli>(now - last_progress).count() >= idle_ms;

        // analyze closed throws once the leg stream has caught up with them
        while (!pending.empty() &&
               (idle || (!leg.t_ms.empty() && leg.t_ms.back() >= swing.t_ms[pending.front().end - 1]))) {
            const IndexRange rg = pending.front();
            pending.erase(pending.begin());
            json t;
            t["id"] = r.id + "#" + std::to_string(count);
            ThrowMeta meta = r.meta;
            meta.throw_index = count++;
            try {
                const ThrowRecord rec = build_record(swing, leg, rg, meta, c.pipeline);
                t.update(throw_report(rec, rg, swing.t_ms, ts, c));
                t["status"] = "ok";
                if (plot_dir) {
                    const std::string name = t["id"].get<std::string>() + ".plot.csv";
                    io::write_file(*plot_dir / name, plot_csv(rec));
                    t["plot_csv"] = name;
                }
            } catch (const Error& e) {
                t["status"] = "failed";
                t["error_code"] = std::string(to_string(e.code()));
                t["error"] = e.what();
                any_failed = true;
            }
            out.push_back(std::move(t));
        }
        if (idle)
            break;
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    return out;
}

// ---------------------------------------------------------------- extract

int cmd_extract(const Globals& g, const fs::path& corpus)
{
    const Config c = load(g);
    const fs::path out = require_out(g, "features CSV");
    const fs::path mp = corpus / "manifest.csv";
    const auto entries = io::parse_manifest(io::read_file(mp), mp.string());
    std::vector<io::FeatureRow> rows;
    std::size_t excluded = 0;
    std::vector<std::string> failures;
    for (const auto& e : entries) {
        try {
            const io::LoadedStream w = io::load_stream(corpus / e.wrist_file);
            const io::LoadedStream l = io::load_stream(corpus / e.leg_file);
            const SegmentedThrow seg =
                analyze_recording(w.wrist, l.leg, {e.athlete_id, Style::FiveStep, e.throw_index}, c.pipeline);
            rows.push_back({e.athlete_id, to_string(e.skill), extract(seg.record)});
        } catch (const Error& err) {
            if (err.code() == ErrorCode::StyleMismatch)
                ++excluded;
            else
                failures.push_back(e.throw_id + ": " + err.what());
        }
    }
    io::write_file(out, io::features_csv(rows));
    for (const auto& f : failures)
        std::printf("failed %s\n", f.c_str());
    std::printf("extracted %zu rows from %zu throws; excluded %zu (style mismatch); failed %zu\n", rows.size(),
                entries.size(), excluded, failures.size());
    return failures.empty() ? kOk : kAnalysisFailure;
}

// ---------------------------------------------------------------- train / evaluate

struct LabeledMatrix {
    std::vector<std::vector<double>> X;
    std::vector<int> y;
    std::vector<io::FeatureRow> rows;
};

LabeledMatrix load_features(const fs::path& p)
{
    LabeledMatrix m;
    m.rows = io::parse_features(io::read_file(p), p.string());
    for (const auto& r : m.rows) {
        m.X.emplace_back(r.x.begin(), r.x.end());
        m.y.push_back(static_cast<int>(parse_skill(r.label)));
    }
    if (m.rows.empty())
        throw Error(ErrorCode::InvalidArgument, p.string() + ": no feature rows");
    return m;
}

void print_metrics(const MetricsReport& r, const std::vector<std::string>& labels)
{
    std::printf("%-14s %9s %9s %9s %8s\n", "class", "precision", "recall", "f1", "support");
    for (std::size_t c = 0; c < labels.size(); ++c)
        std::printf("%-14s %9.3f %9.3f %9.3f %8zu%s\n", labels[c].c_str(), r.precision[c], r.recall[c], r.f1[c],
                    r.support[c], r.precision_undefined[c] || r.recall_undefined[c] ? "  (undefined -> 0)" : "");
    std::printf("%-14s %9.3f %9.3f %9.3f\n", "macro avg", r.macro_precision, r.macro_recall, r.macro_f1);
    std::printf("%-14s %9.3f %9.3f %9.3f\n", "weighted avg", r.weighted_precision, r.weighted_recall, r.weighted_f1);
    std::printf("accuracy %.4f  balanced accuracy %.4f\n", r.accuracy, r.balanced_accuracy);
    std::printf("confusion (rows true, columns predicted):\n");
    for (std::size_t t = 0; t < labels.size(); ++t) {
        std::printf("  %-14s", labels[t].c_str());
        for (std::size_t p = 0; p < labels.size(); ++p)
            std::printf(" %5zu", r.confusion[t][p]);
        std::printf("\n");
    }
}

int cmd_train(const Globals& g, const fs::path& features)
{
    const Config c = load(g);
    const fs::path out = require_out(g, "model directory");
    fs::create_directories(out);
    const LabeledMatrix m = load_features(features);
    const SplitIndices split = stratified_split(m.y, c.svm.test_fraction, c.seed);
    LabeledMatrix tr, te;
    for (std::size_t i : split.train) {
        tr.X.push_back(m.X[i]);
        tr.y.push_back(m.y[i]);
        tr.rows.push_back(m.rows[i]);
    }
    for (std::size_t i : split.test) {
        te.X.push_back(m.X[i]);
        te.y.push_back(m.y[i]);
        te.rows.push_back(m.rows[i]);
    }
    GridSearchOptions go = c.svm.grid;
    go.seed = c.seed;
    const GridSearchResult gs = grid_search_cv(tr.X, tr.y, skill_labels(), go);
    const OvoSvmModel model = ovo_train(tr.X, tr.y, skill_labels(), {gs.best_C, gs.best_gamma, go.tol, go.max_passes});
    io::write_file(out / "model.json", io::to_json(model).dump(1) + "\n");
    io::write_file(out / "cv_table.csv", io::cv_table_csv(gs));
    io::write_file(out / "train.csv", io::features_csv(tr.rows));
    io::write_file(out / "test.csv", io::features_csv(te.rows));
    std::printf("train %zu rows, test %zu rows\n", tr.y.size(), te.y.size());
    std::printf("grid search: best C %s gamma %s mean macro-F1 %.4f (%zu-fold)\n", io::fmt(gs.best_C).c_str(),
                io::fmt(gs.best_gamma).c_str(), gs.best_score, go.folds);
    const MetricsReport r = metrics(te.y, ovo_predict_rows(model, te.X), skill_labels().size());
    json mj = io::to_json(r, skill_labels());
    mj["config"] = to_json(c);
    io::write_file(out / "metrics.json", mj.dump(1) + "\n");
    std::printf("held-out evaluation:\n");
    print_metrics(r, skill_labels());
    return kOk;
}

int cmd_evaluate(const Globals& g, const fs::path& model_path, const fs::path& features)
{
    const Config c = load(g);
    const OvoSvmModel model = io::model_from_json(io::parse_json(io::read_file(model_path), model_path.string()),
                                                  model_path.string());
    const LabeledMatrix m = load_features(features);
    const MetricsReport r = metrics(m.y, ovo_predict_rows(model, m.X), model.n_classes());
    print_metrics(r, model.labels);
    if (g.out) {
        json mj = io::to_json(r, model.labels);
        mj["config"] = to_json(c);
        io::write_file(*g.out, mj.dump(1) + "\n");
    }
    return kOk;
}

// ---------------------------------------------------------------- report / template

int cmd_report(const fs::path& input)
{
    const json j = io::parse_json(io::read_file(input), input.string());
    const std::string schema = j.value("schema", "");
    if (schema == "pinstream.report") {
        io::check_schema(j, schema, input.string());
        std::printf("%-16s %6s %6s %6s  %s\n", "throw", "QD1", "QD2", "QD3", "errors");
        for (const auto& t : j.at("throws"))
            print_throw_row(t.at("id").get<std::string>(), t);
        const auto& s = j.at("summary");
        std::printf("%zu analyzed, %zu failed\n", s.at("ok").get<std::size_t>(), s.at("failed").get<std::size_t>());
        return kOk;
    }
    if (schema == "pinstream.metrics") {
        io::check_schema(j, schema, input.string());
        const auto labels = j.at("labels").get<std::vector<std::string>>();
        MetricsReport r;
        r.confusion = j.at("confusion").get<std::vector<std::vector<std::size_t>>>();
        for (const auto& pc : j.at("per_class")) {
            r.precision.push_back(pc.at("precision"));
            r.recall.push_back(pc.at("recall"));
            r.f1.push_back(pc.at("f1"));
            r.support.push_back(pc.at("support"));
            r.precision_undefined.push_back(pc.at("precision_undefined").get<bool>());
            r.recall_undefined.push_back(pc.at("recall_undefined").get<bool>());
            r.f1_undefined.push_back(pc.at("f1_undefined").get<bool>());
        }
        r.macro_precision = j.at("macro").at("precision");
        r.macro_recall = j.at("macro").at("recall");
        r.macro_f1 = j.at("macro").at("f1");
        r.weighted_precision = j.at("weighted").at("precision");
        r.weighted_recall = j.at("weighted").at("recall");
        r.weighted_f1 = j.at("weighted").at("f1");
        r.accuracy = j.at("accuracy");
        r.balanced_accuracy = j.at("balanced_accuracy");
        print_metrics(r, labels);
        return kOk;
    }
    throw Error(ErrorCode::SchemaError, input.string() + ": not a report or metrics file");
}

int cmd_template(const Globals& g, const std::vector<std::string>& files)
{
    const Config c = load(g);
    const fs::path out = require_out(g, "template file");
    if (files.empty() || files.size() % 2 != 0)
        throw Error(ErrorCode::InvalidArgument, "template recordings must be given as wrist/leg pairs");
    TemplateSet ts;
    ts.thresholds = c.thresholds;
    for (std::size_t i = 0; i < files.size(); i += 2) {
        const io::LoadedStream w = io::load_stream(files[i]);
        const io::LoadedStream l = io::load_stream(files[i + 1]);
        const SegmentedThrow seg = analyze_recording(w.wrist, l.leg, {"coach", Style::FiveStep, 0}, c.pipeline);
        ts.templates.push_back(calibrated_template(seg.record, c.sim.calibration_perturbations,
                                                   derive_seed(c.seed, 0x63616c, i / 2), c.dtw));
    }
    ts.validate();
    io::write_file(out, io::to_json(ts).dump(1) + "\n");
    std::printf("wrote %zu templates to %s\n", ts.templates.size(), out.string().c_str());
    return kOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"pinstream: bowling throw analysis from wrist and leg IMU streams"};
    app.require_subcommand(1);
    Globals g;
    std::string config_path;
    std::uint64_t seed = 0;
    std::string out;
    app.add_option("--config", config_path, "JSON config (falls back to $PINSTREAM_CONFIG)");
    std::vector<CLI::Option*> seed_opts{app.add_option("--seed", seed, "seed overriding the config")};
    app.add_option("--out", out, "output path");

    auto* sim = app.add_subcommand("simulate", "generate a synthetic corpus");
    std::size_t athletes = 0, throws = 0, two_stride = 0;
    auto* o_ath = sim->add_option("--athletes", athletes, "number of athletes");
    auto* o_thr = sim->add_option("--throws", throws, "throws per athlete");
    auto* o_two = sim->add_option("--two-stride", two_stride, "extra throws with a two-stride leg stream");

    auto* ana = app.add_subcommand("analyze", "quality degree and error flags per throw");
    std::string templates_path, corpus_dir;
    std::vector<std::string> files;
    bool follow_mode = false;
    double idle_ms = 2000.0;
    ana->add_option("--templates", templates_path, "template file")->required();
    ana->add_option("--corpus", corpus_dir, "corpus directory (uses its manifest)");
    ana->add_flag("--follow", follow_mode, "tail growing stream files");
    ana->add_option("--idle-ms", idle_ms, "stop following after this long without new data");
    ana->add_option("streams", files, "wrist/leg JSONL file pairs");

    auto* ext = app.add_subcommand("extract", "features CSV from a corpus");
    std::string ext_corpus;
    ext->add_option("corpus", ext_corpus, "corpus directory")->required();

    auto* trn = app.add_subcommand("train", "grid search and train the skill classifier");
    std::string trn_features;
    trn->add_option("features", trn_features, "features CSV")->required();

    auto* evl = app.add_subcommand("evaluate", "score a model on a features CSV");
    std::string evl_model, evl_features;
    evl->add_option("model", evl_model, "model JSON")->required();
    evl->add_option("features", evl_features, "features CSV")->required();

    auto* rep = app.add_subcommand("report", "print an analysis or metrics file as a table");
    std::string rep_input;
    rep->add_option("input", rep_input, "report.json or metrics.json")->required();

    auto* tpl = app.add_subcommand("template", "build a template file from coach recordings");
    std::vector<std::string> tpl_files;
    tpl->add_option("streams", tpl_files, "wrist/leg JSONL file pairs")->required();

    for (auto* sc : {sim, ana, ext, trn, evl, rep, tpl}) {
        sc->add_option("--config", config_path, "JSON config (falls back to $PINSTREAM_CONFIG)");
        seed_opts.push_back(sc->add_option("--seed", seed, "seed overriding the config"));
        sc->add_option("--out", out, "output path");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kInputError;
    }
    if (!config_path.empty())
        g.config_path = config_path;
    if (std::any_of(seed_opts.begin(), seed_opts.end(), [](const CLI::Option* o) { return o->count() > 0; }))
        g.seed = seed;
    if (!out.empty())
        g.out = out;

    try {
        if (*sim)
            return cmd_simulate(g, o_ath->count() ? std::optional(athletes) : std::nullopt,
                                o_thr->count() ? std::optional(throws) : std::nullopt,
                                o_two->count() ? std::optional(two_stride) : std::nullopt);
        if (*ana)
            return cmd_analyze(g, templates_path, corpus_dir.empty() ? std::nullopt : std::optional<fs::path>(corpus_dir),
                               files, follow_mode, idle_ms);
        if (*ext)
            return cmd_extract(g, ext_corpus);
        if (*trn)
            return cmd_train(g, trn_features);
        if (*evl)
            return cmd_evaluate(g, evl_model, evl_features);
        if (*rep)
            return cmd_report(rep_input);
        if (*tpl)
            return cmd_template(g, tpl_files);
    } catch (const Error& e) {
        std::fprintf(stderr, "pinstream: %s\n", e.what());
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "pinstream: internal error: %s\n", e.what());
        return kInternal;
    }
    return kInternal;
}
