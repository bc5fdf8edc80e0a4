#include <cstdlib>
#include <filesystem>

#include <gtest/gtest.h>

#include "pinstream/config.hpp"
#include "pinstream/io.hpp"
#include "pinstream/protocol.hpp"
#include "support.hpp"

using namespace pinstream;

namespace {

ErrorCode code_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no exception";
    return ErrorCode::InvalidArgument;
}

std::string what_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST(Fmt, ShortestRoundTrip)
{
    EXPECT_EQ(io::fmt(0.1), "0.1");
    EXPECT_EQ(io::fmt(20.0), "20");
    for (double v : {1.0 / 3.0, 2.718281828459045, -1e-300, 123456.789})
        EXPECT_EQ(std::strtod(io::fmt(v).c_str(), nullptr), v);
}

TEST(Fnv1a, KnownVectors)
{
    EXPECT_EQ(io::fnv1a(""), 0xcbf29ce484222325ull);
    EXPECT_EQ(io::fnv1a("a"), 0xaf63dc4c8601ec8cull);
    EXPECT_EQ(io::hex64(0xabcull), "0000000000000abc");
}

TEST(Streams, RoundTripBothSensors)
{
    const SynthesizedThrow th = synthesize(nominal_script());
    const io::LoadedStream w = io::parse_stream(io::to_jsonl(th.wrist, 50.0), "w");
    const io::LoadedStream l = io::parse_stream(io::to_jsonl(th.leg, 50.0), "l");
    EXPECT_EQ(w.sensor, io::Sensor::Wrist);
    EXPECT_EQ(l.sensor, io::Sensor::Leg);
    EXPECT_EQ(w.wrist.t_ms, th.wrist.t_ms);
    EXPECT_EQ(w.wrist.q, th.wrist.q);
    EXPECT_EQ(l.leg.t_ms, th.leg.t_ms);
    for (std::size_t i = 0; i < th.leg.accel.size(); ++i) {
        EXPECT_EQ(l.leg.accel[i].x, th.leg.accel[i].x);
        EXPECT_EQ(l.leg.accel[i].z, th.leg.accel[i].z);
    }
}

TEST(StreamParser, ReportsLineNumbers)
{
    const std::string head = io::stream_header(io::Sensor::Wrist, 50.0) + "\n";
    const std::string ok = "{\"t_ms\":0,\"sensor\":\"wrist\",\"q\":[1,0,0,0]}\n";
    EXPECT_NE(what_of([&] { io::parse_stream(head + ok + "{not json\n", "f.jsonl"); }).find("f.jsonl:3"),
              std::string::npos);
    EXPECT_EQ(code_of([&] { io::parse_stream(head + ok + ok, "f"); }), ErrorCode::CorruptSample);
    EXPECT_EQ(code_of([&] { io::parse_stream(head + "{\"t_ms\":0,\"sensor\":\"wrist\",\"q\":[0,0,0,0]}\n", "f"); }),
              ErrorCode::CorruptSample);
    EXPECT_EQ(code_of([&] { io::parse_stream(head + "{\"t_ms\":0,\"sensor\":\"leg\",\"a\":[0,0,9]}\n", "f"); }),
              ErrorCode::CorruptSample);
    EXPECT_EQ(code_of([&] { io::parse_stream(ok, "f"); }), ErrorCode::SchemaError);
    EXPECT_EQ(code_of([&] { io::parse_stream("\n\n", "f"); }), ErrorCode::SchemaError);
}

TEST(StreamParser, RejectsOtherVersions)
{
    const std::string bad = "{\"schema\":\"pinstream.stream\",\"version\":2,\"sensor\":\"wrist\",\"fs_hz\":50}\n";
    EXPECT_NE(what_of([&] { io::parse_stream(bad, "f"); }).find("version"), std::string::npos);
}

TEST(Truth, RoundTrip)
{
    ThrowScript s = nominal_script();
    inject_error(s, 2, 1);
    const GroundTruth g = synthesize(s).truth;
    const GroundTruth h = io::truth_from_json(nlohmann::json::parse(io::to_json(g).dump()), "t");
    EXPECT_EQ(h.athlete_id, g.athlete_id);
    EXPECT_EQ(h.skill, g.skill);
    EXPECT_EQ(h.errors, g.errors);
    EXPECT_EQ(h.a_contact, g.a_contact);
    ASSERT_EQ(h.strides.size(), 3u);
    EXPECT_EQ(h.strides[1].avg_velocity, g.strides[1].avg_velocity);
    EXPECT_EQ(h.baseline, g.baseline);
}

TEST(Templates, RoundTripIsExact)
{
    TemplateSet ts;
    ts.templates.push_back(calibrated_template(test::record_of(nominal_script()), 5, 1));
    ts.thresholds.eps3 = 0.2;
    const TemplateSet back = io::templates_from_json(nlohmann::json::parse(io::to_json(ts).dump()), "t");
    EXPECT_EQ(back, ts);
}

TEST(Templates, RejectsWrongSchemaAndShape)
{
    TemplateSet ts;
    ts.templates.push_back(make_template(test::record_of(nominal_script())));
    nlohmann::json j = io::to_json(ts);
    j["schema"] = "pinstream.model";
    EXPECT_EQ(code_of([&] { io::templates_from_json(j, "t"); }), ErrorCode::SchemaError);
    j = io::to_json(ts);
    j["version"] = 99;
    EXPECT_EQ(code_of([&] { io::templates_from_json(j, "t"); }), ErrorCode::SchemaError);
}

TEST(Model, RoundTripPredictsIdentically)
{
    const std::vector<std::vector<double>> X{{0, 0}, {0.2, 0.1}, {3, 3}, {3.1, 2.9}, {0, 3}, {0.2, 3.1}};
    const std::vector<int> y{0, 0, 1, 1, 2, 2};
    const OvoSvmModel m = ovo_train(X, y, {"novice", "intermediate", "expert"}, {1.0, 0.5, 1e-3, 200});
    const OvoSvmModel back = io::model_from_json(nlohmann::json::parse(io::to_json(m).dump()), "m");
    EXPECT_EQ(back, m);
    EXPECT_EQ(ovo_predict_rows(back, X), ovo_predict_rows(m, X));
}

TEST(Manifest, RoundTrip)
{
    std::vector<io::ManifestEntry> e(2);
    e[0] = {"A01_T000", "A01", Skill::Novice, 0, {true, false, false, true}, 3, "w0", "l0", "t0"};
    e[1] = {"A02_T001", "A02", Skill::Expert, 1, {}, 2, "w1", "l1", "t1"};
    const std::string csv = io::manifest_csv(e);
    const auto back = io::parse_manifest(csv, "m");
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[0].errors, e[0].errors);
    EXPECT_EQ(io::errors_tag(e[0].errors), "e1+e4");
    EXPECT_EQ(back[1].leg_strides, 2u);
    EXPECT_EQ(back[1].skill, Skill::Expert);
    EXPECT_EQ(io::manifest_csv(back), csv);
}

TEST(Csv, SchemaAndColumnErrors)
{
    EXPECT_EQ(code_of([] { io::parse_manifest("throw_id\n", "m"); }), ErrorCode::SchemaError);
    const std::string wrong_version = "#schema=pinstream.manifest,version=2\n";
    EXPECT_NE(what_of([&] { io::parse_manifest(wrong_version, "m"); }).find("version=2"), std::string::npos);
    io::ManifestEntry e{"x", "A", Skill::Expert, 0, {}, 3, "w", "l", "t"};
    std::string csv = io::manifest_csv({e}) + "a,b\n";
    EXPECT_NE(what_of([&] { io::parse_manifest(csv, "m.csv"); }).find("m.csv:4"), std::string::npos);
    EXPECT_EQ(code_of([] { io::parse_errors_tag("e5", "m"); }), ErrorCode::SchemaError);
}

TEST(Features, RoundTrip)
{
    io::FeatureRow r;
    r.athlete_id = "A03";
    r.label = "expert";
    for (std::size_t j = 0; j < kFeatureCount; ++j)
        r.x[j] = 0.1 * static_cast<double>(j) + 1.0 / 3.0;
    const auto back = io::parse_features(io::features_csv({r, r}), "f");
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[0].x, r.x);
    EXPECT_EQ(back[1].label, "expert");
}

TEST(Metrics, JsonCarriesUndefinedFlags)
{
    const std::vector<int> t{0, 1, 1}, p{0, 0, 0};
    const nlohmann::json j = io::to_json(metrics(t, p, 2), {"a", "b"});
    EXPECT_EQ(j.at("accuracy"), 1.0 / 3.0);
    EXPECT_EQ(j.at("per_class").at(1).at("precision_undefined"), true);
    EXPECT_EQ(j.at("confusion").at(1).at(0), 2);
}

TEST(Config, DefaultsWhenEmpty)
{
    const Config c = parse_config("{}");
    EXPECT_EQ(c.thresholds, ErrorThresholds{});
    EXPECT_EQ(c.errors.error4_stride, 2u);
    EXPECT_EQ(c.sim.athletes, 9u);
    EXPECT_EQ(c.pipeline.bounds.theta_on, 0.26);
}

TEST(Config, RoundTripThroughJson)
{
    Config c;
    c.seed = 77;
    c.thresholds.eps2 = 0.3;
    c.dtw.cost = DtwCost::L2;
    c.svm.grid.C_grid = {1.0, 10.0};
    c.sim.two_stride_throws = 4;
    const Config back = parse_config(to_json(c).dump());
    EXPECT_EQ(to_json(back), to_json(c));
}

TEST(Config, UnknownKeyNamesTheField)
{
    const std::string msg = what_of([] { parse_config(R"({"thresholds": {"eps5": 1}})", "cfg.json"); });
    EXPECT_NE(msg.find("thresholds.eps5"), std::string::npos);
    EXPECT_NE(msg.find("cfg.json"), std::string::npos);
    EXPECT_EQ(code_of([] { parse_config(R"({"colour": 1})"); }), ErrorCode::SchemaError);
}

TEST(Config, TypeAndRangeErrors)
{
    EXPECT_NE(what_of([] { parse_config(R"({"thresholds": {"eps1": "big"}})"); }).find("thresholds.eps1"),
              std::string::npos);
    EXPECT_EQ(code_of([] { parse_config(R"({"thresholds": {"eps1": -1}})"); }), ErrorCode::SchemaError);
    EXPECT_EQ(code_of([] { parse_config(R"({"svm": {"folds": 1}})"); }), ErrorCode::SchemaError);
    EXPECT_EQ(code_of([] { parse_config(R"({"dtw": {"cost": "cosine"}})"); }), ErrorCode::SchemaError);
    EXPECT_EQ(code_of([] { parse_config(R"({"gait": {"cutoff_hz": 30}})"); }), ErrorCode::SchemaError);
    EXPECT_EQ(code_of([] { parse_config("[1, 2]"); }), ErrorCode::SchemaError);
    EXPECT_EQ(code_of([] { parse_config("{"); }), ErrorCode::SchemaError);
}

TEST(Config, EnvironmentFallback)
{
    const auto dir = std::filesystem::temp_directory_path() / "pinstream_cfg_test";
    std::filesystem::create_directories(dir);
    const auto env_file = dir / "env.json", arg_file = dir / "arg.json";
    io::write_file(env_file, R"({"seed": 5})");
    io::write_file(arg_file, R"({"seed": 6})");
    ::setenv("PINSTREAM_CONFIG", env_file.c_str(), 1);
    EXPECT_EQ(resolve_config(std::nullopt).seed, 5u);
    EXPECT_EQ(resolve_config(arg_file).seed, 6u);
    ::unsetenv("PINSTREAM_CONFIG");
    EXPECT_EQ(resolve_config(std::nullopt).seed, 0u);
    EXPECT_EQ(code_of([&] { resolve_config(dir / "missing.json"); }), ErrorCode::IoError);
    std::filesystem::remove_all(dir);
}
