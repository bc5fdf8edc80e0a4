#ifndef PINSTREAM_IO_HPP
#define PINSTREAM_IO_HPP

// File formats: JSONL sensor streams, JSON ground truth, templates, models
// and reports, CSV manifests, feature tables and CV tables. Every file
// carries a schema name and version; loaders reject anything else.
// Layouts are described in docs/formats.md.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "pinstream/error.hpp"
#include "pinstream/features.hpp"
#include "pinstream/gait.hpp"
#include "pinstream/metrics.hpp"
#include "pinstream/multiclass.hpp"
#include "pinstream/quaternion.hpp"
#include "pinstream/segment.hpp"
#include "pinstream/sim.hpp"
#include "pinstream/skill.hpp"
#include "pinstream/template.hpp"

namespace pinstream::io {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// ---------------------------------------------------------------- helpers

inline std::string read_file(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text)
{
    if (p.has_parent_path())
        std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out)
        throw Error(ErrorCode::IoError, "cannot write " + p.string());
    out << text;
    if (!out)
        throw Error(ErrorCode::IoError, "write failed for " + p.string());
}

/// FNV-1a over bytes; used to fingerprint outputs.
inline std::uint64_t fnv1a(std::string_view bytes)
{
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

/// Shortest text that reads back to the same double.
inline std::string fmt(double v)
{
    char buf[32];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v)
            break;
    }
    return buf;
}

inline json parse_json(const std::string& text, const std::string& where)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::SchemaError, where + ": " + e.what());
    }
}

inline json schema_header(const std::string& name) { return {{"schema", name}, {"version", kSchemaVersion}}; }

inline void check_schema(const json& j, const std::string& name, const std::string& where)
{
    if (!j.is_object() || !j.contains("schema") || !j.contains("version"))
        throw Error(ErrorCode::SchemaError, where + ": missing schema/version header");
    if (j.at("schema") != name)
        throw Error(ErrorCode::SchemaError,
                    where + ": expected schema '" + name + "', found '" + j.at("schema").dump() + "'");
    if (j.at("version") != kSchemaVersion)
        throw Error(ErrorCode::SchemaError, where + ": unsupported " + name + " version " + j.at("version").dump());
}

template <class T>
T field(const json& j, const char* key, const std::string& where)
{
    if (!j.contains(key))
        throw Error(ErrorCode::SchemaError, where + ": missing field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::SchemaError, where + ": field '" + key + "': " + e.what());
    }
}

// ---------------------------------------------------------------- streams

enum class Sensor { Wrist, Leg };

inline std::string to_string(Sensor s) { return s == Sensor::Wrist ? "wrist" : "leg"; }

inline std::string stream_header(Sensor s, double fs_hz)
{
    json h = schema_header("pinstream.stream");
    h["sensor"] = to_string(s);
    h["fs_hz"] = fs_hz;
    return h.dump();
}

inline std::string wrist_line(double t_ms, const Quaternion& q)
{
    return "{\"t_ms\":" + fmt(t_ms) + ",\"sensor\":\"wrist\",\"q\":[" + fmt(q.w) + "," + fmt(q.x) + "," + fmt(q.y) + "," +
           fmt(q.z) + "]}";
}

inline std::string leg_line(double t_ms, const Vec3& a)
{
    return "{\"t_ms\":" + fmt(t_ms) + ",\"sensor\":\"leg\",\"a\":[" + fmt(a.x) + "," + fmt(a.y) + "," + fmt(a.z) + "]}";
}

inline std::string to_jsonl(const OrientationStream& s, double fs_hz)
{
    std::string out = stream_header(Sensor::Wrist, fs_hz) + "\n";
    for (std::size_t i = 0; i < s.q.size(); ++i)
        out += wrist_line(s.t_ms[i], s.q[i]) + "\n";
    return out;
}

inline std::string to_jsonl(const AccelStream& s, double fs_hz)
{
    std::string out = stream_header(Sensor::Leg, fs_hz) + "\n";
    for (std::size_t i = 0; i < s.accel.size(); ++i)
        out += leg_line(s.t_ms[i], s.accel[i]) + "\n";
    return out;
}

struct StreamSample {
    Sensor sensor = Sensor::Wrist;
    double t_ms = 0.0;
    Quaternion q;
    Vec3 a;
};

/// Incremental JSONL reader. The first non-empty line must be the stream
/// header; every later line is one sample.
class StreamParser {
public:
    explicit StreamParser(std::string source = "stream") : source_(std::move(source)) {}

    /// Returns the sample on a data line, nothing for the header or blanks.
    std::optional<StreamSample> feed(const std::string& line)
    {
        ++line_no_;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            return std::nullopt;
        const std::string where = source_ + ":" + std::to_string(line_no_);
        const json j = parse_json(line, where);
        if (!sensor_) {
            check_schema(j, "pinstream.stream", where);
            const auto s = field<std::string>(j, "sensor", where);
            if (s != "wrist" && s != "leg")
                throw Error(ErrorCode::SchemaError, where + ": unknown sensor '" + s + "'");
            sensor_ = s == "wrist" ? Sensor::Wrist : Sensor::Leg;
            return std::nullopt;
        }
        StreamSample smp;
        smp.sensor = *sensor_;
        smp.t_ms = field<double>(j, "t_ms", where);
        if (field<std::string>(j, "sensor", where) != to_string(*sensor_))
            throw Error(ErrorCode::CorruptSample, where + ": sensor differs from the stream header");
        if (last_t_ && !(smp.t_ms > *last_t_))
            throw Error(ErrorCode::CorruptSample, where + ": timestamps must increase");
        last_t_ = smp.t_ms;
        if (*sensor_ == Sensor::Wrist) {
            const auto q = field<std::vector<double>>(j, "q", where);
            if (q.size() != 4)
                throw Error(ErrorCode::CorruptSample, where + ": q needs 4 components");
            smp.q = {q[0], q[1], q[2], q[3]};
            if (!(norm(smp.q) > 0.0) || !std::isfinite(norm(smp.q)))
                throw Error(ErrorCode::CorruptSample, where + ": degenerate quaternion");
        } else {
            const auto a = field<std::vector<double>>(j, "a", where);
            if (a.size() != 3)
                throw Error(ErrorCode::CorruptSample, where + ": a needs 3 components");
            smp.a = {a[0], a[1], a[2]};
            if (!std::isfinite(norm(smp.a)))
                throw Error(ErrorCode::CorruptSample, where + ": non-finite acceleration");
        }
        return smp;
    }

    std::optional<Sensor> sensor() const { return sensor_; }

private:
    std::string source_;
    std::size_t line_no_ = 0;
    std::optional<Sensor> sensor_;
    std::optional<double> last_t_;
};

struct LoadedStream {
    Sensor sensor = Sensor::Wrist;
    OrientationStream wrist;
    AccelStream leg;
};

inline LoadedStream parse_stream(const std::string& text, const std::string& source)
{
    StreamParser parser(source);
    LoadedStream out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (auto s = parser.feed(line)) {
            if (s->sensor == Sensor::Wrist) {
                out.wrist.t_ms.push_back(s->t_ms);
                out.wrist.q.push_back(s->q);
            } else {
                out.leg.t_ms.push_back(s->t_ms);
                out.leg.accel.push_back(s->a);
            }
        }
    }
    if (!parser.sensor())
        throw Error(ErrorCode::SchemaError, source + ": empty stream file");
    out.sensor = *parser.sensor();
    return out;
}

inline LoadedStream load_stream(const std::filesystem::path& p) { return parse_stream(read_file(p), p.string()); }

// ---------------------------------------------------------------- ground truth

inline json errors_json(const ErrorSet& e)
{
    json a = json::array();
    for (std::size_t k = 0; k < e.size(); ++k)
        if (e[k])
            a.push_back("e" + std::to_string(k + 1));
    return a;
}

inline ErrorSet errors_from_json(const json& a, const std::string& where)
{
    ErrorSet e{};
    for (const auto& v : a) {
        const std::string s = v.get<std::string>();
        if (s.size() != 2 || s[0] != 'e' || s[1] < '1' || s[1] > '4')
            throw Error(ErrorCode::SchemaError, where + ": unknown error tag '" + s + "'");
        e[static_cast<std::size_t>(s[1] - '1')] = true;
    }
    return e;
}

inline json to_json(const GroundTruth& g)
{
    json j = schema_header("pinstream.truth");
    j["athlete_id"] = g.athlete_id;
    j["throw_index"] = g.throw_index;
    j["skill"] = to_string(g.skill);
    j["onset_s"] = g.onset_s;
    j["end_s"] = g.end_s;
    j["a_max"] = g.a_max;
    j["a_contact"] = g.a_contact;
    j["errors"] = errors_json(g.errors);
    j["baseline"] = {g.baseline.w, g.baseline.x, g.baseline.y, g.baseline.z};
    json st = json::array();
    for (const StrideTruth& s : g.strides)
        st.push_back({{"is_s", s.is_s}, {"ic_s", s.ic_s}, {"mid_s", s.mid_s}, {"avg_velocity", s.avg_velocity}});
    j["strides"] = st;
    return j;
}

inline GroundTruth truth_from_json(const json& j, const std::string& where)
{
    check_schema(j, "pinstream.truth", where);
    GroundTruth g;
    g.athlete_id = field<std::string>(j, "athlete_id", where);
    g.throw_index = field<std::int64_t>(j, "throw_index", where);
    g.skill = parse_skill(field<std::string>(j, "skill", where));
    g.onset_s = field<double>(j, "onset_s", where);
    g.end_s = field<double>(j, "end_s", where);
    g.a_max = field<double>(j, "a_max", where);
    g.a_contact = field<std::array<double, 3>>(j, "a_contact", where);
    g.errors = errors_from_json(field<json>(j, "errors", where), where);
    const auto b = field<std::array<double, 4>>(j, "baseline", where);
    g.baseline = {b[0], b[1], b[2], b[3]};
    for (const auto& s : field<json>(j, "strides", where))
        g.strides.push_back({field<double>(s, "is_s", where), field<double>(s, "ic_s", where),
                             field<double>(s, "mid_s", where), field<double>(s, "avg_velocity", where)});
    return g;
}

// ---------------------------------------------------------------- templates

inline json to_json(const TemplateSet& ts)
{
    json j = schema_header("pinstream.templates");
    j["style"] = to_string(ts.style);
    j["thresholds"] = {{"eps1", ts.thresholds.eps1},
                       {"eps2", ts.thresholds.eps2},
                       {"eps3", ts.thresholds.eps3},
                       {"eps4", ts.thresholds.eps4}};
    json arr = json::array();
    for (const Template& t : ts.templates) {
        arr.push_back({{"segments", t.segments},
                       {"avg_velocity", t.avg_velocity},
                       {"a_max", t.a_max},
                       {"a_contact", t.a_contact},
                       {"ad_ref", t.ad_ref}});
    }
    j["templates"] = arr;
    return j;
}

inline TemplateSet templates_from_json(const json& j, const std::string& where)
{
    check_schema(j, "pinstream.templates", where);
    TemplateSet ts;
    ts.style = parse_style(field<std::string>(j, "style", where));
    const json th = field<json>(j, "thresholds", where);
    ts.thresholds = {field<double>(th, "eps1", where), field<double>(th, "eps2", where),
                     field<double>(th, "eps3", where), field<double>(th, "eps4", where)};
    for (const auto& t : field<json>(j, "templates", where)) {
        Template tp;
        tp.style = ts.style;
        tp.segments = field<std::vector<std::vector<double>>>(t, "segments", where);
        tp.avg_velocity = field<std::vector<double>>(t, "avg_velocity", where);
        tp.a_max = field<double>(t, "a_max", where);
        tp.a_contact = field<std::vector<double>>(t, "a_contact", where);
        tp.ad_ref = field<std::vector<double>>(t, "ad_ref", where);
        ts.templates.push_back(std::move(tp));
    }
    try {
        ts.validate();
    } catch (const Error& e) {
        throw Error(e.code(), where + ": " + e.what());
    }
    return ts;
}

// ---------------------------------------------------------------- model

inline json to_json(const OvoSvmModel& m)
{
    json j = schema_header("pinstream.model");
    j["labels"] = m.labels;
    std::vector<std::string> names(kFeatureNames.begin(), kFeatureNames.end());
    j["feature_names"] = names;
    j["feature_schema_hash"] = hex64(feature_schema_hash());
    j["scaler"] = {{"mean", m.scaler.mean}, {"std", m.scaler.std}};
    json cls = json::array();
    for (const PairClassifier& p : m.classifiers)
        cls.push_back({{"class_a", p.class_a},
                       {"class_b", p.class_b},
                       {"C", p.svm.C},
                       {"gamma", p.svm.gamma},
                       {"bias", p.svm.bias},
                       {"coef", p.svm.coef},
                       {"support_vectors", p.svm.support_vectors}});
    j["classifiers"] = cls;
    return j;
}

inline OvoSvmModel model_from_json(const json& j, const std::string& where)
{
    check_schema(j, "pinstream.model", where);
    if (field<std::string>(j, "feature_schema_hash", where) != hex64(feature_schema_hash()))
        throw Error(ErrorCode::SchemaError, where + ": model was trained on a different feature schema");
    OvoSvmModel m;
    m.labels = field<std::vector<std::string>>(j, "labels", where);
    const json sc = field<json>(j, "scaler", where);
    m.scaler.mean = field<std::vector<double>>(sc, "mean", where);
    m.scaler.std = field<std::vector<double>>(sc, "std", where);
    for (const auto& c : field<json>(j, "classifiers", where)) {
        PairClassifier p;
        p.class_a = field<int>(c, "class_a", where);
        p.class_b = field<int>(c, "class_b", where);
        p.svm.C = field<double>(c, "C", where);
        p.svm.gamma = field<double>(c, "gamma", where);
        p.svm.bias = field<double>(c, "bias", where);
        p.svm.coef = field<std::vector<double>>(c, "coef", where);
        p.svm.support_vectors = field<std::vector<std::vector<double>>>(c, "support_vectors", where);
        m.classifiers.push_back(std::move(p));
    }
    try {
        m.validate();
    } catch (const Error& e) {
        throw Error(e.code(), where + ": " + e.what());
    }
    return m;
}

// ---------------------------------------------------------------- CSV

inline std::string csv_schema_line(const std::string& name)
{
    return "#schema=" + name + ",version=" + std::to_string(kSchemaVersion) + "\n";
}

inline std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

/// Splits CSV text into rows after checking the schema line and header.
inline std::vector<std::vector<std::string>> read_csv(const std::string& text, const std::string& schema,
                                                      const std::vector<std::string>& header, const std::string& where)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.rfind("#schema=", 0) != 0)
        throw Error(ErrorCode::SchemaError, where + ":1: missing schema line");
    const auto tag = split_csv(line.substr(8));
    if (tag.size() != 2 || tag[0] != schema)
        throw Error(ErrorCode::SchemaError, where + ":1: expected schema '" + schema + "'");
    if (tag[1] != "version=" + std::to_string(kSchemaVersion))
        throw Error(ErrorCode::SchemaError, where + ":1: unsupported " + schema + " " + tag[1]);
    if (!std::getline(in, line) || split_csv(line) != header)
        throw Error(ErrorCode::SchemaError, where + ":2: unexpected column header");
    std::vector<std::vector<std::string>> rows;
    std::size_t no = 2;
    while (std::getline(in, line)) {
        ++no;
        if (line.empty() || line == "\r")
            continue;
        auto r = split_csv(line);
        if (r.size() != header.size())
            throw Error(ErrorCode::SchemaError, where + ":" + std::to_string(no) + ": expected " +
                                                    std::to_string(header.size()) + " columns, found " +
                                                    std::to_string(r.size()));
        rows.push_back(std::move(r));
    }
    return rows;
}

inline double parse_double(const std::string& s, const std::string& where)
{
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size())
        throw Error(ErrorCode::SchemaError, where + ": not a number: '" + s + "'");
    return v;
}

struct ManifestEntry {
    std::string throw_id;
    std::string athlete_id;
    Skill skill = Skill::Expert;
    std::int64_t throw_index = 0;
    ErrorSet errors{};
    std::size_t leg_strides = 3;
    std::string wrist_file, leg_file, truth_file; ///< relative to the corpus root
};

inline const std::vector<std::string>& manifest_header()
{
    static const std::vector<std::string> h = {"throw_id",  "athlete_id", "skill",     "throw_index", "errors",
                                               "leg_strides", "wrist_file", "leg_file", "truth_file"};
    return h;
}

inline std::string errors_tag(const ErrorSet& e)
{
    std::string s;
    for (std::size_t k = 0; k < e.size(); ++k)
        if (e[k])
            s += (s.empty() ? "" : "+") + std::string("e") + std::to_string(k + 1);
    return s.empty() ? "none" : s;
}

inline ErrorSet parse_errors_tag(const std::string& tag, const std::string& where)
{
    ErrorSet e{};
    if (tag == "none")
        return e;
    std::size_t pos = 0;
    while (pos <= tag.size()) {
        const std::size_t next = tag.find('+', pos);
        const std::string t = tag.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
        if (t.size() != 2 || t[0] != 'e' || t[1] < '1' || t[1] > '4')
            throw Error(ErrorCode::SchemaError, where + ": bad error tag '" + tag + "'");
        e[static_cast<std::size_t>(t[1] - '1')] = true;
        if (next == std::string::npos)
            break;
        pos = next + 1;
    }
    return e;
}

inline std::string manifest_csv(const std::vector<ManifestEntry>& entries)
{
    std::string out = csv_schema_line("pinstream.manifest");
    const auto& h = manifest_header();
    for (std::size_t i = 0; i < h.size(); ++i)
        out += (i ? "," : "") + h[i];
    out += "\n";
    for (const auto& e : entries)
        out += e.throw_id + "," + e.athlete_id + "," + to_string(e.skill) + "," + std::to_string(e.throw_index) + "," +
               errors_tag(e.errors) + "," + std::to_string(e.leg_strides) + "," + e.wrist_file + "," + e.leg_file +
               "," + e.truth_file + "\n";
    return out;
}

inline std::vector<ManifestEntry> parse_manifest(const std::string& text, const std::string& where)
{
    std::vector<ManifestEntry> out;
    std::size_t no = 2;
    for (const auto& r : read_csv(text, "pinstream.manifest", manifest_header(), where)) {
        const std::string at = where + ":" + std::to_string(++no);
        ManifestEntry e;
        e.throw_id = r[0];
        e.athlete_id = r[1];
        e.skill = parse_skill(r[2]);
        e.throw_index = static_cast<std::int64_t>(parse_double(r[3], at));
        e.errors = parse_errors_tag(r[4], at);
        e.leg_strides = static_cast<std::size_t>(parse_double(r[5], at));
        e.wrist_file = r[6];
        e.leg_file = r[7];
        e.truth_file = r[8];
        out.push_back(std::move(e));
    }
    return out;
}

struct FeatureRow {
    std::string athlete_id;
    std::string label;
    FeatureVector x{};
};

inline std::vector<std::string> features_header()
{
    std::vector<std::string> h = {"athlete_id", "label"};
    for (auto n : kFeatureNames)
        h.emplace_back(n);
    return h;
}

inline std::string features_csv(const std::vector<FeatureRow>& rows)
{
    std::string out = csv_schema_line("pinstream.features");
    const auto h = features_header();
    for (std::size_t i = 0; i < h.size(); ++i)
        out += (i ? "," : "") + h[i];
    out += "\n";
    for (const auto& r : rows) {
        out += r.athlete_id + "," + r.label;
        for (double v : r.x)
            out += "," + fmt(v);
        out += "\n";
    }
    return out;
}

inline std::vector<FeatureRow> parse_features(const std::string& text, const std::string& where)
{
    std::vector<FeatureRow> out;
    std::size_t no = 2;
    for (const auto& r : read_csv(text, "pinstream.features", features_header(), where)) {
        const std::string at = where + ":" + std::to_string(++no);
        FeatureRow f;
        f.athlete_id = r[0];
        f.label = r[1];
        if (f.label.empty())
            throw Error(ErrorCode::SchemaError, at + ": missing label");
        for (std::size_t j = 0; j < kFeatureCount; ++j)
            f.x[j] = parse_double(r[2 + j], at);
        out.push_back(std::move(f));
    }
    return out;
}

inline std::string cv_table_csv(const GridSearchResult& g)
{
    std::string out = csv_schema_line("pinstream.cvtable") + "C,gamma,mean_macro_f1,std,failed\n";
    for (const CvCell& c : g.table)
        out += fmt(c.C) + "," + fmt(c.gamma) + "," + (c.failed ? "nan" : fmt(c.mean_f1)) + "," +
               (c.failed ? "nan" : fmt(c.std_f1)) + "," + (c.failed ? "1" : "0") + "\n";
    return out;
}

// ---------------------------------------------------------------- metrics

inline json to_json(const MetricsReport& r, const std::vector<std::string>& labels)
{
    json j = schema_header("pinstream.metrics");
    j["labels"] = labels;
    j["confusion"] = r.confusion;
    json per = json::array();
    for (std::size_t c = 0; c < labels.size(); ++c)
        per.push_back({{"label", labels[c]},
                       {"precision", r.precision[c]},
                       {"recall", r.recall[c]},
                       {"f1", r.f1[c]},
                       {"support", r.support[c]},
                       {"precision_undefined", static_cast<bool>(r.precision_undefined[c])},
                       {"recall_undefined", static_cast<bool>(r.recall_undefined[c])},
                       {"f1_undefined", static_cast<bool>(r.f1_undefined[c])}});
    j["per_class"] = per;
    j["macro"] = {{"precision", r.macro_precision}, {"recall", r.macro_recall}, {"f1", r.macro_f1}};
    j["weighted"] = {{"precision", r.weighted_precision}, {"recall", r.weighted_recall}, {"f1", r.weighted_f1}};
    j["accuracy"] = r.accuracy;
    j["balanced_accuracy"] = r.balanced_accuracy;
    return j;
}

} // namespace pinstream::io

#endif
