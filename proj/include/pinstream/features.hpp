#ifndef PINSTREAM_FEATURES_HPP
#define PINSTREAM_FEATURES_HPP

// 21 statistical features per throw for skill classification.
//
// Rows 1-4 (max, mean, standard deviation, RMS) are taken over three signals:
// swing angle, raw acceleration magnitude and stride velocity (the per-stride
// velocity series concatenated). Rows 5-7 (swing period, stance period and
// their ratio) are taken per stride of the instrumented foot.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "pinstream/error.hpp"
#include "pinstream/segment.hpp"

namespace pinstream {

inline constexpr std::size_t kFeatureCount = 21;

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "swing_max",       "swing_mean",      "swing_std",       "swing_rms",       "accel_max",
    "accel_mean",      "accel_std",       "accel_rms",       "velocity_max",    "velocity_mean",
    "velocity_std",    "velocity_rms",    "stride1_swing_s", "stride1_stance_s", "stride1_ratio",
    "stride2_swing_s", "stride2_stance_s", "stride2_ratio",   "stride3_swing_s", "stride3_stance_s",
    "stride3_ratio",
};

using FeatureVector = std::array<double, kFeatureCount>;

/// FNV-1a over the comma-joined feature names. Changes whenever the schema
/// (names or order) changes.
constexpr std::uint64_t feature_schema_hash()
{
    std::uint64_t h = 14695981039346656037ull;
    bool first = true;
    for (std::string_view name : kFeatureNames) {
        if (!first) {
            h ^= static_cast<unsigned char>(',');
            h *= 1099511628211ull;
        }
        first = false;
        for (char c : name) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ull;
        }
    }
    return h;
}

struct SeriesStats {
    double max = 0.0;
    double mean = 0.0;
    double std = 0.0; ///< population (divide by N)
    double rms = 0.0;
};

inline SeriesStats series_stats(std::span<const double> s)
{
    if (s.empty())
        throw Error(ErrorCode::EmptySeries, "statistics of an empty series");
    SeriesStats st;
    st.max = s[0];
    double sum = 0.0, sq = 0.0;
    for (double v : s) {
        if (!std::isfinite(v))
            throw Error(ErrorCode::CorruptSample, "non-finite sample");
        st.max = std::max(st.max, v);
        sum += v;
        sq += v * v;
    }
    const double n = static_cast<double>(s.size());
    st.mean = sum / n;
    double var = 0.0;
    for (double v : s)
        var += (v - st.mean) * (v - st.mean);
    st.std = std::sqrt(var / n);
    st.rms = std::sqrt(sq / n);
    return st;
}

inline FeatureVector extract(const ThrowRecord& rec)
{
    const std::size_t k = expected_strides(rec.meta.style);
    if (rec.gait.strides.size() != k || rec.gait.swing_period_s.size() != k || rec.gait.stance_period_s.size() != k)
        throw Error(ErrorCode::StyleMismatch, "feature extraction needs a partitioned three-stride throw");
    if (k != 3)
        throw Error(ErrorCode::StyleMismatch, "feature schema is defined for three strides");

    FeatureVector f{};
    std::size_t at = 0;
    const auto put = [&](const SeriesStats& s) {
        f[at++] = s.max;
        f[at++] = s.mean;
        f[at++] = s.std;
        f[at++] = s.rms;
    };
    put(series_stats(rec.centered_swing()));
    put(series_stats(rec.gait.magnitude));
    std::vector<double> vel;
    for (const auto& v : rec.gait.velocity)
        vel.insert(vel.end(), v.begin(), v.end());
    put(series_stats(vel));
    for (std::size_t i = 0; i < k; ++i) {
        f[at++] = rec.gait.swing_period_s[i];
        f[at++] = rec.gait.stance_period_s[i];
        f[at++] = rec.gait.swing_stance_ratio[i];
    }
    for (double v : f)
        if (!std::isfinite(v))
            throw Error(ErrorCode::CorruptSample, "non-finite feature");
    return f;
}

/// Per-column z-scoring fitted on training rows. Columns with zero variance
/// keep std = 0 and pass through unchanged.
struct StandardScaler {
    std::vector<double> mean;
    std::vector<double> std;

    static StandardScaler fit(std::span<const std::vector<double>> rows)
    {
        if (rows.size() < 2)
            throw Error(ErrorCode::InvalidArgument, "scaler needs at least two rows");
        const std::size_t d = rows.front().size();
        StandardScaler s;
        s.mean.assign(d, 0.0);
        s.std.assign(d, 0.0);
        for (const auto& r : rows) {
            if (r.size() != d)
                throw Error(ErrorCode::DimensionMismatch, "ragged feature matrix");
            for (std::size_t j = 0; j < d; ++j)
                s.mean[j] += r[j];
        }
        const double n = static_cast<double>(rows.size());
        for (double& m : s.mean)
            m /= n;
        for (const auto& r : rows)
            for (std::size_t j = 0; j < d; ++j)
                s.std[j] += (r[j] - s.mean[j]) * (r[j] - s.mean[j]);
        for (std::size_t j = 0; j < d; ++j) {
            s.std[j] = std::sqrt(s.std[j] / n);
            if (s.std[j] <= 1e-12 * std::max(1.0, std::abs(s.mean[j])))
                s.std[j] = 0.0;
        }
        return s;
    }

    std::vector<double> transform(std::span<const double> x) const
    {
        if (x.size() != mean.size())
            throw Error(ErrorCode::DimensionMismatch, "feature vector width differs from scaler");
        std::vector<double> out(x.begin(), x.end());
        for (std::size_t j = 0; j < out.size(); ++j)
            if (std.at(j) != 0.0)
                out[j] = (out[j] - mean[j]) / std[j];
        return out;
    }

    std::vector<double> inverse_transform(std::span<const double> z) const
    {
        if (z.size() != mean.size())
            throw Error(ErrorCode::DimensionMismatch, "feature vector width differs from scaler");
        std::vector<double> out(z.begin(), z.end());
        for (std::size_t j = 0; j < out.size(); ++j)
            if (std.at(j) != 0.0)
                out[j] = out[j] * std[j] + mean[j];
        return out;
    }

    std::vector<std::vector<double>> transform_rows(std::span<const std::vector<double>> rows) const
    {
        std::vector<std::vector<double>> out;
        out.reserve(rows.size());
        for (const auto& r : rows)
            out.push_back(transform(r));
        return out;
    }

    friend bool operator==(const StandardScaler&, const StandardScaler&) = default;
};

struct ScaledMatrix {
    std::vector<std::vector<double>> rows;
    StandardScaler scaler;
};

inline ScaledMatrix normalize_features(std::span<const std::vector<double>> rows)
{
    ScaledMatrix m;
    m.scaler = StandardScaler::fit(rows);
    m.rows = m.scaler.transform_rows(rows);
    return m;
}

} // namespace pinstream

#endif
