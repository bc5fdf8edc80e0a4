#ifndef PINSTREAM_QUATERNION_HPP
#define PINSTREAM_QUATERNION_HPP

// Quaternion algebra and swing-angle reconstruction for the wrist sensor.
//
// Convention: scalar-first (w, x, y, z). A sensor quaternion maps sensor-frame
// vectors into the inertial frame. Swing/twist factor as q = swing * twist,
// i.e. the twist is applied first in the sensor frame.

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "pinstream/error.hpp"

namespace pinstream {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend constexpr Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
    friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(Vec3 a, Vec3 b)
{
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }

struct Quaternion {
    double w = 1.0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    static constexpr Quaternion identity() { return {1.0, 0.0, 0.0, 0.0}; }
    constexpr Vec3 vec() const { return {x, y, z}; }

    friend constexpr bool operator==(const Quaternion&, const Quaternion&) = default;
};

constexpr Quaternion conjugate(const Quaternion& q) { return {q.w, -q.x, -q.y, -q.z}; }

inline double norm(const Quaternion& q) { return std::sqrt(q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z); }

/// Scales q to unit length. Throws DegenerateQuaternion for a zero (or
/// non-finite) norm.
inline Quaternion normalize(const Quaternion& q)
{
    const double n = norm(q);
    if (!(n > 0.0) || !std::isfinite(n))
        throw Error(ErrorCode::DegenerateQuaternion, "cannot normalize a zero-norm quaternion");
    return {q.w / n, q.x / n, q.y / n, q.z / n};
}

/// Hamilton product a (x) b.
constexpr Quaternion hamilton(const Quaternion& a, const Quaternion& b)
{
    return {
        a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
        a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
        a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
        a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
    };
}

constexpr Quaternion operator*(const Quaternion& a, const Quaternion& b) { return hamilton(a, b); }

constexpr Quaternion pure(Vec3 v) { return {0.0, v.x, v.y, v.z}; }

/// Rotates v by the unit quaternion q through the pure-quaternion sandwich
/// q (x) [0, v] (x) q*.
constexpr Vec3 rotate(const Quaternion& q, Vec3 v) { return (q * pure(v) * conjugate(q)).vec(); }

/// Rotation of `angle` radians about a unit axis.
inline Quaternion from_axis_angle(Vec3 axis, double angle)
{
    const double h = 0.5 * angle;
    const double s = std::sin(h);
    return {std::cos(h), s * axis.x, s * axis.y, s * axis.z};
}

using Matrix3 = std::array<std::array<double, 3>, 3>;

/// Rotation matrix of a unit quaternion (active rotation, column vectors).
inline Matrix3 rotation_matrix(const Quaternion& q)
{
    const double w = q.w, x = q.x, y = q.y, z = q.z;
    return {{
        {1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)},
        {2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)},
        {2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)},
    }};
}

struct SwingTwist {
    Quaternion swing;
    Quaternion twist;
};

/// Factors a unit quaternion as q = swing (x) twist, where the twist is a
/// rotation about `twist_axis` and the swing axis is orthogonal to it.
///
/// When q has no component along the axis and w == 0 (a 180 degree swing) the
/// twist is undefined; identity is returned for it in that case.
inline SwingTwist swing_twist_decompose(const Quaternion& q, Vec3 twist_axis)
{
    const double proj = dot(q.vec(), twist_axis);
    const Vec3 p = proj * twist_axis;
    Quaternion twist{q.w, p.x, p.y, p.z};
    const double n = norm(twist);
    if (n < 1e-12)
        return {q, Quaternion::identity()};
    twist = {twist.w / n, twist.x / n, twist.y / n, twist.z / n};
    return {q * conjugate(twist), twist};
}

/// Unsigned angle between two vectors, atan2(|v x u|, v . u), in [0, pi].
inline double vector_angle(Vec3 v, Vec3 u) { return std::atan2(norm(cross(v, u)), dot(v, u)); }

/// Orientation of the wrist sensor captured with the arm at rest.
struct BaselineFrame {
    Quaternion orientation = Quaternion::identity();
};

/// Sensor axes used by the swing-angle construction.
struct SwingAxes {
    Vec3 twist{0.0, 1.0, 0.0};      ///< forearm axis; also the reference vector u
    Vec3 horizontal{1.0, 0.0, 0.0}; ///< swing axis; fixes the sign of the angle
};

/// Swing angle of `sample` relative to `baseline`, in [0, 2*pi).
///
/// The relative rotation baseline* (x) sample is split into swing and twist;
/// the reference vector u is rotated by the swing only and the angle between
/// the result and u is measured with atan2. The angle is signed by the
/// direction of u x v along the horizontal axis and negative values are
/// wrapped by adding 2*pi.
inline double swing_angle(const Quaternion& sample, const BaselineFrame& baseline, const SwingAxes& axes = {})
{
    const Quaternion rel = conjugate(normalize(baseline.orientation)) * normalize(sample);
    const SwingTwist st = swing_twist_decompose(rel, axes.twist);
    const Vec3 u = axes.twist;
    const Vec3 v = rotate(st.swing, u);
    const Vec3 c = cross(u, v);
    const double sign = dot(c, axes.horizontal) < 0.0 ? -1.0 : 1.0;
    double omega = std::atan2(sign * norm(c), dot(v, u));
    if (omega < 0.0)
        omega += 2.0 * std::numbers::pi;
    if (omega >= 2.0 * std::numbers::pi)
        omega = 0.0;
    return omega;
}

/// Timestamped swing angles (milliseconds, radians in [0, 2*pi)).
struct SwingAngleSeries {
    std::vector<double> t_ms;
    std::vector<double> angle;

    std::size_t size() const { return angle.size(); }
    bool empty() const { return angle.empty(); }
};

/// Raw wrist orientation samples.
struct OrientationStream {
    std::vector<double> t_ms;
    std::vector<Quaternion> q;
};

/// Angles at or above this value are read as small negative excursions below
/// the baseline rather than as very large swings. Physical swings stay well
/// under 250 degrees.
inline constexpr double kWrapSplit = 1.5 * std::numbers::pi;

/// Maps a [0, 2*pi) swing angle into [-pi/2, 3*pi/2) so that noise around the
/// baseline does not jump to ~2*pi.
constexpr double centered_angle(double omega) { return omega >= kWrapSplit ? omega - 2.0 * std::numbers::pi : omega; }

inline std::vector<double> centered_angles(std::span<const double> omega)
{
    std::vector<double> out(omega.size());
    for (std::size_t i = 0; i < omega.size(); ++i)
        out[i] = centered_angle(omega[i]);
    return out;
}

/// Converts a wrist orientation stream into swing angles.
inline SwingAngleSeries swing_angles(std::span<const double> t_ms, std::span<const Quaternion> q,
                                     const BaselineFrame& baseline, const SwingAxes& axes = {})
{
    if (t_ms.size() != q.size())
        throw Error(ErrorCode::LengthMismatch, "timestamp and quaternion counts differ");
    SwingAngleSeries out;
    out.t_ms.assign(t_ms.begin(), t_ms.end());
    out.angle.reserve(q.size());
    for (const auto& s : q)
        out.angle.push_back(swing_angle(s, baseline, axes));
    return out;
}

/// Sign-aligned average of unit quaternions; used to estimate the baseline
/// from the rest samples at the head of a stream.
inline Quaternion average(std::span<const Quaternion> qs)
{
    if (qs.empty())
        throw Error(ErrorCode::EmptySeries, "cannot average an empty quaternion set");
    const Quaternion ref = qs.front();
    Quaternion acc{0.0, 0.0, 0.0, 0.0};
    for (const auto& q : qs) {
        const double s = (q.w * ref.w + q.x * ref.x + q.y * ref.y + q.z * ref.z) < 0.0 ? -1.0 : 1.0;
        acc.w += s * q.w;
        acc.x += s * q.x;
        acc.y += s * q.y;
        acc.z += s * q.z;
    }
    return normalize(acc);
}

} // namespace pinstream

#endif
