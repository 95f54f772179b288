#pragma once
// Coordinate-frame math: camera back-projection for landmark localization,
// depth aggregation, and egocentric direction/elevation/distance computation.
//
// Conventions, fixed project-wide:
//   - world frame is right-handed with z up; angles cross module boundaries
//     in degrees, lengths in meters
//   - positive deflection angle = counterclockwise viewed from above = left turn
//   - depth is the Euclidean camera-to-point distance, not z-depth

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "lookaside/common.hpp"

namespace lookaside::geom {

struct WorldPoint {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend bool operator==(const WorldPoint&, const WorldPoint&) = default;
};

inline double distance(const WorldPoint& a, const WorldPoint& b) {
    const double dx = b.x - a.x, dy = b.y - a.y, dz = b.z - a.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

inline double distance_xy(const WorldPoint& a, const WorldPoint& b) {
    const double dx = b.x - a.x, dy = b.y - a.y;
    return std::sqrt(dx * dx + dy * dy);
}

struct UnitVector3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    double norm_xy() const { return std::sqrt(x * x + y * y); }

    friend bool operator==(const UnitVector3&, const UnitVector3&) = default;
};

// Horizontal unit vector from a compass-free yaw angle (degrees, CCW from +x).
inline UnitVector3 heading_from_yaw_deg(double yaw_deg) {
    const double r = deg_to_rad(yaw_deg);
    return {std::cos(r), std::sin(r), 0.0};
}

inline double yaw_deg_of(const UnitVector3& v) {
    return rad_to_deg(std::atan2(v.y, v.x));
}

struct PixelCoord {
    double u = 0.0;  // horizontal, pixels
    double v = 0.0;  // vertical, pixels
};

struct BoundingBox {
    double u_min = 0.0;
    double v_min = 0.0;
    double u_max = 0.0;
    double v_max = 0.0;
    double confidence = 1.0;

    PixelCoord center() const { return {(u_min + u_max) / 2.0, (v_min + v_max) / 2.0}; }

    void validate() const {
        if (!(u_min <= u_max) || !(v_min <= v_max)) throw Error("bounding box min exceeds max");
        if (!std::isfinite(confidence)) throw Error("bounding box confidence not finite");
    }
};

enum class ElevationSign { ascend, descend, level };

inline std::string_view to_string(ElevationSign s) {
    switch (s) {
        case ElevationSign::ascend: return "ascend";
        case ElevationSign::descend: return "descend";
        case ElevationSign::level: return "level";
    }
    return "level";
}

inline ElevationSign elevation_sign_from_string(std::string_view s) {
    if (s == "ascend") return ElevationSign::ascend;
    if (s == "descend") return ElevationSign::descend;
    if (s == "level") return ElevationSign::level;
    throw Error("unknown elevation sign: " + std::string(s));
}

// Elevation changes smaller than this are reported as level.
inline constexpr double kLevelThresholdM = 0.01;
// Point pairs closer than this have no defined heading.
inline constexpr double kDegenerateDistanceM = 1e-9;

struct RelativeMotion {
    double theta_deg = 0.0;      // signed deflection, (-180, 180], + = left
    double elevation_m = 0.0;    // |dz|, >= 0
    ElevationSign elevation_sign = ElevationSign::level;
    double distance_m = 0.0;     // horizontal distance, >= 0
};

struct DepthPatch {
    std::vector<double> samples;  // meters, all > 0
};

struct CameraModel {
    Eigen::Matrix3d intrinsics = Eigen::Matrix3d::Identity();   // K, pixels
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();     // R, camera -> world
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();      // T, meters, world frame

    void validate() const {
        if (std::abs(intrinsics(2, 2) - 1.0) > 1e-9) throw Error("camera K[2][2] must be 1");
        if (std::abs(intrinsics.determinant()) < 1e-12) throw Error("camera intrinsics singular");
        const Eigen::Matrix3d rtr = rotation.transpose() * rotation;
        if ((rtr - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-9)
            throw Error("camera rotation not orthonormal");
        if (std::abs(rotation.determinant() - 1.0) > 1e-9)
            throw Error("camera rotation must have determinant +1");
    }
};

// Mean of the samples that survive the sigma_mult * sigma outlier filter
// around the raw mean. A zero-variance patch passes through unchanged; if the
// filter would drop everything, the raw mean is returned.
inline double aggregate_depth(const DepthPatch& patch, double sigma_mult = 2.0) {
    if (patch.samples.empty()) throw Error("empty depth patch");
    if (!(sigma_mult > 0.0)) throw Error("sigma_mult must be positive");
    double mean = 0.0;
    for (double s : patch.samples) {
        if (!(s > 0.0) || !std::isfinite(s)) throw Error("depth samples must be positive");
        mean += s;
    }
    mean /= static_cast<double>(patch.samples.size());

    double var = 0.0;
    for (double s : patch.samples) var += (s - mean) * (s - mean);
    var /= static_cast<double>(patch.samples.size());
    const double sigma = std::sqrt(var);
    if (sigma == 0.0) return mean;

    double kept_sum = 0.0;
    size_t kept = 0;
    for (double s : patch.samples) {
        if (std::abs(s - mean) <= sigma_mult * sigma) {
            kept_sum += s;
            ++kept;
        }
    }
    if (kept == 0) return mean;
    return kept_sum / static_cast<double>(kept);
}

// Back-projects a pixel at a known Euclidean depth into world coordinates:
//   (depth / |K^-1 p|) * R K^-1 p + T,  p = [u, v, 1]^T.
inline WorldPoint pixel_to_world(const CameraModel& camera, const PixelCoord& pixel, double depth_m) {
    camera.validate();
    if (!(depth_m > 0.0)) throw Error("depth must be positive");
    if (!std::isfinite(pixel.u) || !std::isfinite(pixel.v)) throw Error("pixel coordinates not finite");

    const Eigen::Vector3d p_pixel(pixel.u, pixel.v, 1.0);
    const Eigen::Vector3d p_norm = camera.intrinsics.inverse() * p_pixel;
    const double n = p_norm.norm();
    if (n < 1e-12) throw Error("degenerate normalized ray");
    const Eigen::Vector3d p_world = (depth_m / n) * (camera.rotation * p_norm) + camera.translation;
    return {p_world.x(), p_world.y(), p_world.z()};
}

// Detected box plus its depth patch give the landmark's world position: the
// box center back-projected at the outlier-filtered mean depth.
inline WorldPoint localize_landmark(const CameraModel& camera, const BoundingBox& box,
                                    const DepthPatch& patch, double sigma_mult = 2.0) {
    box.validate();
    return pixel_to_world(camera, box.center(), aggregate_depth(patch, sigma_mult));
}

inline UnitVector3 heading_between(const WorldPoint& from, const WorldPoint& to) {
    const double d = distance(from, to);
    if (d <= kDegenerateDistanceM) throw Error("degenerate heading");
    return {(to.x - from.x) / d, (to.y - from.y) / d, (to.z - from.z) / d};
}

// Signed angle between the xy-projections of v1 and v2, in (-180, 180].
// Only x and y enter; inputs need not be unit length.
inline double horizontal_angle(const UnitVector3& v1, const UnitVector3& v2) {
    if (v1.norm_xy() <= 1e-9 || v2.norm_xy() <= 1e-9) throw Error("no horizontal heading");
    const double cross_z = v1.x * v2.y - v1.y * v2.x;
    const double dot_xy = v1.x * v2.x + v1.y * v2.y;
    double deg = rad_to_deg(std::atan2(cross_z, dot_xy));
    if (deg <= -180.0) deg += 360.0;
    return deg;
}

// Motion from `from` to `to` given an explicit prior orientation. This is the
// anchor case of path walks; relative_motion composes it with heading_between.
inline RelativeMotion motion_from(const UnitVector3& orientation, const WorldPoint& from, const WorldPoint& to) {
    RelativeMotion m;
    m.theta_deg = horizontal_angle(orientation, heading_between(from, to));
    const double dz = to.z - from.z;
    m.elevation_m = std::abs(dz);
    if (m.elevation_m < kLevelThresholdM) {
        m.elevation_sign = ElevationSign::level;
    } else {
        m.elevation_sign = dz > 0.0 ? ElevationSign::ascend : ElevationSign::descend;
    }
    m.distance_m = distance_xy(from, to);
    return m;
}

inline RelativeMotion relative_motion(const WorldPoint& prev, const WorldPoint& cur, const WorldPoint& next) {
    return motion_from(heading_between(prev, cur), cur, next);
}

}  // namespace lookaside::geom
