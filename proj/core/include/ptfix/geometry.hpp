#pragma once

#include <cmath>
#include <utility>

#include "ptfix/errors.hpp"

namespace ptfix {

inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

/// Pixel coordinates: u rightward from the left edge, v downward from the top.
/// Points may lie outside the image bounds (homography transfers often do).
struct PixelPoint {
    double u = 0.0;
    double v = 0.0;
};

struct HomogeneousPoint {
    double x = 0.0;
    double y = 0.0;
    double w = 1.0;

    PixelPoint dehomogenize() const {
        if (std::abs(w) <= 1e-12)
            throw PointAtInfinity("dehomogenize: |w| below threshold");
        return {x / w, y / w};
    }
};

struct CameraIntrinsics {
    double fx = 0.0, fy = 0.0;
    double cx = 0.0, cy = 0.0;
    int width = 0, height = 0;

    bool valid() const {
        return fx > 0.0 && fy > 0.0 && cx > 0.0 && cx < width && cy > 0.0 && cy < height;
    }
    PixelPoint center() const { return {cx, cy}; }
    bool in_bounds(const PixelPoint& p) const {
        return p.u >= 0.0 && p.u < width && p.v >= 0.0 && p.v < height;
    }
};

/// Unit view direction in the camera frame (x right, y down, z forward).
struct Ray3 {
    double dx = 0.0, dy = 0.0, dz = 1.0;
};

inline Ray3 back_project(const CameraIntrinsics& intr, const PixelPoint& p) {
    const double x = (p.u - intr.cx) / intr.fx;
    const double y = (p.v - intr.cy) / intr.fy;
    const double n = std::sqrt(x * x + y * y + 1.0);
    return {x / n, y / n, 1.0 / n};
}

/// Pinhole projection of a camera-frame direction; requires dz > 0.
inline PixelPoint project(const CameraIntrinsics& intr, const Ray3& r) {
    return {intr.cx + intr.fx * r.dx / r.dz, intr.cy + intr.fy * r.dy / r.dz};
}

/// Angle in degrees between the back-projected rays of `landing` and the
/// image center, in [0, 180).
inline double angular_error(const CameraIntrinsics& intr, const PixelPoint& landing) {
    const Ray3 a = back_project(intr, landing);
    const Ray3 b = back_project(intr, intr.center());
    double dot = a.dx * b.dx + a.dy * b.dy + a.dz * b.dz;
    if (dot > 1.0) dot = 1.0;
    if (dot < -1.0) dot = -1.0;
    return rad2deg(std::acos(dot));
}

/// Horizontal / vertical error components in degrees, signed right/down
/// positive: the landing point is projected onto each image axis through the
/// center and the angular error of the projection is measured.
inline std::pair<double, double> axis_errors(const CameraIntrinsics& intr,
                                             const PixelPoint& landing) {
    double h = angular_error(intr, {landing.u, intr.cy});
    double v = angular_error(intr, {intr.cx, landing.v});
    if (landing.u < intr.cx) h = -h;
    if (landing.v < intr.cy) v = -v;
    return {h, v};
}

} // namespace ptfix
