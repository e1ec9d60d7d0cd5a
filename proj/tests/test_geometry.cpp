#include <cmath>
#include <random>

#include <doctest.h>

#include "ptfix/geometry.hpp"

using namespace ptfix;

namespace {
CameraIntrinsics intr_1000() { return {1000.0, 1000.0, 512.0, 384.0, 1024, 768}; }
CameraIntrinsics intr_fov40() { return {1406.9, 1406.9, 512.0, 384.0, 1024, 768}; }
} // namespace

TEST_CASE("back_project: principal point maps to the optical axis") {
    const Ray3 r = back_project(intr_1000(), {512.0, 384.0});
    CHECK(r.dx == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r.dy == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r.dz == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("back_project: 45 degrees by construction") {
    const Ray3 r = back_project(intr_1000(), {1512.0, 384.0});
    CHECK(r.dx == doctest::Approx(std::sqrt(0.5)).epsilon(1e-9));
    CHECK(r.dy == doctest::Approx(0.0));
    CHECK(r.dz == doctest::Approx(std::sqrt(0.5)).epsilon(1e-9));
}

TEST_CASE("back_project: closed-form arctangent check") {
    const CameraIntrinsics intr = intr_fov40();
    const Ray3 r = back_project(intr, {612.0, 384.0});
    const double off_axis = rad2deg(std::acos(r.dz));
    CHECK(off_axis == doctest::Approx(rad2deg(std::atan(100.0 / 1406.9))).epsilon(1e-9));
    CHECK(off_axis == doctest::Approx(4.067).epsilon(1e-3));
}

TEST_CASE("back_project then pinhole projection round-trips") {
    const CameraIntrinsics intr = intr_fov40();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> du(0.0, 1023.0), dv(0.0, 767.0);
    for (int i = 0; i < 200; ++i) {
        const PixelPoint p{du(rng), dv(rng)};
        const PixelPoint q = project(intr, back_project(intr, p));
        CHECK(std::abs(q.u - p.u) < 1e-9);
        CHECK(std::abs(q.v - p.v) < 1e-9);
    }
}

TEST_CASE("angular_error: center is zero, off-center matches arctangent") {
    const CameraIntrinsics intr = intr_fov40();
    CHECK(angular_error(intr, intr.center()) == doctest::Approx(0.0));
    CHECK(angular_error(intr, {612.0, 384.0}) ==
          doctest::Approx(rad2deg(std::atan(100.0 / 1406.9))).epsilon(1e-9));
}

TEST_CASE("angular_error: symmetry when fx == fy") {
    const CameraIntrinsics intr = intr_fov40();
    const double d = 137.25;
    CHECK(angular_error(intr, {512.0 + d, 384.0}) ==
          doctest::Approx(angular_error(intr, {512.0, 384.0 + d})).epsilon(1e-12));
    // swapping the offsets across axes keeps the error
    CHECK(angular_error(intr, {512.0 + 40.0, 384.0 + 90.0}) ==
          doctest::Approx(angular_error(intr, {512.0 + 90.0, 384.0 + 40.0})).epsilon(1e-12));
}

TEST_CASE("angular_error: invariant under uniform scaling of the camera") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> scale(0.1, 10.0);
    const CameraIntrinsics intr = intr_fov40();
    const PixelPoint p{700.0, 200.0};
    const double base = angular_error(intr, p);
    for (int i = 0; i < 50; ++i) {
        const double s = scale(rng);
        const CameraIntrinsics si{intr.fx * s, intr.fy * s, intr.cx * s, intr.cy * s,
                                  static_cast<int>(intr.width * s) + 1,
                                  static_cast<int>(intr.height * s) + 1};
        CHECK(angular_error(si, {p.u * s, p.v * s}) == doctest::Approx(base).epsilon(1e-12));
    }
}

TEST_CASE("axis_errors: decomposition and signs") {
    const CameraIntrinsics intr = intr_fov40();
    auto [h0, v0] = axis_errors(intr, {512.0, 384.0});
    CHECK(h0 == doctest::Approx(0.0));
    CHECK(v0 == doctest::Approx(0.0));

    auto [h, v] = axis_errors(intr, {612.0, 384.0});
    CHECK(h == doctest::Approx(rad2deg(std::atan(100.0 / 1406.9))).epsilon(1e-9));
    CHECK(v == doctest::Approx(0.0));

    auto [hl, vu] = axis_errors(intr, {412.0, 284.0});
    CHECK(hl < 0.0); // left of center
    CHECK(vu < 0.0); // above center
}

TEST_CASE("dehomogenize: rejects points at infinity") {
    const HomogeneousPoint at_inf{1.0, 2.0, 0.0};
    CHECK_THROWS_AS(at_inf.dehomogenize(), PointAtInfinity);
    const PixelPoint p = HomogeneousPoint{2.0, 4.0, 2.0}.dehomogenize();
    CHECK(p.u == doctest::Approx(1.0));
    CHECK(p.v == doctest::Approx(2.0));
}
