#include "ptfix/homography.hpp"

#include <cmath>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "ptfix/errors.hpp"

namespace ptfix {

namespace {

struct Normalization {
    Eigen::Matrix3d T; // similarity mapping raw pixels to conditioned coords
};

// Isotropic conditioning: centroid to origin, mean distance sqrt(2).
Normalization normalize_points(const std::vector<Eigen::Vector2d>& pts) {
    Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
    for (const auto& p : pts) centroid += p;
    centroid /= static_cast<double>(pts.size());

    double mean_dist = 0.0;
    for (const auto& p : pts) mean_dist += (p - centroid).norm();
    mean_dist /= static_cast<double>(pts.size());

    if (mean_dist < 1e-12)
        throw DegenerateConfiguration("estimate: coincident points");

    const double s = std::sqrt(2.0) / mean_dist;
    Normalization n;
    n.T << s, 0, -s * centroid.x(),
           0, s, -s * centroid.y(),
           0, 0, 1;
    return n;
}

} // namespace

Homography Homography::from_matrix(const Eigen::Matrix3d& m) {
    Eigen::Matrix3d h = m / m.norm();
    if (std::abs(h(2, 2)) > 1e-9 && h(2, 2) < 0.0) h = -h;
    return Homography{h};
}

Homography estimate(const std::vector<Correspondence>& corrs) {
    const size_t n = corrs.size();
    if (n < 4)
        throw InsufficientCorrespondences("estimate: need at least 4 correspondences, got " +
                                          std::to_string(n));

    std::vector<Eigen::Vector2d> src(n), dst(n);
    for (size_t i = 0; i < n; ++i) {
        src[i] = {corrs[i].b.u, corrs[i].b.v};
        dst[i] = {corrs[i].a.u, corrs[i].a.v};
    }
    const Normalization ns = normalize_points(src);
    const Normalization nd = normalize_points(dst);

    Eigen::MatrixXd A(2 * n, 9);
    for (size_t i = 0; i < n; ++i) {
        const Eigen::Vector3d b = ns.T * src[i].homogeneous();
        const Eigen::Vector3d a = nd.T * dst[i].homogeneous();
        A.row(2 * i)     << 0, 0, 0, -b.x(), -b.y(), -b.z(), a.y() * b.x(), a.y() * b.y(), a.y() * b.z();
        A.row(2 * i + 1) << b.x(), b.y(), b.z(), 0, 0, 0, -a.x() * b.x(), -a.x() * b.y(), -a.x() * b.z();
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
    const Eigen::VectorXd& sv = svd.singularValues();
    // Rank-deficient design matrix: the second-smallest singular value
    // collapses when the points are collinear or coincident.
    if (sv(0) <= 0.0 || sv(7) / sv(0) < 1e-8)
        throw DegenerateConfiguration("estimate: rank-deficient design matrix");

    const Eigen::VectorXd h = svd.matrixV().col(8);
    Eigen::Matrix3d Hn;
    Hn << h(0), h(1), h(2),
          h(3), h(4), h(5),
          h(6), h(7), h(8);

    const Eigen::Matrix3d H = nd.T.inverse() * Hn * ns.T;
    if (std::abs(H.determinant()) / std::pow(H.norm(), 3) < 1e-12)
        throw DegenerateConfiguration("estimate: singular homography");
    return Homography::from_matrix(H);
}

PixelPoint apply(const Homography& h, const PixelPoint& p) {
    const Eigen::Vector3d q = h.m * Eigen::Vector3d(p.u, p.v, 1.0);
    return HomogeneousPoint{q.x(), q.y(), q.z()}.dehomogenize();
}

PixelPoint map_center(const std::vector<Correspondence>& corrs, const CameraIntrinsics& intr) {
    return apply(estimate(corrs), intr.center());
}

} // namespace ptfix
