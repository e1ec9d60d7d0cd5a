#pragma once

#include <vector>

#include <Eigen/Core>

#include "ptfix/geometry.hpp"

namespace ptfix {

/// One board-corner correspondence between a source view and a destination
/// view: `a` is the corner in the destination image, `b` in the source image.
struct Correspondence {
    int id = -1;
    PixelPoint a;
    PixelPoint b;
};

/// 3x3 projective map from source-image pixels to destination-image pixels,
/// normalized to unit Frobenius norm with a positive bottom-right entry
/// whenever that entry is significant.
struct Homography {
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity();

    static Homography from_matrix(const Eigen::Matrix3d& m);
};

/// Least-squares homography via the normalized direct linear transform.
/// Requires at least 4 correspondences in general position.
Homography estimate(const std::vector<Correspondence>& corrs);

/// Transfers a pixel through the homography and dehomogenizes.
PixelPoint apply(const Homography& h, const PixelPoint& p);

/// Transfers the image center of the source view into destination-image
/// coordinates (the transferred center c_k).
PixelPoint map_center(const std::vector<Correspondence>& corrs, const CameraIntrinsics& intr);

} // namespace ptfix
