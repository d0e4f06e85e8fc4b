#pragma once

#include <array>

#include <Eigen/Dense>

namespace astf::bvh {

enum class Axis { X = 0, Y = 1, Z = 2 };

// Order in which a joint's three rotation channels appear in the file. The
// rotation is the intrinsic product R = R_first * R_second * R_third.
using RotationOrder = std::array<Axis, 3>;

inline constexpr RotationOrder kOrderZXY{Axis::Z, Axis::X, Axis::Y};
inline constexpr RotationOrder kOrderXYZ{Axis::X, Axis::Y, Axis::Z};

bool is_valid_order(const RotationOrder& order);

Eigen::Matrix3d axis_rotation(Axis axis, double radians);

// Angles are in degrees, listed in channel order.
Eigen::Matrix3d euler_to_rotmat(const Eigen::Vector3d& degrees, const RotationOrder& order);
// Inverse of euler_to_rotmat; returns degrees in channel order. At gimbal lock
// the third angle is set to zero.
Eigen::Vector3d rotmat_to_euler(const Eigen::Matrix3d& r, const RotationOrder& order);

// Continuous 6-value encoding: the first two columns of R, column by column.
std::array<double, 6> rotation_to_6d(const Eigen::Matrix3d& r);
// Gram-Schmidt on the two stored columns; the third is their cross product.
Eigen::Matrix3d rotation_from_6d(const std::array<double, 6>& v);

}  // namespace astf::bvh
