#include "astf/bvh/rotation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "astf/error.hpp"

namespace astf::bvh {

namespace {
constexpr double kDeg = std::numbers::pi / 180.0;

int idx(Axis a) { return static_cast<int>(a); }

// +1 for the cyclic orders XYZ, YZX, ZXY; -1 otherwise.
double parity(const RotationOrder& o) {
    return ((idx(o[1]) - idx(o[0]) + 3) % 3 == 1) ? 1.0 : -1.0;
}
}  // namespace

bool is_valid_order(const RotationOrder& order) {
    return order[0] != order[1] && order[1] != order[2] && order[0] != order[2];
}

Eigen::Matrix3d axis_rotation(Axis axis, double radians) {
    double c = std::cos(radians);
    double s = std::sin(radians);
    Eigen::Matrix3d r;
    switch (axis) {
        case Axis::X: r << 1, 0, 0, 0, c, -s, 0, s, c; break;
        case Axis::Y: r << c, 0, s, 0, 1, 0, -s, 0, c; break;
        case Axis::Z: r << c, -s, 0, s, c, 0, 0, 0, 1; break;
    }
    return r;
}

Eigen::Matrix3d euler_to_rotmat(const Eigen::Vector3d& degrees, const RotationOrder& order) {
    if (!is_valid_order(order)) throw ContractError("rotation order must permute X, Y, Z");
    return axis_rotation(order[0], degrees[0] * kDeg) * axis_rotation(order[1], degrees[1] * kDeg) *
           axis_rotation(order[2], degrees[2] * kDeg);
}

Eigen::Vector3d rotmat_to_euler(const Eigen::Matrix3d& r, const RotationOrder& order) {
    if (!is_valid_order(order)) throw ContractError("rotation order must permute X, Y, Z");
    int i = idx(order[0]);
    int j = idx(order[1]);
    int k = idx(order[2]);
    double s = parity(order);
    double sb = std::clamp(s * r(i, k), -1.0, 1.0);
    double a, b, c;
    b = std::asin(sb);
    if (std::abs(sb) < 1.0 - 1e-12) {
        a = std::atan2(-s * r(j, k), r(k, k));
        c = std::atan2(-s * r(i, j), r(i, i));
    } else {
        // gimbal lock: only a +/- c is determined
        c = 0.0;
        a = std::atan2(s * r(k, j), r(j, j));
    }
    return Eigen::Vector3d(a, b, c) / kDeg;
}

std::array<double, 6> rotation_to_6d(const Eigen::Matrix3d& r) {
    return {r(0, 0), r(1, 0), r(2, 0), r(0, 1), r(1, 1), r(2, 1)};
}

Eigen::Matrix3d rotation_from_6d(const std::array<double, 6>& v) {
    Eigen::Vector3d a(v[0], v[1], v[2]);
    Eigen::Vector3d b(v[3], v[4], v[5]);
    double na = a.norm();
    if (na < 1e-12) return Eigen::Matrix3d::Identity();
    Eigen::Vector3d e1 = a / na;
    Eigen::Vector3d u = b - e1.dot(b) * e1;
    double nu = u.norm();
    if (nu < 1e-12) {
        // any unit vector orthogonal to e1
        Eigen::Vector3d helper = std::abs(e1.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
        u = helper - e1.dot(helper) * e1;
        nu = u.norm();
    }
    Eigen::Vector3d e2 = u / nu;
    Eigen::Matrix3d r;
    r.col(0) = e1;
    r.col(1) = e2;
    r.col(2) = e1.cross(e2);
    return r;
}

}  // namespace astf::bvh
