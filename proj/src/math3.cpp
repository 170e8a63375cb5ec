// Copyright streamsplat contributors
// SPDX-License-Identifier: Apache-2.0
#include "ssplat/math3.hpp"

#include <algorithm>
#include <cmath>

namespace ssplat {

Mat3 inverse(const Mat3& a) {
    const double det = a.determinant();
    Mat3 r;
    const auto& m = a.m;
    r.m[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det;
    r.m[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
    r.m[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
    r.m[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / det;
    r.m[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
    r.m[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
    r.m[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det;
    r.m[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
    r.m[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
    return r;
}

Mat3 rotation_x(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    Mat3 r = Mat3::identity();
    r.m[1][1] = c;
    r.m[1][2] = -s;
    r.m[2][1] = s;
    r.m[2][2] = c;
    return r;
}

Mat3 rotation_y(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    Mat3 r = Mat3::identity();
    r.m[0][0] = c;
    r.m[0][2] = s;
    r.m[2][0] = -s;
    r.m[2][2] = c;
    return r;
}

Mat3 rotation_z(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    Mat3 r = Mat3::identity();
    r.m[0][0] = c;
    r.m[0][1] = -s;
    r.m[1][0] = s;
    r.m[1][1] = c;
    return r;
}

Mat3 rotation_about_axis(const Vec3& axis, double angle) {
    const Vec3 a = axis.normalized();
    const double c = std::cos(angle), s = std::sin(angle), t = 1.0 - c;
    Mat3 r;
    r.m[0][0] = t * a.x * a.x + c;
    r.m[0][1] = t * a.x * a.y - s * a.z;
    r.m[0][2] = t * a.x * a.z + s * a.y;
    r.m[1][0] = t * a.x * a.y + s * a.z;
    r.m[1][1] = t * a.y * a.y + c;
    r.m[1][2] = t * a.y * a.z - s * a.x;
    r.m[2][0] = t * a.x * a.z - s * a.y;
    r.m[2][1] = t * a.y * a.z + s * a.x;
    r.m[2][2] = t * a.z * a.z + c;
    return r;
}

double orthonormality_error(const Mat3& r) {
    const Mat3 g = r.transposed() * r;
    double e = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const double target = (i == j) ? 1.0 : 0.0;
            e = std::max(e, std::fabs(g.m[i][j] - target));
        }
    return e;
}

Mat3 orthonormalized(const Mat3& r) {
    Mat3 x = r;
    for (int it = 0; it < 32; ++it) {
        const Mat3 xit = inverse(x).transposed();
        Mat3 next;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) next.m[i][j] = 0.5 * (x.m[i][j] + xit.m[i][j]);
        double delta = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) delta = std::max(delta, std::fabs(next.m[i][j] - x.m[i][j]));
        x = next;
        if (delta < 1e-15) break;
    }
    return x;
}

Quat operator*(const Quat& a, const Quat& b) {
    return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

Mat3 matrix_from_quat(const Quat& qin) {
    const Quat q = qin.normalized();
    Mat3 r;
    r.m[0][0] = 1.0 - 2.0 * (q.y * q.y + q.z * q.z);
    r.m[0][1] = 2.0 * (q.x * q.y - q.z * q.w);
    r.m[0][2] = 2.0 * (q.x * q.z + q.y * q.w);
    r.m[1][0] = 2.0 * (q.x * q.y + q.z * q.w);
    r.m[1][1] = 1.0 - 2.0 * (q.x * q.x + q.z * q.z);
    r.m[1][2] = 2.0 * (q.y * q.z - q.x * q.w);
    r.m[2][0] = 2.0 * (q.x * q.z - q.y * q.w);
    r.m[2][1] = 2.0 * (q.y * q.z + q.x * q.w);
    r.m[2][2] = 1.0 - 2.0 * (q.x * q.x + q.y * q.y);
    return r;
}

// Shepperd's method: pick the largest of the four candidate pivots.
Quat quat_from_matrix(const Mat3& r) {
    const auto& m = r.m;
    const double tr = r.trace();
    Quat q;
    if (tr > 0.0) {
        const double s = std::sqrt(tr + 1.0) * 2.0;
        q.w = 0.25 * s;
        q.x = (m[2][1] - m[1][2]) / s;
        q.y = (m[0][2] - m[2][0]) / s;
        q.z = (m[1][0] - m[0][1]) / s;
    } else if (m[0][0] > m[1][1] && m[0][0] > m[2][2]) {
        const double s = std::sqrt(1.0 + m[0][0] - m[1][1] - m[2][2]) * 2.0;
        q.w = (m[2][1] - m[1][2]) / s;
        q.x = 0.25 * s;
        q.y = (m[0][1] + m[1][0]) / s;
        q.z = (m[0][2] + m[2][0]) / s;
    } else if (m[1][1] > m[2][2]) {
        const double s = std::sqrt(1.0 + m[1][1] - m[0][0] - m[2][2]) * 2.0;
        q.w = (m[0][2] - m[2][0]) / s;
        q.x = (m[0][1] + m[1][0]) / s;
        q.y = 0.25 * s;
        q.z = (m[1][2] + m[2][1]) / s;
    } else {
        const double s = std::sqrt(1.0 + m[2][2] - m[0][0] - m[1][1]) * 2.0;
        q.w = (m[1][0] - m[0][1]) / s;
        q.x = (m[0][2] + m[2][0]) / s;
        q.y = (m[1][2] + m[2][1]) / s;
        q.z = 0.25 * s;
    }
    return q.normalized();
}

}  // namespace ssplat
