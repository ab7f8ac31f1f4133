#pragma once

#include <Eigen/Dense>
#include <complex>
#include <numbers>

namespace atomlight {

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;
using Mat3 = Eigen::Matrix3d;
using CMat3 = Eigen::Matrix3cd;
using CMat = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I_unit{0.0, 1.0};

inline double levi_civita(int a, int b, int c) {
    if (a == b || b == c || a == c) return 0.0;
    // even permutations of (0,1,2)
    if ((a == 0 && b == 1) || (a == 1 && b == 2) || (a == 2 && b == 0)) return 1.0;
    return -1.0;
}

/// [v]x with ([v]x)_{ab} = -eps_{abc} v_c, so ([v]x) w = v x w.
template <class Derived>
Eigen::Matrix<typename Derived::Scalar, 3, 3> cross_matrix(const Eigen::MatrixBase<Derived>& v) {
    using S = typename Derived::Scalar;
    Eigen::Matrix<S, 3, 3> m;
    m << S(0), -v(2), v(1),
         v(2), S(0), -v(0),
         -v(1), v(0), S(0);
    return m;
}

template <class Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
    return m.size() == 0 ? 0.0 : double(m.cwiseAbs().maxCoeff());
}

} // namespace atomlight
