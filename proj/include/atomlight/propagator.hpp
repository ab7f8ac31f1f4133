#pragma once

#include "atomlight/errors.hpp"
#include "atomlight/linalg.hpp"
#include "atomlight/quadrature.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace atomlight {

/// Equal-position, delta-in-time propagator coefficients.
struct ShortPropagatorCoeffs {
    double rho_par = 0.0;
    double rho_perp = 0.0;
    double rho_gamma = 0.0;
    bool near_singular = false;  // a0 - a1 < 0.05 a0
};

namespace detail {

inline void check_short_domain(double a0, double a1) {
    if (!(a1 >= 0.0)) throw InvalidArgument("a1 must be >= 0");
    if (!(a0 - a1 > 0.0)) throw OutsideDomain("a0 - a1 <= 0");
}

inline bool near_singular(double a0, double a1) { return a0 - a1 < 0.05 * a0; }

// Binomial expansion of (a0 + a1 x)^(-5/2) integrated term by term over [-1,1].
inline ShortPropagatorCoeffs short_propagator_series(double a0, double a1, double k) {
    const double t = a1 / a0;
    double par = 0.0, perp = 0.0, gam = 0.0;
    double cn = 1.0;  // binom(-5/2, n) t^n
    for (int n = 0; n < 400; ++n) {
        if (n % 2 == 0) {
            double dpar = cn * 4.0 * (1.0 / (n + 1) - 1.0 / (n + 3));
            double dperp = cn * 2.0 * (1.0 / (n + 1) + 1.0 / (n + 3));
            par += dpar;
            perp += dperp;
            if (n > 0 && std::abs(dperp) < 1e-18 * std::abs(perp)) break;
        } else {
            gam += cn * 4.0 / (n + 2);
        }
        cn *= (-2.5 - n) / (n + 1.0) * t;
    }
    const double pre = k * k * k / (8.0 * pi) * std::pow(a0, -2.5);
    return {pre * par, pre * perp, pre * gam, near_singular(a0, a1)};
}

} // namespace detail

/// Closed forms, valid for a0 - a1 > 0. Small anisotropy a1/a0 < 0.15 uses the
/// convergent binomial series instead, where the closed forms cancel badly.
inline ShortPropagatorCoeffs short_propagator_closed(double a0, double a1, double k_L) {
    detail::check_short_domain(a0, a1);
    if (a1 == 0.0) {
        double r = k_L * k_L * k_L / (3.0 * pi) * std::pow(a0, -2.5);
        return {r, r, 0.0, false};
    }
    if (a1 < 0.15 * a0) return detail::short_propagator_series(a0, a1, k_L);

    const double k3 = k_L * k_L * k_L;
    const double am = a0 - a1, ap = a0 + a1;
    const double sm = std::sqrt(am), sp = std::sqrt(ap);
    const double a13 = a1 * a1 * a1;
    ShortPropagatorCoeffs r;
    r.rho_par = -k3 / (3.0 * pi * a13) * ((-4.0 * a0 + 2.0 * a1) / sm + (4.0 * a0 + 2.0 * a1) / sp);
    r.rho_perp = -k3 / (3.0 * pi * a13) *
                 ((2.0 * a0 * a0 - 3.0 * a0 * a1 + 0.5 * a1 * a1) / (am * sm) -
                  (2.0 * a0 * a0 + 3.0 * a0 * a1 + 0.5 * a1 * a1) / (ap * sp));
    r.rho_gamma = k3 / (6.0 * pi * a1 * a1) * ((2.0 * a0 - 3.0 * a1) / (am * sm) - (2.0 * a0 + 3.0 * a1) / (ap * sp));
    r.near_singular = detail::near_singular(a0, a1);
    return r;
}

/// Gauss-Legendre evaluation of the x-integrals over [-1,1]:
///   par   = k^3/(8pi) int 2(1-x^2) / (a0+a1 x)^(5/2)
///   perp  = k^3/(8pi) int (1+x^2)  / (a0+a1 x)^(5/2)
///   gamma = k^3/(8pi) int 2x       / (a0+a1 x)^(5/2)
inline ShortPropagatorCoeffs short_propagator_quadrature(double a0, double a1, double k_L, int n_points) {
    detail::check_short_domain(a0, a1);
    if (n_points < 64) throw InvalidArgument("n_points must be >= 64");
    const auto rule = gauss_legendre(n_points);
    CompensatedSum par, perp, gam;
    for (int i = 0; i < n_points; ++i) {
        const double x = rule.nodes[i];
        const double w = rule.weights[i] * std::pow(a0 + a1 * x, -2.5);
        par.add(w * 2.0 * (1.0 - x * x));
        perp.add(w * (1.0 + x * x));
        gam.add(w * 2.0 * x);
    }
    const double pre = k_L * k_L * k_L / (8.0 * pi);
    return {pre * par.value(), pre * perp.value(), pre * gam.value(), detail::near_singular(a0, a1)};
}

/// rho_perp I - i rho_gamma [j]x + (rho_par - rho_perp) j j^T
inline CMat3 coordinate_free_short_propagator(const ShortPropagatorCoeffs& c, const Vec3& j_hat) {
    CMat3 m = c.rho_perp * CMat3::Identity();
    m -= I_unit * c.rho_gamma * cross_matrix(j_hat).cast<cplx>();
    m += (c.rho_par - c.rho_perp) * (j_hat * j_hat.transpose()).cast<cplx>();
    return m;
}

/// Coefficient of the delta(n) contact term of the dipole propagator.
inline constexpr double dipole_self_term = 2.0 / 3.0;

/// Radiated field of an oscillating dipole at separation n (n != 0).
inline CMat3 dipole_propagator(const Vec3& n_vec, double k, double c = 1.0) {
    const double n = n_vec.norm();
    if (n == 0.0) throw ZeroSeparation("dipole propagator radiative part at n = 0");
    const Vec3 nh = n_vec / n;
    const double kn = k * n;
    const cplx phase = std::exp(I_unit * kn) / kn;
    const cplx a = 1.0 + 3.0 * I_unit / kn - 3.0 / (kn * kn);
    const cplx b = 1.0 + I_unit / kn - 1.0 / (kn * kn);
    const cplx pre = -(k * k * k) / (4.0 * pi * c * c) * phase;
    CMat3 nn = (nh * nh.transpose()).cast<cplx>();
    return pre * (a * nn - b * CMat3::Identity());
}

/// Vacuum (or scalar-medium) plane-wave mode sum for the retarded field propagator.
struct GreensSum {
    std::vector<Vec3> k_points;
    std::vector<double> weights;
    double omega_L = 1.0;
    double a0 = 1.0;  // scalar medium response; 1 for vacuum
    double c = 1.0;
};

/// Symmetric cubic k-grid, points at (i + 1/2) dk for i in [-n/2, n/2).
inline GreensSum make_greens_sum(int n_per_axis, double k_max, double omega_L, double a0 = 1.0) {
    if (n_per_axis < 2 || n_per_axis % 2 != 0) throw InvalidArgument("k-grid points per axis must be even and >= 2");
    GreensSum g;
    g.omega_L = omega_L;
    g.a0 = a0;
    const double dk = 2.0 * k_max / n_per_axis;
    const double w = 1.0 / (double(n_per_axis) * n_per_axis * n_per_axis);
    for (int i = 0; i < n_per_axis; ++i)
        for (int j = 0; j < n_per_axis; ++j)
            for (int l = 0; l < n_per_axis; ++l) {
                Vec3 kv((i - n_per_axis / 2 + 0.5) * dk, (j - n_per_axis / 2 + 0.5) * dk,
                        (l - n_per_axis / 2 + 0.5) * dk);
                g.k_points.push_back(kv);
                g.weights.push_back(w);
            }
    return g;
}

/// G(r,t|r',t') = Theta(t-t') (-i) sum_k w_k (I - k k^T/k^2) e^{ik.(r-r')} e^{-i W_k (t-t')},
/// W_k = (c^2 k^2 a0 - omega_L^2) / (2 omega_L).
inline CMat3 greens_function(const GreensSum& g, const Vec3& r, double t, const Vec3& rp, double tp) {
    CMat3 G = CMat3::Zero();
    const double tau = t - tp;
    if (tau < 0.0) return G;
    const Vec3 d = r - rp;
    for (std::size_t i = 0; i < g.k_points.size(); ++i) {
        const Vec3& kv = g.k_points[i];
        const double k2 = kv.squaredNorm();
        const double W = (g.c * g.c * k2 * g.a0 - g.omega_L * g.omega_L) / (2.0 * g.omega_L);
        const cplx f = -I_unit * g.weights[i] * std::exp(I_unit * (kv.dot(d) - W * tau));
        Mat3 P = Mat3::Identity() - kv * kv.transpose() / k2;
        G += f * P.cast<cplx>();
    }
    return G;
}

struct SpaceTimePair {
    Vec3 r;
    double t;
    Vec3 rp;
    double tp;
};

/// max over pairs of |G(r,t|r',t') - G(r',-t'|r,-t)|
inline double greens_reciprocity_residual(const GreensSum& g, const std::vector<SpaceTimePair>& pairs) {
    double res = 0.0;
    for (const auto& p : pairs) {
        CMat3 a = greens_function(g, p.r, p.t, p.rp, p.tp);
        CMat3 b = greens_function(g, p.rp, -p.tp, p.r, -p.t);
        res = std::max(res, (a - b).norm());
    }
    return res;
}

struct LightDecayMatrix {
    double Gamma_par = 0.0;
    double Gamma_perp1 = 0.0;
    double Gamma_perp2 = 0.0;
    double Gamma_Gamma = 0.0;
    CMat3 matrix = CMat3::Zero();
};

/// Decay coefficients for light, with J given in the frame whose x axis is the mean spin.
inline LightDecayMatrix light_decay_matrix(const ShortPropagatorCoeffs& r, double c0, double c1, const Vec3& J) {
    const double J2 = J.squaredNorm();
    const double J4 = J2 * J2;
    const double Jx = J(0), Jy = J(1), Jz = J(2);
    LightDecayMatrix m;
    m.Gamma_par = c0 * c0 * J4 * r.rho_par + c1 * c1 * r.rho_perp * (Jz * Jz + Jy * Jy);
    m.Gamma_perp1 = c0 * c0 * J4 * r.rho_perp + 2.0 * c0 * c1 * r.rho_gamma * J2 * Jx +
                    c1 * c1 * (r.rho_par * Jz * Jz + r.rho_perp * Jx * Jx);
    m.Gamma_perp2 = c0 * c0 * J4 * r.rho_perp + 2.0 * c0 * c1 * r.rho_gamma * J2 * Jx +
                    c1 * c1 * (r.rho_par * Jy * Jy + r.rho_perp * Jx * Jx);
    m.Gamma_Gamma = 2.0 * c1 * c0 * r.rho_perp * J2 * Jx - r.rho_par * (c1 * c1 / 2.0) * Jx +
                    r.rho_gamma * (c0 * c0 * J2 + c1 * c1 * Jx * Jx);
    m.matrix << m.Gamma_par, 0.0, 0.0,
                0.0, m.Gamma_perp1, I_unit * m.Gamma_Gamma,
                0.0, -I_unit * m.Gamma_Gamma, m.Gamma_perp2;
    return m;
}

/// Spin decay for x-polarized light in an isotropic medium: (2 G_D, G_D, G_D),
/// G_D = beta^2 c1^2 rho <D-_x D+_x>. Uses rho_perp as the isotropic value.
inline std::array<double, 3> spin_decay_rates(const ShortPropagatorCoeffs& r, double c1, double beta, double D_intensity) {
    const double gd = beta * beta * c1 * c1 * r.rho_perp * D_intensity;
    return {2.0 * gd, gd, gd};
}

} // namespace atomlight
