#pragma once

#include "atomlight/errors.hpp"
#include "atomlight/linalg.hpp"

#include <cmath>
#include <optional>
#include <vector>

namespace atomlight {

struct PhysicalParams {
    double gamma = 1.0;   // excited-state linewidth
    double delta = 1.0;   // detuning
    double k_L = 1.0;
    double omega_L = 1.0;
};

struct InteractionCoefficients {
    double beta = 1.0;
    double c0 = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
};

/// beta = pi*gamma / (2*delta*k_L^3)
inline double coupling_beta(const PhysicalParams& p) {
    if (!(p.gamma > 0.0)) throw InvalidArgument("gamma must be positive");
    if (!(p.k_L > 0.0)) throw InvalidArgument("k_L must be positive");
    if (p.delta == 0.0) throw ZeroDetuning("delta must be nonzero");
    return pi * p.gamma / (2.0 * p.delta * p.k_L * p.k_L * p.k_L);
}

/// Mean spin with the scalar J^2 that enters the c0 term. For a spin-1/2
/// atom J^2 = 3/4 regardless of the mean vector; by default |J|^2 is used.
struct SpinState {
    Vec3 J = Vec3::Zero();
    std::optional<double> spin_squared;

    double J2() const { return spin_squared ? *spin_squared : J.squaredNorm(); }
};

struct MediumScalars {
    double a0 = 1.0;
    double a1 = 0.0;
};

inline MediumScalars medium_scalars(const InteractionCoefficients& c, double rho, const SpinState& s) {
    return {1.0 - c.beta * rho * c.c0 * s.J2(), c.beta * rho * c.c1 * s.J.norm()};
}

/// V = beta[(c0 - c2) J^2 I + c2 J_a J_b + i c1 eps_abc J_c]
inline CMat3 build_interaction_matrix(const InteractionCoefficients& c, const SpinState& s) {
    const Vec3& J = s.J;
    CMat3 V = CMat3::Zero();
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            cplx v = c.c2 * J(a) * J(b);
            if (a == b) v += (c.c0 - c.c2) * s.J2();
            for (int k = 0; k < 3; ++k) v += I_unit * c.c1 * levi_civita(a, b, k) * J(k);
            V(a, b) = c.beta * v;
        }
    }
    return V;
}

inline CMat3 build_interaction_matrix(const InteractionCoefficients& c, const Vec3& J) {
    return build_interaction_matrix(c, SpinState{J, std::nullopt});
}

struct Decomposition {
    double c0 = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
    double residual = 0.0;
};

/// Least-squares fit of V/beta onto {J^2 I, J J^T - J^2 I, -i[J]x}.
inline Decomposition decompose_interaction(const CMat3& V, const SpinState& s, double beta) {
    if (beta == 0.0) throw InvalidArgument("beta must be nonzero");
    const Vec3& J = s.J;
    CMat3 B0 = s.J2() * CMat3::Identity();
    CMat3 B2 = (J * J.transpose()).cast<cplx>() - B0;
    CMat3 B1 = -I_unit * cross_matrix(J).cast<cplx>();

    Eigen::Matrix<double, 18, 3> A;
    Eigen::Matrix<double, 18, 1> y;
    const CMat3* basis[3] = {&B0, &B1, &B2};
    for (int e = 0; e < 9; ++e) {
        int a = e / 3, b = e % 3;
        for (int k = 0; k < 3; ++k) {
            A(2 * e, k) = (*basis[k])(a, b).real();
            A(2 * e + 1, k) = (*basis[k])(a, b).imag();
        }
        y(2 * e) = V(a, b).real() / beta;
        y(2 * e + 1) = V(a, b).imag() / beta;
    }
    Eigen::Vector3d x = A.completeOrthogonalDecomposition().solve(y);
    Decomposition d{x(0), x(1), x(2), 0.0};
    CMat3 fit = beta * (x(0) * B0 + x(1) * B1 + x(2) * B2);
    d.residual = (fit - V).norm();
    if (d.residual > 1e-9 * V.norm())
        throw NonDecomposable("residual " + std::to_string(d.residual) + " exceeds 1e-9*|V|");
    return d;
}

inline Decomposition decompose_interaction(const CMat3& V, const Vec3& J, double beta) {
    return decompose_interaction(V, SpinState{J, std::nullopt}, beta);
}

struct ExcitedLevel {
    double detuning = 0.0;
    CVec3 dipole = CVec3::Zero();  // <e|P|g>
};

/// V_ab = sum_j <g|P_a|e_j><e_j|P_b|g> / Delta_j  (eps0 = 1)
inline CMat3 adiabatic_eliminate(const std::vector<ExcitedLevel>& levels) {
    CMat3 V = CMat3::Zero();
    for (const auto& lv : levels) {
        if (lv.detuning == 0.0) throw ZeroDetuning("excited level with zero detuning");
        V += (lv.dipole.conjugate() * lv.dipole.transpose()) / lv.detuning;
    }
    return V;
}

/// Inverse permittivity (1 - V/3)/(1 + 2V/3).
inline double lorentz_lorenz(double V) {
    return (1.0 - V / 3.0) / (1.0 + 2.0 * V / 3.0);
}

/// Partial sum 1 - V - V sum_{n=1}^{N} (-2V/3)^n.
inline double lorentz_lorenz_series(double V, int N) {
    double q = -2.0 * V / 3.0;
    if (std::abs(q) >= 1.0) throw SeriesDiverges("|2V/3| >= 1");
    double term = 1.0, acc = 0.0;
    for (int n = 1; n <= N; ++n) {
        term *= q;
        acc += term;
    }
    return 1.0 - V - V * acc;
}

inline double mean_index_of_refraction(double V) {
    if (!(V < 1.0)) throw UnphysicalMedium("V >= 1");
    return 1.0 / std::sqrt(1.0 - V);
}

} // namespace atomlight
