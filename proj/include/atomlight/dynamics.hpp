#pragma once

#include "atomlight/errors.hpp"
#include "atomlight/linalg.hpp"
#include "atomlight/modes.hpp"
#include "atomlight/spinfield.hpp"

#include <array>
#include <cmath>
#include <optional>
#include <vector>

namespace atomlight {

// ---------------------------------------------------------------------------
// Extreme-paraxial maps
// ---------------------------------------------------------------------------

template <class T>
struct StokesTriple {
    T s1, s2, s3;
};

/// s1' = s1 - phi s2 - phi^2/2 s1, s2' = s2 + phi s1 - phi^2/2 s2, s3' = s3.
/// T is a scalar expectation value or a QuadraticOperator.
template <class T>
StokesTriple<T> paraxial_stokes_map(const T& s1, const T& s2, const T& s3, double phi) {
    const double h = 0.5 * phi * phi;
    return {s1 - phi * s2 - h * s1, s2 + phi * s1 - h * s2, s3};
}

/// phi = k beta c1 int rho J_z dz
inline double paraxial_phase(const Coupling& c, double column_rho_Jz) { return c.k * c.beta * c.c1 * column_rho_Jz; }

/// Omega = beta c1 k sum_k s3 e_z
inline Vec3 rotation_vector(const Coupling& c, double s3_sum) { return c.beta * c.c1 * c.k * s3_sum * Vec3::UnitZ(); }

/// Second-order rotation about Omega: J + Omega x J + (1/2) Omega x (Omega x J).
inline Vec3 paraxial_spin_map(const Vec3& J, const Vec3& Omega) {
    const Vec3 first = Omega.cross(J);
    return J + first + 0.5 * Omega.cross(first);
}

// ---------------------------------------------------------------------------
// Collective atomic modes
// ---------------------------------------------------------------------------

/// X_A^m = sum_p x_weight[m][p] J_y(p), P_A^m = sum_p p_weight[m][p] J_z(p).
struct CollectiveModes {
    std::vector<RVec> x_weight;
    std::vector<RVec> p_weight;
    std::vector<double> rho;
    std::vector<double> cell;  // quadrature weight per grid point
    double Jx = 1.0;

    int n_modes() const { return int(x_weight.size()); }

    /// [X_A^m, P_A^m'] / i from [J_y(r), J_z(r')] = i J_x delta(r - r') / rho.
    RMat commutator() const {
        const int M = n_modes();
        RMat C = RMat::Zero(M, M);
        for (std::size_t p = 0; p < rho.size(); ++p) {
            if (rho[p] <= 0.0) continue;
            const double f = Jx / (rho[p] * cell[p]);
            for (int m = 0; m < M; ++m)
                for (int mp = 0; mp < M; ++mp) C(m, mp) += x_weight[m](p) * p_weight[mp](p) * f;
        }
        return C;
    }

    std::pair<RVec, RVec> evaluate(const std::vector<double>& Jy, const std::vector<double>& Jz) const {
        const int M = n_modes();
        RVec X(M), P(M);
        const RVec jy = Eigen::Map<const RVec>(Jy.data(), Jy.size());
        const RVec jz = Eigen::Map<const RVec>(Jz.data(), Jz.size());
        for (int m = 0; m < M; ++m) {
            X(m) = x_weight[m].dot(jy);
            P(m) = p_weight[m].dot(jz);
        }
        return {X, P};
    }
};

/// Weights sqrt(rho/(J_x L)) Re(U_m e^{-ikz}) dV; |U_o| must be uniform (1%) over the atomic support.
template <class ClassicalMode>
CollectiveModes collective_modes(const OverlapField& ov, const SpinField& sf, const ClassicalMode& U_o, double Jx,
                                 double L) {
    check_same_grid(ov.grid(), sf.grid);
    if (!(Jx > 0.0) || !(L > 0.0)) throw InvalidArgument("J_x and L must be positive");
    double umin = INFINITY, umax = 0.0;
    for (std::size_t p = 0; p < sf.size(); ++p) {
        if (sf.rho[p] <= 0.0) continue;
        const double u = std::abs(U_o(sf.grid.point(p)));
        umin = std::min(umin, u);
        umax = std::max(umax, u);
    }
    if (umax > 0.0 && (umax - umin) > 0.01 * umax)
        throw NonUniformClassicalMode("|U_o| varies by more than 1% over the atomic support");

    CollectiveModes cm;
    const int M = ov.n_modes();
    const std::size_t P = ov.n_points();
    cm.Jx = Jx;
    cm.rho = sf.rho;
    cm.cell.resize(P);
    cm.x_weight.assign(M, RVec::Zero(P));
    cm.p_weight.assign(M, RVec::Zero(P));
    const double k = ov.wavenumber();
    for (std::size_t p = 0; p < P; ++p) {
        cm.cell[p] = ov.weight(p);
        if (sf.rho[p] <= 0.0) continue;
        const double z = ov.grid().point(p)(2);
        const double norm = std::sqrt(sf.rho[p] / (Jx * L)) * ov.weight(p);
        for (int m = 0; m < M; ++m) {
            const double u = (ov.amplitude(m, p) * std::exp(-I_unit * k * z)).real();
            cm.x_weight[m](p) = norm * u;
            cm.p_weight[m](p) = norm * u;
        }
    }
    return cm;
}

/// kappa = k beta c1 U_o sqrt(N rho J_x L / 2)
inline double kappa_coupling(double k, double beta, double c1, double U_o, double N, double rho, double Jx, double L) {
    if (N < 0.0 || rho < 0.0 || Jx < 0.0 || L < 0.0) throw InvalidArgument("kappa inputs must be non-negative");
    return k * beta * c1 * U_o * std::sqrt(N * rho * Jx * L / 2.0);
}

// ---------------------------------------------------------------------------
// Gaussian states and the QND map
// ---------------------------------------------------------------------------

/// Only one layout exists: (X_P^0..X_P^{M-1}, P_P^..., X_A^..., P_A^...).
enum class QuadratureOrdering { LightThenAtoms };

struct GaussianState {
    int n_modes = 1;
    RVec mean;
    RMat cov;
    QuadratureOrdering ordering = QuadratureOrdering::LightThenAtoms;

    int XP(int m) const { return m; }
    int PP(int m) const { return n_modes + m; }
    int XA(int m) const { return 2 * n_modes + m; }
    int PA(int m) const { return 3 * n_modes + m; }

    static GaussianState vacuum(int M) {
        GaussianState s;
        s.n_modes = M;
        s.mean = RVec::Zero(4 * M);
        s.cov = 0.5 * RMat::Identity(4 * M, 4 * M);
        return s;
    }
};

/// Omega with [X_P^m, P_P^m] = [X_A^m, P_A^m] = i.
inline RMat symplectic_form(int M) {
    RMat O = RMat::Zero(4 * M, 4 * M);
    for (int m = 0; m < M; ++m) {
        O(m, M + m) = 1.0;
        O(M + m, m) = -1.0;
        O(2 * M + m, 3 * M + m) = 1.0;
        O(3 * M + m, 2 * M + m) = -1.0;
    }
    return O;
}

/// Smallest eigenvalue of cov + (i/2) Omega; non-negative for physical states.
inline double uncertainty_min_eigenvalue(const GaussianState& s) {
    CMat H = s.cov.cast<cplx>() + 0.5 * I_unit * symplectic_form(s.n_modes).cast<cplx>();
    Eigen::SelfAdjointEigenSolver<CMat> es(H);
    return es.eigenvalues().minCoeff();
}

struct CollectiveMap {
    std::vector<double> kappa;  // one per light/atom mode pair m <-> m
    QuadratureOrdering ordering = QuadratureOrdering::LightThenAtoms;

    static CollectiveMap uniform(double k, int M) { return {std::vector<double>(M, k)}; }
    int n_modes() const { return int(kappa.size()); }

    /// X_P' = X_P + kappa P_A, X_A' = X_A + kappa P_P.
    RMat matrix() const {
        const int M = n_modes();
        RMat S = RMat::Identity(4 * M, 4 * M);
        for (int m = 0; m < M; ++m) {
            S(m, 3 * M + m) = kappa[m];
            S(2 * M + m, M + m) = kappa[m];
        }
        return S;
    }
};

inline double symplectic_residual(const RMat& S) {
    const int M = int(S.rows()) / 4;
    const RMat O = symplectic_form(M);
    return max_abs(RMat(S * O * S.transpose() - O));
}

inline GaussianState apply_collective_map(const GaussianState& s, const CollectiveMap& map) {
    if (s.ordering != map.ordering || s.n_modes != map.n_modes())
        throw OrderingMismatch("state layout does not match the map pairing");
    const RMat S = map.matrix();
    GaussianState out = s;
    out.mean = S * s.mean;
    out.cov = S * s.cov * S.transpose();
    return out;
}

enum class FeedbackTarget { AtomP, AtomX };

struct MemoryResult {
    GaussianState after_map;
    RMat gain;               // atomic displacement per unit homodyne outcome (2M x M)
    RMat conditional_cov;    // atomic (X_A, P_A) covariance given the X_P' record
    RMat stored_cov;         // atomic covariance after feedback, averaged over records
    RVec stored_mean;        // atomic mean after feedback, averaged over records
    RMat regression;         // Sigma_Ax Sigma_xx^{-1}

    /// Atomic mean given homodyne record x (already displaced by the feedback).
    RVec conditional_mean(const RVec& x) const {
        const int M = after_map.n_modes;
        const RVec muA = after_map.mean.segment(2 * M, 2 * M);
        const RVec mux = after_map.mean.segment(0, M);
        return muA + regression * (x - mux) + gain * x;
    }
};

/// Apply the map, record X_P' by homodyne detection and feed g * record back onto
/// the chosen atomic quadrature of the same mode.
inline MemoryResult memory_protocol(const GaussianState& s, const CollectiveMap& map, double g,
                                    FeedbackTarget target = FeedbackTarget::AtomP) {
    MemoryResult r;
    r.after_map = apply_collective_map(s, map);
    const int M = s.n_modes;
    const RMat& C = r.after_map.cov;
    const RMat Sxx = C.block(0, 0, M, M);
    const RMat SAx = C.block(2 * M, 0, 2 * M, M);
    const RMat SAA = C.block(2 * M, 2 * M, 2 * M, 2 * M);
    Eigen::LDLT<RMat> ldlt(Sxx);
    r.regression = ldlt.solve(SAx.transpose()).transpose();
    r.conditional_cov = SAA - r.regression * SAx.transpose();

    r.gain = RMat::Zero(2 * M, M);
    for (int m = 0; m < M; ++m) r.gain(target == FeedbackTarget::AtomP ? M + m : m, m) = g;
    const RVec muA = r.after_map.mean.segment(2 * M, 2 * M);
    const RVec mux = r.after_map.mean.segment(0, M);
    r.stored_mean = muA + r.gain * mux;
    r.stored_cov = SAA + r.gain * SAx.transpose() + SAx * r.gain.transpose() + r.gain * Sxx * r.gain.transpose();
    return r;
}

// ---------------------------------------------------------------------------
// Multimode weak-coupling maps
// ---------------------------------------------------------------------------

/// Light: X^m += dX(m), P^m += dP(m). Spin at point p:
/// J += sum_n (spin_P[p][n] P^n + spin_X[p][n] X^n).
struct WeakMapResult {
    RVec dX;
    RVec dP;
    std::vector<std::vector<Vec3>> spin_P;
    std::vector<std::vector<Vec3>> spin_X;
};

inline WeakMapResult multimode_weak_maps(const OverlapField& ov, const SpinField& sf, const Coupling& c, double N,
                                         int o = 0) {
    check_same_grid(ov.grid(), sf.grid);
    const int M = ov.n_modes();
    if (o < 0 || o >= M) throw InvalidArgument("classical mode index outside basis");
    const double pre = c.k * c.beta * c.c1 * std::sqrt(N / 2.0);
    WeakMapResult r;
    r.dX = RVec::Zero(M);
    r.dP = RVec::Zero(M);
    r.spin_P.assign(ov.n_points(), std::vector<Vec3>(M, Vec3::Zero()));
    r.spin_X.assign(ov.n_points(), std::vector<Vec3>(M, Vec3::Zero()));
    for (std::size_t p = 0; p < ov.n_points(); ++p) {
        const double w = ov.weight(p) * sf.rho[p] * sf.Jperp_z(p);
        const Vec3 dir = sf.J[p].cross(sf.ez(p));
        for (int m = 0; m < M; ++m) {
            const cplx psi = ov.psi(m, o, p);
            r.dX(m) += pre * w * psi.real();
            r.dP(m) += pre * w * psi.imag();
            r.spin_P[p][m] = pre * psi.real() * dir;
            r.spin_X[p][m] = -pre * psi.imag() * dir;
        }
    }
    return r;
}

/// Per-mode local polarization frames e_mx(r), e_my(r); e_mz = e_mx x e_my.
struct ModeFrames {
    std::vector<std::vector<Vec3>> ex;  // [mode][point]
    std::vector<std::vector<Vec3>> ey;

    static ModeFrames global(int M, std::size_t P) {
        return {std::vector<std::vector<Vec3>>(M, std::vector<Vec3>(P, Vec3::UnitX())),
                std::vector<std::vector<Vec3>>(M, std::vector<Vec3>(P, Vec3::UnitY()))};
    }
};

inline void check_frames(const ModeFrames& f, int M, std::size_t P) {
    if (int(f.ex.size()) != M || int(f.ey.size()) != M) throw FrameNotOrthonormal("one frame per mode required");
    for (int m = 0; m < M; ++m) {
        if (f.ex[m].size() != P || f.ey[m].size() != P) throw FrameNotOrthonormal("one frame per grid point required");
        for (std::size_t p = 0; p < P; ++p) {
            const Vec3& a = f.ex[m][p];
            const Vec3& b = f.ey[m][p];
            if (std::abs(a.squaredNorm() - 1.0) > 1e-10 || std::abs(b.squaredNorm() - 1.0) > 1e-10 ||
                std::abs(a.dot(b)) > 1e-10)
                throw FrameNotOrthonormal("mode " + std::to_string(m) + " frame at point " + std::to_string(p));
        }
    }
}

/// Weak maps with mode-dependent polarization frames. Light weight
/// J_{e_oz}(e_ox.e_mx) - J_{e_ox}(e_ox.e_mz), spin direction J x (e_ox x e_ny),
/// with J_e = (0, J_y, J_z).e.
inline WeakMapResult beyond_paraxial_maps(const OverlapField& ov, const SpinField& sf, const ModeFrames& frames,
                                          const Coupling& c, double N, int o = 0) {
    check_same_grid(ov.grid(), sf.grid);
    const int M = ov.n_modes();
    if (o < 0 || o >= M) throw InvalidArgument("classical mode index outside basis");
    check_frames(frames, M, ov.n_points());
    const double pre = c.k * c.beta * c.c1 * std::sqrt(N / 2.0);
    WeakMapResult r;
    r.dX = RVec::Zero(M);
    r.dP = RVec::Zero(M);
    r.spin_P.assign(ov.n_points(), std::vector<Vec3>(M, Vec3::Zero()));
    r.spin_X.assign(ov.n_points(), std::vector<Vec3>(M, Vec3::Zero()));
    for (std::size_t p = 0; p < ov.n_points(); ++p) {
        const Vec3 jp(0.0, sf.J[p](1), sf.J[p](2));
        const Vec3& eox = frames.ex[o][p];
        const Vec3 eoz = eox.cross(frames.ey[o][p]);
        const double J_oz = jp.dot(eoz);
        const double J_ox = jp.dot(eox);
        for (int m = 0; m < M; ++m) {
            const Vec3& emx = frames.ex[m][p];
            const Vec3 emz = emx.cross(frames.ey[m][p]);
            const double wgt = J_oz * eox.dot(emx) - J_ox * eox.dot(emz);
            const double w = ov.weight(p) * sf.rho[p] * wgt;
            const cplx psi = ov.psi(m, o, p);
            r.dX(m) += pre * w * psi.real();
            r.dP(m) += pre * w * psi.imag();
            const Vec3 dir = sf.J[p].cross(eox.cross(frames.ey[m][p]));
            r.spin_P[p][m] = pre * psi.real() * dir;
            r.spin_X[p][m] = -pre * psi.imag() * dir;
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Spontaneous-emission corrections
// ---------------------------------------------------------------------------

/// Density and mean spin along one line of sight, with quadrature weights.
struct ColumnProfile {
    std::vector<double> weight;
    std::vector<double> rho;
    std::vector<Vec3> J;
    std::optional<double> spin_squared;

    double J2(std::size_t i) const { return spin_squared ? *spin_squared : J[i].squaredNorm(); }
};

inline ColumnProfile column_at(const SpinField& sf, int ix, int iy) {
    ColumnProfile col;
    col.spin_squared = sf.spin_squared;
    for (int iz = 0; iz < sf.grid.z.n; ++iz) {
        const std::size_t p = sf.grid.index(ix, iy, iz);
        col.weight.push_back(sf.grid.z.weight(iz));
        col.rho.push_back(sf.rho[p]);
        col.J.push_back(sf.J[p]);
    }
    return col;
}

/// Zeroth-order equal-point propagator value k^3/(16 pi^2).
inline double spontaneous_rho(double k) { return k * k * k / (16.0 * pi * pi); }

/// Damping of (s1, s2, s3) by spontaneous emission; s0 is unchanged.
template <class T>
StokesTriple<T> stokes_spontaneous_corrections(const T& s0, const T& s1, const T& s2, const T& s3,
                                               const ColumnProfile& col, const Coupling& c) {
    double Ia = 0.0, Ib = 0.0, I2 = 0.0, I3 = 0.0;
    const double c02 = c.c0 * c.c0, c12 = c.c1 * c.c1;
    for (std::size_t i = 0; i < col.rho.size(); ++i) {
        const double w = col.weight[i] * col.rho[i];
        const Vec3& J = col.J[i];
        const double J4 = col.J2(i) * col.J2(i);
        const double x2 = J(0) * J(0), y2 = J(1) * J(1), z2 = J(2) * J(2);
        Ia += w * c12 * (y2 - z2);
        Ib += w * (c02 * J4 + c12 * (4.0 * z2 + y2));
        I2 += w * (c02 * J4 + c12 * (3.0 * z2 + y2 + x2));
        I3 += w * (c02 * J4 + c12 * (z2 + y2 + x2));
    }
    const double pre = 0.5 * c.beta * c.beta * c.k * spontaneous_rho(c.k);
    return {s1 - (pre * Ia) * s0 - (pre * Ib) * s1, s2 - (pre * I2) * s2, s3 - (pre * I3) * s3};
}

/// Spin damping given the k-summed Stokes expectations (s0, s1, s2, s3) at r_perp.
inline Vec3 spin_spontaneous_corrections(const Vec3& J, const std::array<double, 4>& s, const Coupling& c) {
    const double pre = c.beta * c.beta * c.c1 * c.c1 * c.k * spontaneous_rho(c.k);
    Vec3 out = J;
    out(0) -= pre * (J(0) * (s[0] + 0.5 * s[1]) + 0.5 * J(1) * s[2]);
    out(1) -= pre * (J(1) * (s[0] + 0.5 * s[1]) + 0.5 * J(0) * s[2]);
    out(2) -= pre * J(2) * s[0];
    return out;
}

} // namespace atomlight
