#pragma once

#include "atomlight/errors.hpp"
#include "atomlight/linalg.hpp"
#include "atomlight/modes.hpp"
#include "atomlight/spinfield.hpp"

#include <array>
#include <string>
#include <vector>

namespace atomlight {

enum class Pol : int { X = 0, Y = 1 };

struct ModeLabel {
    int k = 0;
    int m = 0;
    Pol pol = Pol::X;
    bool operator==(const ModeLabel&) const = default;
};

/// Truncated (k, m, pol) basis; flat index (k*M + m)*2 + pol.
class ModeBasis {
public:
    ModeBasis() = default;
    explicit ModeBasis(int n_transverse, int n_k = 1) : m_(n_transverse), nk_(n_k) {
        if (n_transverse < 1 || n_k < 1) throw InvalidArgument("basis needs at least one mode");
    }

    int dim() const { return 2 * m_ * nk_; }
    int n_transverse() const { return m_; }
    int n_k() const { return nk_; }

    int index(int k, int m, Pol p) const {
        if (k < 0 || k >= nk_ || m < 0 || m >= m_) throw InvalidArgument("mode label outside basis");
        return (k * m_ + m) * 2 + int(p);
    }
    int index(const ModeLabel& l) const { return index(l.k, l.m, l.pol); }
    ModeLabel label(int i) const { return {i / (2 * m_), (i / 2) % m_, Pol(i % 2)}; }

    bool operator==(const ModeBasis&) const = default;

private:
    int m_ = 1;
    int nk_ = 1;
};

/// sum_ab C_ab a_a^dag a_b over a ModeBasis.
struct QuadraticOperator {
    ModeBasis basis;
    CMat coeff;
    std::string label;

    QuadraticOperator() = default;
    explicit QuadraticOperator(const ModeBasis& b, std::string lbl = {})
        : basis(b), coeff(CMat::Zero(b.dim(), b.dim())), label(std::move(lbl)) {}
    QuadraticOperator(const ModeBasis& b, CMat c, std::string lbl = {})
        : basis(b), coeff(std::move(c)), label(std::move(lbl)) {}

    bool is_hermitian(double tol = 1e-13) const { return max_abs(coeff - coeff.adjoint()) <= tol; }

    /// Product Fock state with occupations n.
    double expectation_fock(const std::vector<double>& n) const {
        if (int(n.size()) != basis.dim()) throw BasisMismatch("occupation vector size");
        double e = 0.0;
        for (int a = 0; a < basis.dim(); ++a) e += coeff(a, a).real() * n[a];
        return e;
    }

    cplx expectation_coherent(const CVec& alpha) const {
        if (alpha.size() != basis.dim()) throw BasisMismatch("coherent amplitude size");
        return alpha.dot(coeff * alpha);
    }
};

inline void require_same_basis(const QuadraticOperator& a, const QuadraticOperator& b) {
    if (!(a.basis == b.basis)) throw BasisMismatch("operators live on different bases");
}

inline QuadraticOperator operator+(const QuadraticOperator& a, const QuadraticOperator& b) {
    require_same_basis(a, b);
    return {a.basis, a.coeff + b.coeff};
}

inline QuadraticOperator operator-(const QuadraticOperator& a, const QuadraticOperator& b) {
    require_same_basis(a, b);
    return {a.basis, a.coeff - b.coeff};
}

inline QuadraticOperator operator*(cplx s, const QuadraticOperator& a) { return {a.basis, s * a.coeff}; }
inline QuadraticOperator operator*(double s, const QuadraticOperator& a) { return {a.basis, s * a.coeff}; }

/// [a^dag M a, a^dag N a] = a^dag [M, N] a
inline QuadraticOperator commutator(const QuadraticOperator& A, const QuadraticOperator& B) {
    require_same_basis(A, B);
    return {A.basis, A.coeff * B.coeff - B.coeff * A.coeff, "[" + A.label + "," + B.label + "]"};
}

struct StokesSet {
    QuadraticOperator s0, s1, s2, s3;
    const QuadraticOperator& operator[](int i) const {
        switch (i) {
        case 0: return s0;
        case 1: return s1;
        case 2: return s2;
        default: return s3;
        }
    }
};

/// Stokes operators for the pair q = (k,m,x), q' = (k,m',y).
inline StokesSet stokes_mode_pair(const ModeBasis& b, const ModeLabel& q, const ModeLabel& qp) {
    if (q.k != qp.k) throw BasisMismatch("Stokes pair must share k");
    if (q == qp) throw InvalidArgument("Stokes pair needs distinct modes");
    const int i = b.index(q), j = b.index(qp);
    StokesSet s{QuadraticOperator(b, "s0"), QuadraticOperator(b, "s1"), QuadraticOperator(b, "s2"),
                QuadraticOperator(b, "s3")};
    s.s0.coeff(i, i) = 0.5;
    s.s0.coeff(j, j) = 0.5;
    s.s1.coeff(i, i) = 0.5;
    s.s1.coeff(j, j) = -0.5;
    s.s2.coeff(i, j) = 0.5;
    s.s2.coeff(j, i) = 0.5;
    s.s3.coeff(i, j) = cplx(0.0, -0.5);  // 1/(2i)
    s.s3.coeff(j, i) = cplx(0.0, 0.5);
    return s;
}

// ---------------------------------------------------------------------------
// Position-dependent Stokes operators
// ---------------------------------------------------------------------------

/// Stokes operators s_i(r_perp) on a detector plane, built from U_m* U_m' weights.
class StokesField {
public:
    StokesField(const ModeBasis& b, OverlapField plane, int k_index = 0)
        : basis_(b), plane_(std::move(plane)), k_(k_index) {
        if (plane_.n_modes() != b.n_transverse()) throw BasisMismatch("overlap field size differs from basis");
    }

    std::size_t n_points() const { return plane_.n_points(); }
    const OverlapField& plane() const { return plane_; }

    StokesSet at(std::size_t p) const { return build(plane_.psi_matrix(p)); }

    /// sum_p w_p s_i(r_p)
    StokesSet integrate() const { return build(plane_.integral()); }

private:
    StokesSet build(const CMat& P) const {
        const int M = basis_.n_transverse();
        StokesSet s{QuadraticOperator(basis_, "s0"), QuadraticOperator(basis_, "s1"),
                    QuadraticOperator(basis_, "s2"), QuadraticOperator(basis_, "s3")};
        for (int m = 0; m < M; ++m)
            for (int mp = 0; mp < M; ++mp) {
                const int mx = basis_.index(k_, m, Pol::X), my = basis_.index(k_, m, Pol::Y);
                const int mpx = basis_.index(k_, mp, Pol::X), mpy = basis_.index(k_, mp, Pol::Y);
                const cplx w = P(m, mp);
                s.s0.coeff(mx, mpx) += 0.5 * w;
                s.s0.coeff(my, mpy) += 0.5 * w;
                s.s1.coeff(mx, mpx) += 0.5 * w;
                s.s1.coeff(my, mpy) -= 0.5 * w;
                s.s2.coeff(mx, mpy) += 0.5 * w;
                s.s2.coeff(my, mpx) += 0.5 * w;
                s.s3.coeff(mx, mpy) += w / (2.0 * I_unit);
                s.s3.coeff(my, mpx) -= w / (2.0 * I_unit);
            }
        return s;
    }

    ModeBasis basis_;
    OverlapField plane_;
    int k_ = 0;
};

inline StokesField stokes_field(const ModeBasis& b, OverlapField plane, int k_index = 0) {
    return StokesField(b, std::move(plane), k_index);
}

// ---------------------------------------------------------------------------
// Stokes generator G[a][a'] (a, a' polarized mode indices) and its orders
// ---------------------------------------------------------------------------

/// Tensor of quadratic operators G[a][a']; zeroth order is a_a^dag a_a'.
class StokesGenerator {
public:
    explicit StokesGenerator(const ModeBasis& b)
        : basis_(b), g_(std::size_t(b.dim()) * b.dim(), CMat::Zero(b.dim(), b.dim())) {}

    const ModeBasis& basis() const { return basis_; }
    CMat& at(int a, int ap) { return g_[std::size_t(a) * basis_.dim() + ap]; }
    const CMat& at(int a, int ap) const { return g_[std::size_t(a) * basis_.dim() + ap]; }
    QuadraticOperator op(int a, int ap) const { return {basis_, at(a, ap)}; }

    StokesGenerator& operator+=(const StokesGenerator& o) {
        if (!(o.basis_ == basis_)) throw BasisMismatch("generator bases differ");
        for (std::size_t i = 0; i < g_.size(); ++i) g_[i] += o.g_[i];
        return *this;
    }

    /// Stokes operators of the pair ((k,m,x), (k,m',y)) formed from this generator.
    StokesSet stokes(int m, int mp, int k = 0) const {
        const int ax = basis_.index(k, m, Pol::X), ay = basis_.index(k, mp, Pol::Y);
        StokesSet s{QuadraticOperator(basis_, "s0"), QuadraticOperator(basis_, "s1"),
                    QuadraticOperator(basis_, "s2"), QuadraticOperator(basis_, "s3")};
        s.s0.coeff = 0.5 * (at(ax, ax) + at(ay, ay));
        s.s1.coeff = 0.5 * (at(ax, ax) - at(ay, ay));
        s.s2.coeff = 0.5 * (at(ax, ay) + at(ay, ax));
        s.s3.coeff = (at(ax, ay) - at(ay, ax)) / (2.0 * I_unit);
        return s;
    }

    double max_abs_coeff() const {
        double m = 0.0;
        for (const auto& c : g_) m = std::max(m, max_abs(c));
        return m;
    }

private:
    ModeBasis basis_;
    std::vector<CMat> g_;
};

inline StokesGenerator stokes_generator_zeroth(const ModeBasis& b) {
    StokesGenerator g(b);
    for (int a = 0; a < b.dim(); ++a)
        for (int ap = 0; ap < b.dim(); ++ap) g.at(a, ap)(a, ap) = 1.0;
    return g;
}

/// eps_{jl} = delta_lx delta_jy - delta_jx delta_ly
inline double pol_antisym(Pol j, Pol l) {
    if (j == Pol::Y && l == Pol::X) return 1.0;
    if (j == Pol::X && l == Pol::Y) return -1.0;
    return 0.0;
}

/// T_{(m,j),(n,l)} = int rho Psi^{mn} eps_{jl} ((0,J_y,J_z).e_z) over the ensemble grid.
inline CMat theta_integral(const ModeBasis& b, const OverlapField& ov, const SpinField& sf, int k_index = 0) {
    check_same_grid(ov.grid(), sf.grid);
    if (ov.n_modes() != b.n_transverse()) throw BasisMismatch("overlap field size differs from basis");
    const CMat Q = ov.weighted_integral([&](std::size_t p) { return sf.rho[p] * sf.Jperp_z(p); });
    const int D = b.dim();
    CMat T = CMat::Zero(D, D);
    const int M = b.n_transverse();
    for (int m = 0; m < M; ++m)
        for (int n = 0; n < M; ++n)
            for (Pol j : {Pol::X, Pol::Y})
                for (Pol l : {Pol::X, Pol::Y}) {
                    const double e = pol_antisym(j, l);
                    if (e != 0.0) T(b.index(k_index, m, j), b.index(k_index, n, l)) = e * Q(m, n);
                }
    return T;
}

/// First-order generator increment.
inline StokesGenerator stokes_first_order(const ModeBasis& b, const OverlapField& ov, const SpinField& sf,
                                          const Coupling& c, int k_index = 0) {
    const CMat T = theta_integral(b, ov, sf, k_index);
    const double g = 0.5 * c.k * c.beta * c.c1;
    const int D = b.dim();
    StokesGenerator G(b);
    for (int a = 0; a < D; ++a)
        for (int ap = 0; ap < D; ++ap) {
            CMat& C = G.at(a, ap);
            for (int nl = 0; nl < D; ++nl) {
                C(nl, ap) += g * std::conj(T(a, nl));
                C(a, nl) += g * T(ap, nl);
            }
        }
    return G;
}

struct StokesSecondOrder {
    StokesGenerator A;
    StokesGenerator B;
    StokesGenerator D;
    double C_contraction_max = 0.0;  // largest |C_{jl}^{l'l''}| over the grid; the C channel vanishes
};

/// C_{jl}^{l'l''} = e_j . ((J x (e_l' x e_l'')) x e_l) for j,l,l',l'' in {x,y}; index ((j*2+l)*2+l')*2+l''.
inline std::array<double, 16> stokes_c_contraction(const Vec3& J, const Vec3& ex, const Vec3& ey) {
    const Vec3 e[2] = {ex, ey};
    std::array<double, 16> out{};
    for (int j = 0; j < 2; ++j)
        for (int l = 0; l < 2; ++l)
            for (int lp = 0; lp < 2; ++lp)
                for (int lpp = 0; lpp < 2; ++lpp)
                    out[((j * 2 + l) * 2 + lp) * 2 + lpp] = e[j].dot(J.cross(e[lp].cross(e[lpp])).cross(e[l]));
    return out;
}

inline StokesSecondOrder stokes_second_order_terms(const ModeBasis& b, const OverlapField& ov, const SpinField& sf,
                                                   const Coupling& c, int k_index = 0) {
    const CMat T = theta_integral(b, ov, sf, k_index);
    const CMat TT = T * T;
    const double kbc = c.k * c.beta * c.c1;
    const double gA = 0.25 * kbc * kbc;
    const double gB = 0.125 * kbc * kbc;
    const int D = b.dim();
    StokesSecondOrder out{StokesGenerator(b), StokesGenerator(b), StokesGenerator(b), 0.0};
    for (int a = 0; a < D; ++a)
        for (int ap = 0; ap < D; ++ap) {
            CMat& CA = out.A.at(a, ap);
            CA = gA * T.row(a).adjoint() * T.row(ap);
            CMat& CB = out.B.at(a, ap);
            for (int bb = 0; bb < D; ++bb) {
                CB(bb, ap) += gB * std::conj(TT(a, bb));
                CB(a, bb) += gB * TT(ap, bb);
            }
        }

    // D channel: (k beta / 2)^2 int rho Psi^{nm} Psi^{m'n'} {c1^2 (J.e_z)^2 eps_jl eps_j'l' + c0^2 J^4 d_jl d_j'l'}
    const int M = b.n_transverse();
    const double gD = 0.25 * c.k * c.k * c.beta * c.beta;
    std::vector<cplx> R1(std::size_t(M) * M * M * M, 0.0), R0(R1.size(), 0.0);
    auto idx4 = [M](int i, int j, int k, int l) { return ((std::size_t(i) * M + j) * M + k) * M + l; };
    for (std::size_t p = 0; p < ov.n_points(); ++p) {
        const double w = ov.weight(p) * sf.rho[p];
        if (w == 0.0) continue;
        const double jz = sf.J[p].dot(sf.ez(p));
        const double J2 = sf.J2(p);
        const double w1 = w * c.c1 * c.c1 * jz * jz;
        const double w0 = w * c.c0 * c.c0 * J2 * J2;
        const CMat P = ov.psi_matrix(p);
        for (int n = 0; n < M; ++n)
            for (int m = 0; m < M; ++m)
                for (int mp = 0; mp < M; ++mp)
                    for (int np = 0; np < M; ++np) {
                        const cplx v = P(n, m) * P(mp, np);
                        R1[idx4(n, m, mp, np)] += w1 * v;
                        R0[idx4(n, m, mp, np)] += w0 * v;
                    }
        const auto cc = stokes_c_contraction(sf.J[p], sf.ex[p], sf.ey[p]);
        for (double v : cc) out.C_contraction_max = std::max(out.C_contraction_max, std::abs(v));
    }
    for (int m = 0; m < M; ++m)
        for (int mp = 0; mp < M; ++mp)
            for (Pol j : {Pol::X, Pol::Y})
                for (Pol jp : {Pol::X, Pol::Y}) {
                    CMat& CD = out.D.at(b.index(k_index, m, j), b.index(k_index, mp, jp));
                    for (int n = 0; n < M; ++n)
                        for (int np = 0; np < M; ++np)
                            for (Pol l : {Pol::X, Pol::Y})
                                for (Pol lp : {Pol::X, Pol::Y}) {
                                    const double e1 = pol_antisym(j, l) * pol_antisym(jp, lp);
                                    const double e0 = (j == l && jp == lp) ? 1.0 : 0.0;
                                    if (e1 == 0.0 && e0 == 0.0) continue;
                                    CD(b.index(k_index, n, l), b.index(k_index, np, lp)) +=
                                        gD * (e1 * R1[idx4(n, m, mp, np)] + e0 * R0[idx4(n, m, mp, np)]);
                                }
                }
    return out;
}

// ---------------------------------------------------------------------------
// Spin terms
// ---------------------------------------------------------------------------

/// Increment = direction (x) operator: a 3-vector coupled to one quadratic light operator.
struct SpinTermResult {
    std::string label;
    int order = 1;
    Vec3 direction = Vec3::Zero();
    QuadraticOperator op;
};

/// a_{a}^dag a_{b}^dag a_{c} a_{d} with coefficient W_abcd.
struct QuarticOperator {
    ModeBasis basis;
    std::vector<cplx> W;

    QuarticOperator() = default;
    explicit QuarticOperator(const ModeBasis& b) : basis(b), W(std::size_t(b.dim()) * b.dim() * b.dim() * b.dim(), 0.0) {}

    std::size_t index(int a, int b, int c, int d) const {
        const std::size_t D = basis.dim();
        return ((a * D + b) * D + c) * D + d;
    }
    cplx& at(int a, int b, int c, int d) { return W[index(a, b, c, d)]; }
    cplx at(int a, int b, int c, int d) const { return W[index(a, b, c, d)]; }

    /// Symmetrized under a^dag a^dag and a a exchange (same operator, canonical coefficients).
    QuarticOperator symmetrized() const {
        QuarticOperator s(basis);
        const int D = basis.dim();
        for (int a = 0; a < D; ++a)
            for (int b = 0; b < D; ++b)
                for (int c = 0; c < D; ++c)
                    for (int d = 0; d < D; ++d)
                        s.at(a, b, c, d) = 0.25 * (at(a, b, c, d) + at(b, a, c, d) + at(a, b, d, c) + at(b, a, d, c));
        return s;
    }

    bool is_hermitian(double tol = 1e-13) const {
        const QuarticOperator s = symmetrized();
        const int D = basis.dim();
        for (int a = 0; a < D; ++a)
            for (int b = 0; b < D; ++b)
                for (int c = 0; c < D; ++c)
                    for (int d = 0; d < D; ++d)
                        if (std::abs(s.at(a, b, c, d) - std::conj(s.at(d, c, b, a))) > tol) return false;
        return true;
    }

    cplx expectation_coherent(const CVec& alpha) const {
        const int D = basis.dim();
        if (alpha.size() != D) throw BasisMismatch("coherent amplitude size");
        cplx e = 0.0;
        for (int a = 0; a < D; ++a)
            for (int b = 0; b < D; ++b)
                for (int c = 0; c < D; ++c)
                    for (int d = 0; d < D; ++d)
                        e += at(a, b, c, d) * std::conj(alpha(a)) * std::conj(alpha(b)) * alpha(c) * alpha(d);
        return e;
    }

    /// Product Fock state with occupations n.
    cplx expectation_fock(const std::vector<double>& n) const {
        const int D = basis.dim();
        if (int(n.size()) != D) throw BasisMismatch("occupation vector size");
        cplx e = 0.0;
        for (int a = 0; a < D; ++a)
            for (int b = 0; b < D; ++b) {
                if (a == b) {
                    e += at(a, a, a, a) * n[a] * (n[a] - 1.0);
                } else {
                    e += (at(a, b, a, b) + at(a, b, b, a)) * n[a] * n[b];
                }
            }
        return e;
    }
};

struct QuarticSpinTerm {
    std::string label;
    Vec3 direction = Vec3::Zero();
    QuarticOperator op;
};

/// First-order spin increment at grid point p:
/// -beta c1 k (J x e_z) sum Psi^{mm'} (a_mx^dag a_m'y - a_my^dag a_m'x) / 2i
inline SpinTermResult spin_first_order(const ModeBasis& b, const OverlapField& ov, std::size_t p, const Coupling& c,
                                       const SpinField& sf, int k_index = 0) {
    check_same_grid(ov.grid(), sf.grid);
    SpinTermResult r{"spin_first_order", 1, -c.beta * c.c1 * c.k * sf.J[p].cross(sf.ez(p)), QuadraticOperator(b)};
    const int M = b.n_transverse();
    for (int m = 0; m < M; ++m)
        for (int mp = 0; mp < M; ++mp) {
            const cplx w = ov.psi(m, mp, p) / (2.0 * I_unit);
            r.op.coeff(b.index(k_index, m, Pol::X), b.index(k_index, mp, Pol::Y)) += w;
            r.op.coeff(b.index(k_index, m, Pol::Y), b.index(k_index, mp, Pol::X)) -= w;
        }
    return r;
}

struct SpinSecondOrder {
    SpinTermResult A;
    QuarticSpinTerm B;
};

inline SpinSecondOrder spin_second_order_terms(const ModeBasis& b, const OverlapField& ov, std::size_t p,
                                               const Coupling& c, const SpinField& sf, int k_index = 0) {
    check_same_grid(ov.grid(), sf.grid);
    const int M = b.n_transverse();
    const double g = 0.5 * c.beta * c.c1 * c.k;
    const CMat P = ov.psi_matrix(p);
    const CMat Qv = ov.weighted_integral([&](std::size_t q) { return sf.rho[q] * sf.Jperp_z(q); });
    const Vec3 J = sf.J[p];
    const Vec3 ez = sf.ez(p);

    SpinSecondOrder out;
    out.A = {"J2_A", 2, J.cross(ez), QuadraticOperator(b)};
    const CMat blk = (-0.5 * I_unit * g * g) * (Qv * P - P * Qv);
    for (Pol l : {Pol::X, Pol::Y})
        for (int m = 0; m < M; ++m)
            for (int mp = 0; mp < M; ++mp)
                out.A.op.coeff(b.index(k_index, m, l), b.index(k_index, mp, l)) += blk(m, mp);

    out.B = {"J2_B", J - ez * J.dot(ez), QuarticOperator(b)};
    const double pre = -0.5 * g * g;
    for (int m = 0; m < M; ++m)
        for (int mp = 0; mp < M; ++mp)
            for (int n = 0; n < M; ++n)
                for (int np = 0; np < M; ++np) {
                    const cplx v = pre * P(m, n) * P(mp, np);
                    const int mx = b.index(k_index, m, Pol::X), my = b.index(k_index, m, Pol::Y);
                    const int mpx = b.index(k_index, mp, Pol::X), mpy = b.index(k_index, mp, Pol::Y);
                    const int nx = b.index(k_index, n, Pol::X), ny = b.index(k_index, n, Pol::Y);
                    const int npx = b.index(k_index, np, Pol::X), npy = b.index(k_index, np, Pol::Y);
                    out.B.op.at(mx, mpy, ny, npx) += 2.0 * v;
                    out.B.op.at(my, mpy, nx, npx) -= v;
                    out.B.op.at(mx, mpx, ny, npy) -= v;
                }
    return out;
}

/// Incoherent second-order spin evolution for a classical field D (positive-frequency part),
/// returned as the real 3x3 matrix R with dJ/dt = R J. A is the short-propagator matrix;
/// its negative-frequency partner is conj(A). J2 is the scalar spin squared.
inline Mat3 spin_incoherent_matrix(const CMat3& A, const CVec3& D, const Coupling& c, double J2) {
    const CVec3 Dm = D.conjugate();
    const CMat3 Ap = A.conjugate();
    const cplx trA = A.trace();
    const double DD = D.squaredNorm();
    Mat3 R;
    for (int col = 0; col < 3; ++col) {
        const CVec3 J = Vec3::Unit(col).cast<cplx>();
        const cplx JD = J.transpose() * D;
        const cplx JApD = J.transpose() * (Ap * D);
        const cplx JAD = J.transpose() * (A * D);
        CVec3 t0 = A * Dm * JD - Dm * JApD;
        CVec3 t1 = Ap * Dm * JD - DD * (A * J) - trA * Dm * JD + Dm * JAD;
        CVec3 e = c.c1 * c.c0 * J2 * (t0 + t0.conjugate()) + 0.5 * c.c1 * c.c1 * (t1 + t1.conjugate());
        R.col(col) = (c.beta * c.beta) * e.real();
    }
    return R;
}

} // namespace atomlight
