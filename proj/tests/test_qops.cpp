#include "atomlight/propagator.hpp"
#include "atomlight/qops.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace atomlight;

namespace {

struct SingleMode {
    ModeBasis b{1};
    Grid3 grid;
    OverlapField ov;
    SpinField sf;
    Coupling c{2.0, 0.3, 0.0, 0.7};
};

// One Gaussian mode over a short slab of uniform atoms with J along the beam.
SingleMode single_mode(double Jz = 0.5) {
    SingleMode s;
    Grid3 g;
    g.x = {-3.0, 3.0, 25};
    g.y = {-3.0, 3.0, 25};
    g.z = {0.0, 0.2, 3};
    s.grid = g;
    std::vector<HermiteGaussMode> modes{{0, 0, s.c.k, 1.0}};
    s.ov = overlap_field(modes, g);
    s.sf = uniform_spin_field(g, 1.5, Vec3(0.0, 0.0, Jz));
    return s;
}

double phase_of(const SingleMode& s) {
    double Q = 0.0;
    for (std::size_t p = 0; p < s.grid.size(); ++p)
        Q += s.grid.weight(p) * s.sf.rho[p] * s.sf.J[p](2) * std::norm(s.ov.amplitude(0, p));
    return s.c.k * s.c.beta * s.c.c1 * Q;
}

struct MultiMode {
    ModeBasis b{3};
    Grid3 grid;
    OverlapField ov;
    SpinField sf;
    Coupling c{2.0, 0.3, 0.4, 0.7};
};

MultiMode multi_mode() {
    MultiMode s;
    Grid3 g;
    g.x = {-3.0, 3.0, 13};
    g.y = {-3.0, 3.0, 13};
    g.z = {-0.3, 0.3, 3};
    s.grid = g;
    std::vector<HermiteGaussMode> modes{{0, 0, s.c.k, 1.0}, {1, 0, s.c.k, 1.0}, {0, 1, s.c.k, 1.0}};
    s.ov = overlap_field(modes, g);
    s.sf = make_spin_field(
        g, [](const Vec3& r) { return 1.0 + 0.2 * r(0) + 0.1 * r(1) * r(1); },
        [](const Vec3& r) { return Vec3(0.4, 0.1 * r(0), 0.3 + 0.05 * r(1)); });
    return s;
}

CVec random_state(int D, std::mt19937_64& gen) {
    std::normal_distribution<double> nd;
    CVec a(D);
    for (int i = 0; i < D; ++i) a(i) = cplx(nd(gen), nd(gen));
    return a;
}

} // namespace

TEST(Stokes, PairAlgebra) {
    ModeBasis b(3, 2);
    auto s = stokes_mode_pair(b, {1, 2, Pol::X}, {1, 0, Pol::Y});
    for (int i = 0; i < 4; ++i) EXPECT_TRUE(s[i].is_hermitian(0.0));
    EXPECT_LT(max_abs((commutator(s.s1, s.s2) - I_unit * s.s3).coeff), 1e-16);
    EXPECT_LT(max_abs((commutator(s.s2, s.s3) - I_unit * s.s1).coeff), 1e-16);
    EXPECT_LT(max_abs((commutator(s.s3, s.s1) - I_unit * s.s2).coeff), 1e-16);
    for (int i = 1; i < 4; ++i) EXPECT_EQ(max_abs(commutator(s.s0, s[i]).coeff), 0.0);
    EXPECT_THROW(stokes_mode_pair(b, {0, 0, Pol::X}, {1, 0, Pol::Y}), BasisMismatch);
    EXPECT_THROW(stokes_mode_pair(b, {0, 0, Pol::X}, {0, 0, Pol::X}), InvalidArgument);
}

TEST(Stokes, CoherentExpectations) {
    ModeBasis b(1);
    auto s = stokes_mode_pair(b, {0, 0, Pol::X}, {0, 0, Pol::Y});
    CVec diag(2);
    diag << 1.0, 1.0;
    diag /= std::sqrt(2.0);
    const double n = 4.0;
    CVec alpha = std::sqrt(n) * diag;
    EXPECT_NEAR(s.s0.expectation_coherent(alpha).real(), n / 2, 1e-14);
    EXPECT_NEAR(s.s1.expectation_coherent(alpha).real(), 0.0, 1e-14);
    EXPECT_NEAR(s.s2.expectation_coherent(alpha).real(), n / 2, 1e-14);
    CVec circ(2);
    circ << 1.0, cplx(0, 1);
    circ *= std::sqrt(n / 2);
    EXPECT_NEAR(s.s3.expectation_coherent(circ).real(), n / 2, 1e-14);
    EXPECT_NEAR(s.s1.expectation_fock({3.0, 1.0}), 1.0, 1e-15);
    EXPECT_THROW(s.s1.expectation_fock({3.0}), BasisMismatch);
}

TEST(Stokes, CommutatorBasisMismatch) {
    QuadraticOperator a(ModeBasis(2)), c(ModeBasis(3));
    EXPECT_THROW(commutator(a, c), BasisMismatch);
    EXPECT_THROW(a + c, BasisMismatch);
}

TEST(Stokes, RandomPairsSu2) {
    ModeBasis b(4, 3);
    std::mt19937_64 gen(13);
    std::uniform_int_distribution<int> K(0, 2), M(0, 3);
    for (int t = 0; t < 50; ++t) {
        const int k = K(gen);
        const int m = M(gen);
        const int mp = M(gen);
        auto s = stokes_mode_pair(b, {k, m, Pol::X}, {k, mp, Pol::Y});
        EXPECT_LT(max_abs((commutator(s.s1, s.s2) - I_unit * s.s3).coeff), 1e-13);
        EXPECT_LT(max_abs((commutator(s.s2, s.s3) - I_unit * s.s1).coeff), 1e-13);
        EXPECT_LT(max_abs((commutator(s.s3, s.s1) - I_unit * s.s2).coeff), 1e-13);
    }
}

TEST(StokesField, SingleModeIsWeightedPair) {
    ModeBasis b(1);
    std::vector<HermiteGaussMode> modes{{0, 0, 1.0, 1.0}};
    OverlapField plane = overlap_field(modes, transverse_plane(6.0, 41));
    StokesField f = stokes_field(b, plane);
    auto pair = stokes_mode_pair(b, {0, 0, Pol::X}, {0, 0, Pol::Y});
    const std::size_t p = 41 * 20 + 17;
    auto s = f.at(p);
    const double u2 = std::norm(plane.amplitude(0, p));
    for (int i = 0; i < 4; ++i) EXPECT_LT(max_abs(s[i].coeff - u2 * pair[i].coeff), 1e-16);
    auto tot = f.integrate();
    for (int i = 0; i < 4; ++i) EXPECT_LT(max_abs(tot[i].coeff - pair[i].coeff), 1e-9);
}

TEST(StokesField, IntegratedOrthonormalModesDecouple) {
    ModeBasis b(3);
    std::vector<HermiteGaussMode> modes{{0, 0, 1.0, 1.0}, {1, 0, 1.0, 1.0}, {0, 1, 1.0, 1.0}};
    OverlapField plane = overlap_field(modes, transverse_plane(6.0, 81));
    auto tot = stokes_field(b, plane).integrate();
    QuadraticOperator sum1(b);
    for (int m = 0; m < 3; ++m) sum1 = sum1 + stokes_mode_pair(b, {0, m, Pol::X}, {0, m, Pol::Y}).s1;
    EXPECT_LT(max_abs(tot.s1.coeff - sum1.coeff), 1e-9);
    EXPECT_THROW(stokes_field(ModeBasis(2), plane), BasisMismatch);
}

TEST(Generator, ZerothOrderIsPair) {
    ModeBasis b(2);
    auto G = stokes_generator_zeroth(b);
    auto s = G.stokes(0, 1);
    auto ref = stokes_mode_pair(b, {0, 0, Pol::X}, {0, 1, Pol::Y});
    // s0 and s1 of the generator use the diagonal pieces of each mode separately
    EXPECT_EQ(max_abs(s.s2.coeff - ref.s2.coeff), 0.0);
    EXPECT_EQ(max_abs(s.s3.coeff - ref.s3.coeff), 0.0);
    auto d = G.stokes(1, 1);
    auto refd = stokes_mode_pair(b, {0, 1, Pol::X}, {0, 1, Pol::Y});
    for (int i = 0; i < 4; ++i) EXPECT_EQ(max_abs(d[i].coeff - refd[i].coeff), 0.0);
}

TEST(Generator, FirstOrderSingleModeRotation) {
    SingleMode s = single_mode();
    const double phi = phase_of(s);
    ASSERT_GT(std::abs(phi), 1e-3);
    auto G1 = stokes_first_order(s.b, s.ov, s.sf, s.c);
    auto st = G1.stokes(0, 0);
    auto ref = stokes_mode_pair(s.b, {0, 0, Pol::X}, {0, 0, Pol::Y});
    EXPECT_LT(max_abs(st.s1.coeff + phi * ref.s2.coeff), 1e-14);
    EXPECT_LT(max_abs(st.s2.coeff - phi * ref.s1.coeff), 1e-14);
    EXPECT_EQ(max_abs(st.s3.coeff), 0.0);
    EXPECT_EQ(max_abs(st.s0.coeff), 0.0);
}

TEST(Generator, SecondOrderSingleModeRotation) {
    SingleMode s = single_mode();
    const double phi = phase_of(s);
    auto G2 = stokes_second_order_terms(s.b, s.ov, s.sf, s.c);
    StokesGenerator AB = G2.A;
    AB += G2.B;
    auto st = AB.stokes(0, 0);
    auto ref = stokes_mode_pair(s.b, {0, 0, Pol::X}, {0, 0, Pol::Y});
    EXPECT_LT(max_abs(st.s1.coeff + 0.5 * phi * phi * ref.s1.coeff), 1e-12 * phi * phi);
    EXPECT_LT(max_abs(st.s2.coeff + 0.5 * phi * phi * ref.s2.coeff), 1e-12 * phi * phi);
    EXPECT_LT(max_abs(st.s3.coeff), 1e-16);
    EXPECT_EQ(G2.C_contraction_max, 0.0);
}

TEST(Generator, CContractionVanishesForAnyFrame) {
    std::mt19937_64 gen(17);
    std::normal_distribution<double> nd;
    for (int t = 0; t < 100; ++t) {
        const Vec3 J(nd(gen), nd(gen), nd(gen));
        const Mat3 R = Eigen::Quaterniond(nd(gen), nd(gen), nd(gen), nd(gen)).normalized().toRotationMatrix();
        auto c = stokes_c_contraction(J, R.col(0), R.col(1));
        for (double v : c) EXPECT_LT(std::abs(v), 1e-14 * (1.0 + J.norm()));
    }
}

TEST(Generator, MultiModeHermiticity) {
    MultiMode s = multi_mode();
    auto G1 = stokes_first_order(s.b, s.ov, s.sf, s.c);
    auto G2 = stokes_second_order_terms(s.b, s.ov, s.sf, s.c);
    const int D = s.b.dim();
    // G[a][a'] is the image of a_a^dag a_a'; its adjoint is the image of a_a'^dag a_a
    for (int a = 0; a < D; ++a)
        for (int ap = 0; ap < D; ++ap) {
            EXPECT_LT(max_abs(G1.at(a, ap) - G1.at(ap, a).adjoint()), 1e-15);
            EXPECT_LT(max_abs(G2.A.at(a, ap) - G2.A.at(ap, a).adjoint()), 1e-15);
            EXPECT_LT(max_abs(G2.B.at(a, ap) - G2.B.at(ap, a).adjoint()), 1e-15);
            EXPECT_LT(max_abs(G2.D.at(a, ap) - G2.D.at(ap, a).adjoint()), 1e-15);
        }
    EXPECT_GT(G1.max_abs_coeff(), 1e-3);
    for (int m = 0; m < 3; ++m)
        for (int mp = 0; mp < 3; ++mp) {
            auto st = G1.stokes(m, mp);
            for (int i = 0; i < 4; ++i) EXPECT_TRUE(st[i].is_hermitian(1e-14));
        }
}

TEST(Generator, FirstOrderPreservesNumber) {
    MultiMode s = multi_mode();
    auto G1 = stokes_first_order(s.b, s.ov, s.sf, s.c);
    // total photon number sum_a a_a^dag a_a is invariant at first order
    CMat tot = CMat::Zero(s.b.dim(), s.b.dim());
    for (int a = 0; a < s.b.dim(); ++a) tot += G1.at(a, a);
    EXPECT_LT(max_abs(tot), 1e-15);
}

TEST(SpinTerms, FirstOrderSingleMode) {
    SingleMode s = single_mode();
    s.sf.J.assign(s.sf.size(), Vec3(0.3, 0.0, 0.5));
    const std::size_t p = s.grid.index(12, 10, 1);
    auto r = spin_first_order(s.b, s.ov, p, s.c, s.sf);
    const Vec3 dir = -s.c.beta * s.c.c1 * s.c.k * Vec3(0.3, 0.0, 0.5).cross(Vec3::UnitZ());
    EXPECT_LT((r.direction - dir).norm(), 1e-16);
    auto ref = stokes_mode_pair(s.b, {0, 0, Pol::X}, {0, 0, Pol::Y});
    EXPECT_LT(max_abs(r.op.coeff - std::norm(s.ov.amplitude(0, p)) * ref.s3.coeff), 1e-16);
    EXPECT_TRUE(r.op.is_hermitian());
}

TEST(SpinTerms, SecondOrderSingleModeAndHermiticity) {
    SingleMode s = single_mode();
    const std::size_t p = s.grid.index(11, 13, 2);
    auto r = spin_second_order_terms(s.b, s.ov, p, s.c, s.sf);
    EXPECT_EQ(max_abs(r.A.op.coeff), 0.0);  // [Q, Psi] vanishes for one mode
    EXPECT_TRUE(r.B.op.is_hermitian());
    std::mt19937_64 gen(2);
    const CVec alpha = random_state(2, gen);
    const double g = 0.5 * s.c.beta * s.c.c1 * s.c.k;
    const double u4 = std::pow(std::norm(s.ov.amplitude(0, p)), 2);
    const double im = std::imag(std::conj(alpha(0)) * alpha(1));
    EXPECT_NEAR(r.B.op.expectation_coherent(alpha).real(), -0.5 * g * g * u4 * 4.0 * im * im, 1e-14);
    EXPECT_NEAR(r.B.op.expectation_coherent(alpha).imag(), 0.0, 1e-14);
}

TEST(SpinTerms, MultiModeSecondOrderHermitian) {
    MultiMode s = multi_mode();
    const std::size_t p = s.grid.index(5, 7, 1);
    auto r = spin_second_order_terms(s.b, s.ov, p, s.c, s.sf);
    EXPECT_TRUE(r.A.op.is_hermitian(1e-15));
    EXPECT_GT(max_abs(r.A.op.coeff), 1e-6);
    EXPECT_TRUE(r.B.op.is_hermitian(1e-15));
    std::mt19937_64 gen(8);
    const CVec alpha = random_state(s.b.dim(), gen);
    EXPECT_LT(std::abs(r.B.op.expectation_coherent(alpha).imag()), 1e-12);
    std::vector<double> n{1, 2, 0, 3, 1, 1};
    EXPECT_LT(std::abs(r.B.op.expectation_fock(n).imag()), 1e-13);
}

TEST(SpinTerms, QuarticFockMatchesNumberStateSum) {
    // a^dag a^dag a a on one mode has <n|.|n> = n(n-1)
    ModeBasis b(1);
    QuarticOperator q(b);
    q.at(0, 0, 0, 0) = 1.0;
    EXPECT_EQ(q.expectation_fock({5.0, 0.0}).real(), 20.0);
    // a_x^dag a_y^dag a_x a_y -> n_x n_y
    QuarticOperator r(b);
    r.at(0, 1, 0, 1) = 1.0;
    EXPECT_EQ(r.expectation_fock({3.0, 2.0}).real(), 6.0);
}

TEST(SpinIncoherent, IsotropicTwoToOneToOne) {
    const double rp = 0.37, d = 1.3;
    const CMat3 A = rp * CMat3::Identity();
    Coupling c{1.0, 0.8, 0.0, 0.6};
    const Mat3 R = spin_incoherent_matrix(A, CVec3(d, 0, 0), c, 0.75);
    auto rates = spin_decay_rates({rp, rp, 0.0, false}, c.c1, c.beta, d * d);
    Mat3 expect = Mat3::Zero();
    expect.diagonal() << -rates[0], -rates[1], -rates[2];
    EXPECT_LT((R - expect).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(SpinIncoherent, RotationCovariant) {
    std::mt19937_64 gen(4);
    std::normal_distribution<double> nd;
    Coupling c{1.0, 0.7, 0.5, 0.9};
    for (int t = 0; t < 20; ++t) {
        CMat3 A;
        for (int i = 0; i < 9; ++i) A(i) = cplx(nd(gen), nd(gen));
        const CVec3 D(cplx(nd(gen), nd(gen)), cplx(nd(gen), nd(gen)), cplx(nd(gen), nd(gen)));
        const Mat3 Q = Eigen::Quaterniond(nd(gen), nd(gen), nd(gen), nd(gen)).normalized().toRotationMatrix();
        const CMat3 Qc = Q.cast<cplx>();
        const Mat3 lhs = spin_incoherent_matrix(Qc * A * Qc.transpose(), Qc * D, c, 0.5);
        const Mat3 rhs = Q * spin_incoherent_matrix(A, D, c, 0.5) * Q.transpose();
        EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
    }
}
