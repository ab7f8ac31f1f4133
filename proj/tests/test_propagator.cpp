#include "atomlight/propagator.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace atomlight;

namespace {

// Composite Simpson on [-1,1]; independent of the Gauss-Legendre path.
template <class F>
double simpson(F&& f, int n = 20000) {
    const double h = 2.0 / n;
    double s = f(-1.0) + f(1.0);
    for (int i = 1; i < n; ++i) s += f(-1.0 + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

Mat3 rotation(double a, double b, double c) {
    return (Eigen::AngleAxisd(a, Vec3::UnitZ()) * Eigen::AngleAxisd(b, Vec3::UnitY()) *
            Eigen::AngleAxisd(c, Vec3::UnitX()))
        .toRotationMatrix();
}

} // namespace

TEST(GaussLegendre, IntegratesPolynomialsExactly) {
    auto r = gauss_legendre(64);
    double s0 = 0, s2 = 0, s126 = 0;
    for (int i = 0; i < 64; ++i) {
        s0 += r.weights[i];
        s2 += r.weights[i] * r.nodes[i] * r.nodes[i];
        s126 += r.weights[i] * std::pow(r.nodes[i], 126);
    }
    EXPECT_NEAR(s0, 2.0, 1e-14);
    EXPECT_NEAR(s2, 2.0 / 3.0, 1e-14);
    EXPECT_NEAR(s126, 2.0 / 127.0, 1e-14);
}

TEST(ShortPropagator, IsotropicValue) {
    const double iso = 1.0 / (3.0 * pi);
    auto c = short_propagator_closed(1.0, 0.0, 1.0);
    EXPECT_NEAR(c.rho_par, iso, 1e-16);
    EXPECT_EQ(c.rho_par, c.rho_perp);
    EXPECT_EQ(c.rho_gamma, 0.0);
    auto q = short_propagator_quadrature(1.0, 0.0, 1.0, 128);
    EXPECT_NEAR(q.rho_par, iso, 1e-15);
    EXPECT_NEAR(q.rho_perp, iso, 1e-15);
    // polynomial integrand: int 2(1 - x^2) dx = 8/3
    EXPECT_NEAR(q.rho_par * 8.0 * pi, 8.0 / 3.0, 1e-14);
}

TEST(ShortPropagator, IsotropicBranchScalesWithA0) {
    for (double a0 : {0.5, 2.0, 3.7}) {
        auto c = short_propagator_closed(a0, 0.0, 1.3);
        auto q = short_propagator_quadrature(a0, 0.0, 1.3, 128);
        EXPECT_LT(rel(c.rho_par, q.rho_par), 1e-14);
        EXPECT_LT(rel(c.rho_par, std::pow(1.3, 3) / (3 * pi) * std::pow(a0, -2.5)), 1e-14);
    }
}

TEST(ShortPropagator, ClosedFormMatchesIndependentSimpson) {
    const double a0 = 1.0, a1 = 0.2, k = 1.0;
    auto c = short_propagator_closed(a0, a1, k);
    const double pre = k * k * k / (8 * pi);
    auto den = [&](double x) { return std::pow(a0 + a1 * x, -2.5); };
    EXPECT_LT(rel(c.rho_par, pre * simpson([&](double x) { return 2 * (1 - x * x) * den(x); })), 1e-10);
    EXPECT_LT(rel(c.rho_perp, pre * simpson([&](double x) { return (1 + x * x) * den(x); })), 1e-10);
    EXPECT_LT(rel(c.rho_gamma, pre * simpson([&](double x) { return 2 * x * den(x); })), 1e-10);
    EXPECT_LT(c.rho_gamma, 0.0);
}

TEST(ShortPropagator, ClosedVsQuadratureSweep) {
    for (double a0 : {0.3, 1.0, 2.5})
        for (double f : {0.001, 0.05, 0.1, 0.149, 0.151, 0.3, 0.6, 0.9}) {
            const double a1 = f * a0;
            auto c = short_propagator_closed(a0, a1, 2.0);
            auto q = short_propagator_quadrature(a0, a1, 2.0, 128);
            const double scale = std::max({std::abs(q.rho_par), std::abs(q.rho_perp)});
            EXPECT_LT(rel(c.rho_par, q.rho_par), 1e-10) << a0 << " " << a1;
            EXPECT_LT(rel(c.rho_perp, q.rho_perp), 1e-10) << a0 << " " << a1;
            EXPECT_LT(std::abs(c.rho_gamma - q.rho_gamma) / scale, 1e-10) << a0 << " " << a1;
        }
}

TEST(ShortPropagator, QuadratureConverged) {
    auto q64 = short_propagator_quadrature(1.0, 0.3, 1.0, 64);
    auto q256 = short_propagator_quadrature(1.0, 0.3, 1.0, 256);
    EXPECT_LT(std::abs(q64.rho_par - q256.rho_par), 1e-12);
    EXPECT_LT(std::abs(q64.rho_perp - q256.rho_perp), 1e-12);
    EXPECT_LT(std::abs(q64.rho_gamma - q256.rho_gamma), 1e-12);
    EXPECT_THROW(short_propagator_quadrature(1.0, 0.3, 1.0, 32), InvalidArgument);
}

TEST(ShortPropagator, DomainEdge) {
    auto c = short_propagator_closed(1.0, 0.9999, 1.0);
    EXPECT_TRUE(c.near_singular);
    EXPECT_TRUE(std::isfinite(c.rho_par) && std::isfinite(c.rho_perp) && std::isfinite(c.rho_gamma));
    EXPECT_GT(c.rho_perp, 1.0);
    EXPECT_FALSE(short_propagator_closed(1.0, 0.5, 1.0).near_singular);
    EXPECT_THROW(short_propagator_closed(1.0, 1.0, 1.0), OutsideDomain);
    EXPECT_THROW(short_propagator_quadrature(1.0, 1.2, 1.0, 64), OutsideDomain);
}

TEST(ShortPropagator, IsotropicLimitSlopes) {
    // rho_gamma / a1 tends to a finite nonzero constant; (rho_par - rho_perp) / a1 tends to zero.
    double prev_slope = 0.0;
    for (double a1 : {1e-2, 1e-3, 1e-4}) {
        auto c = short_propagator_closed(1.0, a1, 1.0);
        const double slope = c.rho_gamma / a1;
        EXPECT_TRUE(std::isfinite(slope));
        if (prev_slope != 0.0) {
            EXPECT_LT(std::abs(slope - prev_slope) / std::abs(slope), 1e-3);
        }
        prev_slope = slope;
        EXPECT_LT(std::abs(c.rho_par - c.rho_perp) / a1, 10.0 * a1);
    }
    // first-order coefficient of the series: -5/2 * 4/3 * k^3/(8 pi)
    EXPECT_NEAR(prev_slope, -2.5 * 4.0 / 3.0 / (8 * pi), 1e-6);
}

TEST(ShortPropagator, CoordinateFreeBasisAligned) {
    ShortPropagatorCoeffs c{3.0, 2.0, 0.5, false};
    CMat3 m = coordinate_free_short_propagator(c, Vec3::UnitX());
    EXPECT_EQ(m(0, 0), cplx(3.0));
    EXPECT_EQ(m(1, 1), cplx(2.0));
    EXPECT_EQ(m(2, 2), cplx(2.0));
    EXPECT_EQ(m(1, 2), cplx(0.0, 0.5));
    EXPECT_EQ(m(2, 1), cplx(0.0, -0.5));
    EXPECT_EQ(m(0, 1), cplx(0.0));
    ShortPropagatorCoeffs iso{1.5, 1.5, 0.0, false};
    EXPECT_LT((coordinate_free_short_propagator(iso, Vec3(0.6, 0, 0.8)) - 1.5 * CMat3::Identity()).norm(), 1e-15);
}

TEST(ShortPropagator, RotationEquivariance) {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(-pi, pi);
    auto c = short_propagator_closed(1.0, 0.4, 1.0);
    for (int t = 0; t < 20; ++t) {
        const Mat3 R = rotation(u(gen), u(gen), u(gen));
        const Vec3 j = Vec3(u(gen), u(gen), u(gen)).normalized();
        CMat3 lhs = coordinate_free_short_propagator(c, R * j);
        CMat3 rhs = R.cast<cplx>() * coordinate_free_short_propagator(c, j) * R.transpose().cast<cplx>();
        EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-13);
    }
}

TEST(DipolePropagator, FarFieldIsTransverse) {
    const double k = 1.0, n = 1e3;
    CMat3 G = dipole_propagator(Vec3(0, 0, n), k);
    const cplx lead = -(k * k * k) / (4 * pi) * std::exp(I_unit * k * n) / (k * n);
    CMat3 nn = CMat3::Zero();
    nn(2, 2) = 1.0;
    CMat3 approx = lead * (nn - CMat3::Identity());
    EXPECT_LT((G - approx).norm() / approx.norm(), 3e-3);
}

TEST(DipolePropagator, AxialEntries) {
    const double k = 2.0, n = 0.7, kn = k * n;
    CMat3 G = dipole_propagator(Vec3(0, 0, n), k);
    const cplx pre = -(k * k * k) / (4 * pi) * std::exp(I_unit * kn) / kn;
    const cplx a = 1.0 + 3.0 * I_unit / kn - 3.0 / (kn * kn);
    const cplx b = 1.0 + I_unit / kn - 1.0 / (kn * kn);
    EXPECT_LT(std::abs(G(2, 2) - pre * (a - b)), 1e-14);
    EXPECT_LT(std::abs(G(0, 0) + pre * b), 1e-14);
    EXPECT_LT(std::abs(G(0, 2)), 1e-16);
    EXPECT_THROW(dipole_propagator(Vec3::Zero(), k), ZeroSeparation);
    EXPECT_NEAR(dipole_self_term, 2.0 / 3.0, 0.0);
}

namespace {

double sph_j0(double x) { return std::sin(x) / x; }
double sph_j1(double x) { return std::sin(x) / (x * x) - std::cos(x) / x; }
double sph_j2(double x) { return (3.0 / (x * x) - 1.0) * std::sin(x) / x - 3.0 * std::cos(x) / (x * x); }

// Angular integral of (I - k k^T) e^{ik.n} for n along z: 4pi[(j0 - j1/x) I + j2 zz]; returns (xx, zz).
std::pair<double, double> angular(double k, double n) {
    const double x = k * n;
    const double t = 4 * pi * (sph_j0(x) - sph_j1(x) / x);
    return {t, t + 4 * pi * sph_j2(x)};
}

} // namespace

TEST(DipolePropagator, MatchesKSpaceQuadrature) {
    // k_L^2 int d^3k/(2pi)^3 (I - kk^T) e^{ik.n} / (k^2 - k_L^2 - i0) plus the static transverse-delta
    // term for n != 0, -(I - 3 nn)/(4 pi n^3), with the radial integral done numerically.
    const double kL = 1.0, n = 20.0;
    auto f = [&](double k, int comp) {
        auto a = angular(k, n);
        return k * k * (comp == 0 ? a.first : a.second);
    };
    auto pv = [&](int comp) {
        const double fL = f(kL, comp);
        // PV over [0, 2kL] with the pole subtracted
        const int N1 = 200000;
        double s = 0.0;
        const double h = 2.0 * kL / N1;
        for (int i = 0; i < N1; ++i) {
            const double k = (i + 0.5) * h;
            s += (f(k, comp) - fL) / (k * k - kL * kL) * h;
        }
        s += fL * (-std::log(3.0) / (2.0 * kL));
        // tail [2kL, K] truncated at a node of the oscillation
        const double K = 2.0 * kL + 2.0 * pi / n * 4000.0;
        const int N2 = 4000000;
        const double h2 = (K - 2.0 * kL) / N2;
        for (int i = 0; i < N2; ++i) {
            const double k = 2.0 * kL + (i + 0.5) * h2;
            s += f(k, comp) / (k * k - kL * kL) * h2;
        }
        return s;
    };
    const double norm = 1.0 / std::pow(2.0 * pi, 3);
    CMat3 num = CMat3::Zero();
    for (int comp = 0; comp < 2; ++comp) {
        const cplx val = kL * kL * norm * (pv(comp) + I_unit * pi / (2.0 * kL) * f(kL, comp));
        if (comp == 0) num(0, 0) = num(1, 1) = val;
        else num(2, 2) = val;
    }
    const double s = 1.0 / (4 * pi * n * n * n);
    num(0, 0) -= s;
    num(1, 1) -= s;
    num(2, 2) += 2.0 * s;
    CMat3 G = dipole_propagator(Vec3(0, 0, n), kL);
    EXPECT_LT((num - G).norm() / G.norm(), 0.02);
}

TEST(Greens, ReciprocityVacuum) {
    GreensSum g = make_greens_sum(32, 4.0, 1.0);
    std::mt19937_64 gen(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<SpaceTimePair> pairs;
    for (int i = 0; i < 5; ++i)
        pairs.push_back({Vec3(u(gen), u(gen), u(gen)), 2.0 + u(gen), Vec3(u(gen), u(gen), u(gen)), u(gen)});
    const double res = greens_reciprocity_residual(g, pairs);
    EXPECT_LT(res, 1e-10);
    // the propagator itself is not trivially small
    EXPECT_GT(greens_function(g, pairs[0].r, pairs[0].t, pairs[0].rp, pairs[0].tp).norm(), 1e-3);
}

TEST(Greens, SymmetricPointAndCausalCutoff) {
    GreensSum g = make_greens_sum(8, 3.0, 1.0);
    const Vec3 r(0.1, 0.2, 0.3);
    EXPECT_EQ(greens_reciprocity_residual(g, {{r, 0.5, r, 0.5}}), 0.0);
    EXPECT_EQ(greens_function(g, r, 0.0, Vec3::Zero(), 1.0).norm(), 0.0);
    EXPECT_EQ(greens_reciprocity_residual(g, {{r, 0.0, Vec3::Zero(), 1.0}}), 0.0);
}

TEST(LightDecay, ZeroSpin) {
    auto r = short_propagator_closed(1.0, 0.3, 1.0);
    auto m = light_decay_matrix(r, 0.7, 1.1, Vec3::Zero());
    EXPECT_EQ(m.matrix, CMat3::Zero());
}

TEST(LightDecay, SpinAlongX) {
    auto r = short_propagator_closed(1.0, 0.3, 1.0);
    const double c0 = 0.7, c1 = 1.1, Jx = 0.4;
    auto m = light_decay_matrix(r, c0, c1, Vec3(Jx, 0, 0));
    const double J2 = Jx * Jx;
    EXPECT_NEAR(m.Gamma_par, c0 * c0 * J2 * J2 * r.rho_par, 1e-15);
    const double perp = c0 * c0 * J2 * J2 * r.rho_perp + 2 * c0 * c1 * r.rho_gamma * J2 * Jx + c1 * c1 * r.rho_perp * Jx * Jx;
    EXPECT_NEAR(m.Gamma_perp1, perp, 1e-15);
    EXPECT_NEAR(m.Gamma_perp2, perp, 1e-15);
    EXPECT_LT((m.matrix - m.matrix.adjoint()).norm(), 1e-16);
}

TEST(LightDecay, NoScalarCoupling) {
    auto r = short_propagator_closed(1.0, 0.3, 1.0);
    auto m = light_decay_matrix(r, 0.0, 1.3, Vec3(0, 0.2, 0.5));
    EXPECT_NEAR(m.Gamma_par, 1.3 * 1.3 * r.rho_perp * (0.25 + 0.04), 1e-15);
}

TEST(SpinDecay, TwoToOneToOne) {
    auto r = short_propagator_closed(1.3, 0.0, 2.0);
    auto rates = spin_decay_rates(r, 0.8, 0.3, 5.0);
    EXPECT_EQ(rates[0] / rates[1], 2.0);
    EXPECT_EQ(rates[1], rates[2]);
    auto zero = spin_decay_rates(r, 0.8, 0.3, 0.0);
    EXPECT_EQ(zero[0], 0.0);
    auto unit = spin_decay_rates({1.0, 1.0, 0.0, false}, 1.0, 1.0, 1.0);
    EXPECT_EQ(unit[0], 2.0);
    EXPECT_EQ(unit[1], 1.0);
    EXPECT_EQ(unit[2], 1.0);
}
