#pragma once

#include "atomlight/errors.hpp"
#include "atomlight/linalg.hpp"
#include "atomlight/quadrature.hpp"

#include <cmath>
#include <span>
#include <vector>

namespace atomlight {

// ---------------------------------------------------------------------------
// Dressed plane waves of a homogeneous magnetized medium
// ---------------------------------------------------------------------------

struct DressedPlaneWave {
    Vec3 k_hat = Vec3::UnitZ();
    int s = +1;
    CVec3 polarization = CVec3::Zero();  // unit norm under the medium inner product
    double dispersion = 1.0;             // a0 + s a1 (j.k)
    double omega2 = 0.0;                 // c^2 k^2 * dispersion
    double norm = 0.0;                   // 1/sqrt(2 (2pi)^3 dispersion)
};

struct DressedPair {
    DressedPlaneWave plus;
    DressedPlaneWave minus;
    bool degenerate = false;
};

enum class DegeneratePolicy { LimitBasis, Throw };

/// <phi| M psi> with M = a0 + i a1 [j]x.
inline cplx medium_inner_product(double a0, double a1, const Vec3& j_hat, const CVec3& phi, const CVec3& psi) {
    CVec3 jc = j_hat.cast<cplx>();
    CVec3 Mpsi = a0 * psi + I_unit * a1 * (cross_matrix(jc) * psi);
    return phi.dot(Mpsi);
}

inline DressedPair dressed_modes(const Vec3& k_vec, const Vec3& j_hat, double a0, double a1,
                                 DegeneratePolicy policy = DegeneratePolicy::LimitBasis, double c = 1.0) {
    const double k = k_vec.norm();
    if (k == 0.0) throw InvalidArgument("k must be nonzero");
    const Vec3 kh = k_vec / k;
    const Vec3 jk = j_hat.cross(kh);
    DressedPair out;
    Vec3 v1, v2;
    if (jk.norm() <= 1e-12) {
        if (policy == DegeneratePolicy::Throw) throw DegenerateGeometry("j_hat parallel to k_hat");
        out.degenerate = true;
        int axis = 0;
        kh.cwiseAbs().minCoeff(&axis);
        v1 = kh.cross(Vec3::Unit(axis)).normalized();
    } else {
        v1 = jk / jk.norm();
    }
    v2 = kh.cross(v1);
    v2 /= v2.norm();
    const double cos_t = j_hat.dot(kh);
    for (int s : {+1, -1}) {
        const double disp = a0 + s * a1 * cos_t;
        if (!(disp > 0.0)) throw OutsideDomain("a0 +- a1 (j.k) must be positive");
        DressedPlaneWave w;
        w.k_hat = kh;
        w.s = s;
        w.dispersion = disp;
        w.omega2 = c * c * k * k * disp;
        w.norm = 1.0 / std::sqrt(2.0 * std::pow(2.0 * pi, 3) * disp);
        w.polarization = (v1.cast<cplx>() + double(s) * I_unit * v2.cast<cplx>()) / std::sqrt(2.0 * disp);
        (s > 0 ? out.plus : out.minus) = w;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Hermite-Gauss paraxial modes
// ---------------------------------------------------------------------------

struct HermiteGaussMode {
    int m = 0;
    int n = 0;
    double k = 1.0;
    double w0 = 1.0;

    double wavelength() const { return 2.0 * pi / k; }
    double z0() const { return pi * w0 * w0 / wavelength(); }
    double width(double z) const {
        const double q = z / z0();
        return w0 * std::sqrt(1.0 + q * q);
    }
    double wavenumber() const { return k; }
    double normalization() const {
        const double lf = std::lgamma(m + 1.0) + std::lgamma(n + 1.0);
        return 1.0 / (w0 * std::sqrt(pi * std::pow(2.0, m + n - 1) * std::exp(lf)));
    }
    cplx operator()(const Vec3& r) const;
};

inline cplx hermite_gauss_eval(const HermiteGaussMode& md, const Vec3& r) {
    if (!(md.w0 > 0.0) || !(md.k > 0.0)) throw InvalidArgument("w0 and k must be positive");
    const double z = r(2);
    const double z0 = md.z0();
    const double w = md.width(z);
    const double rho2 = r(0) * r(0) + r(1) * r(1);
    const double amp = md.normalization() * md.w0 / w *
                       std::hermite(md.m, std::sqrt(2.0) * r(0) / w) *
                       std::hermite(md.n, std::sqrt(2.0) * r(1) / w) * std::exp(-rho2 / (w * w));
    const double inv_R = z / (z * z + z0 * z0);  // 1/R(z), 0 at the waist
    const double phase = md.k * z - (md.m + md.n + 1) * std::atan(z / z0) + 0.5 * md.k * rho2 * inv_R;
    return amp * std::exp(I_unit * phase);
}

inline cplx HermiteGaussMode::operator()(const Vec3& r) const { return hermite_gauss_eval(*this, r); }

/// All (m, n) with m, n < n_max, ordered by m + n then m.
inline std::vector<HermiteGaussMode> hermite_gauss_tensor_basis(int n_max, double k, double w0) {
    std::vector<HermiteGaussMode> out;
    for (int order = 0; order <= 2 * (n_max - 1); ++order)
        for (int m = 0; m <= order; ++m) {
            int n = order - m;
            if (m < n_max && n < n_max) out.push_back({m, n, k, w0});
        }
    return out;
}

/// All (m, n) with m + n <= max_order.
inline std::vector<HermiteGaussMode> hermite_gauss_order_basis(int max_order, double k, double w0) {
    std::vector<HermiteGaussMode> out;
    for (int order = 0; order <= max_order; ++order)
        for (int m = 0; m <= order; ++m) out.push_back({m, order - m, k, w0});
    return out;
}

/// Transverse plane centred on the axis with half width 6 w(z).
inline Grid3 hermite_gauss_plane(const HermiteGaussMode& md, double z, int points = 128) {
    return transverse_plane(6.0 * md.width(z), points, z);
}

// ---------------------------------------------------------------------------
// Overlaps Psi^{mn}(r) = U_m*(r) U_n(r)
// ---------------------------------------------------------------------------

/// Mode amplitudes sampled on a grid. Psi is formed on demand from the
/// stored samples; the diagonal is |U|^2 and the lower triangle is the
/// conjugate of the upper one, so Hermiticity holds bit for bit.
class OverlapField {
public:
    OverlapField() = default;
    OverlapField(Grid3 grid, std::vector<std::vector<cplx>> samples, double k)
        : grid_(grid), u_(std::move(samples)), k_(k) {
        weights_.resize(grid_.size());
        for (std::size_t p = 0; p < grid_.size(); ++p) weights_[p] = grid_.weight(p);
    }

    int n_modes() const { return int(u_.size()); }
    std::size_t n_points() const { return grid_.size(); }
    const Grid3& grid() const { return grid_; }
    double wavenumber() const { return k_; }
    double weight(std::size_t p) const { return weights_[p]; }
    cplx amplitude(int a, std::size_t p) const { return u_[a][p]; }

    cplx psi(int a, int b, std::size_t p) const {
        if (a == b) return std::norm(u_[a][p]);
        if (a > b) return std::conj(psi(b, a, p));
        return std::conj(u_[a][p]) * u_[b][p];
    }

    /// Psi(r_p) as an M x M matrix.
    CMat psi_matrix(std::size_t p) const {
        const int M = n_modes();
        CMat P(M, M);
        for (int a = 0; a < M; ++a)
            for (int b = 0; b < M; ++b) P(a, b) = psi(a, b, p);
        return P;
    }

    /// sum_p w_p f(p) Psi(r_p)
    template <class F>
    CMat weighted_integral(F&& f) const {
        const int M = n_modes();
        CMat out = CMat::Zero(M, M);
        for (std::size_t p = 0; p < n_points(); ++p) {
            const double wf = weights_[p] * f(p);
            if (wf == 0.0) continue;
            for (int a = 0; a < M; ++a)
                for (int b = a; b < M; ++b) out(a, b) += wf * psi(a, b, p);
        }
        for (int a = 0; a < M; ++a)
            for (int b = 0; b < a; ++b) out(a, b) = std::conj(out(b, a));
        for (int a = 0; a < M; ++a) out(a, a) = out(a, a).real();
        return out;
    }

    CMat integral() const {
        return weighted_integral([](std::size_t) { return 1.0; });
    }

private:
    Grid3 grid_;
    std::vector<std::vector<cplx>> u_;
    std::vector<double> weights_;
    double k_ = 0.0;
};

template <class Mode>
OverlapField overlap_field(std::span<const Mode> modes, const Grid3& grid) {
    if (modes.empty()) throw InvalidArgument("empty mode basis");
    const double k = modes.front().wavenumber();
    for (const auto& md : modes)
        if (md.wavenumber() != k) throw MixedWavenumbers("all modes must share one wavenumber");
    std::vector<std::vector<cplx>> u(modes.size(), std::vector<cplx>(grid.size()));
    for (std::size_t a = 0; a < modes.size(); ++a)
        for (std::size_t p = 0; p < grid.size(); ++p) u[a][p] = modes[a](grid.point(p));
    return OverlapField(grid, std::move(u), k);
}

template <class Mode>
OverlapField overlap_field(const std::vector<Mode>& modes, const Grid3& grid) {
    return overlap_field(std::span<const Mode>(modes), grid);
}

struct CompletenessResult {
    std::vector<cplx> residual;  // sum_{n<N} U_n*(r) U_n(r') - delta_grid(r, r')
    double sup_norm = 0.0;
    cplx partial_sum_at_source = 0.0;
};

/// Truncated completeness sum against the discrete delta at grid point `source`.
template <class Mode>
CompletenessResult completeness_check(std::span<const Mode> modes, const Grid3& plane, int N, std::size_t source) {
    if (N < 1) throw InvalidArgument("truncation N must be >= 1");
    if (std::size_t(N) > modes.size()) throw InvalidArgument("truncation exceeds basis size");
    if (plane.z.n != 1) throw InvalidArgument("completeness check needs a single transverse plane");
    const Vec3 rp = plane.point(source);
    const double cell = plane.x.spacing() * plane.y.spacing();
    CompletenessResult out;
    out.residual.assign(plane.size(), cplx(0.0));
    for (int n = 0; n < N; ++n) {
        const cplx up = modes[n](rp);
        for (std::size_t p = 0; p < plane.size(); ++p)
            out.residual[p] += std::conj(modes[n](plane.point(p))) * up;
    }
    out.partial_sum_at_source = out.residual[source];
    out.residual[source] -= 1.0 / cell;
    for (const auto& v : out.residual) out.sup_norm = std::max(out.sup_norm, std::abs(v));
    return out;
}

template <class Mode>
CompletenessResult completeness_check(const std::vector<Mode>& modes, const Grid3& plane, int N, std::size_t source) {
    return completeness_check(std::span<const Mode>(modes), plane, N, source);
}

/// Project f onto the first N modes of a plane and resum; returns the relative L2 error.
template <class Mode, class F>
double expansion_error(const std::vector<Mode>& modes, const Grid3& plane, int N, F&& f) {
    std::vector<cplx> fv(plane.size()), rec(plane.size(), cplx(0.0));
    for (std::size_t p = 0; p < plane.size(); ++p) fv[p] = f(plane.point(p));
    for (int n = 0; n < N; ++n) {
        std::vector<cplx> un(plane.size());
        cplx cn = 0.0;
        for (std::size_t p = 0; p < plane.size(); ++p) {
            un[p] = modes[n](plane.point(p));
            cn += plane.weight(p) * std::conj(un[p]) * fv[p];
        }
        for (std::size_t p = 0; p < plane.size(); ++p) rec[p] += cn * un[p];
    }
    double num = 0.0, den = 0.0;
    for (std::size_t p = 0; p < plane.size(); ++p) {
        num += plane.weight(p) * std::norm(rec[p] - fv[p]);
        den += plane.weight(p) * std::norm(fv[p]);
    }
    return std::sqrt(num / den);
}

} // namespace atomlight
