#pragma once

#include "atomlight/errors.hpp"
#include "atomlight/linalg.hpp"
#include "atomlight/quadrature.hpp"

#include <optional>
#include <vector>

namespace atomlight {

/// Light-atom coupling constants shared by the operator and map builders.
struct Coupling {
    double k = 1.0;     // laser wavenumber
    double beta = 1.0;
    double c0 = 0.0;
    double c1 = 1.0;
};

/// Density and mean spin sampled on a grid, with local polarization frames.
struct SpinField {
    Grid3 grid;
    std::vector<double> rho;
    std::vector<Vec3> J;
    std::vector<Vec3> ex;
    std::vector<Vec3> ey;
    std::optional<double> spin_squared;

    std::size_t size() const { return grid.size(); }
    Vec3 ez(std::size_t p) const { return ex[p].cross(ey[p]); }
    double J2(std::size_t p) const { return spin_squared ? *spin_squared : J[p].squaredNorm(); }
    /// (0, J_y, J_z) . e_z(r): the transverse fluctuation component along the local beam axis
    double Jperp_z(std::size_t p) const {
        const Vec3 jp(0.0, J[p](1), J[p](2));
        return jp.dot(ez(p));
    }
};

template <class RhoFn, class JFn>
SpinField make_spin_field(const Grid3& grid, RhoFn&& rho_fn, JFn&& J_fn) {
    SpinField s;
    s.grid = grid;
    const std::size_t n = grid.size();
    s.rho.resize(n);
    s.J.resize(n);
    s.ex.assign(n, Vec3::UnitX());
    s.ey.assign(n, Vec3::UnitY());
    for (std::size_t p = 0; p < n; ++p) {
        const Vec3 r = grid.point(p);
        s.rho[p] = rho_fn(r);
        if (!(s.rho[p] >= 0.0)) throw InvalidArgument("density must be non-negative");
        s.J[p] = J_fn(r);
    }
    return s;
}

inline SpinField uniform_spin_field(const Grid3& grid, double rho, const Vec3& J) {
    return make_spin_field(grid, [rho](const Vec3&) { return rho; }, [J](const Vec3&) { return J; });
}

inline void check_same_grid(const Grid3& a, const Grid3& b) {
    auto same = [](const Axis& u, const Axis& v) { return u.lo == v.lo && u.hi == v.hi && u.n == v.n; };
    if (!(same(a.x, b.x) && same(a.y, b.y) && same(a.z, b.z)))
        throw InvalidArgument("spin field and overlap field must share one grid");
}

} // namespace atomlight
