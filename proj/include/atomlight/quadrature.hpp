#pragma once

#include "atomlight/errors.hpp"
#include "atomlight/linalg.hpp"

#include <cmath>
#include <cstddef>
#include <vector>

namespace atomlight {

struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline void legendre_eval(int n, double x, double& p, double& dp) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    p = p1;
    dp = n * (x * p1 - p0) / (x * x - 1.0);
}

/// Gauss-Legendre nodes/weights on [-1,1]; roots by Newton iteration on P_n.
inline GaussLegendreRule gauss_legendre(int n) {
    if (n < 1) throw InvalidArgument("gauss_legendre needs n >= 1");
    GaussLegendreRule r;
    if (n == 1) {
        r.nodes = {0.0};
        r.weights = {2.0};
        return r;
    }
    r.nodes.assign(n, 0.0);
    r.weights.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double p = 0.0, dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            legendre_eval(n, x, p, dp);
            double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        legendre_eval(n, x, p, dp);
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.nodes[i] = -x;
        r.nodes[n - 1 - i] = x;
        r.weights[i] = w;
        r.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) r.nodes[n / 2] = 0.0;
    return r;
}

/// Uniform 1D axis with trapezoid weights; a single point gets weight `length`.
struct Axis {
    double lo = 0.0;
    double hi = 0.0;
    int n = 1;

    double spacing() const { return n > 1 ? (hi - lo) / (n - 1) : 0.0; }
    double at(int i) const { return n > 1 ? lo + i * spacing() : 0.5 * (lo + hi); }
    double weight(int i) const {
        if (n == 1) return hi - lo > 0.0 ? hi - lo : 1.0;
        double h = spacing();
        return (i == 0 || i == n - 1) ? 0.5 * h : h;
    }
};

/// Tensor-product grid in (x, y, z). Flat index p = (iz*ny + iy)*nx + ix.
struct Grid3 {
    Axis x, y, z;

    std::size_t size() const { return std::size_t(x.n) * y.n * z.n; }
    Vec3 point(std::size_t p) const {
        int ix = int(p % x.n);
        int iy = int((p / x.n) % y.n);
        int iz = int(p / (std::size_t(x.n) * y.n));
        return {x.at(ix), y.at(iy), z.at(iz)};
    }
    double weight(std::size_t p) const {
        int ix = int(p % x.n);
        int iy = int((p / x.n) % y.n);
        int iz = int(p / (std::size_t(x.n) * y.n));
        return x.weight(ix) * y.weight(iy) * z.weight(iz);
    }
    std::size_t index(int ix, int iy, int iz) const {
        return (std::size_t(iz) * y.n + iy) * x.n + ix;
    }
};

/// Square transverse plane [-half, half]^2 at height z; the z weight is 1.
inline Grid3 transverse_plane(double half_width, int points, double z = 0.0) {
    if (points < 2) throw InvalidArgument("grid.points must be >= 2");
    if (!(half_width > 0.0)) throw InvalidArgument("transverse half width must be positive");
    Grid3 g;
    g.x = {-half_width, half_width, points};
    g.y = {-half_width, half_width, points};
    g.z = {z, z, 1};
    return g;
}

/// Neumaier-compensated sum.
class CompensatedSum {
public:
    void add(double v) {
        double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            c_ += (sum_ - t) + v;
        else
            c_ += (v - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + c_; }

private:
    double sum_ = 0.0;
    double c_ = 0.0;
};

} // namespace atomlight
