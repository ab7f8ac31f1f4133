#pragma once

#include "atomlight/errors.hpp"
#include "atomlight/linalg.hpp"
#include "atomlight/philox.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

namespace atomlight {

struct DensityProfile {
    enum class Kind { Box, Gaussian };
    Kind kind = Kind::Box;
    Vec3 center = Vec3::Zero();
    Vec3 size = Vec3::Ones();  // box half widths, or Gaussian standard deviations

    static DensityProfile box(const Vec3& half_widths, const Vec3& c = Vec3::Zero()) {
        return {Kind::Box, c, half_widths};
    }
    static DensityProfile gaussian(const Vec3& sigma, const Vec3& c = Vec3::Zero()) {
        return {Kind::Gaussian, c, sigma};
    }

    /// Cells for binning: the box itself, or +-3 sigma for a Gaussian.
    Vec3 lower() const { return center - (kind == Kind::Box ? 1.0 : 3.0) * size; }
    Vec3 upper() const { return center + (kind == Kind::Box ? 1.0 : 3.0) * size; }

    /// Probability mass of [lo, hi] under the profile.
    double mass(const Vec3& lo, const Vec3& hi) const {
        double m = 1.0;
        for (int d = 0; d < 3; ++d) {
            if (kind == Kind::Box) {
                const double a = std::max(lo(d), center(d) - size(d));
                const double b = std::min(hi(d), center(d) + size(d));
                m *= std::max(0.0, b - a) / (2.0 * size(d));
            } else {
                const double s = std::sqrt(2.0) * size(d);
                m *= 0.5 * (std::erf((hi(d) - center(d)) / s) - std::erf((lo(d) - center(d)) / s));
            }
        }
        return m;
    }
};

inline DensityProfile profile_from_name(const std::string& name, const Vec3& size, const Vec3& center = Vec3::Zero()) {
    if (name == "box") return DensityProfile::box(size, center);
    if (name == "gaussian") return DensityProfile::gaussian(size, center);
    throw UnknownProfile("profile '" + name + "'");
}

struct AtomCloud {
    std::vector<Vec3> positions;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    DensityProfile profile;

    std::size_t size() const { return positions.size(); }
};

inline void sample_into(AtomCloud& cloud, const DensityProfile& p, std::size_t N, Philox4x64& rng) {
    cloud.positions.resize(N);
    for (auto& r : cloud.positions) {
        for (int d = 0; d < 3; ++d) {
            if (p.kind == DensityProfile::Kind::Box)
                r(d) = p.center(d) + p.size(d) * (2.0 * rng.uniform() - 1.0);
            else
                r(d) = p.center(d) + p.size(d) * rng.normal();
        }
    }
}

/// i.i.d. positions from the profile; the (seed, stream) pair fixes the cloud.
inline AtomCloud sample_cloud(const DensityProfile& p, std::size_t N, std::uint64_t seed, std::uint64_t stream = 0) {
    if (N < 1) throw InvalidArgument("N_atoms must be >= 1");
    AtomCloud c;
    c.seed = seed;
    c.stream = stream;
    c.profile = p;
    Philox4x64 rng(seed, stream);
    sample_into(c, p, N, rng);
    return c;
}

/// |sum_j exp(i dk . r_j)|^2
inline double scattering_sum(const AtomCloud& c, const Vec3& dk) {
    double re = 0.0, im = 0.0;
    for (const auto& r : c.positions) {
        const double ph = dk.dot(r);
        re += std::cos(ph);
        im += std::sin(ph);
    }
    return re * re + im * im;
}

/// Runs f(b) for b in [0, n) on up to `threads` workers; results land in slot b.
template <class F>
void parallel_batches(int n, int threads, F&& f) {
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int b = 0; b < n; ++b) f(b);
        return;
    }
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            for (int b = t; b < n; b += threads) f(b);
        });
    for (auto& th : pool) th.join();
}

/// Batches of clouds; batch b draws from Philox substream b of `seed`.
inline std::vector<std::vector<AtomCloud>> sample_batches(const DensityProfile& p, std::size_t N, int n_batches,
                                                          int clouds_per_batch, std::uint64_t seed, int threads = 1) {
    std::vector<std::vector<AtomCloud>> out(n_batches);
    parallel_batches(n_batches, threads, [&](int b) {
        Philox4x64 rng(seed, std::uint64_t(b));
        out[b].resize(clouds_per_batch);
        for (auto& c : out[b]) {
            c.seed = seed;
            c.stream = std::uint64_t(b);
            c.profile = p;
            sample_into(c, p, N, rng);
        }
    });
    return out;
}

struct CellGrid {
    Vec3 lo = Vec3::Zero();
    Vec3 hi = Vec3::Ones();
    int per_axis = 4;

    int count() const { return per_axis * per_axis * per_axis; }
    Vec3 width() const { return (hi - lo) / per_axis; }
    double volume() const { const Vec3 w = width(); return w(0) * w(1) * w(2); }
    int locate(const Vec3& r) const {
        int idx[3];
        for (int d = 0; d < 3; ++d) {
            const double f = (r(d) - lo(d)) / (hi(d) - lo(d));
            if (f < 0.0 || f >= 1.0) return -1;
            idx[d] = std::min(per_axis - 1, int(f * per_axis));
        }
        return (idx[2] * per_axis + idx[1]) * per_axis + idx[0];
    }
    std::pair<Vec3, Vec3> bounds(int c) const {
        const int ix = c % per_axis, iy = (c / per_axis) % per_axis, iz = c / (per_axis * per_axis);
        const Vec3 w = width();
        const Vec3 a = lo + Vec3(ix * w(0), iy * w(1), iz * w(2));
        return {a, a + w};
    }
};

inline CellGrid cells_for(const DensityProfile& p, int per_axis) { return {p.lower(), p.upper(), per_axis}; }

struct PairBin {
    int a = 0;
    int b = 0;
    double estimate = 0.0;            // <n_a n_b> / (V_a V_b)
    double std_error = 0.0;           // std of batch means / sqrt(batches)
    double expected_raw = 0.0;        // <rho_a><rho_b>
    double expected_corrected = 0.0;  // (1 - 1/N) <rho_a><rho_b>
};

struct CorrelationEstimate {
    std::vector<PairBin> bins;
    double self_term = 0.0;  // sum_a [n_a^2 - n_a(n_a - 1)] averaged over clouds
    int batches = 0;
    std::size_t N = 0;

    /// Fraction of bins whose estimate deviates from the expectation by more than z standard errors.
    double fraction_outside(double z, bool corrected = true) const {
        if (bins.empty()) return 0.0;
        int bad = 0;
        for (const auto& b : bins) {
            const double e = corrected ? b.expected_corrected : b.expected_raw;
            if (std::abs(b.estimate - e) > z * b.std_error) ++bad;
        }
        return double(bad) / bins.size();
    }
};

/// Off-diagonal cell-pair densities with batch error bars, plus the counted self term.
inline CorrelationEstimate density_correlation(const std::vector<std::vector<AtomCloud>>& batches, const CellGrid& cells) {
    if (batches.size() < 16) throw TooFewBatches("need at least 16 batches, got " + std::to_string(batches.size()));
    const int C = cells.count();
    const double V = cells.volume();
    const std::size_t N = batches.front().front().size();
    const DensityProfile& prof = batches.front().front().profile;
    const int B = int(batches.size());

    std::vector<double> expected(C);
    for (int c = 0; c < C; ++c) {
        const auto [a, b] = cells.bounds(c);
        expected[c] = double(N) * prof.mass(a, b) / V;
    }

    const std::size_t n_pairs = std::size_t(C) * (C - 1) / 2;
    std::vector<std::vector<double>> batch_mean(B, std::vector<double>(n_pairs, 0.0));
    double self = 0.0;
    std::size_t n_clouds = 0;
    for (int b = 0; b < B; ++b) {
        for (const auto& cloud : batches[b]) {
            std::vector<double> n(C, 0.0);
            for (const auto& r : cloud.positions) {
                const int c = cells.locate(r);
                if (c >= 0) n[c] += 1.0;
            }
            std::size_t k = 0;
            for (int i = 0; i < C; ++i)
                for (int j = i + 1; j < C; ++j) batch_mean[b][k++] += n[i] * n[j] / (V * V);
            for (int i = 0; i < C; ++i) self += n[i] * n[i] - n[i] * (n[i] - 1.0);
            ++n_clouds;
        }
        for (auto& v : batch_mean[b]) v /= double(batches[b].size());
    }

    CorrelationEstimate est;
    est.batches = B;
    est.N = N;
    est.self_term = self / double(n_clouds);
    std::size_t k = 0;
    for (int i = 0; i < C; ++i)
        for (int j = i + 1; j < C; ++j, ++k) {
            double mean = 0.0;
            for (int b = 0; b < B; ++b) mean += batch_mean[b][k];
            mean /= B;
            double var = 0.0;
            for (int b = 0; b < B; ++b) var += (batch_mean[b][k] - mean) * (batch_mean[b][k] - mean);
            var /= (B - 1);
            PairBin pb;
            pb.a = i;
            pb.b = j;
            pb.estimate = mean;
            pb.std_error = std::sqrt(var / B);
            pb.expected_raw = expected[i] * expected[j];
            pb.expected_corrected = pb.expected_raw * (1.0 - 1.0 / double(N));
            est.bins.push_back(pb);
        }
    return est;
}

/// Single spin-1/2 product <J_n J_m> = delta_nm / 4 + (i/2) eps_nml J_l.
inline cplx spin_half_product(const Vec3& Jbar, int n, int m) {
    cplx v = (n == m) ? 0.25 : 0.0;
    for (int l = 0; l < 3; ++l) v += 0.5 * I_unit * levi_civita(n, m, l) * Jbar(l);
    return v;
}

struct SpinCorrelationResult {
    cplx self_term_per_atom = 0.0;
    double cross_estimate = 0.0;  // sum_{i != j} <J_n^i J_m^j> / V^2
    double cross_std_error = 0.0;
    double cross_expected = 0.0;  // N(N-1) Jn Jm / V^2
    double z_score = 0.0;
};

/// Monte-Carlo check of the two-atom spin correlation: each atom carries spin-1/2
/// with mean Jbar; measurement records s = +-1/2 are drawn independently per atom
/// and component, so different atoms factorize and the self term comes from the
/// single-atom algebra.
inline SpinCorrelationResult spin_correlation_check(const std::vector<std::vector<AtomCloud>>& batches, const Vec3& Jbar,
                                                    int n, int m, std::uint64_t seed) {
    if (batches.size() < 16) throw TooFewBatches("need at least 16 batches");
    if (Jbar.cwiseAbs().maxCoeff() > 0.5) throw InvalidArgument("spin-1/2 mean components must lie in [-1/2, 1/2]");
    const DensityProfile& prof = batches.front().front().profile;
    const Vec3 ext = prof.upper() - prof.lower();
    const double V = ext(0) * ext(1) * ext(2);
    const std::size_t N = batches.front().front().size();
    const int B = int(batches.size());
    std::vector<double> bm(B, 0.0);
    for (int b = 0; b < B; ++b) {
        Philox4x64 rng(seed, 0x5350494EULL + std::uint64_t(b));
        for (const auto& cloud : batches[b]) {
            double sn = 0.0, sm = 0.0, same = 0.0;
            for (std::size_t i = 0; i < cloud.size(); ++i) {
                const double a = rng.uniform() < 0.5 + Jbar(n) ? 0.5 : -0.5;
                const double c = rng.uniform() < 0.5 + Jbar(m) ? 0.5 : -0.5;
                sn += a;
                sm += c;
                same += a * c;
            }
            bm[b] += (sn * sm - same) / (V * V);
        }
        bm[b] /= double(batches[b].size());
    }
    SpinCorrelationResult r;
    r.self_term_per_atom = spin_half_product(Jbar, n, m);
    double mean = 0.0;
    for (double v : bm) mean += v;
    mean /= B;
    double var = 0.0;
    for (double v : bm) var += (v - mean) * (v - mean);
    var /= (B - 1);
    r.cross_estimate = mean;
    r.cross_std_error = std::sqrt(var / B);
    r.cross_expected = double(N) * (double(N) - 1.0) * Jbar(n) * Jbar(m) / (V * V);
    r.z_score = r.cross_std_error > 0.0 ? (mean - r.cross_expected) / r.cross_std_error : 0.0;
    return r;
}

} // namespace atomlight
