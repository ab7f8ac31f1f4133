#pragma once

#include "atomlight/errors.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace atomlight {

/// "much smaller than one" is read as < 0.1.
inline constexpr double regime_threshold = 0.1;

struct Scenario {
    double kappa = 1.0;
    double N_P = 1e8;  // photons
    double N_A = 1e6;  // atoms
    std::optional<double> OD;
    std::optional<double> rho;
    double d = 1e-2;   // smallest setup dimension
    double L = 1e-2;   // ensemble length
    double lambda = 852e-9;
    double delta = 1e3;
    double gamma = 1.0;
    double w = 1e-3;   // beam waist
    int m = 0;
    int n = 0;
};

/// OD given directly or as rho lambda^2 L; both must agree within 20% when given.
inline double optical_depth(const Scenario& s) {
    if (s.OD && s.rho) {
        const double derived = *s.rho * s.lambda * s.lambda * s.L;
        if (std::abs(derived - *s.OD) > 0.2 * *s.OD)
            throw InvalidArgument("OD and rho*lambda^2*L differ by more than 20%");
        return *s.OD;
    }
    if (s.OD) return *s.OD;
    if (s.rho) return *s.rho * s.lambda * s.lambda * s.L;
    throw InvalidArgument("scenario needs OD or rho");
}

struct Check {
    std::string name;
    double value = 0.0;
    double limit = regime_threshold;
    bool pass = false;

    double margin() const { return limit - value; }
};

inline Check below(std::string name, double v) { return {std::move(name), v, regime_threshold, v < regime_threshold}; }

inline std::vector<Check> check_light_series(const Scenario& s) {
    const double od = optical_depth(s);
    const double k2 = s.kappa * s.kappa;
    return {below("kappa/sqrt(N_P)", s.kappa / std::sqrt(s.N_P)),
            below("kappa^2/sqrt(N_P)", k2 / std::sqrt(s.N_P)),
            below("kappa^2/OD*N_A/N_P", k2 / od * (s.N_A / s.N_P))};
}

inline std::vector<Check> check_spin_series(const Scenario& s) {
    const double od = optical_depth(s);
    const double k2 = s.kappa * s.kappa;
    return {below("kappa/sqrt(N_A)", s.kappa / std::sqrt(s.N_A)),
            below("kappa^2/OD", k2 / od),
            below("kappa^2*sqrt(d/(L*OD))", k2 * std::sqrt(s.d / (s.L * od))),
            below("kappa^2*sqrt(delta/gamma)*sqrt(lambda/(L*OD))",
                  k2 * std::sqrt(s.delta / s.gamma) * std::sqrt(s.lambda / (s.L * od)))};
}

struct FresnelCheck {
    double F = 0.0;
    double required = 0.0;
    bool pass = false;
};

/// F = w^2/(lambda L); pass iff F >= 10 (1 + m + n).
inline FresnelCheck check_fresnel(const Scenario& s, int m, int n) {
    if (!(s.w > 0.0) || !(s.lambda > 0.0) || !(s.L > 0.0)) throw InvalidArgument("w, lambda and L must be positive");
    FresnelCheck f;
    f.F = s.w * s.w / (s.lambda * s.L);
    f.required = 10.0 * (1.0 + m + n);
    f.pass = f.F >= f.required;
    return f;
}

struct RegimeReport {
    std::vector<Check> light;
    std::vector<Check> spin;
    FresnelCheck fresnel;
    double OD = 0.0;
    bool light_pass = false;
    bool spin_pass = false;
    bool verdict = false;
};

inline RegimeReport regime_report(const Scenario& s) {
    RegimeReport r;
    r.OD = optical_depth(s);
    r.light = check_light_series(s);
    r.spin = check_spin_series(s);
    r.fresnel = check_fresnel(s, s.m, s.n);
    r.light_pass = true;
    for (const auto& c : r.light) r.light_pass = r.light_pass && c.pass;
    r.spin_pass = true;
    for (const auto& c : r.spin) r.spin_pass = r.spin_pass && c.pass;
    r.verdict = r.light_pass && r.spin_pass && r.fresnel.pass;
    return r;
}

} // namespace atomlight
