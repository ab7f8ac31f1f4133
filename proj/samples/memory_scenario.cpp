// Store a squeezed light quadrature in an atomic ensemble and check the operating regime.
//
//   memory_scenario [kappa]

#include "atomlight/atomlight.hpp"

#include <cstdio>
#include <cstdlib>

using namespace atomlight;

int main(int argc, char** argv) {
    const double kappa = argc > 1 ? std::atof(argv[1]) : 1.0;

    Scenario s;
    s.kappa = kappa;
    s.N_P = 1e8;
    s.N_A = 1e6;
    s.OD = 30.0;
    s.w = 1e-3;
    s.lambda = 1e-7;
    s.L = 1e-3;
    const auto rep = regime_report(s);
    std::printf("regime: F = %.6g, light %s, spin %s\n", rep.fresnel.F, rep.light_pass ? "pass" : "fail",
                rep.spin_pass ? "pass" : "fail");
    for (const auto& c : rep.spin)
        std::printf("  %-48s %.6g %s\n", c.name.c_str(), c.value, c.pass ? "" : "(above 0.1)");

    // squeezed input: X_P,in has mean 1.7 and variance 0.3
    GaussianState in = GaussianState::vacuum(1);
    in.mean(in.XP(0)) = 1.7;
    in.cov(in.XP(0), in.XP(0)) = 0.3;
    in.cov(in.PP(0), in.PP(0)) = 1.0 / (4 * 0.3);

    const auto res = memory_protocol(in, CollectiveMap::uniform(kappa, 1), -1.0 / kappa);
    std::printf("after the map: Var(X_A') = %.6g, Var(X_P') = %.6g\n", res.after_map.cov(2, 2), res.after_map.cov(0, 0));
    std::printf("stored P_A: mean %.6g, variance %.6g (input X_P: 1.7, 0.3)\n", res.stored_mean(1), res.stored_cov(1, 1));
    std::printf("symplectic residual %.3g\n", symplectic_residual(CollectiveMap::uniform(kappa, 1).matrix()));
    return 0;
}
