#pragma once

// Fixed-step RK4 integration of the semiclassical cavity equation
//   da/dt = -(kappa/2 + i [chi + 4 zeta |a|^2]) a + sqrt(kappa) a_in(t)
// on an oversampled grid, with the drive reconstructed by the shared causal
// cubic.  Used by both the linear propagation path (zeta = 0) and the
// nonlinear simulator so the two agree bitwise in the linear limit.

#include "drachma/types.hpp"
#include "interp.hpp"

#include <cmath>
#include <string>

namespace drachma::detail {

struct CavityRhs {
    double half_kappa;
    double chi;
    double zeta;
    double sqrt_kappa;

    Complex operator()(Complex a, Complex u) const {
        const double shift = chi + 4.0 * zeta * std::norm(a);
        return -(Complex(half_kappa, shift)) * a + sqrt_kappa * u;
    }
};

[[noreturn]] inline void refuse_step(double rate, double limit, int oversample) {
    const double dt_needed = limit / rate * oversample;
    throw NumericalError("integration step too coarse: (kappa/2 + |chi| + 4|zeta| n) * dt_internal "
                         "exceeds " +
                         std::to_string(limit) + "; reduce the grid step to <= " +
                         std::to_string(dt_needed) + " s");
}

/// One RK4 step of size h starting at a, with drive values at the start,
/// midpoint and end of the step.
inline Complex rk4_step(const CavityRhs& f, Complex a, double h, Complex u0, Complex um,
                        Complex u1) {
    const Complex k1 = f(a, u0);
    const Complex k2 = f(a + 0.5 * h * k1, um);
    const Complex k3 = f(a + 0.5 * h * k2, um);
    const Complex k4 = f(a + h * k3, u1);
    return a + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Integrate one branch over the full grid of a_in, starting from vacuum.
inline Waveform integrate_cavity(const Waveform& a_in, double kappa, double chi, double zeta,
                                 int oversample, double stability_limit) {
    validate_waveform(a_in, "a_in");
    if (!(kappa > 0.0)) throw ValidationError("kappa: must be > 0");
    if (oversample < 1) throw ValidationError("oversample: must be >= 1");

    const double h = a_in.dt / oversample;
    const CavityRhs f{kappa / 2.0, chi, zeta, std::sqrt(kappa)};
    const double base_rate = kappa / 2.0 + std::abs(chi);
    if (base_rate * h >= stability_limit) refuse_step(base_rate, stability_limit, oversample);

    const CausalCubic u(a_in);
    Waveform out;
    out.dt = a_in.dt;
    out.t0 = a_in.t0;
    out.samples.setZero(a_in.size());

    Complex a(0.0);
    const double inv_os = 1.0 / oversample;
    for (Eigen::Index n = 0; n + 1 < a_in.size(); ++n) {
        const SegmentPoly p = u.segment(n);
        for (int s = 0; s < oversample; ++s) {
            const double rate = base_rate + 4.0 * std::abs(zeta) * std::norm(a);
            if (rate * h >= stability_limit) refuse_step(rate, stability_limit, oversample);
            const double x0 = s * inv_os;
            a = rk4_step(f, a, h, p.eval(x0), p.eval(x0 + 0.5 * inv_os), p.eval(x0 + inv_os));
        }
        out.samples[n + 1] = a;
    }
    return out;
}

} // namespace drachma::detail
