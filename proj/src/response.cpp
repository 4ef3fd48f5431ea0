#include "drachma/response.hpp"

#include "interp.hpp"
#include "rk4.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>

namespace drachma {

Complex transfer_fd(double omega, const StateBranch& branch, double kappa) {
    if (!(kappa > 0.0)) throw ValidationError("kappa: must be > 0");
    return std::sqrt(kappa) / Complex(kappa / 2.0, -(omega - branch.chi));
}

Complex impulse_response_td(double t, const StateBranch& branch, double kappa) {
    if (!(kappa > 0.0)) throw ValidationError("kappa: must be > 0");
    if (t < 0.0) return Complex(0.0);
    return std::sqrt(kappa) * std::exp(Complex(-kappa / 2.0 * t, -branch.chi * t));
}

namespace {

/// Moments M_j(z) = Int_0^1 x^j e^{-z (1-x)} dx for the exact per-segment
/// update of the exponential integrator.  Series for small |z| (the
/// recurrence 1 - j M_{j-1} cancels there), recurrence otherwise.
std::array<Complex, 4> segment_moments(Complex z) {
    std::array<Complex, 4> m{};
    if (std::abs(z) < 0.5) {
        for (int j = 0; j < 4; ++j) {
            // M_j = sum_{r>=0} (-z)^r j! / (j + r + 1)!
            Complex term = 1.0 / static_cast<double>(j + 1);
            Complex sum = term;
            for (int r = 1; r < 40; ++r) {
                term *= -z / static_cast<double>(j + r + 1);
                sum += term;
                if (std::abs(term) < 1e-20 * std::abs(sum)) break;
            }
            m[j] = sum;
        }
    } else {
        m[0] = (1.0 - std::exp(-z)) / z;
        for (int j = 1; j < 4; ++j) m[j] = (1.0 - static_cast<double>(j) * m[j - 1]) / z;
    }
    return m;
}

Waveform propagate_convolution(const Waveform& a_in, const StateBranch& branch, double kappa) {
    const Complex z = Complex(kappa / 2.0, branch.chi) * a_in.dt;
    const Complex decay = std::exp(-z);
    const std::array<Complex, 4> m = segment_moments(z);
    const double gain = std::sqrt(kappa) * a_in.dt;

    const detail::CausalCubic u(a_in);
    Waveform out;
    out.dt = a_in.dt;
    out.t0 = a_in.t0;
    out.samples.setZero(a_in.size());
    Complex a(0.0);
    for (Eigen::Index n = 0; n + 1 < a_in.size(); ++n) {
        const detail::SegmentPoly p = u.segment(n);
        a = decay * a + gain * (p.c[0] * m[0] + p.c[1] * m[1] + p.c[2] * m[2] + p.c[3] * m[3]);
        out.samples[n + 1] = a;
    }
    return out;
}

Eigen::Index next_pow2(Eigen::Index n) {
    Eigen::Index p = 1;
    while (p < n) p *= 2;
    return p;
}

Waveform propagate_spectral(const Waveform& a_in, const StateBranch& branch, double kappa) {
    const Eigen::Index n = a_in.size();
    // Pad with at least 3x the signal and enough room for the impulse
    // response to decay to ~1e-13, so circular wraparound stays negligible.
    const double decay_time = 60.0 / kappa;
    const auto n_decay = static_cast<Eigen::Index>(std::ceil(decay_time / a_in.dt));
    const Eigen::Index padded = next_pow2(std::max(4 * n, n + n_decay));

    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(padded);
    x.head(n) = a_in.samples;

    Eigen::FFT<double> fft;
    Eigen::VectorXcd spec(padded);
    // Under the a(t) = Int a(w) e^{-iwt} dw convention the time->frequency
    // direction is the standard inverse DFT; fwd/inv cancel exactly.
    fft.inv(spec, x);
    const double dw = kTwoPi / (static_cast<double>(padded) * a_in.dt);
    for (Eigen::Index k = 0; k < padded; ++k) {
        const double omega = dw * static_cast<double>(k <= padded / 2 ? k : k - padded);
        spec[k] *= transfer_fd(omega, branch, kappa);
    }
    Eigen::VectorXcd y(padded);
    fft.fwd(y, spec);

    const double total_energy = y.cwiseAbs2().sum() * a_in.dt;
    const double tail_energy = std::norm(y[padded - 1]) / kappa;
    if (total_energy > 0.0 && tail_energy >= 1e-10 * total_energy)
        throw NumericalError("spectral propagation: response energy beyond the padded window "
                             "exceeds 1e-10 of the total; extend the input grid");

    Waveform out;
    out.dt = a_in.dt;
    out.t0 = a_in.t0;
    out.samples = y.head(n);
    return out;
}

} // namespace

Waveform propagate_linear(const Waveform& a_in, const StateBranch& branch, double kappa,
                          const PropagationSettings& settings) {
    validate_waveform(a_in, "a_in");
    if (!(kappa > 0.0)) throw ValidationError("kappa: must be > 0");
    switch (settings.method) {
        case PropagationMethod::Convolution:
            return propagate_convolution(a_in, branch, kappa);
        case PropagationMethod::Spectral:
            return propagate_spectral(a_in, branch, kappa);
        case PropagationMethod::Ode:
            return detail::integrate_cavity(a_in, kappa, branch.chi, 0.0, settings.oversample,
                                            settings.stability_limit);
    }
    throw ValidationError("propagation method: unknown");
}

Waveform output_field(const Waveform& a_in, const Waveform& a, const DetectionChain& chain) {
    validate_waveform(a_in, "a_in");
    validate_waveform(a, "a");
    if (!same_grid(a_in, a)) throw ValidationError("output_field: grids of a_in and a differ");
    const Complex g_direct = chain.alpha * std::exp(Complex(0.0, -chain.phi));
    const Complex g_cavity = chain.beta * std::exp(Complex(0.0, -chain.theta));
    Waveform out;
    out.dt = a.dt;
    out.t0 = a.t0;
    out.samples = g_direct * a_in.samples + g_cavity * a.samples;
    return out;
}

} // namespace drachma
