#include "drachma/response.hpp"

#include "drachma/rng.hpp"
#include "drachma/trial.hpp"
#include "doctest.h"
#include "helpers.hpp"

#include <cmath>

using namespace drachma;
using drachma::testing::reference_kappa;
using drachma::testing::sup_abs_diff;

namespace {

StateBranch branch_chi(double chi_hz) {
    StateBranch b;
    b.label = 0;
    b.chi = angular_from_hz(chi_hz);
    return b;
}

Waveform constant_drive(Complex c, double dt, Eigen::Index n) {
    Waveform w;
    w.dt = dt;
    w.t0 = 0.0;
    w.samples = Eigen::VectorXcd::Constant(n, c);
    return w;
}

/// sin^4 envelope on a 6 MHz carrier: band-limited well inside the sampling band.
Waveform modulated_pulse(double duration, double dt, double carrier_hz, double tail = 0.0) {
    TrialFunction tf;
    tf.amplitude = Complex(1.0, 0.0);
    tf.exponent_m = 4;
    tf.duration = duration;
    Waveform w = trial_grid(tf, dt, 0);
    const double omega = angular_from_hz(carrier_hz);
    for (Eigen::Index i = 0; i < w.size(); ++i)
        w.samples[i] *= std::polar(1.0, -omega * w.time(i));
    if (tail > 0.0) {
        const auto extra = static_cast<Eigen::Index>(std::llround(tail / dt));
        Eigen::VectorXcd padded = Eigen::VectorXcd::Zero(w.size() + extra);
        padded.head(w.size()) = w.samples;
        w.samples.swap(padded);
    }
    return w;
}

PropagationSettings method(PropagationMethod m) {
    PropagationSettings s;
    s.method = m;
    return s;
}

} // namespace

TEST_CASE("transfer function at resonance and at the half-power points") {
    const double kappa = reference_kappa();
    const StateBranch b = branch_chi(299e3);
    const Complex h0 = transfer_fd(b.chi, b, kappa);
    CHECK(std::abs(h0 - Complex(2.0 / std::sqrt(kappa), 0.0)) <= 1e-15 * std::abs(h0));
    const Complex hp = transfer_fd(b.chi + kappa / 2.0, b, kappa);
    const Complex hm = transfer_fd(b.chi - kappa / 2.0, b, kappa);
    CHECK(std::norm(hp) == doctest::Approx(0.5 * std::norm(h0)).epsilon(1e-12));
    CHECK(std::norm(hm) == doctest::Approx(0.5 * std::norm(h0)).epsilon(1e-12));
    CHECK_THROWS_AS(transfer_fd(0.0, b, 0.0), ValidationError);
}

TEST_CASE("impulse response is causal and decays at kappa/2") {
    const double kappa = reference_kappa();
    const StateBranch b = branch_chi(-299e3);
    CHECK(impulse_response_td(-1e-12, b, kappa) == Complex(0.0));
    CHECK(std::abs(impulse_response_td(0.0, b, kappa) - std::sqrt(kappa)) <= 1e-12);
    const double t = 2.0 / kappa;
    const Complex want = std::sqrt(kappa) * std::exp(Complex(-1.0, -b.chi * t));
    CHECK(std::abs(impulse_response_td(t, b, kappa) - want) <= 1e-12 * std::abs(want));
}

TEST_CASE("zero drive stays zero under all propagation methods") {
    const double kappa = reference_kappa();
    const StateBranch b = branch_chi(299e3);
    const Waveform zero = constant_drive(Complex(0.0), 1e-9, 2000);
    for (auto m : {PropagationMethod::Convolution, PropagationMethod::Spectral,
                   PropagationMethod::Ode}) {
        const Waveform out = propagate_linear(zero, b, kappa, method(m));
        CHECK(out.samples.cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("constant drive reaches the algebraic steady state") {
    const double kappa = reference_kappa();
    const StateBranch b = branch_chi(299e3);
    const Complex c(3e-3, -1e-3);
    const double dt = 1e-9;
    // 32/kappa of settling leaves a e^{-16} ~ 1e-7 transient, inside the bound
    const auto n = static_cast<Eigen::Index>(std::llround(32.0 / kappa / dt));
    const Waveform drive = constant_drive(c, dt, n);
    const Complex a_ss = std::sqrt(kappa) * c / Complex(kappa / 2.0, b.chi);
    for (auto m : {PropagationMethod::Convolution, PropagationMethod::Ode}) {
        const Waveform out = propagate_linear(drive, b, kappa, method(m));
        CHECK(std::abs(out.samples[n - 1] - a_ss) <= 1e-6 * std::abs(a_ss));
    }
    // the spectral guard refuses inputs whose response has not decayed inside
    // the window, which a constant drive never does
    CHECK_THROWS_AS(propagate_linear(drive, b, kappa, method(PropagationMethod::Spectral)),
                    NumericalError);
}

TEST_CASE("propagation is linear in the drive") {
    const double kappa = reference_kappa();
    const StateBranch b = branch_chi(299e3);
    ShotRng rng(7, 0);
    Waveform x = constant_drive(Complex(0.0), 1e-9, 1200);
    Waveform y = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        x.samples[i] = Complex(rng.normal(), rng.normal());
        y.samples[i] = Complex(rng.normal(), rng.normal());
    }
    Waveform combo = x;
    const Complex beta(0.0, 1.0);
    combo.samples = 2.0 * x.samples + beta * y.samples;

    const Waveform px = propagate_linear(x, b, kappa);
    const Waveform py = propagate_linear(y, b, kappa);
    const Waveform pc = propagate_linear(combo, b, kappa);
    Waveform expect = px;
    expect.samples = 2.0 * px.samples + beta * py.samples;
    const double scale = pc.samples.cwiseAbs().maxCoeff();
    CHECK(sup_abs_diff(pc, expect) <= 1e-12 * scale);
}

TEST_CASE("perturbing one input sample leaves earlier output untouched") {
    const double kappa = reference_kappa();
    const StateBranch b = branch_chi(-299e3);
    const Waveform base = modulated_pulse(1e-6, 1e-9, 2e6);
    const Eigen::Index j = base.size() / 2;
    Waveform bumped = base;
    bumped.samples[j] += Complex(0.5, -0.25);

    for (auto m : {PropagationMethod::Convolution, PropagationMethod::Ode}) {
        const Waveform o1 = propagate_linear(base, b, kappa, method(m));
        const Waveform o2 = propagate_linear(bumped, b, kappa, method(m));
        // the cubic reconstruction of segment n uses samples n-2..n+1, so
        // output strictly before the perturbed index must be bit-identical
        for (Eigen::Index i = 0; i < j; ++i) CHECK(o1.samples[i] == o2.samples[i]);
        CHECK(std::abs(o1.samples[j + 1] - o2.samples[j + 1]) > 0.0);
    }
}

TEST_CASE("the three propagation methods agree on band-limited drives") {
    const double kappa = reference_kappa();
    for (double chi_hz : {299e3, -497e3}) {
        const StateBranch b = branch_chi(chi_hz);
        const Waveform in = modulated_pulse(1e-6, 1e-9, 4e6, 2e-6);
        const Waveform oc = propagate_linear(in, b, kappa, method(PropagationMethod::Convolution));
        const Waveform os = propagate_linear(in, b, kappa, method(PropagationMethod::Spectral));
        const Waveform oo = propagate_linear(in, b, kappa, method(PropagationMethod::Ode));
        const double peak = std::sqrt(peak_abs2(oc));
        CHECK(sup_abs_diff(oc, os) <= 1e-6 * peak);
        CHECK(sup_abs_diff(oc, oo) <= 1e-6 * peak);
        CHECK(sup_abs_diff(os, oo) <= 1e-6 * peak);
    }
}

TEST_CASE("free decay after the drive ends recovers kappa") {
    const double kappa = reference_kappa();
    const StateBranch b = branch_chi(299e3);
    const Waveform in = modulated_pulse(1e-6, 1e-9, 0.0, 4e-6);
    const Waveform out = propagate_linear(in, b, kappa);
    const Eigen::Index i1 = index_at_time(out, 2e-6);
    const Eigen::Index i2 = index_at_time(out, 4e-6);
    const double ratio = std::abs(out.samples[i2]) / std::abs(out.samples[i1]);
    const double kappa_fit = -2.0 * std::log(ratio) / (out.time(i2) - out.time(i1));
    CHECK(kappa_fit == doctest::Approx(kappa).epsilon(1e-6));
}

TEST_CASE("ODE integrator refuses steps beyond the stability bound") {
    const double kappa = reference_kappa();
    const StateBranch b = branch_chi(299e3);
    const Waveform in = constant_drive(Complex(1e-3, 0.0), 1e-7, 64);
    PropagationSettings s = method(PropagationMethod::Ode);
    s.oversample = 1;
    CHECK_THROWS_AS(propagate_linear(in, b, kappa, s), NumericalError);
    try {
        propagate_linear(in, b, kappa, s);
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("too coarse") != std::string::npos);
    }
}

TEST_CASE("output field combines the direct and cavity paths with the chain phases") {
    Waveform a_in = constant_drive(Complex(1.0, 0.0), 1e-9, 2);
    a_in.samples[1] = Complex(0.0, 1.0);
    Waveform a = constant_drive(Complex(2.0, 0.0), 1e-9, 2);
    a.samples[1] = Complex(0.0, -1.0);
    DetectionChain chain;
    chain.alpha = 2.0;
    chain.phi = M_PI / 2.0;
    chain.beta = 3.0;
    chain.theta = M_PI;
    const Waveform out = output_field(a_in, a, chain);
    const Complex gd = 2.0 * std::exp(Complex(0.0, -M_PI / 2.0));
    const Complex gc = 3.0 * std::exp(Complex(0.0, -M_PI));
    for (Eigen::Index i = 0; i < 2; ++i)
        CHECK(std::abs(out.samples[i] - (gd * a_in.samples[i] + gc * a.samples[i])) <= 1e-15 * 5.0);

    Waveform off_grid = a;
    off_grid.t0 = 1e-9;
    CHECK_THROWS_AS(output_field(a_in, off_grid, chain), ValidationError);
}
