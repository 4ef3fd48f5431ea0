#include "drachma/dynamics.hpp"

#include "drachma/response.hpp"
#include "drachma/rng.hpp"
#include "drachma/synthesis.hpp"
#include "drachma/trial.hpp"
#include "doctest.h"
#include "helpers.hpp"

#include <cmath>
#include <string>

using namespace drachma;
using drachma::testing::reference_kappa;
using drachma::testing::qubit_branches;
using drachma::testing::qubit_trial;
using drachma::testing::sup_abs_diff;

namespace {

std::vector<StateBranch> decaying_branches(double rate = 20000.0) {
    auto branches = qubit_branches();
    branches[1].decay_rate = rate;
    branches[1].decay_target = 0;
    return branches;
}

Waveform constant_drive(Complex c, double dt, Eigen::Index n) {
    Waveform w;
    w.dt = dt;
    w.t0 = 0.0;
    w.samples = Eigen::VectorXcd::Constant(n, c);
    return w;
}

} // namespace

TEST_CASE("without Kerr the nonlinear integrator is the linear ODE path, bit for bit") {
    const double kappa = reference_kappa();
    const StateBranch b = qubit_branches()[0]; // zeta = 0
    const Waveform u = synth_multi(qubit_trial(), qubit_branches(), kappa);

    const Waveform a_nl = evolve_branch(u, b, kappa);
    PropagationSettings ps;
    ps.method = PropagationMethod::Ode;
    const Waveform a_ode = propagate_linear(u, b, kappa, ps);
    CHECK(sup_abs_diff(a_nl, a_ode) == 0.0);

    const Waveform a_conv = propagate_linear(u, b, kappa);
    CHECK(sup_abs_diff(a_nl, a_conv) <= 1e-7 * std::sqrt(peak_abs2(a_conv)));
}

TEST_CASE("constant drive with Kerr satisfies the shifted steady-state equation") {
    const double kappa = reference_kappa();
    StateBranch b = qubit_branches(-175.0, 0.0)[0];
    const Complex c(4e3, 0.0);  // ~8.5 steady-state photons, Kerr shift ~2% of chi
    const double dt = 1e-9;
    const auto n = static_cast<Eigen::Index>(std::llround(100.0 / kappa / dt));
    const Waveform a = evolve_branch(constant_drive(c, dt, n), b, kappa);
    const Complex a_ss = a.samples[n - 1];
    const double shift = b.chi + 4.0 * b.zeta * std::norm(a_ss);
    const Complex residual = Complex(kappa / 2.0, shift) * a_ss - std::sqrt(kappa) * c;
    CHECK(std::abs(residual) <= 1e-6 * std::abs(std::sqrt(kappa) * c));
    // the Kerr term moved the operating point measurably off the linear one
    const Complex a_lin = std::sqrt(kappa) * c / Complex(kappa / 2.0, b.chi);
    CHECK(std::abs(a_ss - a_lin) > 1e-3 * std::abs(a_lin));
}

TEST_CASE("decay-free stochastic trajectory is the deterministic one") {
    const double kappa = reference_kappa();
    const auto branches = qubit_branches(); // no decay anywhere
    const Waveform u = synth_multi(qubit_trial(), branches, kappa);
    ShotRng rng(11, 0);
    const DecayTrajectory traj = evolve_with_decay(u, branches, 1, rng, kappa);
    CHECK(traj.jumps.empty());
    CHECK(traj.final_branch == 1);
    const Waveform ref = evolve_branch(u, branches[1], kappa);
    CHECK(sup_abs_diff(traj.field, ref) == 0.0);
}

TEST_CASE("an immediate jump reproduces the target-branch trajectory") {
    const double kappa = reference_kappa();
    auto branches = decaying_branches(1e12); // jumps within picoseconds
    const Waveform u = synth_multi(qubit_trial(), qubit_branches(), kappa);
    ShotRng rng(3, 5);
    const DecayTrajectory traj = evolve_with_decay(u, branches, 1, rng, kappa);
    REQUIRE(traj.jumps.size() == 1);
    CHECK(traj.jumps[0].from == 1);
    CHECK(traj.jumps[0].to == 0);
    CHECK(traj.jumps[0].time < 1e-10);
    CHECK(traj.final_branch == 0);
    const Waveform ref = evolve_branch(u, branches[0], kappa);
    CHECK(sup_abs_diff(traj.field, ref) <= 1e-4 * std::sqrt(peak_abs2(ref)));
}

TEST_CASE("jump times follow the exponential law") {
    const auto branches = decaying_branches(20000.0);
    const double t_end = 1e-6;
    const int n_draws = 1000000;
    int jumped = 0;
    for (int k = 0; k < n_draws; ++k) {
        ShotRng shot(17, static_cast<std::uint64_t>(k));
        if (!sample_decay_path(branches, 1, 0.0, t_end, shot).empty()) ++jumped;
    }
    const double frac = static_cast<double>(jumped) / n_draws;
    const double p = 1.0 - std::exp(-20000.0 * t_end); // 0.0198013...
    CHECK(std::abs(frac - p) <= 4.2e-4);               // 3 sigma at 1e6 draws

    // starting from a branch with no decay: never any jumps
    ShotRng quiet(1, 1);
    CHECK(sample_decay_path(branches, 0, 0.0, t_end, quiet).empty());
}

TEST_CASE("decay validation") {
    auto branches = decaying_branches();
    branches[1].decay_target.reset();
    ShotRng rng(1, 0);
    CHECK_THROWS_AS(sample_decay_path(branches, 1, 0.0, 1e-6, rng), ValidationError);
    branches[1].decay_target = 1; // decay into itself
    CHECK_THROWS_AS(sample_decay_path(branches, 1, 0.0, 1e-6, rng), ValidationError);
}

TEST_CASE("the integrator converges at fourth order in the substep") {
    const double kappa = reference_kappa();
    const StateBranch b = qubit_branches(-175.0, 0.0)[0]; // Kerr on
    TrialFunction tf = qubit_trial();
    const Waveform u = synth_multi(tf, qubit_branches(), kappa, 4e-9);

    auto run = [&](int oversample) {
        IntegratorSettings s;
        s.oversample = oversample;
        return evolve_branch(u, b, kappa, s);
    };
    const Waveform ref = run(32);
    const double e2 = sup_abs_diff(run(2), ref);
    const double e4 = sup_abs_diff(run(4), ref);
    REQUIRE(e2 > 0.0);
    REQUIRE(e4 > 0.0);
    const double slope = std::log2(e2 / e4);
    CHECK(slope > 3.5);
    CHECK(slope < 4.6);
}

TEST_CASE("the integrator refuses an unstable step and says what it needs") {
    const double kappa = reference_kappa();
    const StateBranch b = qubit_branches()[0];
    const Waveform u = constant_drive(Complex(1e-3, 0.0), 1e-7, 32);
    IntegratorSettings s;
    s.oversample = 1;
    CHECK_THROWS_AS(evolve_branch(u, b, kappa, s), NumericalError);
    try {
        evolve_branch(u, b, kappa, s);
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("too coarse") != std::string::npos);
    }
}

TEST_CASE("reset metrics on a hand-built trace") {
    Waveform trace;
    trace.dt = 1e-9;
    trace.t0 = 0.0;
    trace.samples.resize(7);
    trace.samples << Complex(1.0), Complex(4.0), Complex(2.0), Complex(0.5), Complex(0.02),
        Complex(0.005), Complex(0.001);
    const double kappa = 1e9;
    const ResetMetrics m = reset_metrics(trace, 3e-9, kappa, 1e-4);
    CHECK(m.peak_photons == doctest::Approx(16.0).epsilon(1e-15));
    CHECK(m.peak_time == doctest::Approx(1e-9).epsilon(1e-12));
    CHECK(m.residual_photons == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(m.contrast_db == doctest::Approx(10.0 * std::log10(64.0)).epsilon(1e-12));
    // |a|^2 first dips below 1e-4 at sample 5 (2.5e-5), 4 ns after the peak
    CHECK(m.floor_reached);
    CHECK(m.time_to_floor_kappa == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("reset metrics cap the contrast when the residual underflows") {
    Waveform trace;
    trace.dt = 1e-9;
    trace.t0 = 0.0;
    trace.samples.resize(3);
    trace.samples << Complex(1.0), Complex(0.5), Complex(0.0);
    const ResetMetrics m = reset_metrics(trace, 2e-9, 1e6, 1e-3);
    CHECK(m.contrast_db == kContrastCapDb);
    CHECK(m.floor_reached);
}

TEST_CASE("deterministic pulse simulation pads, evolves and scores each branch") {
    const double kappa = reference_kappa();
    const auto branches = qubit_branches();
    const Waveform u = synth_multi(qubit_trial(), branches, kappa);
    ResonatorParams res;
    res.kappa = kappa;
    res.noise_floor_photons = 5e-3;
    DetectionChain chain;
    chain.beta = std::sqrt(kappa);
    const SimResult r = simulate_pulse(u, branches, res, chain, 10.0);

    REQUIRE(r.branches.size() == 2);
    CHECK(r.t_pulse_end == doctest::Approx(1e-6).epsilon(1e-12));
    const auto pad = static_cast<Eigen::Index>(std::ceil(10.0 / kappa / u.dt));
    for (const BranchSim& bs : r.branches) {
        CHECK(bs.intra.size() == u.size() + pad);
        CHECK(same_grid(bs.intra, bs.output));
        // the design targets 200 photons on both branches (|chi| is symmetric)
        CHECK(bs.metrics.peak_photons > 195.0);
        CHECK(bs.metrics.peak_photons < 205.0);
        // exact linear nulling: residual at machine level, far beyond the cap
        CHECK(bs.metrics.contrast_db == kContrastCapDb);
        CHECK(bs.metrics.floor_reached);
    }
}
