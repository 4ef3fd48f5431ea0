#pragma once

#include "drachma/config.hpp"
#include "drachma/dynamics.hpp"
#include "drachma/response.hpp"
#include "drachma/rng.hpp"
#include "drachma/trial.hpp"
#include "drachma/types.hpp"

#include <vector>

namespace drachma {

/// Engineered state-difference output for a two-branch set,
///   Z_RO(t) = beta e^{-i theta} (a_1(t) - a_0(t)),
/// computed from the linear designed branch fields (equals
/// beta e^{-i theta} i (chi_0 - chi_1) a_T / sqrt(kappa)).
Waveform readout_signal(const TrialFunction& tf, const std::vector<StateBranch>& branches,
                        double kappa, const DetectionChain& chain, double dt = 1e-9);

/// Matched-filter weights W(t) = [Z_RO(t)]^*.
Waveform weight_function(const Waveform& z_ro);

/// One weighted shot integral S = sum_k W(t_k) [a_out(t_k) + xi_k] dt with
/// complex white noise of per-quadrature variance 1/(2 eta dt) per sample.
/// With add_noise = false this is the plain inner product.
Complex integrate_shot(const Waveform& a_out, const Waveform& weights, double eta, ShotRng& rng,
                       bool add_noise = true);

struct ShotEnsemble {
    int prepared = 0;
    Eigen::VectorXcd values;
    std::uint64_t seed = 0;
};

/// Everything simulate_shots needs besides the prepared state and shot count.
struct ShotSimSetup {
    Waveform pulse;                  // drive, grid defines the integration window
    Waveform weights;                // matched filter on the same grid
    std::vector<StateBranch> branches;
    ResonatorParams resonator;
    DetectionChain chain;
    IntegratorSettings integrator{};
    bool include_decay = true;       // draw T1 jumps per shot
    bool add_noise = true;
};

/// Monte Carlo over shots: per shot an (optionally stochastic) trajectory,
/// detection chain, then the noisy weighted integral.  Shot k draws from the
/// counter-based stream (seed, k), so ensembles are reproducible bitwise.
ShotEnsemble simulate_shots(const ShotSimSetup& setup, int prepared, int n_shots,
                            std::uint64_t seed);

struct GaussianFitParams {
    double mu0 = 0.0;      // prepared-0 peak position along the discrimination axis
    double mu1 = 0.0;      // prepared-1 peak position
    double sigma = 0.0;    // shared width
    double weight1_prep0 = 0.0; // weight of the mu1 peak inside the prepared-0 ensemble
    double weight0_prep1 = 0.0; // weight of the mu0 peak inside the prepared-1 ensemble
    bool degenerate = false;    // means closer than 0.1 sigma: split not identifiable
    int iterations = 0;
    double chi2 = 0.0;
};

struct HistogramPair {
    Eigen::VectorXd centers;
    Eigen::VectorXd count0;
    Eigen::VectorXd count1;
    double bin_width = 0.0;
};

/// Freedman-Diaconis histograms of both ensembles on a common bin grid.
HistogramPair histogram_pair(const Eigen::VectorXd& x0, const Eigen::VectorXd& x1);

/// Joint least-squares fit (Poisson-weighted, Levenberg-Marquardt) of both
/// binned ensembles to two Gaussians sharing mu0, mu1, sigma.
GaussianFitParams fit_double_gaussian(const Eigen::VectorXd& x0, const Eigen::VectorXd& x1);

struct AssignmentReport {
    Complex axis{1.0, 0.0};      // unit vector of mean separation in the complex plane
    double threshold = 0.0;      // empirical-error-minimizing threshold
    double threshold_gaussian = 0.0; // midpoint of the fitted means
    double p10 = 0.0;            // P(assign 1 | prepared 0)
    double p01 = 0.0;            // P(assign 0 | prepared 1)
    double error = 0.0;          // (p10 + p01) / 2 at the empirical threshold
    double error_gaussian_overlap = 0.0; // 1/2 erfc(|mu1-mu0| / (2 sqrt(2) sigma))
    GaussianFitParams fit;
    Eigen::VectorXd proj0, proj1; // projections along the axis
};

/// Project both ensembles on the mean-separation axis, pick the threshold that
/// minimizes (P(1|0) + P(0|1))/2, and report empirical and Gaussian-overlap
/// errors.  Identical ensembles report error ~ 0.5 (never throw).
AssignmentReport assignment_error(const ShotEnsemble& prep0, const ShotEnsemble& prep1);

enum class SweepMode { MaxSignal, Error };

struct SweepRow {
    double tp = 0.0;             // seconds
    double peak_signal = 0.0;    // max |Z_RO|
    double snr = 0.0;            // sqrt(2 eta integral |Z_RO|^2 dt)
    double error = 0.0;          // assignment error (Error mode only, else NaN)
    double contrast_db = 0.0;    // worst-branch reset contrast of the synthesized pulse
};

struct SweepOptions {
    SweepMode mode = SweepMode::MaxSignal;
    double target_photons = 200.0;
    int n_shots = 20000;
    std::uint64_t seed = 1;
    bool kerr = true;  // synthesize with the branch zeta (one iteration)
    double dt = 1e-9;
    IntegratorSettings integrator{};
};

/// Readout quality versus pulse duration at fixed peak photon number.
std::vector<SweepRow> sweep_duration(const ExperimentConfig& cfg, const std::vector<double>& tp_list,
                                     const SweepOptions& options = {});

struct ChainFit {
    Complex gain_direct{0.0, 0.0};  // alpha e^{-i phi}
    Complex gain_cavity{0.0, 0.0};  // beta e^{-i theta}
    double alpha = 0.0, phi = 0.0, beta = 0.0, theta = 0.0;
    double condition = 0.0;         // condition number of the 2x2 normal system
    double residual_rms = 0.0;
};

/// Least-squares fit of the two complex chain gains from a drive and a
/// measured output, using the linear branch response as the cavity regressor.
ChainFit fit_detection_chain(const Waveform& a_in, const Waveform& a_out_measured,
                             const StateBranch& branch, double kappa,
                             const PropagationSettings& settings = {});

struct AcStarkResult {
    Eigen::VectorXd drive_amps;      // input scale factors
    Eigen::VectorXd n_ss;            // steady-state photon numbers
    Eigen::VectorXd delta_ac;        // 2 chi n_ss, rad/s
    Eigen::VectorXd power_pw;        // synthetic detected power
    double photons_per_pw = 0.0;     // recovered from the delta_ac vs power fit
    double slope_vs_n = 0.0;         // fitted slope of delta_ac vs n (should be 2 chi)
    bool kerr_warning = false;       // Kerr shift above 5% of the AC-Stark shift
};

/// AC-Stark photon-number calibration: square drives to steady state, the
/// simulated shift Delta_AC = 2 chi n_ss against synthetic detected power
/// gain_pw_per_photon * n_ss; the fitted slope recovers photons per pW.
AcStarkResult ac_stark_calibration(const StateBranch& branch, double kappa,
                                   const std::vector<double>& drive_amps,
                                   double gain_pw_per_photon,
                                   const IntegratorSettings& settings = {});

} // namespace drachma
