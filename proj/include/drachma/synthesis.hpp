#pragma once

#include "drachma/dynamics.hpp"
#include "drachma/trial.hpp"
#include "drachma/types.hpp"

#include <vector>

namespace drachma {

/// The product of inverse single-branch transfer operators
///   prod_j (kappa/2 + i chi_j + d/dt) / kappa^{N/2}
/// expanded into constant coefficients of the trial derivatives via elementary
/// symmetric polynomials: a_in = sum_k e_{N-k} a_T^{(k)} / kappa^{N/2}.
struct OperatorProduct {
    std::vector<Complex> factors;    // kappa/2 + i chi_j, ascending branch order
    double normalization = 1.0;      // kappa^{N/2}

    static OperatorProduct for_branches(const std::vector<StateBranch>& branches, double kappa);

    /// e_q of the factors for q = 0..N; coefficient of a_T^{(k)} is e_{N-k}.
    std::vector<Complex> expansion_coefficients() const;
};

/// Drive that makes branch 0 follow a_T exactly:
///   a_in = [kappa/2 + i chi_0 + d/dt] a_T / sqrt(kappa).
Waveform synth_single(const TrialFunction& tf, const StateBranch& branch, double kappa,
                      double dt = 1e-9);

/// Drive nulling the field of all N branches at T_p (exact derivatives, no
/// numerical differentiation).  Duplicate chi values are tolerated with a
/// warning to stderr.
Waveform synth_multi(const TrialFunction& tf, const std::vector<StateBranch>& branches,
                     double kappa, double dt = 1e-9);

/// Linear design prediction for the intra-cavity field of branch j under the
/// synth_multi drive: [prod_{k != j} (kappa/2 + i chi_k + d/dt)] a_T / kappa^{(N-1)/2}.
Waveform designed_branch_field(const TrialFunction& tf, const std::vector<StateBranch>& branches,
                               std::size_t j, double kappa, double dt = 1e-9);

/// First-iteration per-branch field estimates |a~_j(t)|^2 used inside the Kerr
/// correction; equals designed_branch_field for every branch.
std::vector<Waveform> kerr_predict_fields(const TrialFunction& tf,
                                          const std::vector<StateBranch>& branches, double kappa,
                                          double dt = 1e-9);

struct KerrOptions {
    int iterations = 1;       // 1 = analytic predictor only; >1 = fixed-point refinement
    double tolerance = 1e-4;  // relative pulse change considered converged
    double dt = 1e-9;
    IntegratorSettings integrator{}; // used by fixed-point refinement simulations
};

struct KerrDiagnostics {
    int iterations_used = 1;
    double last_rel_change = 0.0;      // between the final two iterates (0 for 1 iteration)
    double ordering_sensitivity = 0.0; // max |ascending - descending| / max |a_in|
};

/// Kerr-corrected drive: factors (kappa/2 + i [chi_j + 4 zeta_j |a~_j(t)|^2] + d/dt)
/// applied right-to-left in ascending branch order, with d/dt acting exactly on
/// the accumulated expression (time derivatives of |a~_j|^2 are finite
/// combinations of trial derivatives).  With all zeta = 0 this routes through
/// synth_multi.  Iterations >= 2 replace |a~_j|^2 with the nonlinear
/// simulator's field from the previous candidate pulse and throw
/// NumericalError when still changing by more than `tolerance` at the end.
Waveform synth_kerr(const TrialFunction& tf, const std::vector<StateBranch>& branches,
                    double kappa, const KerrOptions& options = {},
                    KerrDiagnostics* diagnostics = nullptr);

/// Order-of-magnitude Kerr estimate from transmon coupling and detuning:
/// zeta ~ -g^4 / Delta^3 (all angular).  Throws on zero detuning.
double kerr_estimate(double g, double delta);

struct ZetaScanPoint {
    std::vector<double> zeta;  // candidate zeta per branch, rad/s
    double worst_contrast_db = 0.0;
};

struct ZetaScanResult {
    std::vector<ZetaScanPoint> points; // row-major over the cartesian grid
    std::vector<double> best_zeta;
    double best_contrast_db = 0.0;
};

/// Incremental zeta calibration: synthesize with each candidate zeta vector,
/// simulate against the plant (the branches' own zeta), and rank by the
/// worst-branch reset contrast at T_p.
ZetaScanResult kerr_scan(const TrialFunction& tf, const std::vector<StateBranch>& plant,
                         double kappa, const std::vector<std::vector<double>>& zeta_axes,
                         double noise_floor_photons = 5e-3, double dt = 1e-9,
                         const IntegratorSettings& settings = {});

/// One linear rescale of the trial amplitude so the designed branch-0 field
/// peaks at `target_photons` (the drive-amplitude target; the synthesis map is
/// homogeneous in the amplitude).
TrialFunction scale_to_peak(const TrialFunction& tf, const std::vector<StateBranch>& branches,
                            double kappa, double target_photons, double dt = 1e-9);

} // namespace drachma
