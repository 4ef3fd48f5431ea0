#pragma once

#include "drachma/rng.hpp"
#include "drachma/types.hpp"

#include <vector>

namespace drachma {

struct IntegratorSettings {
    int oversample = 10;          // internal RK4 substeps per input sample
    double stability_limit = 0.1; // bound on (kappa/2 + |chi| + 4|zeta| n) * dt_internal
};

/// Semiclassical cavity trajectory for one branch,
///   da/dt = -(kappa/2 + i [chi + 4 zeta |a|^2]) a + sqrt(kappa) a_in(t),
/// integrated with fixed-step RK4 from vacuum.  Refuses (NumericalError, with
/// the step that would be needed) when the stability bound is exceeded.
Waveform evolve_branch(const Waveform& a_in, const StateBranch& branch, double kappa,
                       const IntegratorSettings& settings = {});

struct Jump {
    double time = 0.0;
    int from = 0;
    int to = 0;
};

struct DecayTrajectory {
    Waveform field;
    std::vector<Jump> jumps;
    int final_branch = 0;
};

/// Sample a cascade of decay times for a shot starting in `initial`; jumps
/// beyond t_end are not recorded.  Times are exponential in each branch's
/// decay_rate (plain 1/s).
std::vector<Jump> sample_decay_path(const std::vector<StateBranch>& branches, int initial,
                                    double t_begin, double t_end, ShotRng& rng);

/// One stochastic trajectory with qubit decay: the branch parameters switch at
/// the sampled jump times while the field stays continuous.  With no jump in
/// the window this is bit-identical to evolve_branch on the initial branch.
DecayTrajectory evolve_with_decay(const Waveform& a_in, const std::vector<StateBranch>& branches,
                                  int initial, ShotRng& rng, double kappa,
                                  const IntegratorSettings& settings = {});

struct ResetMetrics {
    double peak_photons = 0.0;
    double peak_time = 0.0;
    double residual_photons = 0.0;   // |a(T_p)|^2
    double contrast_db = 0.0;        // 10 log10(peak / residual), capped at 120
    double time_to_floor_kappa = 0.0; // from the photon-number peak, in units of 1/kappa
    bool floor_reached = false;      // when false, time_to_floor_kappa is a lower bound
};

inline constexpr double kContrastCapDb = 120.0;

/// Reset quality of one simulated trace: peak and residual photon number,
/// contrast, and how long after the peak the field falls below the noise floor
/// (first crossing at or after t_pulse_end).
ResetMetrics reset_metrics(const Waveform& trace, double t_pulse_end, double kappa,
                           double noise_floor_photons);

struct BranchSim {
    int label = 0;
    Waveform intra;
    Waveform output;
    ResetMetrics metrics;
};

struct SimResult {
    std::vector<BranchSim> branches;
    double kappa = 0.0;
    double t_pulse_end = 0.0;
};

/// Deterministic per-branch simulation of a pulse: pads the drive with
/// `tail_kappa` units of 1/kappa of zeros, evolves every branch, applies the
/// detection chain and computes reset metrics at the end of the drive.
SimResult simulate_pulse(const Waveform& a_in, const std::vector<StateBranch>& branches,
                         const ResonatorParams& res, const DetectionChain& chain,
                         double tail_kappa = 10.0, const IntegratorSettings& settings = {});

} // namespace drachma
