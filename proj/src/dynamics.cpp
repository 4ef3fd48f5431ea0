#include "drachma/dynamics.hpp"

#include "drachma/response.hpp"
#include "evolve_detail.hpp"
#include "rk4.hpp"

#include <algorithm>
#include <cmath>

namespace drachma {

namespace {

std::size_t index_of_label(const std::vector<StateBranch>& branches, int label,
                           const char* context) {
    for (std::size_t i = 0; i < branches.size(); ++i)
        if (branches[i].label == label) return i;
    throw ValidationError(std::string(context) + ": no branch with label " +
                          std::to_string(label));
}

} // namespace

Waveform detail::integrate_with_jumps(const Waveform& a_in,
                                      const std::vector<StateBranch>& branches,
                                      std::size_t initial, const std::vector<Jump>& jumps,
                                      double kappa, const IntegratorSettings& settings) {
    const double h = a_in.dt / settings.oversample;
    const double sqrt_kappa = std::sqrt(kappa);
    std::size_t cur = initial;
    detail::CavityRhs f{kappa / 2.0, branches[cur].chi, branches[cur].zeta, sqrt_kappa};

    const detail::CausalCubic u(a_in);
    Waveform out;
    out.dt = a_in.dt;
    out.t0 = a_in.t0;
    out.samples.setZero(a_in.size());

    std::size_t next_jump = 0;
    Complex a(0.0);
    const double inv_os = 1.0 / settings.oversample;
    for (Eigen::Index n = 0; n + 1 < a_in.size(); ++n) {
        const detail::SegmentPoly p = u.segment(n);
        const double t_seg = a_in.time(n);
        for (int s = 0; s < settings.oversample; ++s) {
            double x = s * inv_os;                 // fraction within the segment
            const double x_end = (s + 1) * inv_os;
            while (x < x_end) {
                double x_stop = x_end;
                bool switch_after = false;
                if (next_jump < jumps.size()) {
                    const double xj = (jumps[next_jump].time - t_seg) / a_in.dt;
                    if (xj < x_end) {
                        x_stop = std::max(xj, x);
                        switch_after = true;
                    }
                }
                const double rate =
                    kappa / 2.0 + std::abs(f.chi) + 4.0 * std::abs(f.zeta) * std::norm(a);
                if (rate * h >= settings.stability_limit)
                    detail::refuse_step(rate, settings.stability_limit, settings.oversample);
                const double hs = (x_stop - x) * a_in.dt;
                if (hs > 0.0)
                    a = detail::rk4_step(f, a, hs, p.eval(x), p.eval(0.5 * (x + x_stop)),
                                         p.eval(x_stop));
                x = x_stop;
                if (switch_after) {
                    cur = index_of_label(branches, jumps[next_jump].to, "evolve_with_decay");
                    f.chi = branches[cur].chi;
                    f.zeta = branches[cur].zeta;
                    ++next_jump;
                }
            }
        }
        out.samples[n + 1] = a;
    }
    return out;
}

Waveform evolve_branch(const Waveform& a_in, const StateBranch& branch, double kappa,
                       const IntegratorSettings& settings) {
    return detail::integrate_cavity(a_in, kappa, branch.chi, branch.zeta, settings.oversample,
                                    settings.stability_limit);
}

std::vector<Jump> sample_decay_path(const std::vector<StateBranch>& branches, int initial,
                                    double t_begin, double t_end, ShotRng& rng) {
    for (const StateBranch& b : branches)
        if (b.decay_rate > 0.0 && (!b.decay_target || *b.decay_target == b.label))
            throw ValidationError("branch " + std::to_string(b.label) +
                                  ": decay_target required when decay_rate > 0");
    std::size_t cur = index_of_label(branches, initial, "sample_decay_path");
    std::vector<Jump> jumps;
    double t = t_begin;
    while (true) {
        const StateBranch& b = branches[cur];
        const double wait = rng.exponential(b.decay_rate);
        if (!(wait < t_end - t)) break; // also catches +inf for stable branches
        t += wait;
        const int to = *b.decay_target;
        jumps.push_back({t, b.label, to});
        cur = index_of_label(branches, to, "sample_decay_path");
    }
    return jumps;
}

DecayTrajectory evolve_with_decay(const Waveform& a_in, const std::vector<StateBranch>& branches,
                                  int initial, ShotRng& rng, double kappa,
                                  const IntegratorSettings& settings) {
    validate_waveform(a_in, "a_in");
    const std::size_t idx = index_of_label(branches, initial, "evolve_with_decay");
    DecayTrajectory traj;
    traj.jumps = sample_decay_path(branches, initial, a_in.t0, a_in.t_end(), rng);
    traj.final_branch = traj.jumps.empty() ? initial : traj.jumps.back().to;
    if (traj.jumps.empty())
        traj.field = evolve_branch(a_in, branches[idx], kappa, settings);
    else
        traj.field =
            detail::integrate_with_jumps(a_in, branches, idx, traj.jumps, kappa, settings);
    return traj;
}

ResetMetrics reset_metrics(const Waveform& trace, double t_pulse_end, double kappa,
                           double noise_floor_photons) {
    validate_waveform(trace, "trace");
    if (!(kappa > 0.0)) throw ValidationError("kappa: must be > 0");
    if (!(noise_floor_photons > 0.0))
        throw ValidationError("noise_floor_photons: must be > 0");

    ResetMetrics m;
    Eigen::Index peak_idx = 0;
    m.peak_photons = trace.samples.cwiseAbs2().maxCoeff(&peak_idx);
    m.peak_time = trace.time(peak_idx);

    const Eigen::Index end_idx = index_at_time(trace, t_pulse_end);
    m.residual_photons = std::norm(trace.samples[end_idx]);

    if (m.peak_photons <= 0.0)
        m.contrast_db = 0.0;
    else if (m.residual_photons <= 0.0 ||
             10.0 * std::log10(m.peak_photons / m.residual_photons) > kContrastCapDb)
        m.contrast_db = kContrastCapDb;
    else
        m.contrast_db = 10.0 * std::log10(m.peak_photons / m.residual_photons);

    // Time from the photon-number peak until the trace stays of interest:
    // first crossing of the noise floor at or after the pulse end.
    m.floor_reached = false;
    double t_floor = trace.t_end();
    for (Eigen::Index i = end_idx; i < trace.size(); ++i) {
        if (std::norm(trace.samples[i]) <= noise_floor_photons) {
            t_floor = trace.time(i);
            m.floor_reached = true;
            break;
        }
    }
    m.time_to_floor_kappa = (t_floor - m.peak_time) * kappa;
    return m;
}

SimResult simulate_pulse(const Waveform& a_in, const std::vector<StateBranch>& branches,
                         const ResonatorParams& res, const DetectionChain& chain,
                         double tail_kappa, const IntegratorSettings& settings) {
    validate_waveform(a_in, "a_in");
    if (branches.empty()) throw ValidationError("branches: at least one branch required");
    if (!(res.kappa > 0.0)) throw ValidationError("resonator.kappa_hz: must be > 0");
    if (tail_kappa < 0.0) throw ValidationError("tail_kappa: must be >= 0");

    const auto n_tail =
        static_cast<Eigen::Index>(std::ceil(tail_kappa / res.kappa / a_in.dt));
    Waveform drive;
    drive.dt = a_in.dt;
    drive.t0 = a_in.t0;
    drive.samples.setZero(a_in.size() + n_tail);
    drive.samples.head(a_in.size()) = a_in.samples;

    SimResult result;
    result.kappa = res.kappa;
    result.t_pulse_end = a_in.t_end();
    for (const StateBranch& b : branches) {
        BranchSim sim;
        sim.label = b.label;
        sim.intra = evolve_branch(drive, b, res.kappa, settings);
        sim.output = output_field(drive, sim.intra, chain);
        sim.metrics =
            reset_metrics(sim.intra, result.t_pulse_end, res.kappa, res.noise_floor_photons);
        result.branches.push_back(std::move(sim));
    }
    return result;
}

} // namespace drachma
