#include "drachma/synthesis.hpp"

#include "drachma/response.hpp"
#include "jet.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <set>

namespace drachma {

namespace {

void check_smoothness(const TrialFunction& tf, std::size_t n_branches) {
    validate_trial(tf);
    if (tf.exponent_m <= static_cast<int>(n_branches))
        throw ValidationError("trial.exponent_m: must exceed the branch count "
                              "(boundary smoothness)");
}

void warn_duplicate_chi(const std::vector<StateBranch>& branches) {
    std::set<double> seen;
    for (const StateBranch& b : branches)
        if (!seen.insert(b.chi).second) {
            std::cerr << "warning: duplicate dispersive shift " << hz_from_angular(b.chi)
                      << " Hz in branch set; the operator product is still well-defined\n";
            return;
        }
}

/// a_in(t_i) = sum_k e_{N-k} a_T^{(k)}(t_i) / kappa^{N/2} on the trial grid.
Waveform expand_product(const TrialFunction& tf, const OperatorProduct& prod, double dt) {
    const std::vector<Complex> e = prod.expansion_coefficients();
    const auto n_factors = static_cast<int>(prod.factors.size());
    Waveform out = trial_grid(tf, dt, 0);
    out.samples *= e[n_factors];
    for (int k = 1; k <= n_factors; ++k)
        out.samples += e[n_factors - k] * trial_grid(tf, dt, k).samples;
    out.samples /= prod.normalization;
    return out;
}

std::vector<StateBranch> complement(const std::vector<StateBranch>& branches, std::size_t j) {
    std::vector<StateBranch> rest;
    for (std::size_t k = 0; k < branches.size(); ++k)
        if (k != j) rest.push_back(branches[k]);
    return rest;
}

} // namespace

OperatorProduct OperatorProduct::for_branches(const std::vector<StateBranch>& branches,
                                              double kappa) {
    if (!(kappa > 0.0)) throw ValidationError("kappa: must be > 0");
    OperatorProduct p;
    for (const StateBranch& b : branches) p.factors.emplace_back(kappa / 2.0, b.chi);
    p.normalization = std::pow(kappa, 0.5 * static_cast<double>(branches.size()));
    return p;
}

std::vector<Complex> OperatorProduct::expansion_coefficients() const {
    // prod_j (x + f_j) = sum_k e_{N-k} x^k with e_q the elementary symmetric
    // polynomials of the factors.
    std::vector<Complex> e{Complex(1.0)};
    for (const Complex& f : factors) {
        e.push_back(Complex(0.0));
        for (std::size_t q = e.size() - 1; q >= 1; --q) e[q] += f * e[q - 1];
    }
    return e;
}

Waveform synth_single(const TrialFunction& tf, const StateBranch& branch, double kappa,
                      double dt) {
    return synth_multi(tf, {branch}, kappa, dt);
}

Waveform synth_multi(const TrialFunction& tf, const std::vector<StateBranch>& branches,
                     double kappa, double dt) {
    if (branches.empty()) throw ValidationError("branches: at least one branch required");
    check_smoothness(tf, branches.size());
    warn_duplicate_chi(branches);
    return expand_product(tf, OperatorProduct::for_branches(branches, kappa), dt);
}

Waveform designed_branch_field(const TrialFunction& tf, const std::vector<StateBranch>& branches,
                               std::size_t j, double kappa, double dt) {
    if (j >= branches.size()) throw ValidationError("branch index out of range");
    check_smoothness(tf, branches.size());
    if (branches.size() == 1) return trial_grid(tf, dt, 0); // single state: the trial itself
    return expand_product(tf, OperatorProduct::for_branches(complement(branches, j), kappa), dt);
}

std::vector<Waveform> kerr_predict_fields(const TrialFunction& tf,
                                          const std::vector<StateBranch>& branches, double kappa,
                                          double dt) {
    std::vector<Waveform> fields;
    for (std::size_t j = 0; j < branches.size(); ++j)
        fields.push_back(designed_branch_field(tf, branches, j, kappa, dt));
    return fields;
}

namespace {

using detail::Jet;

/// Jets (truncated derivative stacks) of the trial function on the grid.
std::vector<Jet> trial_jets(const TrialFunction& tf, double dt, std::size_t len) {
    const Eigen::Index n = trial_sample_count(tf, dt);
    std::vector<Jet> jets(n, Jet(len));
    for (Eigen::Index i = 0; i < n; ++i)
        for (std::size_t r = 0; r < len; ++r)
            jets[i][r] = trial_eval(tf, static_cast<double>(i) * dt, static_cast<int>(r));
    return jets;
}

/// Derivative stack of the complementary linear design field of branch j,
/// truncated to `len` orders, from a trial jet with enough extra orders.
Jet designed_field_jet(const Jet& trial, const std::vector<Complex>& e_comp, double norm,
                       std::size_t len) {
    const std::size_t n1 = e_comp.size() - 1; // N - 1 derivative orders consumed
    Jet out(len, Complex(0.0));
    for (std::size_t r = 0; r < len; ++r) {
        for (std::size_t k = 0; k <= n1; ++k) out[r] += e_comp[n1 - k] * trial[k + r];
        out[r] /= norm;
    }
    return out;
}

/// Apply one operator factor (kappa/2 + i s(t) + d/dt) to the accumulated jet;
/// the result has one derivative order fewer.
Jet apply_factor(const Jet& acc, const Jet& shift, double half_kappa) {
    const std::size_t len = acc.size() - 1;
    Jet out(len);
    const Jet prod = detail::jet_mul(shift, acc);
    for (std::size_t r = 0; r < len; ++r)
        out[r] = half_kappa * acc[r] + Complex(0.0, 1.0) * prod[r] + acc[r + 1];
    return out;
}

/// Full Kerr-corrected product at one sample: factors applied right-to-left
/// over the given branch order.
Complex kerr_product_at(const Jet& trial, const std::vector<Jet>& shifts,
                        const std::vector<std::size_t>& order, double half_kappa, double norm) {
    Jet acc(trial.begin(), trial.begin() + static_cast<std::ptrdiff_t>(shifts.size() + 1));
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        acc = apply_factor(acc, shifts[*it], half_kappa);
    return acc[0] / norm;
}

/// Shift jets s_j = chi_j + 4 zeta_j |a_j|^2 from per-branch field jets.
std::vector<Jet> shift_jets(const std::vector<StateBranch>& branches,
                            const std::vector<Jet>& field_jets) {
    std::vector<Jet> shifts;
    for (std::size_t j = 0; j < branches.size(); ++j) {
        Jet s = detail::jet_scale(
            detail::jet_mul(field_jets[j], detail::jet_conj(field_jets[j])),
            Complex(4.0 * branches[j].zeta));
        s[0] += branches[j].chi;
        shifts.push_back(std::move(s));
    }
    return shifts;
}

/// Derivative stack of a simulated field at one sample, from the cavity
/// equation: a' = -(kappa/2 + i [chi + 4 zeta |a|^2]) a + sqrt(kappa) u.
/// Orders of u beyond the available pulse jet are treated as zero.
Jet simulated_field_jet(Complex a0, const Jet& pulse_jet, const StateBranch& b, double kappa,
                        std::size_t len) {
    Jet a(len, Complex(0.0));
    a[0] = a0;
    Jet s(len, Complex(0.0)); // shift jet, filled order by order
    const double sqrt_kappa = std::sqrt(kappa);
    for (std::size_t r = 0; r + 1 < len; ++r) {
        // |a|^2 derivative order r uses a orders <= r only
        Complex n_r(0.0);
        double binom = 1.0;
        for (std::size_t q = 0; q <= r; ++q) {
            n_r += binom * a[q] * std::conj(a[r - q]);
            binom = binom * static_cast<double>(r - q) / static_cast<double>(q + 1);
        }
        s[r] = 4.0 * b.zeta * n_r + (r == 0 ? Complex(b.chi) : Complex(0.0));
        Complex sa(0.0);
        binom = 1.0;
        for (std::size_t q = 0; q <= r; ++q) {
            sa += binom * s[q] * a[r - q];
            binom = binom * static_cast<double>(r - q) / static_cast<double>(q + 1);
        }
        const Complex u_r = r < pulse_jet.size() ? pulse_jet[r] : Complex(0.0);
        a[r + 1] = -(kappa / 2.0) * a[r] - Complex(0.0, 1.0) * sa + sqrt_kappa * u_r;
    }
    return a;
}

} // namespace

Waveform synth_kerr(const TrialFunction& tf, const std::vector<StateBranch>& branches,
                    double kappa, const KerrOptions& options, KerrDiagnostics* diagnostics) {
    if (branches.empty()) throw ValidationError("branches: at least one branch required");
    if (options.iterations < 1) throw ValidationError("iterations: must be >= 1");
    if (diagnostics) *diagnostics = KerrDiagnostics{};

    const bool all_linear =
        std::all_of(branches.begin(), branches.end(), [](const StateBranch& b) {
            return b.zeta == 0.0;
        });
    if (all_linear) {
        if (diagnostics) diagnostics->iterations_used = 1;
        return synth_multi(tf, branches, kappa, options.dt);
    }

    check_smoothness(tf, branches.size());
    warn_duplicate_chi(branches);
    if (!(kappa > 0.0)) throw ValidationError("kappa: must be > 0");

    const std::size_t n_br = branches.size();
    const std::size_t acc_len = 2 * n_br;      // product keeps n_br orders of the pulse
    const std::size_t shift_len = acc_len - 1; // highest shift order a factor can consume
    const std::size_t trial_len = std::max(acc_len, shift_len + n_br - 1);
    const double norm = std::pow(kappa, 0.5 * static_cast<double>(n_br));
    const double half_kappa = kappa / 2.0;

    const std::vector<Jet> trials = trial_jets(tf, options.dt, trial_len);
    const auto n_samples = static_cast<std::size_t>(trials.size());

    std::vector<std::size_t> ascending(n_br), descending(n_br);
    for (std::size_t j = 0; j < n_br; ++j) {
        ascending[j] = j;
        descending[j] = n_br - 1 - j;
    }

    // Per-branch complementary expansion coefficients for the analytic
    // first-iteration field estimates.
    std::vector<std::vector<Complex>> e_comp;
    for (std::size_t j = 0; j < n_br; ++j)
        e_comp.push_back(
            OperatorProduct::for_branches(complement(branches, j), kappa).expansion_coefficients());
    const double norm_comp = std::pow(kappa, 0.5 * static_cast<double>(n_br - 1));

    Waveform pulse;
    pulse.dt = options.dt;
    pulse.t0 = 0.0;
    pulse.samples.resize(static_cast<Eigen::Index>(n_samples));
    std::vector<Jet> pulse_jets(n_samples, Jet(n_br));

    auto build_pulse = [&](const std::vector<std::vector<Jet>>& field_jets) {
        for (std::size_t i = 0; i < n_samples; ++i) {
            std::vector<Jet> per_branch;
            for (std::size_t j = 0; j < n_br; ++j) per_branch.push_back(field_jets[j][i]);
            const std::vector<Jet> shifts = shift_jets(branches, per_branch);
            Jet acc(trials[i].begin(), trials[i].begin() + static_cast<std::ptrdiff_t>(acc_len));
            for (auto it = ascending.rbegin(); it != ascending.rend(); ++it)
                acc = apply_factor(acc, shifts[*it], half_kappa);
            for (std::size_t r = 0; r < n_br; ++r) pulse_jets[i][r] = acc[r] / norm;
            pulse.samples[static_cast<Eigen::Index>(i)] = pulse_jets[i][0];
        }
    };

    // Iteration 1: analytic per-branch field estimates.
    std::vector<std::vector<Jet>> field_jets(n_br, std::vector<Jet>(n_samples));
    for (std::size_t j = 0; j < n_br; ++j)
        for (std::size_t i = 0; i < n_samples; ++i)
            field_jets[j][i] = designed_field_jet(trials[i], e_comp[j], norm_comp, shift_len);
    build_pulse(field_jets);

    int iterations_used = 1;
    double last_rel_change = 0.0;
    for (int iter = 2; iter <= options.iterations; ++iter) {
        // Replace the field estimates with the nonlinear simulator's response
        // to the previous candidate pulse.
        for (std::size_t j = 0; j < n_br; ++j) {
            const Waveform sim = evolve_branch(pulse, branches[j], kappa, options.integrator);
            for (std::size_t i = 0; i < n_samples; ++i)
                field_jets[j][i] =
                    simulated_field_jet(sim.samples[static_cast<Eigen::Index>(i)], pulse_jets[i],
                                        branches[j], kappa, shift_len);
        }
        const Eigen::VectorXcd previous = pulse.samples;
        build_pulse(field_jets);
        const double scale = pulse.samples.cwiseAbs().maxCoeff();
        last_rel_change = scale > 0.0
                              ? (pulse.samples - previous).cwiseAbs().maxCoeff() / scale
                              : 0.0;
        iterations_used = iter;
        if (last_rel_change <= options.tolerance) break;
    }
    if (options.iterations >= 2 && last_rel_change > options.tolerance)
        throw NumericalError("synth_kerr: fixed-point refinement still changing by " +
                             std::to_string(last_rel_change) + " (tolerance " +
                             std::to_string(options.tolerance) + ") after " +
                             std::to_string(options.iterations) + " iterations");

    if (diagnostics) {
        diagnostics->iterations_used = iterations_used;
        diagnostics->last_rel_change = last_rel_change;
        double max_diff = 0.0;
        const double scale = pulse.samples.cwiseAbs().maxCoeff();
        for (std::size_t i = 0; i < n_samples; ++i) {
            std::vector<Jet> per_branch;
            for (std::size_t j = 0; j < n_br; ++j) per_branch.push_back(field_jets[j][i]);
            const std::vector<Jet> shifts = shift_jets(branches, per_branch);
            const Complex swapped =
                kerr_product_at(trials[i], shifts, descending, half_kappa, norm);
            max_diff = std::max(max_diff,
                                std::abs(swapped - pulse.samples[static_cast<Eigen::Index>(i)]));
        }
        diagnostics->ordering_sensitivity = scale > 0.0 ? max_diff / scale : 0.0;
    }
    return pulse;
}

double kerr_estimate(double g, double delta) {
    if (delta == 0.0) throw ValidationError("delta: qubit-cavity detuning must be nonzero");
    return -std::pow(g, 4) / std::pow(delta, 3);
}

ZetaScanResult kerr_scan(const TrialFunction& tf, const std::vector<StateBranch>& plant,
                         double kappa, const std::vector<std::vector<double>>& zeta_axes,
                         double noise_floor_photons, double dt,
                         const IntegratorSettings& settings) {
    if (zeta_axes.size() != plant.size())
        throw ValidationError("zeta grid: need one axis per branch");
    for (const auto& axis : zeta_axes)
        if (axis.empty()) throw ValidationError("zeta grid: empty axis");

    std::size_t total = 1;
    for (const auto& axis : zeta_axes) total *= axis.size();

    ZetaScanResult result;
    result.best_contrast_db = -std::numeric_limits<double>::infinity();
    std::vector<std::size_t> idx(zeta_axes.size(), 0);
    for (std::size_t point = 0; point < total; ++point) {
        ZetaScanPoint p;
        std::vector<StateBranch> candidate = plant;
        for (std::size_t j = 0; j < zeta_axes.size(); ++j) {
            candidate[j].zeta = zeta_axes[j][idx[j]];
            p.zeta.push_back(zeta_axes[j][idx[j]]);
        }
        KerrOptions opt;
        opt.dt = dt;
        opt.integrator = settings;
        const Waveform pulse = synth_kerr(tf, candidate, kappa, opt);

        double worst = std::numeric_limits<double>::infinity();
        for (const StateBranch& b : plant) {
            const Waveform a = evolve_branch(pulse, b, kappa, settings);
            const double peak = peak_abs2(a);
            // residual saturated at the detection floor, like the experiment
            const double residual =
                std::max(std::norm(a.samples[a.size() - 1]), noise_floor_photons);
            const double contrast =
                peak > 0.0 ? std::min(10.0 * std::log10(peak / residual), kContrastCapDb) : 0.0;
            worst = std::min(worst, contrast);
        }
        p.worst_contrast_db = worst;
        if (worst > result.best_contrast_db) {
            result.best_contrast_db = worst;
            result.best_zeta = p.zeta;
        }
        result.points.push_back(std::move(p));

        // row-major: last axis fastest
        for (std::size_t j = zeta_axes.size(); j-- > 0;) {
            if (++idx[j] < zeta_axes[j].size()) break;
            idx[j] = 0;
        }
    }
    return result;
}

TrialFunction scale_to_peak(const TrialFunction& tf, const std::vector<StateBranch>& branches,
                            double kappa, double target_photons, double dt) {
    if (!(target_photons > 0.0)) throw ValidationError("target_photons: must be > 0");
    const Waveform field = designed_branch_field(tf, branches, 0, kappa, dt);
    const double peak = peak_abs2(field);
    if (!(peak > 0.0)) throw ValidationError("trial.amplitude_re: designed field is zero");
    TrialFunction scaled = tf;
    scaled.amplitude *= std::sqrt(target_photons / peak);
    return scaled;
}

} // namespace drachma
