#include "drachma/measurement.hpp"

#include "drachma/synthesis.hpp"
#include "evolve_detail.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

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

Waveform readout_signal(const TrialFunction& tf, const std::vector<StateBranch>& branches,
                        double kappa, const DetectionChain& chain, double dt) {
    if (branches.size() != 2)
        throw ValidationError("readout_signal: exactly two branches required");
    if (!(kappa > 0.0)) throw ValidationError("kappa: must be > 0");
    // The operator difference telescopes: a_1 - a_0 = i (chi_0 - chi_1) a_T / sqrt(kappa).
    const Complex factor = chain.beta * std::exp(Complex(0.0, -chain.theta)) *
                           Complex(0.0, branches[0].chi - branches[1].chi) / std::sqrt(kappa);
    Waveform z = trial_grid(tf, dt, 0);
    z.samples *= factor;
    return z;
}

Waveform weight_function(const Waveform& z_ro) {
    validate_waveform(z_ro, "z_ro");
    Waveform w = z_ro;
    w.samples = z_ro.samples.conjugate();
    return w;
}

Complex integrate_shot(const Waveform& a_out, const Waveform& weights, double eta, ShotRng& rng,
                       bool add_noise) {
    validate_waveform(a_out, "a_out");
    validate_waveform(weights, "weights");
    if (!same_grid(a_out, weights))
        throw ValidationError("integrate_shot: output and weights grids differ");
    if (add_noise && !(eta > 0.0)) throw ValidationError("eta: must be > 0 when noise is on");

    const double sigma = add_noise ? std::sqrt(1.0 / (2.0 * eta * a_out.dt)) : 0.0;
    Complex s(0.0);
    for (Eigen::Index k = 0; k < a_out.size(); ++k) {
        Complex sample = a_out.samples[k];
        if (add_noise) {
            const double xr = rng.normal(); // real quadrature drawn first
            const double xi = rng.normal();
            sample += sigma * Complex(xr, xi);
        }
        s += weights.samples[k] * sample;
    }
    return s * a_out.dt;
}

ShotEnsemble simulate_shots(const ShotSimSetup& setup, int prepared, int n_shots,
                            std::uint64_t seed) {
    validate_waveform(setup.pulse, "pulse");
    validate_waveform(setup.weights, "weights");
    if (!same_grid(setup.pulse, setup.weights))
        throw ValidationError("simulate_shots: pulse and weights grids differ");
    if (n_shots < 1) throw ValidationError("n_shots: must be >= 1");
    const std::size_t idx = index_of_label(setup.branches, prepared, "simulate_shots");

    // The no-jump trajectory is deterministic; compute it once and share it
    // across shots (bit-identical to recomputing per shot).
    const Waveform base_field =
        evolve_branch(setup.pulse, setup.branches[idx], setup.resonator.kappa, setup.integrator);
    const Waveform base_out = output_field(setup.pulse, base_field, setup.chain);

    ShotEnsemble ens;
    ens.prepared = prepared;
    ens.seed = seed;
    ens.values.resize(n_shots);
    for (int k = 0; k < n_shots; ++k) {
        ShotRng rng(seed, static_cast<std::uint64_t>(k));
        const Waveform* out = &base_out;
        Waveform decayed;
        if (setup.include_decay) {
            // draw order per shot: jump times first, then readout noise
            const std::vector<Jump> jumps = sample_decay_path(
                setup.branches, prepared, setup.pulse.t0, setup.pulse.t_end(), rng);
            if (!jumps.empty()) {
                const Waveform field = detail::integrate_with_jumps(
                    setup.pulse, setup.branches, idx, jumps, setup.resonator.kappa,
                    setup.integrator);
                decayed = output_field(setup.pulse, field, setup.chain);
                out = &decayed;
            }
        }
        ens.values[k] =
            integrate_shot(*out, setup.weights, setup.chain.eta, rng, setup.add_noise);
    }
    return ens;
}

namespace {

double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return 0.0;
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

std::vector<double> to_sorted(const Eigen::VectorXd& x) {
    std::vector<double> v(x.data(), x.data() + x.size());
    std::sort(v.begin(), v.end());
    return v;
}

double gauss(double x, double mu, double sigma) {
    const double z = (x - mu) / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(kTwoPi));
}

} // namespace

HistogramPair histogram_pair(const Eigen::VectorXd& x0, const Eigen::VectorXd& x1) {
    if (x0.size() == 0 || x1.size() == 0)
        throw ValidationError("histogram_pair: both ensembles must be non-empty");
    std::vector<double> pooled(x0.data(), x0.data() + x0.size());
    pooled.insert(pooled.end(), x1.data(), x1.data() + x1.size());
    std::sort(pooled.begin(), pooled.end());

    const double iqr = quantile_sorted(pooled, 0.75) - quantile_sorted(pooled, 0.25);
    const double lo = pooled.front(), hi = pooled.back();
    const double span = hi - lo;
    // Freedman-Diaconis; degenerate spreads collapse to a single bin
    double width = 2.0 * iqr / std::cbrt(static_cast<double>(pooled.size()));
    Eigen::Index n_bins = 1;
    if (width > 0.0 && span > 0.0)
        n_bins = std::clamp<Eigen::Index>(
            static_cast<Eigen::Index>(std::ceil(span / width)), 1, 4096);
    else if (span > 0.0)
        n_bins = 64;
    width = span > 0.0 ? span / static_cast<double>(n_bins) : 1.0;

    HistogramPair h;
    h.bin_width = width;
    h.centers.resize(n_bins);
    h.count0 = Eigen::VectorXd::Zero(n_bins);
    h.count1 = Eigen::VectorXd::Zero(n_bins);
    for (Eigen::Index b = 0; b < n_bins; ++b)
        h.centers[b] = lo + (static_cast<double>(b) + 0.5) * width;
    auto fill = [&](const Eigen::VectorXd& x, Eigen::VectorXd& count) {
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            auto b = static_cast<Eigen::Index>((x[i] - lo) / width);
            b = std::clamp<Eigen::Index>(b, 0, n_bins - 1);
            count[b] += 1.0;
        }
    };
    fill(x0, h.count0);
    fill(x1, h.count1);
    return h;
}

GaussianFitParams fit_double_gaussian(const Eigen::VectorXd& x0, const Eigen::VectorXd& x1) {
    if (x0.size() < 16 || x1.size() < 16)
        throw ValidationError("fit_double_gaussian: need at least 16 samples per ensemble "
                              "(>= 1e3 recommended)");

    const std::vector<double> s0 = to_sorted(x0), s1 = to_sorted(x1);
    GaussianFitParams p;
    p.mu0 = quantile_sorted(s0, 0.5);
    p.mu1 = quantile_sorted(s1, 0.5);
    const double iqr_sigma = 0.5 *
                             ((quantile_sorted(s0, 0.75) - quantile_sorted(s0, 0.25)) +
                              (quantile_sorted(s1, 0.75) - quantile_sorted(s1, 0.25))) /
                             1.349;
    p.sigma = iqr_sigma;
    if (!(p.sigma > 0.0)) {
        const double m0 = x0.mean(), m1 = x1.mean();
        p.sigma = std::sqrt(((x0.array() - m0).square().sum() +
                             (x1.array() - m1).square().sum()) /
                            static_cast<double>(x0.size() + x1.size()));
    }
    if (!(p.sigma > 0.0) || std::abs(p.mu1 - p.mu0) < 0.1 * p.sigma) {
        // means not separable: flag instead of fitting an arbitrary split
        p.degenerate = true;
        p.sigma = std::max(p.sigma, std::numeric_limits<double>::min());
        return p;
    }

    const HistogramPair h = histogram_pair(x0, x1);
    const double n0 = static_cast<double>(x0.size()), n1 = static_cast<double>(x1.size());
    const Eigen::Index nb = h.centers.size();

    // theta = (mu0, mu1, log sigma, logit w0, logit w1); joint Poisson-weighted
    // least squares on both binned ensembles.
    auto unpack = [](const Eigen::VectorXd& t) {
        const double sigma = std::exp(t[2]);
        const double w0 = 1.0 / (1.0 + std::exp(-t[3]));
        const double w1 = 1.0 / (1.0 + std::exp(-t[4]));
        return std::array<double, 5>{t[0], t[1], sigma, w0, w1};
    };
    auto residuals = [&](const Eigen::VectorXd& t, Eigen::VectorXd& r) {
        const auto [mu0, mu1, sigma, w0, w1] = unpack(t);
        r.resize(2 * nb);
        for (Eigen::Index b = 0; b < nb; ++b) {
            const double g0 = gauss(h.centers[b], mu0, sigma);
            const double g1 = gauss(h.centers[b], mu1, sigma);
            const double e0 = n0 * h.bin_width * ((1.0 - w0) * g0 + w0 * g1);
            const double e1 = n1 * h.bin_width * ((1.0 - w1) * g1 + w1 * g0);
            r[2 * b] = (h.count0[b] - e0) / std::sqrt(std::max(h.count0[b], 1.0));
            r[2 * b + 1] = (h.count1[b] - e1) / std::sqrt(std::max(h.count1[b], 1.0));
        }
    };

    Eigen::VectorXd theta(5);
    theta << p.mu0, p.mu1, std::log(p.sigma), std::log(0.01 / 0.99), std::log(0.01 / 0.99);

    Eigen::VectorXd r;
    residuals(theta, r);
    double chi2 = r.squaredNorm();
    double lambda = 1e-3;
    int iter = 0;
    bool converged = false;
    const int max_iter = 200;
    for (; iter < max_iter && !converged; ++iter) {
        // numeric Jacobian
        Eigen::MatrixXd J(r.size(), 5);
        for (int j = 0; j < 5; ++j) {
            const double step = 1e-6 * std::max(1.0, std::abs(theta[j]));
            Eigen::VectorXd tp = theta;
            tp[j] += step;
            Eigen::VectorXd rp;
            residuals(tp, rp);
            J.col(j) = (rp - r) / step;
        }
        const Eigen::MatrixXd jtj = J.transpose() * J;
        const Eigen::VectorXd jtr = J.transpose() * r;
        bool improved = false;
        for (int tries = 0; tries < 12 && !improved; ++tries) {
            Eigen::MatrixXd damped = jtj;
            damped.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
            const Eigen::VectorXd step = damped.ldlt().solve(-jtr);
            Eigen::VectorXd cand = theta + step;
            cand[3] = std::clamp(cand[3], -13.8, 13.8);
            cand[4] = std::clamp(cand[4], -13.8, 13.8);
            Eigen::VectorXd rc;
            residuals(cand, rc);
            const double chi2c = rc.squaredNorm();
            if (chi2c <= chi2) {
                if (chi2 - chi2c <= 1e-10 * (chi2 + 1e-30) || step.norm() < 1e-12) converged = true;
                theta = cand;
                r = rc;
                chi2 = chi2c;
                lambda = std::max(lambda / 3.0, 1e-12);
                improved = true;
            } else {
                lambda *= 4.0;
            }
        }
        if (!improved) converged = true; // no descent direction left
    }
    if (!theta.allFinite())
        throw NumericalError("fit_double_gaussian: diverged after " + std::to_string(iter) +
                             " iterations, chi2 = " + std::to_string(chi2));

    const auto [mu0, mu1, sigma, w0, w1] = unpack(theta);
    p.mu0 = mu0;
    p.mu1 = mu1;
    p.sigma = sigma;
    p.weight1_prep0 = w0;
    p.weight0_prep1 = w1;
    p.iterations = iter;
    p.chi2 = chi2;
    p.degenerate = std::abs(mu1 - mu0) < 0.1 * sigma;
    return p;
}

AssignmentReport assignment_error(const ShotEnsemble& prep0, const ShotEnsemble& prep1) {
    if (prep0.values.size() == 0 || prep1.values.size() == 0)
        throw ValidationError("assignment_error: both ensembles must be non-empty");

    AssignmentReport rep;
    const Complex m0 = prep0.values.mean();
    const Complex m1 = prep1.values.mean();
    const Complex d = m1 - m0;
    rep.axis = std::abs(d) > 0.0 ? d / std::abs(d) : Complex(1.0, 0.0);

    auto project = [&](const Eigen::VectorXcd& v) {
        Eigen::VectorXd x(v.size());
        for (Eigen::Index i = 0; i < v.size(); ++i)
            x[i] = std::real(std::conj(rep.axis) * v[i]);
        return x;
    };
    rep.proj0 = project(prep0.values);
    rep.proj1 = project(prep1.values);

    // empirical threshold: scan midpoints of the pooled sorted samples
    const std::vector<double> s0 = to_sorted(rep.proj0), s1 = to_sorted(rep.proj1);
    const double inv_n0 = 1.0 / static_cast<double>(s0.size());
    const double inv_n1 = 1.0 / static_cast<double>(s1.size());
    auto error_at = [&](double th) {
        // classify as 1 when x > th; prepared-1 projections sit above prepared-0
        const double p10 =
            static_cast<double>(s0.end() - std::upper_bound(s0.begin(), s0.end(), th)) * inv_n0;
        const double p01 =
            static_cast<double>(std::upper_bound(s1.begin(), s1.end(), th) - s1.begin()) * inv_n1;
        return 0.5 * (p10 + p01);
    };
    std::vector<double> pooled(s0);
    pooled.insert(pooled.end(), s1.begin(), s1.end());
    std::sort(pooled.begin(), pooled.end());
    double best_th = pooled.front() - 1.0;
    double best_err = error_at(best_th);
    for (std::size_t i = 0; i + 1 < pooled.size(); ++i) {
        const double th = 0.5 * (pooled[i] + pooled[i + 1]);
        const double err = error_at(th);
        if (err < best_err) {
            best_err = err;
            best_th = th;
        }
    }
    rep.threshold = best_th;
    const double p10 =
        static_cast<double>(s0.end() - std::upper_bound(s0.begin(), s0.end(), best_th)) * inv_n0;
    const double p01 =
        static_cast<double>(std::upper_bound(s1.begin(), s1.end(), best_th) - s1.begin()) * inv_n1;
    rep.p10 = p10;
    rep.p01 = p01;
    rep.error = 0.5 * (p10 + p01);

    if (rep.proj0.size() >= 16 && rep.proj1.size() >= 16)
        rep.fit = fit_double_gaussian(rep.proj0, rep.proj1);
    else {
        rep.fit.mu0 = rep.proj0.mean();
        rep.fit.mu1 = rep.proj1.mean();
        rep.fit.degenerate = true;
    }
    rep.threshold_gaussian = 0.5 * (rep.fit.mu0 + rep.fit.mu1);
    rep.error_gaussian_overlap =
        rep.fit.sigma > 0.0
            ? 0.5 * std::erfc(std::abs(rep.fit.mu1 - rep.fit.mu0) /
                              (2.0 * std::sqrt(2.0) * rep.fit.sigma))
            : 0.0;
    return rep;
}

std::vector<SweepRow> sweep_duration(const ExperimentConfig& cfg,
                                     const std::vector<double>& tp_list,
                                     const SweepOptions& options) {
    if (tp_list.empty()) throw ValidationError("tp_list: must be non-empty");
    const double kappa = cfg.resonator.kappa;

    std::vector<SweepRow> rows;
    for (double tp : tp_list) {
        TrialFunction tf = cfg.trial;
        tf.duration = tp;
        tf = scale_to_peak(tf, cfg.branches, kappa, options.target_photons, options.dt);

        KerrOptions kerr_opt;
        kerr_opt.dt = options.dt;
        kerr_opt.integrator = options.integrator;
        const Waveform pulse = options.kerr
                                   ? synth_kerr(tf, cfg.branches, kappa, kerr_opt)
                                   : synth_multi(tf, cfg.branches, kappa, options.dt);
        const Waveform z = readout_signal(tf, cfg.branches, kappa, cfg.detection, options.dt);

        SweepRow row;
        row.tp = tp;
        row.peak_signal = std::sqrt(peak_abs2(z));
        row.snr =
            std::sqrt(2.0 * cfg.detection.eta * z.samples.cwiseAbs2().sum() * options.dt);

        double worst = std::numeric_limits<double>::infinity();
        for (const StateBranch& b : cfg.branches) {
            const Waveform a = evolve_branch(pulse, b, kappa, options.integrator);
            const double peak = peak_abs2(a);
            const double residual = std::norm(a.samples[a.size() - 1]);
            double contrast = 0.0;
            if (peak > 0.0)
                contrast = residual > 0.0
                               ? std::min(10.0 * std::log10(peak / residual), kContrastCapDb)
                               : kContrastCapDb;
            worst = std::min(worst, contrast);
        }
        row.contrast_db = worst;

        if (options.mode == SweepMode::Error) {
            ShotSimSetup setup;
            setup.pulse = pulse;
            setup.weights = weight_function(z);
            setup.branches = cfg.branches;
            setup.resonator = cfg.resonator;
            setup.chain = cfg.detection;
            setup.integrator = options.integrator;
            const ShotEnsemble e0 =
                simulate_shots(setup, cfg.branches[0].label, options.n_shots, options.seed);
            const ShotEnsemble e1 =
                simulate_shots(setup, cfg.branches[1].label, options.n_shots, options.seed + 1);
            row.error = assignment_error(e0, e1).error;
        } else {
            row.error = std::numeric_limits<double>::quiet_NaN();
        }
        rows.push_back(row);
    }
    return rows;
}

ChainFit fit_detection_chain(const Waveform& a_in, const Waveform& a_out_measured,
                             const StateBranch& branch, double kappa,
                             const PropagationSettings& settings) {
    validate_waveform(a_in, "a_in");
    validate_waveform(a_out_measured, "a_out");
    if (!same_grid(a_in, a_out_measured))
        throw ValidationError("fit_detection_chain: grids differ");

    const Waveform a = propagate_linear(a_in, branch, kappa, settings);

    // least squares in the two complex gains with regressors a_in and a
    Eigen::Matrix2cd m;
    m(0, 0) = a_in.samples.dot(a_in.samples);
    m(0, 1) = a_in.samples.dot(a.samples);
    m(1, 0) = a.samples.dot(a_in.samples);
    m(1, 1) = a.samples.dot(a.samples);
    Eigen::Vector2cd rhs;
    rhs[0] = a_in.samples.dot(a_out_measured.samples);
    rhs[1] = a.samples.dot(a_out_measured.samples);

    const Eigen::JacobiSVD<Eigen::Matrix2cd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    ChainFit fit;
    fit.condition = svd.singularValues()[1] > 0.0
                        ? svd.singularValues()[0] / svd.singularValues()[1]
                        : std::numeric_limits<double>::infinity();
    const Eigen::Vector2cd g = svd.solve(rhs);
    fit.gain_direct = g[0];
    fit.gain_cavity = g[1];
    fit.alpha = std::abs(g[0]);
    fit.phi = fit.alpha > 0.0 ? -std::arg(g[0]) : 0.0;
    fit.beta = std::abs(g[1]);
    fit.theta = fit.beta > 0.0 ? -std::arg(g[1]) : 0.0;
    const Eigen::VectorXcd resid =
        a_out_measured.samples - g[0] * a_in.samples - g[1] * a.samples;
    fit.residual_rms = std::sqrt(resid.squaredNorm() / static_cast<double>(resid.size()));
    return fit;
}

AcStarkResult ac_stark_calibration(const StateBranch& branch, double kappa,
                                   const std::vector<double>& drive_amps,
                                   double gain_pw_per_photon,
                                   const IntegratorSettings& settings) {
    if (drive_amps.empty()) throw ValidationError("drive_amps: must be non-empty");
    if (!(gain_pw_per_photon > 0.0)) throw ValidationError("gain: must be > 0");
    if (!(kappa > 0.0)) throw ValidationError("kappa: must be > 0");

    const auto n_amp = static_cast<Eigen::Index>(drive_amps.size());
    AcStarkResult res;
    res.drive_amps.resize(n_amp);
    res.n_ss.resize(n_amp);
    res.delta_ac.resize(n_amp);
    res.power_pw.resize(n_amp);

    // square drive long enough to settle: 10 / kappa
    const double dt = 1e-9;
    const double t_pulse = 10.0 / kappa;
    const auto n_samples = static_cast<Eigen::Index>(std::ceil(t_pulse / dt)) + 1;
    res.kerr_warning = false;
    for (Eigen::Index i = 0; i < n_amp; ++i) {
        Waveform drive;
        drive.dt = dt;
        drive.t0 = 0.0;
        drive.samples = Eigen::VectorXcd::Constant(n_samples, Complex(drive_amps[i], 0.0));
        const Waveform a = evolve_branch(drive, branch, kappa, settings);
        const double n_ss = std::norm(a.samples[a.size() - 1]);
        res.drive_amps[i] = drive_amps[i];
        res.n_ss[i] = n_ss;
        res.delta_ac[i] = 2.0 * branch.chi * n_ss;
        res.power_pw[i] = gain_pw_per_photon * n_ss;
        if (std::abs(4.0 * branch.zeta * n_ss) > 0.05 * std::abs(res.delta_ac[i]))
            res.kerr_warning = true;
    }

    auto fit_slope = [](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
        const double mx = x.mean(), my = y.mean();
        const double sxx = (x.array() - mx).square().sum();
        if (sxx <= 0.0) return 0.0;
        return (x.array() - mx).cwiseProduct(y.array() - my).sum() / sxx;
    };
    const double slope_power = fit_slope(res.power_pw, res.delta_ac); // rad/s per pW
    res.photons_per_pw = branch.chi != 0.0 ? slope_power / (2.0 * branch.chi) : 0.0;
    res.slope_vs_n = fit_slope(res.n_ss, res.delta_ac);
    return res;
}

} // namespace drachma
