#include "drachma/cli.hpp"

#include "drachma/config.hpp"
#include "drachma/dynamics.hpp"
#include "drachma/measurement.hpp"
#include "drachma/response.hpp"
#include "drachma/synthesis.hpp"
#include "drachma/trial.hpp"
#include "drachma/version.hpp"
#include "drachma/waveform_io.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace drachma {

namespace {

using ordered_json = nlohmann::ordered_json;

/// Output directory with a record of every file written into it.
struct OutDir {
    std::filesystem::path dir;
    std::vector<std::string> outputs;

    explicit OutDir(const std::string& path) : dir(path) {
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec) throw IoError("cannot create directory " + path + ": " + ec.message());
    }
    std::string file(const std::string& name) {
        outputs.push_back(name);
        return (dir / name).string();
    }
};

void write_json_file(const std::string& path, const ordered_json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

/// manifest.json: enough to reproduce the run (no timestamps, no environment).
void write_manifest(OutDir& out, const std::string& command, const std::string& config_path,
                    const ordered_json& seed, const ordered_json& parameters) {
    ordered_json m;
    m["command"] = command;
    m["config"] = {{"path", config_path}, {"hash", file_content_hash(config_path)}};
    m["seed"] = seed;
    m["version"] = kVersion;
    m["parameters"] = parameters;
    m["outputs"] = out.outputs;
    write_json_file((out.dir / "manifest.json").string(), m);
}

ordered_json complex_json(const Complex& z) {
    return ordered_json{{"re", z.real()}, {"im", z.imag()}};
}

std::string csv_row(const std::vector<double>& values) {
    std::string row;
    char buf[40];
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", values[i]);
        if (i) row += ',';
        row += buf;
    }
    row += '\n';
    return row;
}

double readout_snr(const Waveform& z, double eta) {
    return std::sqrt(2.0 * eta * z.samples.cwiseAbs2().sum() * z.dt);
}

// ---- synth ---------------------------------------------------------------

struct SynthArgs {
    std::string config, out_dir;
    bool kerr = false;
    int iterations = 1;
    double dt_ns = 1.0;
};

int cmd_synth(const SynthArgs& a) {
    const ExperimentConfig cfg = load_config(a.config);
    const double dt = a.dt_ns * 1e-9;
    Waveform pulse;
    if (a.kerr) {
        KerrOptions opt;
        opt.iterations = a.iterations;
        opt.dt = dt;
        pulse = synth_kerr(cfg.trial, cfg.branches, cfg.resonator.kappa, opt);
    } else {
        pulse = synth_multi(cfg.trial, cfg.branches, cfg.resonator.kappa, dt);
    }
    OutDir out(a.out_dir);
    write_waveform_csv(out.file("pulse.csv"), pulse, "sqrt(photons/s)");
    write_manifest(out, "synth", a.config, nullptr,
                   {{"kerr", a.kerr}, {"iterations", a.iterations}, {"dt_ns", a.dt_ns}});
    return kExitOk;
}

// ---- simulate ------------------------------------------------------------

struct SimulateArgs {
    std::string config, out_dir, pulse_path;
    bool auto_synth = false;
    bool kerr = false;
    bool conventional = false;
    double tail = 10.0;
    double dt_ns = 1.0;
};

int cmd_simulate(const SimulateArgs& a) {
    const ExperimentConfig cfg = load_config(a.config);
    if (a.pulse_path.empty() == !a.auto_synth)
        throw ValidationError("simulate: exactly one of --pulse and --auto is required");
    if (a.kerr && a.conventional)
        throw ValidationError("simulate: --kerr and --conventional are mutually exclusive");

    const double dt = a.dt_ns * 1e-9;
    Waveform pulse;
    std::string source;
    if (!a.pulse_path.empty()) {
        pulse = read_waveform_csv(a.pulse_path);
        source = "file";
    } else if (a.conventional) {
        pulse = trial_grid(cfg.trial, dt);
        source = "conventional";
    } else if (a.kerr) {
        KerrOptions opt;
        opt.dt = dt;
        pulse = synth_kerr(cfg.trial, cfg.branches, cfg.resonator.kappa, opt);
        source = "kerr";
    } else {
        pulse = synth_multi(cfg.trial, cfg.branches, cfg.resonator.kappa, dt);
        source = "multi";
    }

    const SimResult sim =
        simulate_pulse(pulse, cfg.branches, cfg.resonator, cfg.detection, a.tail);

    OutDir out(a.out_dir);
    write_waveform_csv(out.file("pulse.csv"), pulse, "sqrt(photons/s)");
    ordered_json branches = ordered_json::array();
    for (const BranchSim& b : sim.branches) {
        const std::string label = std::to_string(b.label);
        write_waveform_csv(out.file("trace_" + label + ".csv"), b.intra, "sqrt(photons)");
        write_waveform_csv(out.file("output_" + label + ".csv"), b.output, "sqrt(photons/s)");
        branches.push_back({{"label", b.label},
                            {"peak_photons", b.metrics.peak_photons},
                            {"peak_time_ns", b.metrics.peak_time * 1e9},
                            {"residual_photons", b.metrics.residual_photons},
                            {"contrast_db", b.metrics.contrast_db},
                            {"time_to_floor_kappa", b.metrics.time_to_floor_kappa},
                            {"floor_reached", b.metrics.floor_reached}});
    }
    ordered_json report;
    report["pulse_source"] = source;
    report["t_pulse_end_ns"] = sim.t_pulse_end * 1e9;
    report["kappa_rad_s"] = sim.kappa;
    report["noise_floor_photons"] = cfg.resonator.noise_floor_photons;
    report["branches"] = branches;
    write_json_file(out.file("report.json"), report);
    write_manifest(out, "simulate", a.config, nullptr,
                   {{"pulse", a.pulse_path},
                    {"auto", a.auto_synth},
                    {"kerr", a.kerr},
                    {"conventional", a.conventional},
                    {"tail_kappa", a.tail},
                    {"dt_ns", a.dt_ns}});
    return kExitOk;
}

// ---- shots ---------------------------------------------------------------

struct ShotsArgs {
    std::string config, out_dir;
    int n = 20000;
    std::uint64_t seed = 1;
    bool t1 = true;
    bool noise = true;
    bool kerr = false;
    double dt_ns = 1.0;
};

int cmd_shots(const ShotsArgs& a) {
    const ExperimentConfig cfg = load_config(a.config);
    if (cfg.branches.size() != 2)
        throw ValidationError("shots: exactly two branches required");

    const double dt = a.dt_ns * 1e-9;
    const double kappa = cfg.resonator.kappa;
    KerrOptions kerr_opt;
    kerr_opt.dt = dt;
    ShotSimSetup setup;
    setup.pulse = a.kerr ? synth_kerr(cfg.trial, cfg.branches, kappa, kerr_opt)
                         : synth_multi(cfg.trial, cfg.branches, kappa, dt);
    const Waveform z = readout_signal(cfg.trial, cfg.branches, kappa, cfg.detection, dt);
    setup.weights = weight_function(z);
    setup.branches = cfg.branches;
    setup.resonator = cfg.resonator;
    setup.chain = cfg.detection;
    setup.include_decay = a.t1;
    setup.add_noise = a.noise;

    const ShotEnsemble e0 = simulate_shots(setup, cfg.branches[0].label, a.n, a.seed);
    const ShotEnsemble e1 = simulate_shots(setup, cfg.branches[1].label, a.n, a.seed + 1);
    const AssignmentReport rep = assignment_error(e0, e1);
    const HistogramPair hist = histogram_pair(rep.proj0, rep.proj1);

    OutDir out(a.out_dir);
    std::string csv = "bin_center,count_prep0,count_prep1\n";
    for (Eigen::Index b = 0; b < hist.centers.size(); ++b)
        csv += csv_row({hist.centers[b], hist.count0[b], hist.count1[b]});
    write_text_file(out.file("histogram.csv"), csv);

    ordered_json report;
    report["n_shots"] = a.n;
    report["prep0_seed"] = e0.seed;
    report["prep1_seed"] = e1.seed;
    report["snr"] = readout_snr(z, cfg.detection.eta);
    report["axis"] = complex_json(rep.axis);
    report["threshold"] = rep.threshold;
    report["threshold_gaussian"] = rep.threshold_gaussian;
    report["p10"] = rep.p10;
    report["p01"] = rep.p01;
    report["error"] = rep.error;
    report["error_gaussian_overlap"] = rep.error_gaussian_overlap;
    report["fit"] = {{"mu0", rep.fit.mu0},
                     {"mu1", rep.fit.mu1},
                     {"sigma", rep.fit.sigma},
                     {"weight1_prep0", rep.fit.weight1_prep0},
                     {"weight0_prep1", rep.fit.weight0_prep1},
                     {"degenerate", rep.fit.degenerate},
                     {"iterations", rep.fit.iterations},
                     {"chi2", rep.fit.chi2}};
    write_json_file(out.file("report.json"), report);
    write_manifest(out, "shots", a.config, a.seed,
                   {{"n", a.n},
                    {"t1", a.t1},
                    {"noise", a.noise},
                    {"kerr", a.kerr},
                    {"dt_ns", a.dt_ns}});
    return kExitOk;
}

// ---- sweep ---------------------------------------------------------------

struct SweepArgs {
    std::string config, out_dir;
    std::vector<double> tp_ns;
    std::string mode = "signal";
    double target_photons = 200.0;
    int n = 20000;
    std::uint64_t seed = 1;
    bool kerr = true;
    double dt_ns = 1.0;
};

int cmd_sweep(const SweepArgs& a) {
    const ExperimentConfig cfg = load_config(a.config);
    std::vector<double> tps;
    for (double ns : a.tp_ns) tps.push_back(ns * 1e-9);

    SweepOptions opt;
    opt.mode = a.mode == "error" ? SweepMode::Error : SweepMode::MaxSignal;
    opt.target_photons = a.target_photons;
    opt.n_shots = a.n;
    opt.seed = a.seed;
    opt.kerr = a.kerr;
    opt.dt = a.dt_ns * 1e-9;
    const std::vector<SweepRow> rows = sweep_duration(cfg, tps, opt);

    OutDir out(a.out_dir);
    std::string csv = "tp_ns,peak_signal,snr,error,contrast_db\n";
    for (const SweepRow& r : rows)
        csv += csv_row({r.tp * 1e9, r.peak_signal, r.snr, r.error, r.contrast_db});
    write_text_file(out.file("sweep.csv"), csv);
    write_manifest(out, "sweep", a.config,
                   opt.mode == SweepMode::Error ? ordered_json(a.seed) : ordered_json(nullptr),
                   {{"tp_ns", a.tp_ns},
                    {"mode", a.mode},
                    {"target_photons", a.target_photons},
                    {"n", a.n},
                    {"kerr", a.kerr},
                    {"dt_ns", a.dt_ns}});
    return kExitOk;
}

// ---- scan-zeta -----------------------------------------------------------

struct ScanArgs {
    std::string config, out_dir;
    std::vector<std::string> grid; // one start:stop:count token per branch, Hz
    double dt_ns = 1.0;
};

std::vector<double> parse_axis(const std::string& token) {
    double start = 0.0, stop = 0.0;
    long long count = 0;
    if (std::sscanf(token.c_str(), "%lf:%lf:%lld", &start, &stop, &count) != 3)
        throw ValidationError("--grid: expected start:stop:count, got '" + token + "'");
    if (count < 1) throw ValidationError("--grid: count must be >= 1 in '" + token + "'");
    std::vector<double> axis;
    if (count == 1) {
        axis.push_back(angular_from_hz(start));
        return axis;
    }
    const double step = (stop - start) / static_cast<double>(count - 1);
    for (long long i = 0; i < count; ++i)
        axis.push_back(angular_from_hz(start + step * static_cast<double>(i)));
    return axis;
}

int cmd_scan_zeta(const ScanArgs& a) {
    const ExperimentConfig cfg = load_config(a.config);
    if (a.grid.size() != cfg.branches.size())
        throw ValidationError("--grid: need one start:stop:count token per branch (" +
                              std::to_string(cfg.branches.size()) + ")");
    std::vector<std::vector<double>> axes;
    for (const std::string& token : a.grid) axes.push_back(parse_axis(token));

    const ZetaScanResult res =
        kerr_scan(cfg.trial, cfg.branches, cfg.resonator.kappa, axes,
                  cfg.resonator.noise_floor_photons, a.dt_ns * 1e-9);

    OutDir out(a.out_dir);
    std::string csv;
    for (const StateBranch& b : cfg.branches)
        csv += "zeta" + std::to_string(b.label) + "_hz,";
    csv += "contrast_db\n";
    for (const ZetaScanPoint& p : res.points) {
        std::vector<double> row;
        for (double z : p.zeta) row.push_back(hz_from_angular(z));
        row.push_back(p.worst_contrast_db);
        csv += csv_row(row);
    }
    write_text_file(out.file("scan.csv"), csv);

    ordered_json report;
    ordered_json best = ordered_json::array();
    for (double z : res.best_zeta) best.push_back(hz_from_angular(z));
    report["best_zeta_hz"] = best;
    report["best_contrast_db"] = res.best_contrast_db;
    report["points"] = res.points.size();
    write_json_file(out.file("report.json"), report);
    write_manifest(out, "scan-zeta", a.config, nullptr,
                   {{"grid", a.grid}, {"dt_ns", a.dt_ns}});
    return kExitOk;
}

// ---- calibrate -----------------------------------------------------------

struct CalibrateArgs {
    std::string config, out_dir;
    std::string mode = "chain";
    double snr_db = 0.0;
    bool have_snr = false;
    std::uint64_t seed = 1;
    std::vector<double> amps;
    int branch = 0;
    bool have_branch = false;
    double gain = 0.0;
    bool have_gain = false;
    double dt_ns = 1.0;
};

int cmd_calibrate_chain(const CalibrateArgs& a, const ExperimentConfig& cfg, OutDir& out) {
    const double kappa = cfg.resonator.kappa;
    const double dt = a.dt_ns * 1e-9;
    // A short square probe with a long listening window keeps the drive and
    // the cavity ring-down well separated; the readout pulse itself makes the
    // two regressors nearly collinear and the fit hypersensitive to noise.
    Waveform probe;
    probe.dt = dt;
    probe.t0 = 0.0;
    const auto n_on = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::llround(1.0 / kappa / dt)));
    const auto n_total = n_on + static_cast<Eigen::Index>(std::llround(10.0 / kappa / dt)) + 1;
    probe.samples = Eigen::VectorXcd::Zero(n_total);
    probe.samples.head(n_on).setConstant(Complex(1.0, 0.0));
    const Waveform cavity = propagate_linear(probe, cfg.branches[0], kappa);
    Waveform measured = output_field(probe, cavity, cfg.detection);
    if (a.have_snr) {
        const double rms =
            std::sqrt(measured.samples.cwiseAbs2().mean());
        const double sigma = rms * std::pow(10.0, -a.snr_db / 20.0) / std::sqrt(2.0);
        ShotRng rng(a.seed, 0);
        for (Eigen::Index k = 0; k < measured.size(); ++k) {
            const double xr = rng.normal();
            const double xi = rng.normal();
            measured.samples[k] += sigma * Complex(xr, xi);
        }
    }
    const ChainFit fit = fit_detection_chain(probe, measured, cfg.branches[0], kappa);

    ordered_json report;
    report["mode"] = "chain";
    report["injected"] = {{"alpha", cfg.detection.alpha},
                          {"phi_rad", cfg.detection.phi},
                          {"beta", cfg.detection.beta},
                          {"theta_rad", cfg.detection.theta}};
    report["recovered"] = {{"alpha", fit.alpha},
                           {"phi_rad", fit.phi},
                           {"beta", fit.beta},
                           {"theta_rad", fit.theta}};
    report["gain_direct"] = complex_json(fit.gain_direct);
    report["gain_cavity"] = complex_json(fit.gain_cavity);
    report["condition"] = fit.condition;
    report["residual_rms"] = fit.residual_rms;
    report["snr_db"] = a.have_snr ? ordered_json(a.snr_db) : ordered_json(nullptr);
    write_json_file(out.file("calibration.json"), report);
    write_manifest(out, "calibrate", a.config,
                   a.have_snr ? ordered_json(a.seed) : ordered_json(nullptr),
                   {{"mode", a.mode},
                    {"snr_db", a.have_snr ? ordered_json(a.snr_db) : ordered_json(nullptr)},
                    {"dt_ns", a.dt_ns}});
    return kExitOk;
}

int cmd_calibrate_acstark(const CalibrateArgs& a, const ExperimentConfig& cfg, OutDir& out) {
    if (a.amps.empty())
        throw ValidationError("calibrate --mode acstark: --amps is required");
    double gain = a.gain;
    if (!a.have_gain) {
        if (!(cfg.detection.photons_per_pw > 0.0))
            throw ValidationError("calibrate: pass --gain or set detection.photons_per_pw");
        gain = 1.0 / cfg.detection.photons_per_pw;
    }
    const int label = a.have_branch ? a.branch : cfg.branches[0].label;
    const StateBranch* branch = nullptr;
    for (const StateBranch& b : cfg.branches)
        if (b.label == label) branch = &b;
    if (!branch) throw ValidationError("calibrate: no branch with label " + std::to_string(label));

    const AcStarkResult res =
        ac_stark_calibration(*branch, cfg.resonator.kappa, a.amps, gain);

    ordered_json points = ordered_json::array();
    for (Eigen::Index i = 0; i < res.drive_amps.size(); ++i)
        points.push_back({{"amp", res.drive_amps[i]},
                          {"n_ss", res.n_ss[i]},
                          {"delta_ac_rad_s", res.delta_ac[i]},
                          {"power_pw", res.power_pw[i]}});
    ordered_json report;
    report["mode"] = "acstark";
    report["branch"] = label;
    report["gain_pw_per_photon"] = gain;
    report["photons_per_pw"] = res.photons_per_pw;
    report["slope_vs_n_rad_s"] = res.slope_vs_n;
    report["two_chi_rad_s"] = 2.0 * branch->chi;
    report["kerr_warning"] = res.kerr_warning;
    report["points"] = points;
    write_json_file(out.file("calibration.json"), report);
    write_manifest(out, "calibrate", a.config, nullptr,
                   {{"mode", a.mode},
                    {"amps", a.amps},
                    {"branch", label},
                    {"gain_pw_per_photon", gain},
                    {"dt_ns", a.dt_ns}});
    return kExitOk;
}

int cmd_calibrate(const CalibrateArgs& a) {
    const ExperimentConfig cfg = load_config(a.config);
    OutDir out(a.out_dir);
    if (a.mode == "chain") return cmd_calibrate_chain(a, cfg, out);
    return cmd_calibrate_acstark(a, cfg, out);
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"analytic multi-state readout/reset pulse toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    SynthArgs synth_args;
    CLI::App* synth = app.add_subcommand("synth", "synthesize a pulse from a config");
    synth->add_option("--config", synth_args.config, "experiment config JSON")->required();
    synth->add_option("--out-dir,--out", synth_args.out_dir, "output directory")->required();
    CLI::Option* synth_kerr_flag =
        synth->add_flag("--kerr", synth_args.kerr, "apply the Kerr correction");
    synth->add_option("--iterations", synth_args.iterations, "Kerr fixed-point iterations")
        ->needs(synth_kerr_flag);
    synth->add_option("--dt-ns", synth_args.dt_ns, "sample spacing, ns (default 1)");

    SimulateArgs sim_args;
    CLI::App* simulate = app.add_subcommand("simulate", "per-branch cavity simulation");
    simulate->add_option("--config", sim_args.config, "experiment config JSON")->required();
    simulate->add_option("--out-dir,--out", sim_args.out_dir, "output directory")->required();
    simulate->add_option("--pulse", sim_args.pulse_path, "drive waveform CSV");
    simulate->add_flag("--auto", sim_args.auto_synth, "synthesize the drive from the config");
    simulate->add_flag("--kerr", sim_args.kerr, "with --auto: Kerr-corrected synthesis");
    simulate->add_flag("--conventional", sim_args.conventional,
                       "with --auto: drive with the bare trial envelope");
    simulate->add_option("--tail", sim_args.tail, "post-pulse window, units of 1/kappa");
    simulate->add_option("--dt-ns", sim_args.dt_ns, "sample spacing, ns (default 1)");

    ShotsArgs shots_args;
    CLI::App* shots = app.add_subcommand("shots", "single-shot readout Monte Carlo");
    shots->add_option("--config", shots_args.config, "experiment config JSON")->required();
    shots->add_option("--out-dir,--out", shots_args.out_dir, "output directory")->required();
    shots->add_option("--n", shots_args.n, "shots per prepared state");
    shots->add_option("--seed", shots_args.seed, "prep-0 seed (prep-1 uses seed+1)");
    shots->add_flag("--t1,!--no-t1", shots_args.t1, "simulate decay jumps (default on)");
    shots->add_flag("--noise,!--no-noise", shots_args.noise, "add detection noise (default on)");
    shots->add_flag("--kerr", shots_args.kerr, "Kerr-corrected drive synthesis");
    shots->add_option("--dt-ns", shots_args.dt_ns, "sample spacing, ns (default 1)");

    SweepArgs sweep_args;
    CLI::App* sweep = app.add_subcommand("sweep", "readout quality vs pulse duration");
    sweep->add_option("--config", sweep_args.config, "experiment config JSON")->required();
    sweep->add_option("--out-dir,--out", sweep_args.out_dir, "output directory")->required();
    sweep->add_option("--tp-list", sweep_args.tp_ns, "pulse durations, ns (comma separated)")
        ->required()
        ->delimiter(',');
    sweep->add_option("--mode", sweep_args.mode, "signal | error")
        ->check(CLI::IsMember({"signal", "error"}));
    sweep->add_option("--target-photons", sweep_args.target_photons,
                      "designed peak photon number");
    sweep->add_option("--n", sweep_args.n, "shots per state (error mode)");
    sweep->add_option("--seed", sweep_args.seed, "seed (error mode)");
    sweep->add_flag("--kerr,!--no-kerr", sweep_args.kerr,
                    "Kerr-corrected synthesis (default on)");
    sweep->add_option("--dt-ns", sweep_args.dt_ns, "sample spacing, ns (default 1)");

    ScanArgs scan_args;
    CLI::App* scan = app.add_subcommand("scan-zeta", "grid scan of synthesis Kerr coefficients");
    scan->add_option("--config", scan_args.config, "experiment config JSON")->required();
    scan->add_option("--out-dir,--out", scan_args.out_dir, "output directory")->required();
    scan->add_option("--grid", scan_args.grid,
                     "per-branch start:stop:count in Hz (comma separated)")
        ->required()
        ->delimiter(',');
    scan->add_option("--dt-ns", scan_args.dt_ns, "sample spacing, ns (default 1)");

    CalibrateArgs cal_args;
    CLI::App* calibrate = app.add_subcommand("calibrate", "detection-chain / AC-Stark calibration");
    calibrate->add_option("--config", cal_args.config, "experiment config JSON")->required();
    calibrate->add_option("--out-dir,--out", cal_args.out_dir, "output directory")->required();
    calibrate->add_option("--mode", cal_args.mode, "chain | acstark")
        ->check(CLI::IsMember({"chain", "acstark"}));
    CLI::Option* snr_opt =
        calibrate->add_option("--snr-db", cal_args.snr_db, "chain: add noise at this SNR");
    calibrate->add_option("--seed", cal_args.seed, "chain noise seed");
    calibrate->add_option("--amps", cal_args.amps, "acstark: drive amplitudes, sqrt(photons/s)")
        ->delimiter(',');
    CLI::Option* branch_opt =
        calibrate->add_option("--branch", cal_args.branch, "acstark: branch label");
    CLI::Option* gain_opt = calibrate->add_option(
        "--gain", cal_args.gain, "acstark: injected gain, pW per photon");
    calibrate->add_option("--dt-ns", cal_args.dt_ns, "sample spacing, ns (default 1)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    cal_args.have_snr = snr_opt->count() > 0;
    cal_args.have_branch = branch_opt->count() > 0;
    cal_args.have_gain = gain_opt->count() > 0;

    try {
        if (*synth) return cmd_synth(synth_args);
        if (*simulate) return cmd_simulate(sim_args);
        if (*shots) return cmd_shots(shots_args);
        if (*sweep) return cmd_sweep(sweep_args);
        if (*scan) return cmd_scan_zeta(scan_args);
        if (*calibrate) return cmd_calibrate(cal_args);
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitOk;
}

} // namespace drachma
