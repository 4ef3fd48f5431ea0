#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace drachma {

using Complex = std::complex<double>;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Frequencies in configuration files are plain Hz; everything internal is
/// angular (rad/s).  This is the single conversion point.
inline double angular_from_hz(double hz) { return kTwoPi * hz; }
inline double hz_from_angular(double w) { return w / kTwoPi; }

/// Config or argument rejected before any numerics ran.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Numerics refused or failed (stability bound, non-convergence, window too short).
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// File could not be read, written or parsed at the byte level.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Cavity parameters common to all qubit states.
struct ResonatorParams {
    double kappa = 0.0;             // total linewidth, rad/s
    double carrier_detuning = 0.0;  // carrier offset from bare cavity, rad/s (bookkeeping only)
    double noise_floor_photons = 5e-3;
};

/// One qubit/qutrit state as seen by the cavity: a dispersive shift, a Kerr
/// coefficient and an optional decay channel toward another branch.
struct StateBranch {
    int label = 0;
    double chi = 0.0;        // dispersive shift relative to carrier, rad/s
    double zeta = 0.0;       // Kerr coefficient, rad/s (effective shift chi + 4*zeta*|a|^2)
    double decay_rate = 0.0; // relaxation rate, 1/s (plain rate, not angular)
    std::optional<int> decay_target;
};

/// Smooth target for the intra-cavity field: a_T(t) = A sin^m(pi t / T_p) on
/// [0, T_p], identically zero outside.
struct TrialFunction {
    Complex amplitude{1.0, 0.0};
    int exponent_m = 3;
    double duration = 0.0; // seconds
};

/// Uniformly sampled complex envelope.  The common currency between modules.
struct Waveform {
    Eigen::VectorXcd samples;
    double dt = 0.0; // seconds
    double t0 = 0.0; // seconds

    Eigen::Index size() const { return samples.size(); }
    double time(Eigen::Index i) const { return t0 + static_cast<double>(i) * dt; }
    double t_end() const { return size() > 0 ? time(size() - 1) : t0; }
};

/// Linear model of everything between the cavity and the digitizer:
/// out = alpha e^{-i phi} a_in + beta e^{-i theta} a, plus detection efficiency.
struct DetectionChain {
    double alpha = 0.0;
    double phi = 0.0;
    double beta = 1.0;
    double theta = 0.0;
    double eta = 1.0;            // detection efficiency, 0 < eta <= 1
    double photons_per_pw = 0.0; // intra-cavity photons per pW of applied power
};

inline void validate_waveform(const Waveform& w, const std::string& name) {
    if (w.samples.size() == 0) throw ValidationError(name + ": empty waveform");
    if (!(w.dt > 0.0)) throw ValidationError(name + ".dt: must be > 0");
}

/// True when two waveforms live on the same grid (dt, t0, length).
inline bool same_grid(const Waveform& a, const Waveform& b, double rel = 1e-12) {
    if (a.size() != b.size()) return false;
    const double scale = std::max(std::abs(a.dt), std::abs(b.dt));
    if (std::abs(a.dt - b.dt) > rel * scale) return false;
    return std::abs(a.t0 - b.t0) <= rel * std::max(1.0, std::max(std::abs(a.t0), std::abs(b.t0)));
}

inline double peak_abs2(const Waveform& w) { return w.samples.cwiseAbs2().maxCoeff(); }

/// Index of the sample closest to time t; throws when t falls outside the grid.
inline Eigen::Index index_at_time(const Waveform& w, double t) {
    const double x = (t - w.t0) / w.dt;
    const auto i = static_cast<Eigen::Index>(std::llround(x));
    if (i < 0 || i >= w.size())
        throw ValidationError("time " + std::to_string(t) + " outside waveform grid");
    return i;
}

} // namespace drachma
