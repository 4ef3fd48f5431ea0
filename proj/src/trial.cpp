#include "drachma/trial.hpp"

#include <cmath>

namespace drachma {

void validate_trial(const TrialFunction& tf) {
    if (tf.exponent_m < 1) throw ValidationError("trial.exponent_m: must be a positive integer");
    if (!(tf.duration > 0.0)) throw ValidationError("trial.duration_s: must be > 0");
    if (!std::isfinite(tf.amplitude.real()) || !std::isfinite(tf.amplitude.imag()))
        throw ValidationError("trial.amplitude_re: must be finite");
}

Complex trial_eval(const TrialFunction& tf, double t, int derivative) {
    validate_trial(tf);
    if (derivative < 0) throw ValidationError("trial derivative order: must be >= 0");
    if (t < 0.0 || t > tf.duration) return Complex(0.0);

    const int m = tf.exponent_m;
    const double w = M_PI / tf.duration;

    // sin^m(wt) = (2i)^{-m} sum_q binom(m, q) (-1)^q e^{i (m - 2q) w t};
    // the k-th derivative multiplies each term by (i (m - 2q) w)^k.
    Complex acc(0.0);
    double binom = 1.0;
    double sign = 1.0;
    for (int q = 0; q <= m; ++q) {
        const double f = static_cast<double>(m - 2 * q) * w;
        Complex term = std::polar(1.0, f * t);
        const Complex i_f(0.0, f);
        for (int k = 0; k < derivative; ++k) term *= i_f;
        acc += binom * sign * term;
        binom = binom * static_cast<double>(m - q) / static_cast<double>(q + 1);
        sign = -sign;
    }
    // (2i)^{-m} = 2^{-m} i^{-m}
    const Complex i_pow[4] = {{1.0, 0.0}, {0.0, -1.0}, {-1.0, 0.0}, {0.0, 1.0}};
    const Complex prefactor = std::ldexp(1.0, -m) * i_pow[m % 4];
    return tf.amplitude * prefactor * acc;
}

Eigen::Index trial_sample_count(const TrialFunction& tf, double dt) {
    validate_trial(tf);
    if (!(dt > 0.0)) throw ValidationError("dt: must be > 0");
    const double steps = tf.duration / dt;
    const auto n = static_cast<Eigen::Index>(std::llround(steps));
    if (n < 1 || std::abs(steps - static_cast<double>(n)) > 1e-9 * std::max(1.0, steps))
        throw ValidationError("trial.duration_s: must be an integer multiple of dt");
    return n + 1;
}

Waveform trial_grid(const TrialFunction& tf, double dt, int derivative) {
    const Eigen::Index n = trial_sample_count(tf, dt);
    Waveform w;
    w.dt = dt;
    w.t0 = 0.0;
    w.samples.resize(n);
    for (Eigen::Index i = 0; i < n; ++i)
        w.samples[i] = trial_eval(tf, static_cast<double>(i) * dt, derivative);
    return w;
}

} // namespace drachma
