#include "drachma/config.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace drachma {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& field, const std::string& reason) {
    throw ValidationError(field + ": " + reason);
}

double get_number(const json& j, const std::string& scope, const std::string& key,
                  bool required, double fallback = 0.0) {
    if (!j.contains(key)) {
        if (required) fail(scope + "." + key, "missing required field");
        return fallback;
    }
    if (!j.at(key).is_number()) fail(scope + "." + key, "must be a number");
    return j.at(key).get<double>();
}

int get_int(const json& j, const std::string& scope, const std::string& key, bool required,
            int fallback = 0) {
    if (!j.contains(key)) {
        if (required) fail(scope + "." + key, "missing required field");
        return fallback;
    }
    if (!j.at(key).is_number_integer()) fail(scope + "." + key, "must be an integer");
    return j.at(key).get<int>();
}

const json& get_object(const json& j, const std::string& key) {
    if (!j.contains(key)) fail(key, "missing required section");
    if (!j.at(key).is_object()) fail(key, "must be an object");
    return j.at(key);
}

/// Hz value whose conversion to rad/s reproduces `angular` exactly, so that
/// save -> load round trips bit-for-bit.  The naive angular / 2pi can be one
/// ulp off after re-multiplication; probe the neighbours.
double hz_for_round_trip(double angular) {
    const double hz = hz_from_angular(angular);
    if (angular_from_hz(hz) == angular) return hz;
    for (double cand : {std::nextafter(hz, -INFINITY), std::nextafter(hz, INFINITY)})
        if (angular_from_hz(cand) == angular) return cand;
    return hz;
}

} // namespace

ExperimentConfig parse_config(const std::string& json_text, const std::string& origin) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw IoError(origin + ": " + e.what());
    }
    if (!root.is_object()) throw IoError(origin + ": top level must be an object");

    ExperimentConfig c;

    const json& res = get_object(root, "resonator");
    c.resonator.kappa = angular_from_hz(get_number(res, "resonator", "kappa_hz", true));
    c.resonator.carrier_detuning =
        angular_from_hz(get_number(res, "resonator", "carrier_detuning_hz", false, 0.0));
    c.resonator.noise_floor_photons =
        get_number(res, "resonator", "noise_floor_photons", false, 5e-3);

    if (!root.contains("branches") || !root.at("branches").is_array())
        fail("branches", "missing required array");
    int idx = 0;
    for (const json& b : root.at("branches")) {
        const std::string scope = "branches[" + std::to_string(idx++) + "]";
        if (!b.is_object()) fail(scope, "must be an object");
        StateBranch sb;
        sb.label = get_int(b, scope, "label", true);
        sb.chi = angular_from_hz(get_number(b, scope, "chi_hz", true));
        sb.zeta = angular_from_hz(get_number(b, scope, "zeta_hz", false, 0.0));
        // decay_rate_hz is a plain exponential rate (1/s), not an angular
        // frequency: no 2 pi factor.
        sb.decay_rate = get_number(b, scope, "decay_rate_hz", false, 0.0);
        if (b.contains("decay_target") && !b.at("decay_target").is_null())
            sb.decay_target = get_int(b, scope, "decay_target", false);
        c.branches.push_back(sb);
    }

    const json& tr = get_object(root, "trial");
    c.trial.amplitude = Complex(get_number(tr, "trial", "amplitude_re", true),
                                get_number(tr, "trial", "amplitude_im", false, 0.0));
    c.trial.exponent_m = get_int(tr, "trial", "exponent_m", true);
    c.trial.duration = get_number(tr, "trial", "duration_s", true);

    const json& det = get_object(root, "detection");
    c.detection.alpha = get_number(det, "detection", "alpha", false, 0.0);
    c.detection.phi = get_number(det, "detection", "phi_rad", false, 0.0);
    // absent beta means the ideal input-output normalization a_out = sqrt(kappa) a
    c.detection.beta = get_number(det, "detection", "beta", false,
                                  c.resonator.kappa > 0.0 ? std::sqrt(c.resonator.kappa) : 1.0);
    c.detection.theta = get_number(det, "detection", "theta_rad", false, 0.0);
    c.detection.eta = get_number(det, "detection", "eta", false, 1.0);
    c.detection.photons_per_pw = get_number(det, "detection", "photons_per_pw", false, 0.0);

    validate_config(c);
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path + ": cannot open for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

void validate_config(const ExperimentConfig& c) {
    if (!(c.resonator.kappa > 0.0)) fail("resonator.kappa_hz", "must be > 0");
    if (!(c.resonator.noise_floor_photons > 0.0))
        fail("resonator.noise_floor_photons", "must be > 0");

    if (c.branches.empty()) fail("branches", "at least one branch required");
    std::set<int> labels;
    std::set<double> chis;
    for (std::size_t i = 0; i < c.branches.size(); ++i) {
        const StateBranch& b = c.branches[i];
        const std::string scope = "branches[" + std::to_string(i) + "]";
        if (!labels.insert(b.label).second) fail(scope + ".label", "duplicate branch label");
        if (c.branches.size() >= 2 && !chis.insert(b.chi).second)
            fail(scope + ".chi_hz", "dispersive shifts must be pairwise distinct");
        if (b.decay_rate < 0.0) fail(scope + ".decay_rate_hz", "must be >= 0");
        if (b.decay_rate > 0.0) {
            if (!b.decay_target)
                fail(scope + ".decay_target", "required when decay_rate_hz > 0");
            if (*b.decay_target == b.label)
                fail(scope + ".decay_target", "must differ from the branch's own label");
        }
    }
    for (const StateBranch& b : c.branches)
        if (b.decay_target && !labels.count(*b.decay_target))
            fail("branches", "decay_target " + std::to_string(*b.decay_target) +
                                 " does not name a branch");

    if (c.trial.exponent_m < 1) fail("trial.exponent_m", "must be a positive integer");
    if (c.trial.exponent_m <= static_cast<int>(c.branches.size()))
        fail("trial.exponent_m", "must exceed the branch count (boundary smoothness)");
    if (!(c.trial.duration > 0.0)) fail("trial.duration_s", "must be > 0");
    if (!std::isfinite(c.trial.amplitude.real()) || !std::isfinite(c.trial.amplitude.imag()))
        fail("trial.amplitude_re", "must be finite");

    if (c.detection.alpha < 0.0) fail("detection.alpha", "must be >= 0");
    if (!(c.detection.beta > 0.0)) fail("detection.beta", "must be > 0");
    if (!(c.detection.eta > 0.0) || c.detection.eta > 1.0)
        fail("detection.eta", "must lie in (0, 1]");
    if (c.detection.photons_per_pw < 0.0) fail("detection.photons_per_pw", "must be >= 0");
}

std::string config_to_json(const ExperimentConfig& c) {
    ordered_json root;
    root["resonator"] = {
        {"kappa_hz", hz_for_round_trip(c.resonator.kappa)},
        {"carrier_detuning_hz", hz_for_round_trip(c.resonator.carrier_detuning)},
        {"noise_floor_photons", c.resonator.noise_floor_photons},
    };
    root["branches"] = ordered_json::array();
    for (const StateBranch& b : c.branches) {
        ordered_json jb = {
            {"label", b.label},
            {"chi_hz", hz_for_round_trip(b.chi)},
            {"zeta_hz", hz_for_round_trip(b.zeta)},
            {"decay_rate_hz", b.decay_rate},
        };
        if (b.decay_target) jb["decay_target"] = *b.decay_target;
        root["branches"].push_back(jb);
    }
    root["trial"] = {
        {"amplitude_re", c.trial.amplitude.real()},
        {"amplitude_im", c.trial.amplitude.imag()},
        {"exponent_m", c.trial.exponent_m},
        {"duration_s", c.trial.duration},
    };
    root["detection"] = {
        {"alpha", c.detection.alpha},
        {"phi_rad", c.detection.phi},
        {"beta", c.detection.beta},
        {"theta_rad", c.detection.theta},
        {"eta", c.detection.eta},
        {"photons_per_pw", c.detection.photons_per_pw},
    };
    return root.dump(2) + "\n";
}

void save_config(const ExperimentConfig& c, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path + ": cannot open for writing");
    out << config_to_json(c);
    if (!out) throw IoError(path + ": write failed");
}

} // namespace drachma
