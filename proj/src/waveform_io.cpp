#include "drachma/waveform_io.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace drachma {

void write_waveform_csv(const std::string& path, const Waveform& w, const std::string& units) {
    validate_waveform(w, "waveform");
    std::string text;
    text.reserve(static_cast<std::size_t>(w.size()) * 64 + 128);
    text += "# units: " + units + "\n";
    text += "t_ns,re,im\n";
    char line[128];
    for (Eigen::Index k = 0; k < w.size(); ++k) {
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", w.time(k) * 1e9,
                      std::real(w.samples[k]), std::imag(w.samples[k]));
        text += line;
    }
    write_text_file(path, text);
}

Waveform read_waveform_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);

    std::vector<double> t, re, im;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (line.rfind("t_ns", 0) == 0) continue; // header row
        double a = 0.0, b = 0.0, c = 0.0;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &a, &b, &c) != 3)
            throw IoError(path + ":" + std::to_string(line_no) + ": malformed row '" + line +
                          "'");
        t.push_back(a * 1e-9);
        re.push_back(b);
        im.push_back(c);
    }
    if (t.size() < 2) throw IoError(path + ": need at least two samples");

    Waveform w;
    w.t0 = t.front();
    w.dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
    if (!(w.dt > 0.0)) throw IoError(path + ": time column is not increasing");
    for (std::size_t k = 0; k < t.size(); ++k) {
        const double expected = w.t0 + static_cast<double>(k) * w.dt;
        if (std::abs(t[k] - expected) > 1e-6 * w.dt)
            throw IoError(path + ": non-uniform grid at row " + std::to_string(k));
    }
    w.samples.resize(static_cast<Eigen::Index>(t.size()));
    for (std::size_t k = 0; k < t.size(); ++k) w.samples[static_cast<Eigen::Index>(k)] = Complex(re[k], im[k]);
    return w;
}

std::string file_content_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::uint64_t h = 0xCBF29CE484222325ull;
    char buf[4096];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        const std::streamsize n = in.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001B3ull;
        }
    }
    char out[40];
    std::snprintf(out, sizeof out, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
    return out;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << text;
    if (!out) throw IoError("write failed for " + path);
}

} // namespace drachma
