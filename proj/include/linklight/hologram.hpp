#pragma once

// Off-axis phase-only holograms: synthesis from a target superposition and
// validation by simulated first-order diffraction.

#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "fieldgrid.hpp"
#include "modes.hpp"

namespace linklight {

enum class HologramEncoding {
    as_printed,       // wrapped phase scaled by sinc^2(1 - pi I)
    normalized_blaze  // blaze depth from the inverse of sinc, encodes amplitude
};

struct HologramSpec {
    double grating_cycles = 32.0;  // carrier fringes across the aperture, along +x
    GridSpec grid;
    HologramEncoding encoding = HologramEncoding::normalized_blaze;

    void validate() const {
        grid.validate();
        if (grating_cycles < 8.0)
            throw std::invalid_argument(
                "HologramSpec: grating_cycles must be >= 8 to separate diffraction orders");
    }
};

struct PhaseMap {
    GridSpec grid;
    std::vector<double> values;  // radians in [0, 2pi)

    double& at(int i, int j) { return values[static_cast<std::size_t>(j) * grid.nx + i]; }
    const double& at(int i, int j) const {
        return values[static_cast<std::size_t>(j) * grid.nx + i];
    }
};

namespace detail {

inline double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

// Inverse of sin(x)/x restricted to [-pi, 0], where it rises from 0 to 1.
inline double arcsinc(double y) {
    if (y <= 0.0) return -std::numbers::pi;
    if (y >= 1.0) return 0.0;
    double lo = -std::numbers::pi, hi = 0.0;
    for (int iter = 0; iter < 80; ++iter) {
        const double mid = 0.5 * (lo + hi);
        (sinc(mid) < y ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

// Phase-only hologram for the target superposition, sampled at z = 0.
// The target phase plus a linear +x carrier is wrapped to [0, 2pi) and depth
// modulated by the target intensity (max-normalized):
//   as_printed       : factor sinc^2(1 - pi I)
//   normalized_blaze : factor 1 + arcsinc(sqrt(I)) / pi, so the first-order
//                      amplitude of the local blazed grating equals sqrt(I)
inline PhaseMap synthesize_hologram(const ModeSuperposition& sup, const HologramSpec& spec) {
    spec.validate();
    const SampledField target = sample_plane(sup, 0.0, spec.grid);

    double max_i = 0.0;
    for (const auto& v : target.values) max_i = std::max(max_i, std::norm(v));

    const double two_pi = 2.0 * std::numbers::pi;
    const double carrier = two_pi * spec.grating_cycles / (2.0 * spec.grid.half_extent_m);

    PhaseMap map{spec.grid, std::vector<double>(target.values.size(), 0.0)};
    for (int j = 0; j < spec.grid.ny; ++j)
        for (int i = 0; i < spec.grid.nx; ++i) {
            const Complex v = target.at(i, j);
            const double intensity = max_i > 0.0 ? std::norm(v) / max_i : 0.0;
            double depth, phase = std::arg(v);
            if (spec.encoding == HologramEncoding::as_printed) {
                const double s = detail::sinc(1.0 - std::numbers::pi * intensity);
                depth = s * s;
            } else {
                depth = 1.0 + detail::arcsinc(std::sqrt(intensity)) / std::numbers::pi;
                // the first diffracted order of exp(i depth psi) carries an
                // extra pi (depth - 1) phase; pre-subtract it
                phase -= std::numbers::pi * (depth - 1.0);
            }
            double wrapped = std::fmod(phase + carrier * spec.grid.x(i), two_pi);
            if (wrapped < 0.0) wrapped += two_pi;
            double out = wrapped * depth;
            if (out >= two_pi) out = std::nextafter(two_pi, 0.0);
            map.at(i, j) = out;
        }
    return map;
}

// Illuminate exp(i Phi) with a Gaussian probe, isolate the +1 carrier order
// in the Fourier plane (rectangular window of half the carrier frequency in
// each axis), transform back and remove the carrier.
inline SampledField first_order_field(const PhaseMap& map, const HologramSpec& spec,
                                      double probe_waist_m) {
    spec.validate();
    if (!(map.grid == spec.grid))
        throw std::invalid_argument("first_order_field: phase map grid mismatch");
    if (!(probe_waist_m > 0.0))
        throw std::invalid_argument("first_order_field: probe waist must be positive");

    const GridSpec& g = spec.grid;
    SampledField f{g, 0.0, std::vector<Complex>(map.values.size())};
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double r2 = g.x(i) * g.x(i) + g.y(j) * g.y(j);
            f.at(i, j) = std::exp(-r2 / (probe_waist_m * probe_waist_m)) *
                         std::polar(1.0, map.at(i, j));
        }

    fft2d(f.values, g.nx, g.ny, FFTW_FORWARD);

    // Carrier and window in cycles per meter.
    const double fc = spec.grating_cycles / (2.0 * g.half_extent_m);
    const double half_window = fc / 4.0;
    const double fx_max = 0.5 / g.dx();
    if (fc + half_window > fx_max)
        throw std::runtime_error("first_order_field: carrier exceeds the grid bandwidth");

    for (int j = 0; j < g.ny; ++j) {
        const double fy = fft_freq(j, g.ny) / g.dy();
        for (int i = 0; i < g.nx; ++i) {
            const double fx = fft_freq(i, g.nx) / g.dx();
            if (std::abs(fx - fc) >= half_window || std::abs(fy) >= half_window)
                f.at(i, j) = {0.0, 0.0};
        }
    }

    fft2d(f.values, g.nx, g.ny, FFTW_BACKWARD);

    const double two_pi = 2.0 * std::numbers::pi;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            f.at(i, j) *= std::polar(1.0, -two_pi * fc * g.x(i));
    return f;
}

// |<a|b>| / (|a| |b|) of two sampled fields; 1 means identical up to global
// phase and scale.
inline double normalized_overlap_modulus(const SampledField& a, const SampledField& b) {
    const double ea = field_energy(a);
    const double eb = field_energy(b);
    if (ea == 0.0 || eb == 0.0) return 0.0;
    return std::abs(numerical_overlap(a, b)) / std::sqrt(ea * eb * a.grid.dx() * a.grid.dy() *
                                                         b.grid.dx() * b.grid.dy());
}

// PGM export: 0 <-> 0 rad, 65535 <-> 2pi (1 - 1/65536) rad.
inline void write_phase_map_pgm(const PhaseMap& map, std::ostream& os) {
    const double two_pi = 2.0 * std::numbers::pi;
    os << "P5\n" << map.grid.nx << " " << map.grid.ny << "\n65535\n";
    for (double v : map.values) {
        long q = std::lround(v / two_pi * 65536.0);
        q = std::min(q, 65535L);
        q = std::max(q, 0L);
        const char bytes[2] = {static_cast<char>(q >> 8), static_cast<char>(q & 0xff)};
        os.write(bytes, 2);
    }
}

inline void write_phase_map_csv(const PhaseMap& map, std::ostream& os) {
    os << "x_m,y_m,phase_rad\n";
    char buf[128];
    for (int j = 0; j < map.grid.ny; ++j)
        for (int i = 0; i < map.grid.nx; ++i) {
            std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g\n", map.grid.x(i), map.grid.y(j),
                          map.at(i, j));
            os << buf;
        }
}

}  // namespace linklight
