#pragma once

// Transverse grids: sampling superpositions, overlap quadrature and
// angular-spectrum propagation.

#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "fft.hpp"
#include "modes.hpp"

namespace linklight {

// Uniform grid spanning [-half_extent, +half_extent] in x and y. Samples sit
// at cell centers (offset 0.5), so the beam axis never lands on a sample.
struct GridSpec {
    int nx = 256;
    int ny = 256;
    double half_extent_m = 0.0;
    double offset_x = 0.5;
    double offset_y = 0.5;

    void validate() const {
        if (nx < 16 || ny < 16) throw std::invalid_argument("GridSpec: nx, ny must be >= 16");
        if (!(half_extent_m > 0.0)) throw std::invalid_argument("GridSpec: half_extent must be > 0");
        if (offset_x < 0.0 || offset_x >= 1.0 || offset_y < 0.0 || offset_y >= 1.0)
            throw std::invalid_argument("GridSpec: sample offsets must be in [0,1)");
    }

    double dx() const { return 2.0 * half_extent_m / nx; }
    double dy() const { return 2.0 * half_extent_m / ny; }
    double x(int i) const { return -half_extent_m + (i + offset_x) * dx(); }
    double y(int j) const { return -half_extent_m + (j + offset_y) * dy(); }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct SampledField {
    GridSpec grid;
    double z_m = 0.0;
    std::vector<Complex> values;  // row-major, values[j*nx + i]

    Complex& at(int i, int j) { return values[static_cast<std::size_t>(j) * grid.nx + i]; }
    const Complex& at(int i, int j) const {
        return values[static_cast<std::size_t>(j) * grid.nx + i];
    }
};

inline SampledField sample_plane(const ModeSuperposition& sup, double z_m, const GridSpec& grid) {
    grid.validate();
    SampledField f{grid, z_m, {}};
    f.values.resize(static_cast<std::size_t>(grid.nx) * grid.ny);

    // Per-plane constants shared by every term.
    const BeamGeometry& beam = sup.beam();
    const double zr = beam.rayleigh_range_m();
    const double k = beam.wavenumber();
    const double w = beam.waist_m * std::sqrt(1.0 + (z_m / zr) * (z_m / zr));
    const double inv_w2 = 1.0 / (w * w);
    const double curv = -k * z_m / (2.0 * (z_m * z_m + zr * zr));
    const double gouy1 = std::atan(z_m / zr);

    struct TermConst {
        int ell;
        int p;
        int absl;
        Complex pref;  // coeff * norm / w * e^{i gouy}
    };
    std::vector<TermConst> tc;
    tc.reserve(sup.terms().size());
    for (const auto& t : sup.terms()) {
        const int l = std::abs(t.index.ell);
        const int p = t.index.p;
        const double norm = std::sqrt(
            2.0 / std::numbers::pi * std::exp(std::lgamma(p + 1.0) - std::lgamma(p + l + 1.0)));
        const Complex pref =
            t.coeff * (norm / w) * std::polar(1.0, (l + 2 * p + 1) * gouy1);
        tc.push_back({t.index.ell, p, l, pref});
    }

    for (int j = 0; j < grid.ny; ++j) {
        const double y = grid.y(j);
        for (int i = 0; i < grid.nx; ++i) {
            const double x = grid.x(i);
            const double r2 = x * x + y * y;
            const double rho = 2.0 * r2 * inv_w2;
            const Complex shared =
                std::exp(-r2 * inv_w2) * std::polar(1.0, curv * r2);
            const double r = std::sqrt(r2);
            const Complex eiphi = (r > 0.0) ? Complex{x / r, y / r} : Complex{1.0, 0.0};

            Complex acc{0.0, 0.0};
            for (const auto& t : tc) {
                double rad = std::assoc_laguerre(t.p, t.absl, rho);
                if (t.absl > 0) rad *= std::pow(std::sqrt(rho), t.absl);
                Complex az{1.0, 0.0};
                for (int n = 0; n < std::abs(t.ell); ++n) az *= eiphi;
                if (t.ell < 0) az = std::conj(az);
                acc += t.pref * rad * az;
            }
            f.at(i, j) = acc * shared;
        }
    }
    return f;
}

// Midpoint-rule approximation of the continuous overlap integral
// conj(a) * b dx dy.
inline Complex numerical_overlap(const SampledField& a, const SampledField& b) {
    if (!(a.grid == b.grid) || a.z_m != b.z_m)
        throw std::invalid_argument("numerical_overlap: fields must share grid and plane");
    Complex acc{0.0, 0.0};
    for (std::size_t n = 0; n < a.values.size(); ++n)
        acc += std::conj(a.values[n]) * b.values[n];
    return acc * (a.grid.dx() * a.grid.dy());
}

inline double field_energy(const SampledField& f) {
    double s = 0.0;
    for (const auto& v : f.values) s += std::norm(v);
    return s;
}

// Paraxial angular-spectrum step: FFT, multiply by
// exp(+i (kx^2 + ky^2) dz / (2k)), inverse FFT. The carrier factor is
// dropped, matching the analytic mode convention. Unitary on the grid.
inline SampledField angular_spectrum_propagate(const SampledField& f, double dz_m,
                                               const BeamGeometry& beam) {
    beam.validate();
    SampledField out = f;
    out.z_m = f.z_m + dz_m;
    fft2d(out.values, f.grid.nx, f.grid.ny, FFTW_FORWARD);

    const double k = beam.wavenumber();
    const double two_pi = 2.0 * std::numbers::pi;
    for (int j = 0; j < f.grid.ny; ++j) {
        const double ky = two_pi * fft_freq(j, f.grid.ny) / f.grid.dy();
        for (int i = 0; i < f.grid.nx; ++i) {
            const double kx = two_pi * fft_freq(i, f.grid.nx) / f.grid.dx();
            const double phase = (kx * kx + ky * ky) * dz_m / (2.0 * k);
            out.at(i, j) *= std::polar(1.0, phase);
        }
    }
    fft2d(out.values, f.grid.nx, f.grid.ny, FFTW_BACKWARD);
    return out;
}

inline double relative_l2_error(const SampledField& a, const SampledField& b) {
    if (!(a.grid == b.grid))
        throw std::invalid_argument("relative_l2_error: grid mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t n = 0; n < a.values.size(); ++n) {
        num += std::norm(a.values[n] - b.values[n]);
        den += std::norm(b.values[n]);
    }
    return std::sqrt(num / den);
}

inline void write_field_csv(const SampledField& f, std::ostream& os) {
    os << "x_m,y_m,re,im\n";
    char buf[128];
    for (int j = 0; j < f.grid.ny; ++j)
        for (int i = 0; i < f.grid.nx; ++i) {
            std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g,%.9g\n", f.grid.x(i), f.grid.y(j),
                          f.at(i, j).real(), f.at(i, j).imag());
            os << buf;
        }
}

// 16-bit big-endian PGM.
inline void write_pgm16(const std::vector<double>& pixels, int nx, int ny, std::ostream& os) {
    os << "P5\n" << nx << " " << ny << "\n65535\n";
    for (double v : pixels) {
        double clamped = std::min(std::max(v, 0.0), 1.0);
        auto q = static_cast<std::uint16_t>(std::lround(clamped * 65535.0));
        const char bytes[2] = {static_cast<char>(q >> 8), static_cast<char>(q & 0xff)};
        os.write(bytes, 2);
    }
}

// |amplitude|, max-normalized.
inline void write_amplitude_pgm(const SampledField& f, std::ostream& os) {
    double maxabs = 0.0;
    for (const auto& v : f.values) maxabs = std::max(maxabs, std::abs(v));
    std::vector<double> px(f.values.size());
    for (std::size_t n = 0; n < px.size(); ++n)
        px[n] = maxabs > 0.0 ? std::abs(f.values[n]) / maxabs : 0.0;
    write_pgm16(px, f.grid.nx, f.grid.ny, os);
}

// Phase, [0, 2pi) mapped linearly onto [0, 65535].
inline void write_phase_pgm(const SampledField& f, std::ostream& os) {
    const double two_pi = 2.0 * std::numbers::pi;
    std::vector<double> px(f.values.size());
    for (std::size_t n = 0; n < px.size(); ++n) {
        double ph = std::arg(f.values[n]);
        if (ph < 0.0) ph += two_pi;
        px[n] = ph / two_pi;
    }
    write_pgm16(px, f.grid.nx, f.grid.ny, os);
}

}  // namespace linklight
