#pragma once

// Laguerre-Gaussian modes, superpositions and their algebra.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace linklight {

using Complex = std::complex<double>;

struct LGIndex {
    int ell = 0;  // azimuthal index, signed
    int p = 0;    // radial index, >= 0

    friend bool operator==(const LGIndex&, const LGIndex&) = default;
    friend auto operator<=>(const LGIndex&, const LGIndex&) = default;
};

// Transverse beam geometry. The Rayleigh range is always derived from
// wavelength and waist, never stored.
struct BeamGeometry {
    double wavelength_m = 710e-9;
    double waist_m = 1e-3;

    double rayleigh_range_m() const {
        return std::numbers::pi * waist_m * waist_m / wavelength_m;
    }
    double wavenumber() const { return 2.0 * std::numbers::pi / wavelength_m; }

    void validate() const {
        if (!(wavelength_m > 0.0) || !(waist_m > 0.0))
            throw std::invalid_argument("BeamGeometry: wavelength and waist must be positive");
    }

    friend bool operator==(const BeamGeometry&, const BeamGeometry&) = default;
};

inline double gouy_phase(const LGIndex& index, const BeamGeometry& beam, double z_m) {
    beam.validate();
    const int order = std::abs(index.ell) + 2 * index.p + 1;
    return order * std::atan(z_m / beam.rayleigh_range_m());
}

// Normalized paraxial LG amplitude at (x, y, z). The common e^{ikz} factor is
// omitted; the curvature term is written as exp(-ik r^2 z / (2 (z^2 + zR^2)))
// so z = 0 needs no special case. Normalization: integral of |u|^2 over the
// transverse plane is 1.
inline Complex lg_amplitude(const LGIndex& index, const BeamGeometry& beam,
                            double x_m, double y_m, double z_m) {
    beam.validate();
    if (index.p < 0) throw std::invalid_argument("LGIndex: p must be >= 0");

    const double w0 = beam.waist_m;
    const double zr = beam.rayleigh_range_m();
    const double k = beam.wavenumber();
    const int l = std::abs(index.ell);
    const int p = index.p;

    const double w = w0 * std::sqrt(1.0 + (z_m / zr) * (z_m / zr));
    const double r2 = x_m * x_m + y_m * y_m;
    const double rho = 2.0 * r2 / (w * w);

    // sqrt(2 p! / (pi (p+|l|)!)) via lgamma to stay finite for large indices
    const double norm = std::sqrt(2.0 / std::numbers::pi *
                                  std::exp(std::lgamma(p + 1.0) - std::lgamma(p + l + 1.0)));

    double radial = norm / w * std::assoc_laguerre(p, l, rho) * std::exp(-r2 / (w * w));
    if (l > 0) radial *= std::pow(std::sqrt(rho), l);

    const double curvature = -k * r2 * z_m / (2.0 * (z_m * z_m + zr * zr));
    const double gouy = (l + 2 * p + 1) * std::atan(z_m / zr);
    const double azimuth = (index.ell == 0 || r2 == 0.0) ? 0.0 : index.ell * std::atan2(y_m, x_m);

    if (index.ell != 0 && r2 == 0.0) return {0.0, 0.0};
    return radial * std::polar(1.0, azimuth + curvature + gouy);
}

struct ModeTerm {
    LGIndex index;
    Complex coeff;
};

class ModeSuperposition {
public:
    ModeSuperposition(std::vector<ModeTerm> terms, BeamGeometry beam)
        : terms_(std::move(terms)), beam_(beam) {
        beam_.validate();
        for (const auto& t : terms_)
            if (t.index.p < 0) throw std::invalid_argument("ModeSuperposition: p must be >= 0");
        auto sorted = terms_;
        std::sort(sorted.begin(), sorted.end(),
                  [](const ModeTerm& a, const ModeTerm& b) { return a.index < b.index; });
        for (std::size_t i = 1; i < sorted.size(); ++i)
            if (sorted[i].index == sorted[i - 1].index)
                throw std::invalid_argument("ModeSuperposition: duplicate LG index");
    }

    const std::vector<ModeTerm>& terms() const { return terms_; }
    const BeamGeometry& beam() const { return beam_; }

    double norm_squared() const {
        double s = 0.0;
        for (const auto& t : terms_) s += std::norm(t.coeff);
        return s;
    }

    bool is_normalized(double tol = 1e-3) const {
        return std::abs(norm_squared() - 1.0) <= tol;
    }

    Complex coefficient(const LGIndex& idx) const {
        for (const auto& t : terms_)
            if (t.index == idx) return t.coeff;
        return {0.0, 0.0};
    }

    Complex amplitude(double x_m, double y_m, double z_m) const {
        Complex acc{0.0, 0.0};
        for (const auto& t : terms_) acc += t.coeff * lg_amplitude(t.index, beam_, x_m, y_m, z_m);
        return acc;
    }

    // The l-conjugate state: coefficients conjugated, l negated. At z = 0 its
    // field is the complex conjugate of the original.
    ModeSuperposition conjugated() const {
        std::vector<ModeTerm> out;
        out.reserve(terms_.size());
        for (const auto& t : terms_)
            out.push_back({{-t.index.ell, t.index.p}, std::conj(t.coeff)});
        return {std::move(out), beam_};
    }

private:
    std::vector<ModeTerm> terms_;
    BeamGeometry beam_;
};

// Superposition whose nodal lines form a pair of linked loops. theta rotates
// the link about the beam axis.
inline ModeSuperposition hopf_link_superposition(double theta_rad, const BeamGeometry& beam) {
    std::vector<ModeTerm> terms = {
        {{0, 0}, {0.264, 0.0}},
        {{0, 1}, {-0.628, 0.0}},
        {{0, 2}, {0.426, 0.0}},
        {{2, 0}, -0.596 * std::polar(1.0, 2.0 * theta_rad)},
    };
    return {std::move(terms), beam};
}

// The l = 0 component of the link state, renormalized on its own.
inline ModeSuperposition p_hopf_state(const BeamGeometry& beam) {
    std::vector<ModeTerm> terms = {
        {{0, 0}, {0.329, 0.0}},
        {{0, 1}, {-0.782, 0.0}},
        {{0, 2}, {0.530, 0.0}},
    };
    return {std::move(terms), beam};
}

// Phase shift of each modal component under an axial displacement dz and a
// rotation dtheta: (|l| + 2p + 1) atan(dz/zR) + l dtheta. Norm preserving.
inline ModeSuperposition apply_displacement(const ModeSuperposition& sup, double dz_m,
                                            double dtheta_rad) {
    const double zr = sup.beam().rayleigh_range_m();
    std::vector<ModeTerm> out;
    out.reserve(sup.terms().size());
    for (const auto& t : sup.terms()) {
        const double dphi = (std::abs(t.index.ell) + 2 * t.index.p + 1) * std::atan(dz_m / zr) +
                            t.index.ell * dtheta_rad;
        out.push_back({t.index, t.coeff * std::polar(1.0, dphi)});
    }
    return {std::move(out), sup.beam()};
}

// <a|b> over the orthonormal LG basis. Both superpositions must live on the
// same beam geometry.
inline Complex modal_inner_product(const ModeSuperposition& a, const ModeSuperposition& b) {
    if (!(a.beam() == b.beam()))
        throw std::invalid_argument("modal_inner_product: mismatched beam geometry");
    Complex acc{0.0, 0.0};
    for (const auto& ta : a.terms()) {
        const Complex cb = b.coefficient(ta.index);
        acc += std::conj(ta.coeff) * cb;
    }
    return acc;
}

inline nlohmann::json superposition_to_json(const ModeSuperposition& sup) {
    nlohmann::json j;
    j["beam"] = {{"wavelength_m", sup.beam().wavelength_m}, {"waist_m", sup.beam().waist_m}};
    j["terms"] = nlohmann::json::array();
    for (const auto& t : sup.terms())
        j["terms"].push_back({{"ell", t.index.ell},
                              {"p", t.index.p},
                              {"re", t.coeff.real()},
                              {"im", t.coeff.imag()}});
    return j;
}

inline ModeSuperposition superposition_from_json(const nlohmann::json& j) {
    BeamGeometry beam;
    beam.wavelength_m = j.at("beam").at("wavelength_m").get<double>();
    beam.waist_m = j.at("beam").at("waist_m").get<double>();
    std::vector<ModeTerm> terms;
    for (const auto& t : j.at("terms"))
        terms.push_back({{t.at("ell").get<int>(), t.at("p").get<int>()},
                         {t.at("re").get<double>(), t.at("im").get<double>()}});
    return {std::move(terms), beam};
}

}  // namespace linklight
