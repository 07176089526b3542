#pragma once

// Two-photon state model: coincidence prediction, quantum contrast, modal
// correlations, displacement contrast maps, CHSH scans and count simulation.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "modes.hpp"

namespace linklight {

// Schmidt-form down-conversion state: sum over keyed entries (ell >= 0, p) of
// c_{ell,p} |ell,p>|-ell,p>, with the mirrored |-ell,p>|ell,p> term carrying
// the same coefficient for ell > 0. Normalized over the keyed entries.
class TwoPhotonState {
public:
    explicit TwoPhotonState(std::map<LGIndex, Complex> entries) : entries_(std::move(entries)) {
        double norm2 = 0.0;
        for (const auto& [idx, c] : entries_) {
            if (idx.ell < 0 || idx.p < 0)
                throw std::invalid_argument("TwoPhotonState: entries are keyed by ell >= 0, p >= 0");
            norm2 += std::norm(c);
        }
        if (norm2 <= 0.0) throw std::invalid_argument("TwoPhotonState: empty state");
        const double scale = 1.0 / std::sqrt(norm2);
        for (auto& [idx, c] : entries_) c *= scale;
    }

    const std::map<LGIndex, Complex>& entries() const { return entries_; }

    // One-parameter modal bandwidth model: c_{ell,p} proportional to
    // gamma^((|ell| + 2p)/2).
    static TwoPhotonState bandwidth_model(double gamma = 0.8, int max_ell = 3, int max_p = 3) {
        if (!(gamma > 0.0) || gamma > 1.0)
            throw std::invalid_argument("bandwidth_model: gamma must be in (0, 1]");
        std::map<LGIndex, Complex> e;
        for (int l = 0; l <= max_ell; ++l)
            for (int p = 0; p <= max_p; ++p)
                e[{l, p}] = std::pow(gamma, 0.5 * (l + 2 * p));
        return TwoPhotonState(std::move(e));
    }

private:
    std::map<LGIndex, Complex> entries_;
};

// The two-dimensional link subspace of the down-conversion state:
// c0 |0,p_link>|0,p_link> + c2 |2,0>|-2,0>. The raw coefficients are kept as
// given; normalized() yields the unit-norm version.
struct LinkQubitState {
    Complex c0{0.76, 0.0};
    Complex c2{0.64, 0.0};

    double norm_squared() const { return std::norm(c0) + std::norm(c2); }
    LinkQubitState normalized() const {
        const double n = std::sqrt(norm_squared());
        if (n == 0.0) throw std::invalid_argument("LinkQubitState: zero state");
        return {c0 / n, c2 / n};
    }
};

struct CoincidenceRecord {
    std::string setting;
    double coincidence_rate_hz = 0.0;
    double singles_s_hz = 0.0;
    double singles_i_hz = 0.0;
    double gate_s = 0.0;
    double quantum_contrast = 0.0;
};

enum class BellEstimator { projective_chsh, visibility_2sqrt2 };

struct BellSettings {
    double theta_s = 0.0;
    double theta_s_prime = std::numbers::pi / 4.0;
    double theta_i = std::numbers::pi / 8.0;
    double theta_i_prime = 3.0 * std::numbers::pi / 8.0;
};

struct BellScan {
    BellEstimator estimator;
    BellSettings settings;
    std::array<double, 4> correlations{};  // E(a,b), E(a,b'), E(a',b), E(a',b')
    double s_value = 0.0;
    double visibility = 0.0;
};

namespace detail {

inline std::map<LGIndex, Complex> coefficient_table(const ModeSuperposition& sup) {
    std::map<LGIndex, Complex> t;
    for (const auto& term : sup.terms()) t[term.index] = term.coeff;
    return t;
}

inline Complex table_coeff(const std::map<LGIndex, Complex>& t, const LGIndex& idx) {
    const auto it = t.find(idx);
    return it == t.end() ? Complex{0.0, 0.0} : it->second;
}

}  // namespace detail

// |<meas_s| <meas_i| state>|^2 over the Schmidt pairs.
inline double coincidence_probability(const TwoPhotonState& state, const ModeSuperposition& meas_s,
                                      const ModeSuperposition& meas_i) {
    if (!(meas_s.beam() == meas_i.beam()))
        throw std::invalid_argument("coincidence_probability: analyzers on different beams");
    const auto a = detail::coefficient_table(meas_s);
    const auto b = detail::coefficient_table(meas_i);

    Complex amp{0.0, 0.0};
    for (const auto& [idx, c] : state.entries()) {
        amp += c * std::conj(detail::table_coeff(a, {idx.ell, idx.p})) *
               std::conj(detail::table_coeff(b, {-idx.ell, idx.p}));
        if (idx.ell > 0)
            amp += c * std::conj(detail::table_coeff(a, {-idx.ell, idx.p})) *
                   std::conj(detail::table_coeff(b, {idx.ell, idx.p}));
    }
    return std::norm(amp);
}

// Same amplitude rule for the link-subspace state. The raw (possibly
// non-unit) coefficients are used as given, matching the convention of the
// closed-form coincidence curve.
inline double coincidence_probability(const LinkQubitState& state, const ModeSuperposition& meas_s,
                                      const ModeSuperposition& meas_i) {
    if (!(meas_s.beam() == meas_i.beam()))
        throw std::invalid_argument("coincidence_probability: analyzers on different beams");
    const ModeSuperposition p_link = p_hopf_state(meas_s.beam());
    const Complex overlap_s0 = modal_inner_product(meas_s, p_link);
    const Complex overlap_i0 = modal_inner_product(meas_i, p_link);
    const Complex amp = state.c0 * std::conj(overlap_s0) * std::conj(overlap_i0) +
                        state.c2 * std::conj(meas_s.coefficient({2, 0})) *
                            std::conj(meas_i.coefficient({-2, 0}));
    return std::norm(amp);
}

struct CoincidenceCurve {
    double const_c0 = 0.0;      // c0^2 alpha^4
    double const_c2 = 0.0;      // c2^2 beta^4
    double oscillation = 0.0;   // 2 c0 c2 alpha^2 beta^2
    double value = 0.0;         // full curve at (theta_s, theta_i)

    double at(double theta_s, double theta_i) const {
        return const_c0 + const_c2 + oscillation * std::cos(2.0 * (theta_s - theta_i));
    }
    double visibility() const {
        return oscillation / (const_c0 + const_c2);
    }
};

// Closed-form coincidence vs analyzer orientations:
// c0^2 a^4 + c2^2 b^4 + 2 c0 c2 a^2 b^2 cos(2 (theta_s - theta_i)).
inline CoincidenceCurve predicted_coincidence_curve(double c0, double c2, double alpha,
                                                    double beta, double theta_s = 0.0,
                                                    double theta_i = 0.0) {
    if (!(c0 > 0.0) || !(c2 > 0.0) || !(alpha > 0.0) || !(beta > 0.0))
        throw std::invalid_argument("predicted_coincidence_curve: inputs must be positive");
    CoincidenceCurve curve;
    curve.const_c0 = c0 * c0 * std::pow(alpha, 4);
    curve.const_c2 = c2 * c2 * std::pow(beta, 4);
    curve.oscillation = 2.0 * c0 * c2 * alpha * alpha * beta * beta;
    curve.value = curve.at(theta_s, theta_i);
    return curve;
}

// QC = C / (S_s S_i dt): coincidences relative to the accidental rate of
// uncorrelated arms.
inline double quantum_contrast(double coincidence_hz, double singles_s_hz, double singles_i_hz,
                               double gate_s) {
    if (!(singles_s_hz > 0.0) || !(singles_i_hz > 0.0) || !(gate_s > 0.0))
        throw std::invalid_argument("quantum_contrast: singles rates and gate must be positive");
    return coincidence_hz / (singles_s_hz * singles_i_hz * gate_s);
}

// Coincidence probability for every (signal mode, idler mode) pair of single
// LG modes. Schmidt-conjugate pairs sit on the anti-diagonal; everything else
// is exactly zero in the ideal model.
inline std::vector<std::vector<double>> correlation_matrix(const TwoPhotonState& state,
                                                           const std::vector<LGIndex>& modes) {
    for (std::size_t i = 0; i < modes.size(); ++i)
        for (std::size_t j = i + 1; j < modes.size(); ++j)
            if (modes[i] == modes[j])
                throw std::invalid_argument("correlation_matrix: modes must be distinct");
    std::vector<std::vector<double>> m(modes.size(), std::vector<double>(modes.size(), 0.0));
    for (std::size_t i = 0; i < modes.size(); ++i)
        for (std::size_t j = 0; j < modes.size(); ++j) {
            const LGIndex s = modes[i];
            const LGIndex idler = modes[j];
            if (idler.ell == -s.ell && idler.p == s.p) {
                const Complex c =
                    detail::table_coeff(state.entries(), {std::abs(s.ell), s.p});
                m[i][j] = std::norm(c);
            }
        }
    return m;
}

struct ContrastMap {
    std::vector<double> dz_m;
    std::vector<double> dtheta_rad;
    std::vector<std::vector<double>> values;  // values[iz][itheta]
};

// Coincidence vs axial and rotational displacement of the idler analyzer.
template <typename StateT>
ContrastMap contrast_map(const StateT& state, const ModeSuperposition& meas_s,
                         const ModeSuperposition& meas_i, double dz_half_range_m,
                         double dtheta_half_range_rad, int steps_z, int steps_theta) {
    if (steps_z < 1 || steps_theta < 1)
        throw std::invalid_argument("contrast_map: step counts must be >= 1");
    ContrastMap map;
    for (int iz = 0; iz < steps_z; ++iz)
        map.dz_m.push_back(steps_z == 1 ? 0.0
                                        : -dz_half_range_m +
                                              2.0 * dz_half_range_m * iz / (steps_z - 1));
    for (int it = 0; it < steps_theta; ++it)
        map.dtheta_rad.push_back(steps_theta == 1
                                     ? 0.0
                                     : -dtheta_half_range_rad +
                                           2.0 * dtheta_half_range_rad * it / (steps_theta - 1));
    map.values.assign(steps_z, std::vector<double>(steps_theta, 0.0));
    for (int iz = 0; iz < steps_z; ++iz)
        for (int it = 0; it < steps_theta; ++it) {
            const ModeSuperposition displaced =
                apply_displacement(meas_i, map.dz_m[iz], map.dtheta_rad[it]);
            map.values[iz][it] = coincidence_probability(state, meas_s, displaced);
        }
    return map;
}

namespace detail {

using Qubit = std::array<Complex, 2>;

inline Qubit normalized_qubit(Complex a, Complex b) {
    const double n = std::sqrt(std::norm(a) + std::norm(b));
    return {a / n, b / n};
}

// Coincidence amplitude in the link qubit subspace; the idler basis is the
// l-conjugated one, so idler analyzer phases enter conjugated.
inline double qubit_coincidence(const LinkQubitState& st, const Qubit& u, const Qubit& v) {
    const Complex amp = st.c0 * std::conj(u[0]) * std::conj(v[0]) +
                        st.c2 * std::conj(u[1]) * std::conj(v[1]);
    return std::norm(amp);
}

inline Qubit signal_analyzer(double theta, double alpha, double beta) {
    return normalized_qubit(alpha, -beta * std::polar(1.0, 2.0 * theta));
}
inline Qubit signal_complement(double theta, double alpha, double beta) {
    return normalized_qubit(beta, alpha * std::polar(1.0, 2.0 * theta));
}
inline Qubit idler_analyzer(double theta, double alpha, double beta) {
    return normalized_qubit(alpha, -beta * std::polar(1.0, -2.0 * theta));
}
inline Qubit idler_complement(double theta, double alpha, double beta) {
    return normalized_qubit(beta, alpha * std::polar(1.0, -2.0 * theta));
}

inline double correlation_e(const LinkQubitState& st, double ts, double ti, double alpha,
                            double beta) {
    const double pp = qubit_coincidence(st, signal_analyzer(ts, alpha, beta),
                                        idler_analyzer(ti, alpha, beta));
    const double pm = qubit_coincidence(st, signal_analyzer(ts, alpha, beta),
                                        idler_complement(ti, alpha, beta));
    const double mp = qubit_coincidence(st, signal_complement(ts, alpha, beta),
                                        idler_analyzer(ti, alpha, beta));
    const double mm = qubit_coincidence(st, signal_complement(ts, alpha, beta),
                                        idler_complement(ti, alpha, beta));
    const double total = pp + pm + mp + mm;
    if (total <= 0.0) throw std::runtime_error("correlation_e: vanishing total coincidence");
    return (pp + mm - pm - mp) / total;
}

}  // namespace detail

// CHSH scan over the link qubit subspace. alpha/beta set the analyzer shape
// (the link decomposition weights).
//  - projective_chsh: analyzers (alpha, -beta e^{2i theta}) and their exact
//    algebraic complements; E from the four projector coincidences;
//    S = E(a,b) - E(a,b') + E(a',b) + E(a',b').
//  - visibility_2sqrt2: S = 2 sqrt(2) times the visibility of the theta_i
//    coincidence fringe.
inline BellScan chsh_scan(const LinkQubitState& state, BellEstimator estimator,
                          const BellSettings& settings, double alpha = 0.803,
                          double beta = 0.596) {
    if (settings.theta_s == settings.theta_s_prime || settings.theta_i == settings.theta_i_prime)
        throw std::invalid_argument("chsh_scan: degenerate analyzer settings");
    const LinkQubitState st = state.normalized();

    BellScan scan;
    scan.estimator = estimator;
    scan.settings = settings;

    // Fringe visibility of the theta_i scan at fixed theta_s. The amplitude
    // is A + B e^{2i theta_i}, so the fringe is fully characterized by |A|
    // and |B|.
    {
        const detail::Qubit u = detail::signal_analyzer(settings.theta_s, alpha, beta);
        const double nv = std::sqrt(alpha * alpha + beta * beta);
        const double mag_a = std::abs(st.c0 * std::conj(u[0]) * (alpha / nv));
        const double mag_b = std::abs(st.c2 * std::conj(u[1]) * (beta / nv));
        scan.visibility = 2.0 * mag_a * mag_b / (mag_a * mag_a + mag_b * mag_b);
    }

    if (estimator == BellEstimator::visibility_2sqrt2) {
        scan.s_value = 2.0 * std::numbers::sqrt2 * scan.visibility;
        return scan;
    }

    scan.correlations = {
        detail::correlation_e(st, settings.theta_s, settings.theta_i, alpha, beta),
        detail::correlation_e(st, settings.theta_s, settings.theta_i_prime, alpha, beta),
        detail::correlation_e(st, settings.theta_s_prime, settings.theta_i, alpha, beta),
        detail::correlation_e(st, settings.theta_s_prime, settings.theta_i_prime, alpha, beta)};
    scan.s_value = scan.correlations[0] - scan.correlations[1] + scan.correlations[2] +
                   scan.correlations[3];
    return scan;
}

// Exhaustive search for the settings maximizing |S| under projective_chsh.
inline BellScan best_projective_chsh(const LinkQubitState& state, int grid_points = 24,
                                     double alpha = 0.803, double beta = 0.596) {
    const double step = std::numbers::pi / grid_points;
    BellScan best;
    best.estimator = BellEstimator::projective_chsh;
    double best_abs = -1.0;
    for (int a = 0; a < grid_points; ++a)
        for (int a2 = a + 1; a2 < grid_points; ++a2)
            for (int b = 0; b < grid_points; ++b)
                for (int b2 = b + 1; b2 < grid_points; ++b2) {
                    const BellSettings s{a * step, a2 * step, b * step, b2 * step};
                    const BellScan scan =
                        chsh_scan(state, BellEstimator::projective_chsh, s, alpha, beta);
                    if (std::abs(scan.s_value) > best_abs) {
                        best_abs = std::abs(scan.s_value);
                        best = scan;
                    }
                }
    return best;
}

// Poissonian count simulation: true pairs at prob * pair_rate plus an
// independent accidental stream at S_s S_i dt. Deterministic for a fixed
// seed.
inline std::vector<CoincidenceRecord> simulate_counts(
    const std::vector<std::pair<std::string, double>>& prob_table, double pair_rate_hz,
    double singles_s_hz, double singles_i_hz, double gate_s, double integration_s,
    std::uint64_t seed) {
    if (pair_rate_hz < 0.0 || singles_s_hz < 0.0 || singles_i_hz < 0.0)
        throw std::invalid_argument("simulate_counts: rates must be >= 0");
    if (!(gate_s > 0.0) || !(integration_s > 0.0))
        throw std::invalid_argument("simulate_counts: gate and integration must be positive");

    std::mt19937_64 rng(seed);
    auto poisson = [&rng](double mean) -> double {
        if (mean <= 0.0) return 0.0;
        std::poisson_distribution<long long> d(mean);
        return static_cast<double>(d(rng));
    };

    std::vector<CoincidenceRecord> out;
    for (const auto& [label, prob] : prob_table) {
        CoincidenceRecord rec;
        rec.setting = label;
        rec.gate_s = gate_s;
        const double true_counts = poisson(prob * pair_rate_hz * integration_s);
        const double accidental_counts =
            poisson(singles_s_hz * singles_i_hz * gate_s * integration_s);
        rec.coincidence_rate_hz = (true_counts + accidental_counts) / integration_s;
        rec.singles_s_hz = poisson(singles_s_hz * integration_s) / integration_s;
        rec.singles_i_hz = poisson(singles_i_hz * integration_s) / integration_s;
        rec.quantum_contrast =
            (rec.singles_s_hz > 0.0 && rec.singles_i_hz > 0.0)
                ? quantum_contrast(rec.coincidence_rate_hz, rec.singles_s_hz, rec.singles_i_hz,
                                   gate_s)
                : 0.0;
        out.push_back(rec);
    }
    return out;
}

inline nlohmann::json bell_scan_to_json(const BellScan& scan) {
    nlohmann::json j;
    j["estimator"] = scan.estimator == BellEstimator::projective_chsh ? "projective_chsh"
                                                                      : "visibility_2sqrt2";
    j["settings"] = {{"theta_s", scan.settings.theta_s},
                     {"theta_s_prime", scan.settings.theta_s_prime},
                     {"theta_i", scan.settings.theta_i},
                     {"theta_i_prime", scan.settings.theta_i_prime}};
    j["E"] = scan.correlations;
    j["S"] = scan.s_value;
    j["visibility"] = scan.visibility;
    return j;
}

}  // namespace linklight
