#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include <linklight/twophoton.hpp>

using namespace linklight;
using std::numbers::pi;

namespace {
const BeamGeometry kBeam{710e-9, 1e-3};
const LinkQubitState kReferenceQubit{{0.76, 0.0}, {0.64, 0.0}};

ModeSuperposition single_mode(int ell, int p) {
    std::vector<ModeTerm> t = {{{ell, p}, {1.0, 0.0}}};
    return {std::move(t), kBeam};
}

double link_alpha() {
    return modal_inner_product(hopf_link_superposition(0.0, kBeam), p_hopf_state(kBeam)).real();
}
}  // namespace

TEST_CASE("coincidence probability of the link qubit state") {
    const ModeSuperposition link = hopf_link_superposition(0.0, kBeam);
    const ModeSuperposition conj_link = link.conjugated();

    // raw-coefficient regression against the printed constants 0.244 + 0.052 + 0.225
    const double p = coincidence_probability(kReferenceQubit, link, conj_link);
    CHECK(p == Catch::Approx(0.521).margin(0.01));

    CHECK(coincidence_probability(kReferenceQubit, single_mode(0, 1), single_mode(-2, 0)) ==
          Catch::Approx(0.0).margin(1e-20));
    CHECK(coincidence_probability(kReferenceQubit, single_mode(2, 0), single_mode(-2, 0)) ==
          Catch::Approx(0.4096).margin(1e-12));
}

TEST_CASE("schmidt-form coincidence probability") {
    const TwoPhotonState state = TwoPhotonState::bandwidth_model();
    CHECK(coincidence_probability(state, single_mode(0, 1), single_mode(-2, 0)) == 0.0);

    // schmidt pairing only
    const double diag = coincidence_probability(state, single_mode(2, 0), single_mode(-2, 0));
    CHECK(diag > 0.0);
    CHECK(coincidence_probability(state, single_mode(2, 0), single_mode(2, 0)) == 0.0);

    // probabilities stay in [0, 1]
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<ModeTerm> ta, tb;
        for (int l = -2; l <= 2; ++l) {
            ta.push_back({{l, 0}, {u(rng), u(rng)}});
            tb.push_back({{l, 0}, {u(rng), u(rng)}});
        }
        auto normalize = [](std::vector<ModeTerm> t, const BeamGeometry& beam) {
            double n = 0.0;
            for (auto& x : t) n += std::norm(x.coeff);
            for (auto& x : t) x.coeff /= std::sqrt(n);
            return ModeSuperposition(std::move(t), beam);
        };
        const ModeSuperposition a = normalize(ta, kBeam);
        const ModeSuperposition b = normalize(tb, kBeam);
        const double prob = coincidence_probability(state, a, b);
        CHECK(prob >= 0.0);
        CHECK(prob <= 1.0 + 1e-12);

        // exchange symmetry: swap the arms and conjugate both analyzers
        const double swapped = coincidence_probability(state, b.conjugated(), a.conjugated());
        CHECK(swapped == Catch::Approx(prob).margin(1e-12));
    }
}

TEST_CASE("predicted coincidence curve constants") {
    const CoincidenceCurve c = predicted_coincidence_curve(0.76, 0.64, 0.803, 0.596);
    CHECK(c.const_c0 == Catch::Approx(0.244).margin(0.005));
    CHECK(c.const_c2 == Catch::Approx(0.052).margin(0.005));
    CHECK(c.oscillation == Catch::Approx(0.225).margin(0.005));
    // exact arithmetic: c0^2 a^4, c2^2 b^4, 2 c0 c2 a^2 b^2
    CHECK(c.const_c0 == Catch::Approx(0.5776 * std::pow(0.803, 4)).margin(1e-12));
    CHECK(c.const_c2 == Catch::Approx(0.4096 * std::pow(0.596, 4)).margin(1e-12));
    CHECK(c.oscillation ==
          Catch::Approx(2 * 0.76 * 0.64 * 0.803 * 0.803 * 0.596 * 0.596).margin(1e-12));

    // anti-aligned orientations suppress the cross term
    CHECK(c.at(0.0, pi / 2) == Catch::Approx(0.071).margin(0.005));

    CHECK(c.visibility() == Catch::Approx(0.762).margin(0.005));

    CHECK_THROWS_AS((predicted_coincidence_curve(0.0, 0.64, 0.803, 0.596)), std::invalid_argument);
}

TEST_CASE("full-model coincidence reproduces the closed-form curve") {
    const double alpha = link_alpha();
    const double beta = 0.596;
    for (double ts : {0.0, 0.37, 1.1}) {
        for (double ti : {0.0, 0.2, 2.4}) {
            const ModeSuperposition meas_s = hopf_link_superposition(ts, kBeam);
            const ModeSuperposition meas_i = hopf_link_superposition(ti, kBeam).conjugated();
            const double model = coincidence_probability(kReferenceQubit, meas_s, meas_i);
            const double closed =
                predicted_coincidence_curve(0.76, 0.64, alpha, beta, ts, ti).value;
            CHECK(model == Catch::Approx(closed).margin(1e-10));
        }
    }
}

TEST_CASE("quantum contrast") {
    CHECK(quantum_contrast(200.0 * 200.0 * 1e-8, 200.0, 200.0, 1e-8) == Catch::Approx(1.0));
    CHECK(quantum_contrast(0.04, 200.0, 200.0, 1e-8) == Catch::Approx(100.0));
    CHECK(quantum_contrast(0.0, 200.0, 200.0, 1e-8) == 0.0);
    CHECK_THROWS_AS((quantum_contrast(1.0, 0.0, 200.0, 1e-8)), std::invalid_argument);
    CHECK_THROWS_AS((quantum_contrast(1.0, 200.0, 200.0, 0.0)), std::invalid_argument);
}

TEST_CASE("correlation matrix") {
    const TwoPhotonState state = TwoPhotonState::bandwidth_model();
    const std::vector<LGIndex> modes = {{0, 0}, {0, 1}, {0, 2}, {2, 0}, {-2, 0}};
    const auto m = correlation_matrix(state, modes);

    const double c20 = std::norm(state.entries().at({2, 0}));
    CHECK(m[3][4] == Catch::Approx(c20));
    CHECK(m[4][3] == Catch::Approx(c20));
    CHECK(m[3][3] == 0.0);
    CHECK(m[1][4] == 0.0);
    CHECK(m[0][0] == Catch::Approx(std::norm(state.entries().at({0, 0}))));
    // ideal model: zero everywhere off the schmidt pairing
    for (std::size_t i = 0; i < modes.size(); ++i)
        for (std::size_t j = 0; j < modes.size(); ++j)
            if (!(modes[j].ell == -modes[i].ell && modes[j].p == modes[i].p))
                CHECK(m[i][j] == 0.0);

    CHECK_THROWS_AS((correlation_matrix(state, std::vector<LGIndex>{{0, 0}, {0, 0}})),
                    std::invalid_argument);
}

TEST_CASE("contrast map structure") {
    const ModeSuperposition link = hopf_link_superposition(0.0, kBeam);
    const ModeSuperposition conj_link = link.conjugated();
    const double zr = kBeam.rayleigh_range_m();

    const ContrastMap map =
        contrast_map(kReferenceQubit, link, conj_link, zr, pi / 2, 21, 25);

    double maxval = -1.0;
    int iz_max = -1, it_max = -1;
    for (int iz = 0; iz < 21; ++iz)
        for (int it = 0; it < 25; ++it)
            if (map.values[iz][it] > maxval) {
                maxval = map.values[iz][it];
                iz_max = iz;
                it_max = it;
            }
    CHECK(map.dz_m[iz_max] == Catch::Approx(0.0).margin(1e-12));
    CHECK(map.dtheta_rad[it_max] == Catch::Approx(0.0).margin(1e-12));

    // pi periodicity in dtheta: endpoints -pi/2 and +pi/2 coincide
    for (int iz = 0; iz < 21; ++iz)
        CHECK(map.values[iz][0] == Catch::Approx(map.values[iz][24]).margin(1e-12));

    // dtheta = pi/4 kills the oscillating term
    const ContrastMap slice = contrast_map(kReferenceQubit, link, conj_link, 0.0, pi / 4, 1, 3);
    const CoincidenceCurve c = predicted_coincidence_curve(0.76, 0.64, link_alpha(), 0.596);
    CHECK(slice.values[0][2] == Catch::Approx(c.const_c0 + c.const_c2).margin(1e-10));
}

TEST_CASE("CHSH: canonical maximum") {
    const LinkQubitState bell{{1.0 / std::sqrt(2.0), 0.0}, {1.0 / std::sqrt(2.0), 0.0}};
    const BellSettings settings{0.0, pi / 4, pi / 8, 3 * pi / 8};
    const double isq = 1.0 / std::sqrt(2.0);
    const BellScan scan =
        chsh_scan(bell, BellEstimator::projective_chsh, settings, isq, isq);
    CHECK(scan.s_value == Catch::Approx(2.0 * std::sqrt(2.0)).margin(1e-9));
    for (double e : scan.correlations) CHECK(std::abs(e) <= 1.0 + 1e-12);
}

TEST_CASE("CHSH: Tsirelson and classical bounds") {
    std::mt19937_64 rng(57);
    std::uniform_real_distribution<double> angle(0.0, pi);
    std::uniform_real_distribution<double> mag(0.05, 1.0);

    for (int trial = 0; trial < 200; ++trial) {
        const LinkQubitState st{{mag(rng), 0.0}, {mag(rng), mag(rng)}};
        BellSettings s{angle(rng), angle(rng), angle(rng), angle(rng)};
        if (s.theta_s == s.theta_s_prime || s.theta_i == s.theta_i_prime) continue;
        const BellScan scan = chsh_scan(st, BellEstimator::projective_chsh, s);
        CHECK(std::abs(scan.s_value) <= 2.0 * std::sqrt(2.0) + 1e-9);
    }

    // product state: dense grid never violates the classical bound
    const LinkQubitState product{{1.0, 0.0}, {0.0, 0.0}};
    const int n = 12;
    double worst = 0.0;
    for (int a = 0; a < n; ++a)
        for (int a2 = a + 1; a2 < n; ++a2)
            for (int b = 0; b < n; ++b)
                for (int b2 = b + 1; b2 < n; ++b2) {
                    const BellSettings s{a * pi / n, a2 * pi / n, b * pi / n, b2 * pi / n};
                    const BellScan scan = chsh_scan(product, BellEstimator::projective_chsh, s);
                    worst = std::max(worst, std::abs(scan.s_value));
                }
    CHECK(worst <= 2.0 + 1e-9);
}

TEST_CASE("CHSH: visibility estimator on the reference qubit amplitudes") {
    const BellScan scan =
        chsh_scan(kReferenceQubit, BellEstimator::visibility_2sqrt2, BellSettings{});
    CHECK(scan.visibility == Catch::Approx(0.762).margin(0.005));
    CHECK(scan.s_value == Catch::Approx(2.155).margin(0.01));

    BellSettings degenerate{0.1, 0.1, 0.0, 1.0};
    CHECK_THROWS_AS((chsh_scan(kReferenceQubit, BellEstimator::visibility_2sqrt2, degenerate)),
                    std::invalid_argument);
}

TEST_CASE("projective CHSH grid search exceeds the classical bound for the reference qubit amplitudes") {
    const BellScan best = best_projective_chsh(kReferenceQubit, 16);
    CHECK(std::abs(best.s_value) > 2.0);
    CHECK(std::abs(best.s_value) <= 2.0 * std::sqrt(2.0) + 1e-9);
}

TEST_CASE("simulate_counts") {
    const std::vector<std::pair<std::string, double>> table = {{"aligned", 0.5},
                                                               {"crossed", 0.05}};

    SECTION("fixed seed reproduces bit-identical records") {
        const auto r1 = simulate_counts(table, 10.0, 200.0, 200.0, 1e-8, 100.0, 99);
        const auto r2 = simulate_counts(table, 10.0, 200.0, 200.0, 1e-8, 100.0, 99);
        REQUIRE(r1.size() == r2.size());
        for (std::size_t i = 0; i < r1.size(); ++i) {
            CHECK(r1[i].coincidence_rate_hz == r2[i].coincidence_rate_hz);
            CHECK(r1[i].quantum_contrast == r2[i].quantum_contrast);
        }
    }

    SECTION("zero pair rate leaves accidentals only") {
        const auto r = simulate_counts({{"x", 1.0}}, 0.0, 500.0, 500.0, 1e-6, 5000.0, 7);
        CHECK(r[0].quantum_contrast == Catch::Approx(1.0).margin(0.15));
    }

    SECTION("empirical QC converges to the analytic value") {
        const double prob = 0.5, pair_rate = 0.08, singles = 200.0, gate = 1e-8;
        const double integration = 2e5;
        const double accidental = singles * singles * gate;
        const double analytic_qc = (prob * pair_rate + accidental) / accidental;
        const auto r =
            simulate_counts({{"x", prob}}, pair_rate, singles, singles, gate, integration, 12345);
        const double expected_counts = (prob * pair_rate + accidental) * integration;
        const double sigma_qc = analytic_qc / std::sqrt(expected_counts);
        CHECK(std::abs(r[0].quantum_contrast - analytic_qc) < 3.0 * sigma_qc);
    }
}
