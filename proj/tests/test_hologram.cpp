#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

#include <linklight/hologram.hpp>
#include <linklight/topology.hpp>

using namespace linklight;
using std::numbers::pi;

namespace {
const BeamGeometry kBeam{710e-9, 1e-3};

HologramSpec make_spec(HologramEncoding enc, double cycles = 32.0, int n = 256,
                       double half_w0 = 4.0) {
    HologramSpec s;
    s.grating_cycles = cycles;
    s.grid.nx = n;
    s.grid.ny = n;
    s.grid.half_extent_m = half_w0 * kBeam.waist_m;
    s.encoding = enc;
    return s;
}

ModeSuperposition gaussian() {
    std::vector<ModeTerm> t = {{{0, 0}, {1.0, 0.0}}};
    return {std::move(t), kBeam};
}
}  // namespace

TEST_CASE("arcsinc inverts sinc on [-pi, 0]") {
    for (double y : {0.0, 0.05, 0.3, 0.6, 0.9, 1.0}) {
        const double x = detail::arcsinc(y);
        CHECK(x <= 0.0);
        CHECK(x >= -pi);
        CHECK(detail::sinc(x) == Catch::Approx(y).margin(1e-12));
    }
    // the printed depth factor at full intensity
    const double s = detail::sinc(1.0 - pi);
    CHECK(s * s == Catch::Approx(0.1544).margin(2e-5));
    const double s0 = detail::sinc(1.0);
    CHECK(s0 * s0 == Catch::Approx(0.708073).margin(1e-5));
}

TEST_CASE("hologram phase values stay in [0, 2pi)") {
    for (auto enc : {HologramEncoding::as_printed, HologramEncoding::normalized_blaze}) {
        const PhaseMap map = synthesize_hologram(hopf_link_superposition(0.4, kBeam),
                                                 make_spec(enc, 16.0, 64));
        for (double v : map.values) {
            CHECK(v >= 0.0);
            CHECK(v < 2 * pi);
        }
    }
}

TEST_CASE("as_printed pixels follow the depth formula") {
    const HologramSpec spec = make_spec(HologramEncoding::as_printed, 16.0, 64);
    const ModeSuperposition sup = hopf_link_superposition(0.0, kBeam);
    const PhaseMap map = synthesize_hologram(sup, spec);

    // recompute a scattering of pixels from the analytic field
    const SampledField target = sample_plane(sup, 0.0, spec.grid);
    double max_i = 0.0;
    for (const auto& v : target.values) max_i = std::max(max_i, std::norm(v));
    const double carrier = 2.0 * pi * spec.grating_cycles / (2.0 * spec.grid.half_extent_m);
    for (int j = 3; j < spec.grid.ny; j += 17)
        for (int i = 5; i < spec.grid.nx; i += 13) {
            const Complex v = target.at(i, j);
            double wrapped = std::fmod(std::arg(v) + carrier * spec.grid.x(i), 2 * pi);
            if (wrapped < 0.0) wrapped += 2 * pi;
            const double s = detail::sinc(1.0 - pi * std::norm(v) / max_i);
            CHECK(map.at(i, j) == Catch::Approx(wrapped * s * s).margin(1e-12));
        }
}

TEST_CASE("grating specification is validated") {
    CHECK_THROWS_AS((synthesize_hologram(gaussian(), make_spec(HologramEncoding::as_printed, 0.0))),
                    std::invalid_argument);
    CHECK_THROWS_AS((synthesize_hologram(gaussian(), make_spec(HologramEncoding::as_printed, 7.9))),
                    std::invalid_argument);
}

TEST_CASE("first-order reconstruction fidelity") {
    SECTION("pure Gaussian target") {
        const HologramSpec spec = make_spec(HologramEncoding::normalized_blaze);
        const PhaseMap map = synthesize_hologram(gaussian(), spec);
        const SampledField recon = first_order_field(map, spec, 4.0 * kBeam.waist_m);
        const SampledField target = sample_plane(gaussian(), 0.0, spec.grid);
        CHECK(normalized_overlap_modulus(recon, target) > 0.95);
    }
    SECTION("link target") {
        const ModeSuperposition link = hopf_link_superposition(0.0, kBeam);
        const HologramSpec spec = make_spec(HologramEncoding::normalized_blaze);
        const PhaseMap map = synthesize_hologram(link, spec);
        const SampledField recon = first_order_field(map, spec, 4.0 * kBeam.waist_m);
        const SampledField target = sample_plane(link, 0.0, spec.grid);
        CHECK(normalized_overlap_modulus(recon, target) > 0.9);
    }
}

TEST_CASE("reconstructed vortex points match the analytic field") {
    const ModeSuperposition link = hopf_link_superposition(0.0, kBeam);
    const HologramSpec spec = make_spec(HologramEncoding::normalized_blaze);
    const PhaseMap map = synthesize_hologram(link, spec);
    const SampledField recon = first_order_field(map, spec, 4.0 * kBeam.waist_m);
    const SampledField target = sample_plane(link, 0.0, spec.grid);

    // compare vortex crossings inside the bright aperture (r < 2 w0)
    auto inside = [&](const VortexPoint& p) {
        return std::hypot(p.position_m[0], p.position_m[1]) < 2.0 * kBeam.waist_m;
    };
    std::vector<VortexPoint> expected, got;
    for (const auto& p : plane_vortex_points(target))
        if (inside(p)) expected.push_back(p);
    for (const auto& p : plane_vortex_points(recon))
        if (inside(p)) got.push_back(p);

    REQUIRE(!expected.empty());
    const double cell = 2.0 * std::hypot(spec.grid.dx(), spec.grid.dy());
    for (const auto& e : expected) {
        double best = 1e9;
        for (const auto& g : got)
            best = std::min(best, std::hypot(g.position_m[0] - e.position_m[0],
                                             g.position_m[1] - e.position_m[1]));
        CHECK(best <= cell);
    }
}

TEST_CASE("phase map exports") {
    const HologramSpec spec = make_spec(HologramEncoding::normalized_blaze, 16.0, 64);
    const PhaseMap map = synthesize_hologram(gaussian(), spec);

    std::ostringstream pgm;
    write_phase_map_pgm(map, pgm);
    CHECK(pgm.str().rfind("P5\n64 64\n65535\n", 0) == 0);
    CHECK(pgm.str().size() == std::string("P5\n64 64\n65535\n").size() + 2u * 64 * 64);

    std::ostringstream csv;
    write_phase_map_csv(map, csv);
    CHECK(csv.str().rfind("x_m,y_m,phase_rad\n", 0) == 0);
}
