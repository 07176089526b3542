// Batch front end: each subcommand renders one of the library's physical
// predictions (vortex topology, holograms, coincidence maps, Bell scans,
// counting statistics) to files.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include <linklight/fieldgrid.hpp>
#include <linklight/hologram.hpp>
#include <linklight/modes.hpp>
#include <linklight/topology.hpp>
#include <linklight/twophoton.hpp>

namespace {

using namespace linklight;
using nlohmann::json;
using std::numbers::pi;

struct RunConfig {
    BeamGeometry beam{710e-9, 1e-3};
    double link_theta = 0.0;
    // tracing volume
    int volume_nxy = 192;
    int volume_nz = 129;
    double volume_half_extent_w0 = 3.0;
    double volume_z_extent_zr = 1.0;
    // transverse grid for holograms / field exports
    int grid_n = 256;
    double grid_half_extent_w0 = 4.0;
    // link qubit subspace coefficients (kept raw, as measured)
    double qubit_c0 = 0.76;
    double qubit_c2 = 0.64;
    // full down-conversion spectrum model
    double spdc_gamma = 0.8;
    int spdc_max_ell = 3;
    int spdc_max_p = 3;
    // counting
    double pair_rate_hz = 0.08;
    double singles_s_hz = 200.0;
    double singles_i_hz = 200.0;
    double gate_s = 1e-8;
    double integration_s = 1000.0;
    std::uint64_t seed = 1;
    std::string output_dir = "out";
};

RunConfig load_config(const std::string& path) {
    RunConfig c;
    if (path.empty()) return c;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    json j;
    in >> j;
    if (j.contains("beam")) {
        c.beam.wavelength_m = j["beam"].value("wavelength_m", c.beam.wavelength_m);
        c.beam.waist_m = j["beam"].value("waist_m", c.beam.waist_m);
    }
    c.link_theta = j.value("link_theta", c.link_theta);
    if (j.contains("volume")) {
        const auto& v = j["volume"];
        c.volume_nxy = v.value("nxy", c.volume_nxy);
        c.volume_nz = v.value("nz", c.volume_nz);
        c.volume_half_extent_w0 = v.value("half_extent_w0", c.volume_half_extent_w0);
        c.volume_z_extent_zr = v.value("z_extent_zr", c.volume_z_extent_zr);
    }
    if (j.contains("grid")) {
        c.grid_n = j["grid"].value("n", c.grid_n);
        c.grid_half_extent_w0 = j["grid"].value("half_extent_w0", c.grid_half_extent_w0);
    }
    if (j.contains("qubit")) {
        c.qubit_c0 = j["qubit"].value("c0", c.qubit_c0);
        c.qubit_c2 = j["qubit"].value("c2", c.qubit_c2);
    }
    if (j.contains("spdc")) {
        c.spdc_gamma = j["spdc"].value("gamma", c.spdc_gamma);
        c.spdc_max_ell = j["spdc"].value("max_ell", c.spdc_max_ell);
        c.spdc_max_p = j["spdc"].value("max_p", c.spdc_max_p);
    }
    if (j.contains("rates")) {
        const auto& r = j["rates"];
        c.pair_rate_hz = r.value("pair_rate_hz", c.pair_rate_hz);
        c.singles_s_hz = r.value("singles_s_hz", c.singles_s_hz);
        c.singles_i_hz = r.value("singles_i_hz", c.singles_i_hz);
        c.gate_s = r.value("gate_s", c.gate_s);
        c.integration_s = r.value("integration_s", c.integration_s);
    }
    c.seed = j.value("seed", c.seed);
    c.output_dir = j.value("output_dir", c.output_dir);
    return c;
}

// Named states: hopf-link, p-hopf, lg:<ell>,<p>, or a superposition JSON file.
ModeSuperposition resolve_state(const std::string& name, const RunConfig& cfg) {
    if (name == "hopf-link") return hopf_link_superposition(cfg.link_theta, cfg.beam);
    if (name == "p-hopf") return p_hopf_state(cfg.beam);
    if (name.rfind("lg:", 0) == 0) {
        int ell = 0, p = 0;
        if (std::sscanf(name.c_str() + 3, "%d,%d", &ell, &p) != 2)
            throw std::runtime_error("malformed mode name (expected lg:<ell>,<p>): " + name);
        std::vector<ModeTerm> t = {{{ell, p}, {1.0, 0.0}}};
        return {std::move(t), cfg.beam};
    }
    std::ifstream in(name);
    if (!in) throw std::runtime_error("unknown state name and no such file: " + name);
    json j;
    in >> j;
    return superposition_from_json(j);
}

std::filesystem::path out_path(const RunConfig& cfg, const std::string& file) {
    std::filesystem::create_directories(cfg.output_dir);
    return std::filesystem::path(cfg.output_dir) / file;
}

std::ofstream open_out(const RunConfig& cfg, const std::string& file, bool binary = false) {
    const auto p = out_path(cfg, file);
    std::ofstream os(p, binary ? std::ios::binary : std::ios::out);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    return os;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

int cmd_trace(const RunConfig& cfg, const std::string& state_name) {
    std::cout << "reproduces: 3D vortex-line topology of the named superposition "
                 "(closed loops and their linking numbers)\n";
    const ModeSuperposition sup = resolve_state(state_name, cfg);
    const VolumeSpec vol = default_link_volume(cfg.beam, cfg.volume_nxy, cfg.volume_nz,
                                               cfg.volume_half_extent_w0, cfg.volume_z_extent_zr);
    const TopologyReport report = trace_vortex_lines(sup, vol);

    auto js = open_out(cfg, "topology.json");
    js << report_to_json(report).dump(2) << "\n";
    for (std::size_t n = 0; n < report.lines.size(); ++n) {
        auto cs = open_out(cfg, "line_" + std::to_string(n) + ".csv");
        write_line_csv(report.lines[n], cs);
    }
    std::cout << "closed loops: " << report.n_closed << ", open lines: " << report.n_open << "\n";
    for (std::size_t i = 0; i < report.linking_matrix.size(); ++i)
        for (std::size_t j = i + 1; j < report.linking_matrix.size(); ++j)
            std::cout << "linking(" << i << "," << j << ") = " << report.linking_matrix[i][j]
                      << "\n";
    std::cout << "wrote " << out_path(cfg, "topology.json").string() << "\n";
    return 0;
}

int cmd_holo(const RunConfig& cfg, const std::string& state_name, const std::string& encoding,
             double grating_cycles, double probe_waist_w0) {
    std::cout << "reproduces: off-axis phase-only measurement hologram and its "
                 "first-order reconstruction fidelity\n";
    const ModeSuperposition sup = resolve_state(state_name, cfg);

    HologramSpec spec;
    spec.grating_cycles = grating_cycles;
    spec.grid.nx = cfg.grid_n;
    spec.grid.ny = cfg.grid_n;
    spec.grid.half_extent_m = cfg.grid_half_extent_w0 * cfg.beam.waist_m;
    if (encoding == "printed")
        spec.encoding = HologramEncoding::as_printed;
    else if (encoding == "blaze")
        spec.encoding = HologramEncoding::normalized_blaze;
    else
        throw std::runtime_error("unknown encoding (expected printed or blaze): " + encoding);

    const PhaseMap map = synthesize_hologram(sup, spec);
    {
        auto os = open_out(cfg, "hologram.pgm", true);
        write_phase_map_pgm(map, os);
    }

    const SampledField recon = first_order_field(map, spec, probe_waist_w0 * cfg.beam.waist_m);
    const SampledField target = sample_plane(sup, 0.0, spec.grid);
    const double fidelity = normalized_overlap_modulus(recon, target);
    {
        auto os = open_out(cfg, "reconstruction_amplitude.pgm", true);
        write_amplitude_pgm(recon, os);
    }
    {
        auto os = open_out(cfg, "reconstruction_phase.pgm", true);
        write_phase_pgm(recon, os);
    }
    json rep;
    rep["encoding"] = encoding;
    rep["grating_cycles"] = grating_cycles;
    rep["probe_waist_w0"] = probe_waist_w0;
    rep["overlap_modulus"] = fidelity;
    auto os = open_out(cfg, "fidelity.json");
    os << rep.dump(2) << "\n";

    std::cout << "first-order overlap with the target: " << fmt(fidelity) << "\n";
    std::cout << "wrote " << out_path(cfg, "hologram.pgm").string() << "\n";
    return 0;
}

int cmd_contrast_map(const RunConfig& cfg, int steps_z, int steps_theta, double dz_zr,
                     double dtheta_max) {
    std::cout << "reproduces: coincidence contrast versus axial and rotational "
                 "displacement of the idler analyzer\n";
    const ModeSuperposition link = hopf_link_superposition(cfg.link_theta, cfg.beam);
    const LinkQubitState qubit{{cfg.qubit_c0, 0.0}, {cfg.qubit_c2, 0.0}};
    const ContrastMap map =
        contrast_map(qubit, link, link.conjugated(), dz_zr * cfg.beam.rayleigh_range_m(),
                     dtheta_max, steps_z, steps_theta);
    auto os = open_out(cfg, "contrast_map.csv");
    os << "dz_m,dtheta_rad,contrast\n";
    for (std::size_t iz = 0; iz < map.dz_m.size(); ++iz)
        for (std::size_t it = 0; it < map.dtheta_rad.size(); ++it)
            os << fmt(map.dz_m[iz]) << "," << fmt(map.dtheta_rad[it]) << ","
               << fmt(map.values[iz][it]) << "\n";
    std::cout << "wrote " << out_path(cfg, "contrast_map.csv").string() << "\n";
    return 0;
}

int cmd_bell(const RunConfig& cfg, const std::string& estimator_name) {
    std::cout << "reproduces: coincidence fringes versus analyzer orientation and the "
                 "CHSH parameter of the link subspace\n";
    const LinkQubitState qubit{{cfg.qubit_c0, 0.0}, {cfg.qubit_c2, 0.0}};
    BellEstimator estimator;
    if (estimator_name == "visibility")
        estimator = BellEstimator::visibility_2sqrt2;
    else if (estimator_name == "projective")
        estimator = BellEstimator::projective_chsh;
    else
        throw std::runtime_error("unknown estimator (expected visibility or projective): " +
                                 estimator_name);

    const BellScan scan = chsh_scan(qubit, estimator, BellSettings{});
    auto js = open_out(cfg, "bell.json");
    js << bell_scan_to_json(scan).dump(2) << "\n";

    // fringe curves for four signal orientations, idler swept over [0, pi)
    const ModeSuperposition p_link = p_hopf_state(cfg.beam);
    const ModeSuperposition link = hopf_link_superposition(0.0, cfg.beam);
    const double alpha = modal_inner_product(link, p_link).real();
    const double beta = 0.596;
    auto cs = open_out(cfg, "bell_curves.csv");
    cs << "theta_s_rad,theta_i_rad,coincidence\n";
    const CoincidenceCurve curve =
        predicted_coincidence_curve(cfg.qubit_c0, cfg.qubit_c2, alpha, beta);
    for (int a = 0; a < 4; ++a) {
        const double ts = a * pi / 8.0;
        for (int n = 0; n < 64; ++n) {
            const double ti = n * pi / 64.0;
            cs << fmt(ts) << "," << fmt(ti) << "," << fmt(curve.at(ts, ti)) << "\n";
        }
    }
    std::cout << "estimator " << estimator_name << ": S = " << fmt(scan.s_value)
              << ", visibility = " << fmt(scan.visibility) << "\n";
    std::cout << "wrote " << out_path(cfg, "bell.json").string() << "\n";
    return 0;
}

int cmd_corr_matrix(const RunConfig& cfg) {
    std::cout << "reproduces: modal coincidence matrix of the down-conversion state over "
                 "the link modes\n";
    const TwoPhotonState state =
        TwoPhotonState::bandwidth_model(cfg.spdc_gamma, cfg.spdc_max_ell, cfg.spdc_max_p);
    const std::vector<LGIndex> modes = {{0, 0}, {0, 1}, {0, 2}, {2, 0}, {-2, 0}};
    const auto m = correlation_matrix(state, modes);

    auto os = open_out(cfg, "corr_matrix.csv");
    os << "signal_ell,signal_p,idler_ell,idler_p,coincidence\n";
    for (std::size_t i = 0; i < modes.size(); ++i)
        for (std::size_t j = 0; j < modes.size(); ++j)
            os << modes[i].ell << "," << modes[i].p << "," << modes[j].ell << "," << modes[j].p
               << "," << fmt(m[i][j]) << "\n";
    std::cout << "wrote " << out_path(cfg, "corr_matrix.csv").string() << "\n";
    return 0;
}

int cmd_counts(const RunConfig& cfg) {
    std::cout << "reproduces: Poissonian coincidence counting with accidentals at the "
                 "configured rates\n";
    const ModeSuperposition link = hopf_link_superposition(0.0, cfg.beam);
    const ModeSuperposition p_link = p_hopf_state(cfg.beam);
    const double alpha = modal_inner_product(link, p_link).real();
    const CoincidenceCurve curve =
        predicted_coincidence_curve(cfg.qubit_c0, cfg.qubit_c2, alpha, 0.596);

    std::vector<std::pair<std::string, double>> table;
    for (int n = 0; n < 8; ++n) {
        const double ti = n * pi / 8.0;
        table.push_back({"theta_i=" + fmt(ti), curve.at(0.0, ti)});
    }
    const auto records = simulate_counts(table, cfg.pair_rate_hz, cfg.singles_s_hz,
                                         cfg.singles_i_hz, cfg.gate_s, cfg.integration_s,
                                         cfg.seed);
    auto os = open_out(cfg, "counts.csv");
    os << "setting,coincidence_hz,singles_s_hz,singles_i_hz,gate_s,quantum_contrast\n";
    for (const auto& r : records)
        os << r.setting << "," << fmt(r.coincidence_rate_hz) << "," << fmt(r.singles_s_hz) << ","
           << fmt(r.singles_i_hz) << "," << fmt(r.gate_s) << "," << fmt(r.quantum_contrast)
           << "\n";
    std::cout << "wrote " << out_path(cfg, "counts.csv").string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "linklight: linked optical-vortex states, their measurement holograms and "
        "two-photon coincidence predictions"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "RunConfig JSON file");

    std::string out_dir;
    app.add_option("--out", out_dir, "output directory (overrides config)");

    std::string state_name = "hopf-link";
    std::string encoding = "blaze";
    std::string estimator = "visibility";
    double grating_cycles = 32.0;
    double probe_waist_w0 = 4.0;
    int steps_z = 41, steps_theta = 41;
    double dz_zr = 1.0, dtheta_max = std::numbers::pi / 2.0;
    std::uint64_t seed_override = 0;
    bool seed_set = false;

    auto* trace = app.add_subcommand("trace", "trace 3D vortex lines and linking numbers");
    trace->add_option("--state", state_name, "hopf-link | p-hopf | lg:<ell>,<p> | JSON file");

    auto* holo = app.add_subcommand("holo", "synthesize a measurement hologram and validate it");
    holo->add_option("--state", state_name, "hopf-link | p-hopf | lg:<ell>,<p> | JSON file");
    holo->add_option("--encoding", encoding, "printed | blaze");
    holo->add_option("--grating-cycles", grating_cycles, "carrier fringes across the aperture");
    holo->add_option("--probe-waist-w0", probe_waist_w0, "probe waist in units of w0");

    auto* cmap = app.add_subcommand("contrast-map",
                                    "coincidence contrast over (dz, dtheta) displacements");
    cmap->add_option("--steps-z", steps_z, "axial steps");
    cmap->add_option("--steps-theta", steps_theta, "rotation steps");
    cmap->add_option("--dz-zr", dz_zr, "axial half range in Rayleigh ranges");
    cmap->add_option("--dtheta-max", dtheta_max, "rotation half range in radians");

    auto* bell = app.add_subcommand("bell", "coincidence fringes and CHSH parameter");
    bell->add_option("--estimator", estimator, "visibility | projective");

    app.add_subcommand("corr-matrix", "modal coincidence matrix over the link modes");

    auto* counts = app.add_subcommand("counts", "Monte Carlo coincidence counting");
    counts->add_option("--seed", seed_override, "RNG seed (overrides config)")
        ->each([&](const std::string&) { seed_set = true; });

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = load_config(config_path);
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        if (seed_set) cfg.seed = seed_override;
        cfg.beam.validate();

        if (trace->parsed()) return cmd_trace(cfg, state_name);
        if (holo->parsed()) return cmd_holo(cfg, state_name, encoding, grating_cycles,
                                            probe_waist_w0);
        if (cmap->parsed()) return cmd_contrast_map(cfg, steps_z, steps_theta, dz_zr, dtheta_max);
        if (bell->parsed()) return cmd_bell(cfg, estimator);
        if (app.get_subcommand("corr-matrix")->parsed()) return cmd_corr_matrix(cfg);
        if (counts->parsed()) return cmd_counts(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
