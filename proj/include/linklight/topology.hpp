#pragma once

// Phase-singularity detection, 3D vortex-line tracing and linking numbers.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fieldgrid.hpp"
#include "modes.hpp"

namespace linklight {

enum class FaceOrientation { xy, yz, zx };

struct VortexPoint {
    std::array<double, 3> position_m;
    int charge;  // +-1 generically; axes of pure |ell| >= 2 modes resolve to +-|ell|
    FaceOrientation face;
};

struct VortexLine {
    std::vector<std::array<double, 3>> points_m;
    bool closed = false;
    bool exits_volume = false;
};

struct TopologyReport {
    std::vector<VortexLine> lines;
    std::vector<std::vector<int>> linking_matrix;  // over closed lines, in order of appearance
    int n_closed = 0;
    int n_open = 0;
};

struct VolumeSpec {
    GridSpec grid;
    double z_min_m = 0.0;
    double z_max_m = 0.0;
    int nz = 129;

    void validate() const {
        grid.validate();
        if (nz < 16) throw std::invalid_argument("VolumeSpec: nz must be >= 16");
        if (!(z_max_m > z_min_m)) throw std::invalid_argument("VolumeSpec: empty z range");
    }
    double dz() const { return (z_max_m - z_min_m) / (nz - 1); }
    double z(int k) const { return z_min_m + k * dz(); }
};

inline constexpr double kAmplitudeFloorFraction = 1e-9;

namespace detail {

inline double wrap_phase(double d) {
    const double two_pi = 2.0 * std::numbers::pi;
    d = std::fmod(d + std::numbers::pi, two_pi);
    if (d <= 0.0) d += two_pi;
    return d - std::numbers::pi;  // (-pi, pi]
}

// Winding of the phase along a closed cycle of complex samples, in units of
// 2*pi. tie is set when any step is within eps of +-pi, i.e. the 4-corner
// plaquette cannot resolve the winding direction.
inline int cycle_winding(const std::vector<Complex>& ring, bool* tie = nullptr) {
    double total = 0.0;
    if (tie) *tie = false;
    for (std::size_t n = 0; n < ring.size(); ++n) {
        const Complex a = ring[n];
        const Complex b = ring[(n + 1) % ring.size()];
        const double d = wrap_phase(std::arg(b) - std::arg(a));
        if (tie && std::abs(std::abs(d) - std::numbers::pi) < 1e-9) *tie = true;
        total += d;
    }
    return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

}  // namespace detail

// Charged 2x2 plaquettes of a transverse plane. Each generic vortex crossing
// yields one point of charge +-1 at the plaquette center. A four-corner
// plaquette cannot resolve the winding of a centered higher-charge axis (the
// step phases tie at pi); those plaquettes are re-measured on the surrounding
// 8-sample ring and reported with the resolved integer charge.
inline std::vector<VortexPoint> plane_vortex_points(const SampledField& f) {
    const GridSpec& g = f.grid;
    double maxabs = 0.0;
    for (const auto& v : f.values) maxabs = std::max(maxabs, std::abs(v));
    const double floor = kAmplitudeFloorFraction * maxabs;

    std::vector<VortexPoint> out;
    std::vector<std::pair<int, int>> ties;  // plaquette (i, j) with an exact +-pi step
    for (int j = 0; j + 1 < g.ny; ++j) {
        for (int i = 0; i + 1 < g.nx; ++i) {
            const Complex c00 = f.at(i, j), c10 = f.at(i + 1, j);
            const Complex c11 = f.at(i + 1, j + 1), c01 = f.at(i, j + 1);
            if (std::abs(c00) < floor || std::abs(c10) < floor || std::abs(c11) < floor ||
                std::abs(c01) < floor)
                continue;
            bool tie = false;
            const int q = detail::cycle_winding({c00, c10, c11, c01}, &tie);
            if (tie) {
                ties.emplace_back(i, j);
                continue;
            }
            if (q == 0) continue;
            out.push_back({{0.5 * (g.x(i) + g.x(i + 1)), 0.5 * (g.y(j) + g.y(j + 1)), f.z_m},
                           q,
                           FaceOrientation::xy});
        }
    }

    // An exact +-pi step arises when a higher-charge axis sits symmetrically
    // between samples; neighbouring plaquettes tie together. Merge connected
    // tie plaquettes and measure one surrounding ring per component,
    // discounting charges already resolved inside it.
    std::vector<int> comp(ties.size(), -1);
    int n_comp = 0;
    for (std::size_t s = 0; s < ties.size(); ++s) {
        if (comp[s] >= 0) continue;
        comp[s] = n_comp;
        std::vector<std::size_t> stack = {s};
        while (!stack.empty()) {
            const auto cur = stack.back();
            stack.pop_back();
            for (std::size_t t = 0; t < ties.size(); ++t)
                if (comp[t] < 0 && std::abs(ties[t].first - ties[cur].first) <= 1 &&
                    std::abs(ties[t].second - ties[cur].second) <= 1) {
                    comp[t] = n_comp;
                    stack.push_back(t);
                }
        }
        ++n_comp;
    }
    for (int c = 0; c < n_comp; ++c) {
        int i0 = g.nx, i1 = -1, j0 = g.ny, j1 = -1;
        double cx = 0.0, cy = 0.0;
        int count = 0;
        for (std::size_t s = 0; s < ties.size(); ++s)
            if (comp[s] == c) {
                const auto [i, j] = ties[s];
                i0 = std::min(i0, i);
                i1 = std::max(i1, i);
                j0 = std::min(j0, j);
                j1 = std::max(j1, j);
                cx += 0.5 * (g.x(i) + g.x(i + 1));
                cy += 0.5 * (g.y(j) + g.y(j + 1));
                ++count;
            }
        if (i0 - 1 < 0 || j0 - 1 < 0 || i1 + 2 >= g.nx || j1 + 2 >= g.ny) continue;
        // rectangle of samples one cell outside the component bounding box
        std::vector<Complex> ring;
        bool ok = true;
        const int ia = i0 - 1, ib = i1 + 2, ja = j0 - 1, jb = j1 + 2;
        for (int i = ia; i <= ib; ++i) ring.push_back(f.at(i, ja));
        for (int j = ja + 1; j <= jb; ++j) ring.push_back(f.at(ib, j));
        for (int i = ib - 1; i >= ia; --i) ring.push_back(f.at(i, jb));
        for (int j = jb - 1; j > ja; --j) ring.push_back(f.at(ia, j));
        for (const auto& v : ring) ok &= std::abs(v) >= floor;
        if (!ok) continue;
        int q = detail::cycle_winding(ring);
        for (const auto& p : out)
            if (p.position_m[0] > g.x(ia) && p.position_m[0] < g.x(ib) &&
                p.position_m[1] > g.y(ja) && p.position_m[1] < g.y(jb))
                q -= p.charge;
        if (q != 0)
            out.push_back({{cx / count, cy / count, f.z_m}, q, FaceOrientation::xy});
    }
    return out;
}

// Net phase winding around the outer boundary of the grid, in units of 2*pi.
// Used as an independent oracle for total plaquette charge.
inline int boundary_winding(const SampledField& f) {
    const GridSpec& g = f.grid;
    std::vector<Complex> ring;
    for (int i = 0; i < g.nx; ++i) ring.push_back(f.at(i, 0));
    for (int j = 1; j < g.ny; ++j) ring.push_back(f.at(g.nx - 1, j));
    for (int i = g.nx - 2; i >= 0; --i) ring.push_back(f.at(i, g.ny - 1));
    for (int j = g.ny - 2; j >= 1; --j) ring.push_back(f.at(0, j));
    return detail::cycle_winding(ring);
}

namespace detail {

// Faces are identified by orientation + base lattice index (i,j,k).
// xy faces have normal z, yz normal x, zx normal y.
struct FaceKey {
    std::uint8_t orient;  // 0 xy, 1 yz, 2 zx
    int i, j, k;
    friend auto operator<=>(const FaceKey&, const FaceKey&) = default;
};

struct VolumeSampler {
    const VolumeSpec& vol;
    std::vector<std::vector<Complex>> planes;  // planes[k][j*nx+i]

    const Complex& at(int i, int j, int k) const {
        return planes[k][static_cast<std::size_t>(j) * vol.grid.nx + i];
    }
};

inline std::array<double, 3> face_center(const VolumeSpec& v, const FaceKey& f) {
    const GridSpec& g = v.grid;
    switch (f.orient) {
        case 0:  // xy
            return {0.5 * (g.x(f.i) + g.x(f.i + 1)), 0.5 * (g.y(f.j) + g.y(f.j + 1)), v.z(f.k)};
        case 1:  // yz
            return {g.x(f.i), 0.5 * (g.y(f.j) + g.y(f.j + 1)), 0.5 * (v.z(f.k) + v.z(f.k + 1))};
        default:  // zx
            return {0.5 * (g.x(f.i) + g.x(f.i + 1)), g.y(f.j), 0.5 * (v.z(f.k) + v.z(f.k + 1))};
    }
}

inline bool face_on_boundary(const VolumeSpec& v, const FaceKey& f) {
    const int nx = v.grid.nx, ny = v.grid.ny, nz = v.nz;
    switch (f.orient) {
        case 0:
            return f.k == 0 || f.k == nz - 1;
        case 1:
            return f.i == 0 || f.i == nx - 1;
        default:
            return f.j == 0 || f.j == ny - 1;
    }
}

}  // namespace detail

// Trace the phase-singularity lines of a superposition through a volume.
// Faces of the voxel lattice are tested for 2*pi winding; each voxel with two
// charged faces contributes a segment between the face centers; segments are
// chained into lines, closed loops are flagged and pairwise Gauss linking
// numbers computed.
inline int linking_number(const VortexLine& a, const VortexLine& b,
                          double min_separation_m = 0.0);

inline TopologyReport trace_vortex_lines(const ModeSuperposition& sup, const VolumeSpec& vol) {
    vol.validate();
    const GridSpec& g = vol.grid;
    const int nx = g.nx, ny = g.ny, nz = vol.nz;

    detail::VolumeSampler vs{vol, {}};
    vs.planes.resize(nz);
    double maxabs = 0.0;
    for (int k = 0; k < nz; ++k) {
        SampledField f = sample_plane(sup, vol.z(k), g);
        for (const auto& v : f.values) maxabs = std::max(maxabs, std::abs(v));
        vs.planes[k] = std::move(f.values);
    }
    const double floor = kAmplitudeFloorFraction * maxabs;

    // Detect charged faces.
    auto face_charge = [&](const detail::FaceKey& fk) -> int {
        std::array<Complex, 4> c;
        switch (fk.orient) {
            case 0:
                c = {vs.at(fk.i, fk.j, fk.k), vs.at(fk.i + 1, fk.j, fk.k),
                     vs.at(fk.i + 1, fk.j + 1, fk.k), vs.at(fk.i, fk.j + 1, fk.k)};
                break;
            case 1:
                c = {vs.at(fk.i, fk.j, fk.k), vs.at(fk.i, fk.j + 1, fk.k),
                     vs.at(fk.i, fk.j + 1, fk.k + 1), vs.at(fk.i, fk.j, fk.k + 1)};
                break;
            default:
                c = {vs.at(fk.i, fk.j, fk.k), vs.at(fk.i, fk.j, fk.k + 1),
                     vs.at(fk.i + 1, fk.j, fk.k + 1), vs.at(fk.i + 1, fk.j, fk.k)};
        }
        for (const auto& v : c)
            if (std::abs(v) < floor) return 0;
        bool tie = false;
        const int q = detail::cycle_winding({c[0], c[1], c[2], c[3]}, &tie);
        if (tie)
            throw std::runtime_error("trace_vortex_lines: unresolved winding at face (" +
                                     std::to_string(fk.i) + "," + std::to_string(fk.j) + "," +
                                     std::to_string(fk.k) + "); increase resolution");
        return q;
    };

    std::map<detail::FaceKey, int> charged;  // face -> charge
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j + 1 < ny; ++j)
            for (int i = 0; i + 1 < nx; ++i) {
                detail::FaceKey fk{0, i, j, k};
                if (int q = face_charge(fk)) charged[fk] = q;
            }
    for (int k = 0; k + 1 < nz; ++k) {
        for (int j = 0; j + 1 < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                detail::FaceKey fk{1, i, j, k};
                if (int q = face_charge(fk)) charged[fk] = q;
            }
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i + 1 < nx; ++i) {
                detail::FaceKey fk{2, i, j, k};
                if (int q = face_charge(fk)) charged[fk] = q;
            }
    }

    // Pair charged faces within voxels. Voxel (i,j,k) spans lattice points
    // i..i+1, j..j+1, k..k+1.
    std::map<detail::FaceKey, std::vector<detail::FaceKey>> adjacency;
    for (int k = 0; k + 1 < nz; ++k)
        for (int j = 0; j + 1 < ny; ++j)
            for (int i = 0; i + 1 < nx; ++i) {
                std::array<detail::FaceKey, 6> faces = {{{0, i, j, k},
                                                         {0, i, j, k + 1},
                                                         {1, i, j, k},
                                                         {1, i + 1, j, k},
                                                         {2, i, j, k},
                                                         {2, i, j + 1, k}}};
                std::vector<detail::FaceKey> hit;
                for (const auto& fk : faces)
                    if (charged.count(fk)) hit.push_back(fk);
                if (hit.empty()) continue;
                if (hit.size() != 2)
                    throw std::runtime_error(
                        "trace_vortex_lines: voxel (" + std::to_string(i) + "," +
                        std::to_string(j) + "," + std::to_string(k) + ") has " +
                        std::to_string(hit.size()) + " charged faces; increase resolution");
                adjacency[hit[0]].push_back(hit[1]);
                adjacency[hit[1]].push_back(hit[0]);
            }

    // Chain faces into lines. Interior faces have degree 2; boundary faces
    // terminate open lines.
    std::set<detail::FaceKey> visited;
    TopologyReport report;

    auto walk = [&](const detail::FaceKey& start) {
        VortexLine line;
        detail::FaceKey cur = start;
        detail::FaceKey prev = start;
        bool first = true;
        while (true) {
            visited.insert(cur);
            line.points_m.push_back(detail::face_center(vol, cur));
            const auto it = adjacency.find(cur);
            const auto& nbrs = it == adjacency.end() ? std::vector<detail::FaceKey>{} : it->second;
            detail::FaceKey next{};
            bool found = false;
            for (const auto& n : nbrs) {
                if (!first && n == prev) continue;
                if (n == start && !first) {
                    line.closed = true;
                    line.points_m.push_back(detail::face_center(vol, start));
                    return line;
                }
                if (!visited.count(n)) {
                    next = n;
                    found = true;
                    break;
                }
            }
            if (!found) {
                line.exits_volume = detail::face_on_boundary(vol, cur) ||
                                    detail::face_on_boundary(vol, start);
                return line;
            }
            prev = cur;
            cur = next;
            first = false;
        }
    };

    // Open lines first (seeded from boundary/degree-1 faces), then loops.
    for (const auto& [fk, q] : charged) {
        (void)q;
        if (visited.count(fk)) continue;
        const auto it = adjacency.find(fk);
        const std::size_t deg = it == adjacency.end() ? 0 : it->second.size();
        if (deg <= 1) report.lines.push_back(walk(fk));
    }
    for (const auto& [fk, q] : charged) {
        (void)q;
        if (!visited.count(fk)) report.lines.push_back(walk(fk));
    }

    std::vector<const VortexLine*> closed;
    for (const auto& l : report.lines) {
        if (l.closed) {
            ++report.n_closed;
            closed.push_back(&l);
        } else {
            ++report.n_open;
        }
    }

    // Accuracy of the Gauss sum is guarded by its 0.1 integer-distance check;
    // no separation precondition is imposed on traced loops (the voxel pairing
    // step already guarantees distinct loops occupy distinct voxels).
    report.linking_matrix.assign(closed.size(), std::vector<int>(closed.size(), 0));
    for (std::size_t a = 0; a < closed.size(); ++a)
        for (std::size_t b = a + 1; b < closed.size(); ++b) {
            const int lk = linking_number(*closed[a], *closed[b]);
            report.linking_matrix[a][b] = lk;
            report.linking_matrix[b][a] = lk;
        }
    return report;
}

// Gauss linking number of two closed polylines via the midpoint double sum
// over segment pairs, rounded to the nearest integer. Raises if the raw sum
// is farther than 0.1 from an integer or the curves approach closer than
// min_separation.
inline int linking_number(const VortexLine& a, const VortexLine& b, double min_separation_m) {
    if (!a.closed || !b.closed)
        throw std::invalid_argument("linking_number: both lines must be closed");

    if (min_separation_m > 0.0) {
        double min_d2 = std::numeric_limits<double>::infinity();
        for (const auto& p : a.points_m)
            for (const auto& q : b.points_m) {
                const double dx = p[0] - q[0], dy = p[1] - q[1], dz = p[2] - q[2];
                min_d2 = std::min(min_d2, dx * dx + dy * dy + dz * dz);
            }
        if (std::sqrt(min_d2) < min_separation_m)
            throw std::runtime_error("linking_number: curves closer than the required separation");
    }

    // The linking number is invariant under positive diagonal scaling, so
    // normalize each axis to the joint bounding box; otherwise strongly
    // anisotropic tracing lattices wreck the convergence of the discrete sum.
    std::array<double, 3> lo, hi;
    lo.fill(std::numeric_limits<double>::infinity());
    hi.fill(-std::numeric_limits<double>::infinity());
    for (const auto* l : {&a, &b})
        for (const auto& p : l->points_m)
            for (int c = 0; c < 3; ++c) {
                lo[c] = std::min(lo[c], p[c]);
                hi[c] = std::max(hi[c], p[c]);
            }
    std::array<double, 3> scale;
    for (int c = 0; c < 3; ++c) scale[c] = hi[c] > lo[c] ? 1.0 / (hi[c] - lo[c]) : 1.0;

    auto scaled = [&](const VortexLine& l) {
        std::vector<std::array<double, 3>> pts;
        pts.reserve(l.points_m.size());
        for (const auto& p : l.points_m)
            pts.push_back({p[0] * scale[0], p[1] * scale[1], p[2] * scale[2]});
        return pts;
    };
    const auto pa = scaled(a);
    const auto pb = scaled(b);

    double sep2 = std::numeric_limits<double>::infinity();
    for (const auto& p : pa)
        for (const auto& q : pb) {
            const double dx = p[0] - q[0], dy = p[1] - q[1], dz = p[2] - q[2];
            sep2 = std::min(sep2, dx * dx + dy * dy + dz * dz);
        }
    if (sep2 == 0.0)
        throw std::runtime_error("linking_number: curves intersect");

    // Split segments into pieces short relative to the closest approach so
    // the midpoint quadrature of the Gauss integral converges.
    const double piece = std::max(std::sqrt(sep2) / 3.0, 1e-6);
    auto segments = [&](const std::vector<std::array<double, 3>>& p) {
        std::vector<std::array<double, 3>> mid, dir;
        for (std::size_t s = 0; s + 1 < p.size(); ++s) {
            const double vx = p[s + 1][0] - p[s][0];
            const double vy = p[s + 1][1] - p[s][1];
            const double vz = p[s + 1][2] - p[s][2];
            const double len = std::sqrt(vx * vx + vy * vy + vz * vz);
            const int n = std::min(64, std::max(1, static_cast<int>(std::ceil(len / piece))));
            for (int u = 0; u < n; ++u) {
                const double f = (u + 0.5) / n;
                mid.push_back({p[s][0] + f * vx, p[s][1] + f * vy, p[s][2] + f * vz});
                dir.push_back({vx / n, vy / n, vz / n});
            }
        }
        return std::pair(mid, dir);
    };
    const auto [ma, da] = segments(pa);
    const auto [mb, db] = segments(pb);

    double sum = 0.0;
    for (std::size_t s = 0; s < ma.size(); ++s)
        for (std::size_t t = 0; t < mb.size(); ++t) {
            const double rx = ma[s][0] - mb[t][0];
            const double ry = ma[s][1] - mb[t][1];
            const double rz = ma[s][2] - mb[t][2];
            const double d2 = rx * rx + ry * ry + rz * rz;
            const double cx = da[s][1] * db[t][2] - da[s][2] * db[t][1];
            const double cy = da[s][2] * db[t][0] - da[s][0] * db[t][2];
            const double cz = da[s][0] * db[t][1] - da[s][1] * db[t][0];
            sum += (rx * cx + ry * cy + rz * cz) / (d2 * std::sqrt(d2));
        }
    sum /= 4.0 * std::numbers::pi;

    const double rounded = std::round(sum);
    if (std::abs(sum - rounded) > 0.1)
        throw std::runtime_error("linking_number: Gauss sum " + std::to_string(sum) +
                                 " is not within 0.1 of an integer; refine sampling");
    return static_cast<int>(rounded);
}

// Default tracing volume for the link states: 3 w0 transverse half extent,
// one Rayleigh range either side of the waist.
inline VolumeSpec default_link_volume(const BeamGeometry& beam, int nxy = 192, int nz = 129,
                                      double half_extent_w0 = 3.0, double z_extent_zr = 1.0) {
    GridSpec g;
    g.nx = nxy;
    g.ny = nxy;
    g.half_extent_m = half_extent_w0 * beam.waist_m;
    const double zr = beam.rayleigh_range_m();
    return {g, -z_extent_zr * zr, z_extent_zr * zr, nz};
}

// Multiset signature compared by perturbation_robustness: loop count plus
// absolute linking entries.
inline std::pair<int, std::vector<int>> topology_signature(const TopologyReport& r) {
    std::vector<int> links;
    for (std::size_t i = 0; i < r.linking_matrix.size(); ++i)
        for (std::size_t j = i + 1; j < r.linking_matrix.size(); ++j)
            links.push_back(std::abs(r.linking_matrix[i][j]));
    std::sort(links.begin(), links.end());
    return {r.n_closed, links};
}

// Fraction of random coefficient perturbations (relative magnitude and phase
// jitter uniform in [-eps, eps]) that preserve the loop count and linking
// signature of the unperturbed state.
inline double perturbation_robustness(const ModeSuperposition& sup, const VolumeSpec& vol,
                                      double epsilon, int n_trials, std::uint64_t seed) {
    if (n_trials <= 0) throw std::invalid_argument("perturbation_robustness: n_trials must be > 0");
    const auto reference = topology_signature(trace_vortex_lines(sup, vol));

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jitter(-epsilon, epsilon);
    int preserved = 0;
    for (int t = 0; t < n_trials; ++t) {
        std::vector<ModeTerm> terms;
        for (const auto& tm : sup.terms())
            terms.push_back({tm.index, tm.coeff * (1.0 + jitter(rng)) *
                                           std::polar(1.0, jitter(rng))});
        ModeSuperposition perturbed(std::move(terms), sup.beam());
        try {
            if (topology_signature(trace_vortex_lines(perturbed, vol)) == reference) ++preserved;
        } catch (const std::runtime_error&) {
            // unresolved tracing counts as a topology change
        }
    }
    return static_cast<double>(preserved) / n_trials;
}

inline nlohmann::json report_to_json(const TopologyReport& r) {
    nlohmann::json j;
    j["lines"] = nlohmann::json::array();
    for (const auto& l : r.lines) {
        nlohmann::json jl;
        jl["closed"] = l.closed;
        jl["exits_volume"] = l.exits_volume;
        jl["points"] = nlohmann::json::array();
        for (const auto& p : l.points_m) jl["points"].push_back({p[0], p[1], p[2]});
        j["lines"].push_back(std::move(jl));
    }
    j["linking_matrix"] = r.linking_matrix;
    j["n_closed"] = r.n_closed;
    j["n_open"] = r.n_open;
    return j;
}

inline void write_line_csv(const VortexLine& l, std::ostream& os) {
    os << "x_m,y_m,z_m\n";
    char buf[128];
    for (const auto& p : l.points_m) {
        std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g\n", p[0], p[1], p[2]);
        os << buf;
    }
}

}  // namespace linklight
