#pragma once

#include <utility>
#include <vector>

#include "qpc/isph.hpp"

namespace qpc {

/// Taylor-Green vortex on a periodic unit cell: n_side^2 fluid particles,
/// no boundaries.
struct TgvSpec {
    int n_side = 32;
    double L = 1.0;
    double U = 1.0;
    double Re = 100.0;
    bool shifting = true;  // keeps the lattice regular; projection stays clean

    double nu() const { return U * L / Re; }
};

/// Lattice of counter-rotating vortices:
/// u = U sin(2 pi x / L) cos(2 pi y / L), v = -U cos(2 pi x / L) sin(2 pi y / L).
ParticleSystem tgv_init(const TgvSpec& spec);

/// Analytic decay of the maximum speed: U exp(-8 pi^2 nu t / L^2).
double tgv_umax_analytic(const TgvSpec& spec, double t);

/// Water column (a x 2a) against the left wall of a 4a x 3a tank with
/// three staggered layers of fixed wall particles. At the reference
/// resolution (33 nodes per column width) the construction yields exactly
/// 2278 fluid and 1660 boundary particles.
struct DamBreakSpec {
    double a = 0.1;          // column width; height 2a, tank 4a x 3a
    int nodes_per_a = 33;    // dx = a / nodes_per_a
    double gravity = 9.81;
    double nu = 1e-6;
    int wall_layers = 3;
    bool hydrostatic_init = true;
    bool shifting = true;

    double dx() const { return a / nodes_per_a; }
};

ParticleSystem dambreak_init(const DamBreakSpec& spec);

/// Maximum x over fluid particles (the leading wave edge).
double leading_edge(const ParticleSystem& sys);

/// RMS of (series - reference) with the reference linearly interpolated onto
/// the series times, normalized by max |reference| over the overlap.
double rms_rel_error(const std::vector<std::pair<double, double>>& series,
                     const std::vector<std::pair<double, double>>& reference);

}  // namespace qpc
