#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qpc/linsys.hpp"
#include "qpc/pcore.hpp"

namespace qpc {

/// 1D-1V electron phase-space distribution on a uniform grid.
/// x in [0, L) periodic with nx cells; v in [-v_max, v_max] with nv
/// inclusive nodes. Charge and mass normalized to q = -1, m = 1, eps0 = 1
/// against a neutralizing ion background n0.
struct PhaseSpaceGrid {
    int nx = 0;
    int nv = 0;
    double L = 0.0;
    double v_max = 0.0;
    double dx = 0.0;
    double dv = 0.0;
    double q = -1.0;
    double m = 1.0;
    double eps0 = 1.0;
    double background = 1.0;  // n0

    std::vector<double> f;  // row-major [ix * nv + iv]

    double& at(int ix, int iv) { return f[static_cast<std::size_t>(ix) * nv + iv]; }
    double at(int ix, int iv) const { return f[static_cast<std::size_t>(ix) * nv + iv]; }
    double velocity(int iv) const { return -v_max + iv * dv; }
    /// Total mass \int\int f dx dv (trapezoid in v).
    double total_mass() const;
    double min_f() const;
    double max_f() const;
};

/// Electrostatic field arrays on the x grid. mean(phi) == 0 (gauge).
struct FieldState {
    std::vector<double> phi;
    std::vector<double> e_field;
    std::int64_t last_update_step = -1;
    double e_reference = 0.0;  // blow-up detector scale
};

/// Counter-streaming Maxwellian pair with a cosine density perturbation:
/// f = n0/(2 sqrt(2 pi) vt) [exp(-(v-v0)^2/2vt^2) + exp(-(v+v0)^2/2vt^2)]
///     * (1 + alpha cos(2 pi k_mode x / L)).
/// v_max <= 0 selects the default v0 + 8 vt; the precondition
/// v_max >= v0 + 6 vt always holds.
PhaseSpaceGrid init_two_stream(int nx, int nv, double L, double v0, double vt,
                               double alpha, int k_mode, double v_max = 0.0);

/// Two-stream run parameters; the domain holds one fundamental wavelength
/// per k: L = 2 pi / k.
struct TwoStreamSpec {
    int nx = 64;
    int nv = 128;
    double k = 0.5;
    double v0 = 1.0;
    double vt = 0.3;
    double alpha = 0.01;
    int k_mode = 1;
    double v_max = 5.0;
    double dt = 0.1;

    double L() const;
};

PhaseSpaceGrid init_two_stream(const TwoStreamSpec& spec);

/// Conservative semi-Lagrangian x-advection (periodic, cubic Lagrange).
void advect_x(PhaseSpaceGrid& grid, double dt);
/// v-advection under acceleration q E / m (zero-inflow at the v boundary).
void advect_v(PhaseSpaceGrid& grid, std::span<const double> e_field, double dt);

/// rho_q(x) = q (int f dv - n0), trapezoid in v.
std::vector<double> charge_density(const PhaseSpaceGrid& grid);

/// Periodic second-difference matrix scaled by 1/dx^2 in the convention
/// -laplacian(phi) = rho_q / eps0 (positive semi-definite rows that sum to
/// zero; the mean pin lives on the Lsp).
SparseMatrix assemble_poisson_1d(int nx, double dx);

/// Full Poisson problem for the current charge density, mean pin included.
Lsp poisson_lsp(const PhaseSpaceGrid& grid);

/// Centered-difference field E = -dphi/dx on the periodic grid.
std::vector<double> e_field_from_phi(std::span<const double> phi, double dx);

/// Solve the Poisson problem and install the zero-mean potential and its
/// field. Used for initialization and by full updates.
void update_field(const PhaseSpaceGrid& grid, FieldState& field,
                  std::int64_t step, double tol = 1e-8);

/// (U_K, U_E): kinetic energy (1/2) m int v^2 f and field energy
/// (eps0/2) int E^2 dx.
std::pair<double, double> energies(const PhaseSpaceGrid& grid,
                                   const FieldState& field);

struct VlasovStepResult {
    bool ok = true;
    std::string failure_reason;
    PcDecision decision;
    int solve_iterations = 0;
};

/// One Strang-split step: half advect_x, field decision (update solves for
/// phi and recomputes E, skip reuses E), full advect_v, half advect_x.
VlasovStepResult vlasov_step(PhaseSpaceGrid& grid, FieldState& field,
                             PcPolicy& policy, SkipLedger& ledger,
                             std::int64_t step, double dt);

}  // namespace qpc
