#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qpc/linsys.hpp"
#include "qpc/pcore.hpp"

namespace qpc {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double norm_sq() const { return x * x + y * y; }
    double norm() const;
};

/// Wendland C2 kernel in 2D: W(q) = alpha (1 - q/2)^4 (2q + 1) for
/// q = r/h in [0, 2], zero outside. alpha = 7 / (4 pi h^2).
struct KernelSpec {
    double h = 0.0;
    double support_radius = 0.0;  // 2h
    double normalization = 0.0;   // alpha

    static KernelSpec wendland_c2(double h);
};

double kernel_w(double r, const KernelSpec& spec);
/// Analytic gradient with respect to the first particle; rvec = x_i - x_j.
/// Radial, zero at q = 0 and for q >= 2.
Vec2 kernel_grad_w(Vec2 rvec, const KernelSpec& spec);

/// Axis-aligned simulation box with optional periodic axes.
struct Box {
    Vec2 lo{0.0, 0.0};
    Vec2 hi{1.0, 1.0};
    bool periodic_x = false;
    bool periodic_y = false;

    Vec2 extent() const { return {hi.x - lo.x, hi.y - lo.y}; }
    /// Minimum-image displacement for d = x_i - x_j.
    Vec2 min_image(Vec2 d) const;
    /// Wrap a position into [lo, hi) along periodic axes.
    Vec2 wrap(Vec2 p) const;
};

enum class ParticleKind : std::uint8_t { Fluid, Boundary };

/// SPH particle state plus the fluid parameters of a run. Boundary
/// particles never move and keep zero velocity; the fluid/boundary
/// partition and the particle count are fixed for the whole run.
struct ParticleSystem {
    std::vector<Vec2> positions;
    std::vector<Vec2> velocities;
    std::vector<double> pressures;
    std::vector<ParticleKind> kind;

    double mass = 0.0;      // identical for every particle
    double rho0 = 1.0;      // reference density (held fixed)
    double nu = 0.0;        // kinematic viscosity
    Vec2 gravity{0.0, 0.0}; // enters the projection as -(grad P / rho + g) dt
    double dt = 0.0;
    double dt_max = 0.0;
    double eta2 = 0.0;      // Morris regularization (default (0.1 h)^2)
    double spacing = 0.0;   // initial lattice spacing dx
    KernelSpec kernel;
    Box domain;

    bool shifting_enabled = false;
    bool has_free_surface = false;    // enables surface detection (Dirichlet rows)
    double surface_threshold = 0.85;  // fraction of interior concentration
    double blow_up_factor = 50.0;
    double reference_speed = 0.0;     // failure-detector velocity scale
    double interior_concentration = 0.0;

    std::size_t size() const { return positions.size(); }
    int fluid_count() const;
    double max_speed() const;

    /// CFL time step: min(0.25 h/u_max, 0.25 sqrt(h/|g|), 0.125 h^2/nu),
    /// clamped by dt_max.
    double compute_dt() const;
    void validate() const;
};

/// Fixed-radius neighbor lists (uniform cell list, cell edge >= cutoff).
/// Symmetric, self excluded.
struct NeighborTable {
    std::vector<int> offsets;  // size n+1
    std::vector<int> indices;

    std::span<const int> neighbors(int i) const {
        return {indices.data() + offsets[i],
                static_cast<std::size_t>(offsets[i + 1] - offsets[i])};
    }
};

NeighborTable build_neighbors(std::span<const Vec2> positions, double cutoff,
                              const Box& box);

/// Kernel-sum concentration C_i = sum_j V W_ij including the self term.
std::vector<double> kernel_concentration(const ParticleSystem& sys,
                                         const NeighborTable& table);

/// Reference interior concentration of a uniform lattice at the given
/// spacing (used to normalize surface detection).
double lattice_concentration(const KernelSpec& kernel, double spacing,
                             double volume);

/// Free-surface classification: fluid particles whose concentration falls
/// below surface_threshold * interior_concentration.
std::vector<std::uint8_t> classify_surface(const ParticleSystem& sys,
                                           const NeighborTable& table);

/// Difference-form gradient: grad(phi)_i = -sum_j V (phi_i - phi_j) gradW_ij.
std::vector<Vec2> sph_gradient(std::span<const double> field,
                               const ParticleSystem& sys,
                               const NeighborTable& table);

/// Divergence by the same difference form.
std::vector<double> sph_divergence(std::span<const Vec2> field,
                                   const ParticleSystem& sys,
                                   const NeighborTable& table);

/// Morris second-derivative operator
/// (div a grad b)_i = sum_j m (a_i + a_j) x_ij.gradW_ij /
///                    (rho_j (r_ij^2 + eta^2)) * (b_i - b_j).
std::vector<double> sph_laplacian_morris(std::span<const double> coeff,
                                         std::span<const double> field,
                                         const ParticleSystem& sys,
                                         const NeighborTable& table);
std::vector<Vec2> sph_laplacian_morris(std::span<const double> coeff,
                                       std::span<const Vec2> field,
                                       const ParticleSystem& sys,
                                       const NeighborTable& table);

/// Pressure-Poisson system over all particles at the current positions.
/// Left side is the (negated, positive semi-definite) Morris operator with
/// a = 1/rho; fluid rows carry (1/dt) div(u*), boundary rows a zero source.
/// Free-surface rows become Dirichlet P = 0 with symmetric elimination.
/// Fully interior (no-surface) systems get the rank-one mean pin with
/// gamma = mean diagonal magnitude.
Lsp assemble_ppe(const ParticleSystem& sys, const NeighborTable& table,
                 std::span<const Vec2> u_star);

struct StepResult {
    bool ok = true;
    std::string failure_reason;
    double dt_used = 0.0;
    PcDecision decision;
    int solve_iterations = 0;
    double pre_divergence_rms = 0.0;   // before projection
    double post_divergence_rms = 0.0;  // after projection
};

/// One projection-method time step (intermediate advection, viscous
/// predictor, PPE + policy decision, velocity correction, position update,
/// optional Fickian shifting, blow-up check).
StepResult isph_step(ParticleSystem& sys, PcPolicy& policy, SkipLedger& ledger,
                     std::int64_t step);

}  // namespace qpc
