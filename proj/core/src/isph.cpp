#include "qpc/isph.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace qpc {

double Vec2::norm() const { return std::sqrt(norm_sq()); }

KernelSpec KernelSpec::wendland_c2(double h) {
    if (!(h > 0.0)) throw ValidationError("KernelSpec: smoothing length must be positive");
    KernelSpec k;
    k.h = h;
    k.support_radius = 2.0 * h;
    k.normalization = 7.0 / (4.0 * M_PI * h * h);
    return k;
}

double kernel_w(double r, const KernelSpec& spec) {
    const double q = r / spec.h;
    if (q >= 2.0) return 0.0;
    const double t = 1.0 - 0.5 * q;
    const double t2 = t * t;
    return spec.normalization * t2 * t2 * (2.0 * q + 1.0);
}

Vec2 kernel_grad_w(Vec2 rvec, const KernelSpec& spec) {
    const double r = rvec.norm();
    const double q = r / spec.h;
    if (q >= 2.0 || r == 0.0) return {0.0, 0.0};
    // dW/dq = -5 alpha q (1 - q/2)^3; gradient = dW/dq * (1/h) * rvec/r
    const double t = 1.0 - 0.5 * q;
    const double dwdq = -5.0 * spec.normalization * q * t * t * t;
    const double f = dwdq / (spec.h * r);
    return {f * rvec.x, f * rvec.y};
}

Vec2 Box::min_image(Vec2 d) const {
    const Vec2 e = extent();
    if (periodic_x) d.x -= e.x * std::round(d.x / e.x);
    if (periodic_y) d.y -= e.y * std::round(d.y / e.y);
    return d;
}

Vec2 Box::wrap(Vec2 p) const {
    const Vec2 e = extent();
    if (periodic_x) {
        p.x = std::fmod(p.x - lo.x, e.x);
        if (p.x < 0.0) p.x += e.x;
        p.x += lo.x;
    }
    if (periodic_y) {
        p.y = std::fmod(p.y - lo.y, e.y);
        if (p.y < 0.0) p.y += e.y;
        p.y += lo.y;
    }
    return p;
}

int ParticleSystem::fluid_count() const {
    int n = 0;
    for (ParticleKind k : kind)
        if (k == ParticleKind::Fluid) ++n;
    return n;
}

double ParticleSystem::max_speed() const {
    double m = 0.0;
    for (const Vec2& v : velocities) m = std::max(m, v.norm_sq());
    return std::sqrt(m);
}

double ParticleSystem::compute_dt() const {
    const double h = kernel.h;
    double dt = dt_max > 0.0 ? dt_max : std::numeric_limits<double>::infinity();
    const double umax = max_speed();
    if (umax > 0.0) dt = std::min(dt, 0.25 * h / umax);
    const double g = gravity.norm();
    if (g > 0.0) dt = std::min(dt, 0.25 * std::sqrt(h / g));
    if (nu > 0.0) dt = std::min(dt, 0.125 * h * h / nu);
    if (!std::isfinite(dt)) dt = this->dt;  // quiescent, unforced: keep current
    return dt;
}

void ParticleSystem::validate() const {
    const std::size_t n = size();
    if (velocities.size() != n || pressures.size() != n || kind.size() != n)
        throw ValidationError("ParticleSystem: field sizes disagree");
    if (!(mass > 0.0) || !(rho0 > 0.0))
        throw ValidationError("ParticleSystem: mass and rho0 must be positive");
    if (!(kernel.h > 0.0)) throw ValidationError("ParticleSystem: kernel not set");
    for (std::size_t i = 0; i < n; ++i) {
        if (kind[i] == ParticleKind::Boundary && velocities[i].norm_sq() != 0.0)
            throw ValidationError("ParticleSystem: boundary particle with velocity");
    }
}

NeighborTable build_neighbors(std::span<const Vec2> positions, double cutoff,
                              const Box& box) {
    const int n = static_cast<int>(positions.size());
    NeighborTable table;
    table.offsets.assign(static_cast<std::size_t>(n) + 1, 0);
    if (n == 0) return table;

    const Vec2 ext = box.extent();
    const double cutoff_sq = cutoff * cutoff;
    int ncx = std::max(1, static_cast<int>(std::floor(ext.x / cutoff)));
    int ncy = std::max(1, static_cast<int>(std::floor(ext.y / cutoff)));
    // beyond a few thousand cells per axis the lists get cache-hostile
    ncx = std::min(ncx, 4096);
    ncy = std::min(ncy, 4096);

    auto cell_of = [&](Vec2 p) {
        int cx = static_cast<int>(std::floor((p.x - box.lo.x) / ext.x * ncx));
        int cy = static_cast<int>(std::floor((p.y - box.lo.y) / ext.y * ncy));
        cx = std::clamp(cx, 0, ncx - 1);  // clamp keeps escapees findable
        cy = std::clamp(cy, 0, ncy - 1);
        return cy * ncx + cx;
    };

    // counting sort of particles into cells
    std::vector<int> cell_count(static_cast<std::size_t>(ncx) * ncy + 1, 0);
    std::vector<int> cell_id(n);
    for (int i = 0; i < n; ++i) {
        cell_id[i] = cell_of(positions[i]);
        ++cell_count[cell_id[i] + 1];
    }
    for (std::size_t c = 1; c < cell_count.size(); ++c) cell_count[c] += cell_count[c - 1];
    std::vector<int> cell_items(n);
    {
        std::vector<int> fill(cell_count.begin(), cell_count.end() - 1);
        for (int i = 0; i < n; ++i) cell_items[fill[cell_id[i]]++] = i;
    }

    auto wrap_cell = [](int c, int nc, bool periodic) -> int {
        if (c < 0) return periodic ? c + nc : -1;
        if (c >= nc) return periodic ? c - nc : -1;
        return c;
    };

    std::vector<std::vector<int>> lists(n);
    std::array<int, 9> seen{};
    for (int i = 0; i < n; ++i) {
        const int ci = cell_id[i] % ncx;
        const int cj = cell_id[i] / ncx;
        int nseen = 0;
        for (int dy = -1; dy <= 1; ++dy) {
            const int cy = wrap_cell(cj + dy, ncy, box.periodic_y);
            if (cy < 0) continue;
            for (int dx = -1; dx <= 1; ++dx) {
                const int cx = wrap_cell(ci + dx, ncx, box.periodic_x);
                if (cx < 0) continue;
                const int c = cy * ncx + cx;
                bool dup = false;  // small boxes alias cells after wrapping
                for (int s = 0; s < nseen; ++s)
                    if (seen[s] == c) { dup = true; break; }
                if (dup) continue;
                seen[nseen++] = c;
                for (int k = cell_count[c]; k < cell_count[c + 1]; ++k) {
                    const int j = cell_items[k];
                    if (j == i) continue;
                    const Vec2 d = box.min_image(positions[i] - positions[j]);
                    if (d.norm_sq() < cutoff_sq) lists[i].push_back(j);
                }
            }
        }
        std::sort(lists[i].begin(), lists[i].end());
    }

    for (int i = 0; i < n; ++i)
        table.offsets[i + 1] = table.offsets[i] + static_cast<int>(lists[i].size());
    table.indices.reserve(table.offsets[n]);
    for (int i = 0; i < n; ++i)
        table.indices.insert(table.indices.end(), lists[i].begin(), lists[i].end());
    return table;
}

std::vector<double> kernel_concentration(const ParticleSystem& sys,
                                         const NeighborTable& table) {
    const int n = static_cast<int>(sys.size());
    const double volume = sys.mass / sys.rho0;
    std::vector<double> c(n, volume * kernel_w(0.0, sys.kernel));
    for (int i = 0; i < n; ++i) {
        for (int j : table.neighbors(i)) {
            const Vec2 d = sys.domain.min_image(sys.positions[i] - sys.positions[j]);
            c[i] += volume * kernel_w(d.norm(), sys.kernel);
        }
    }
    return c;
}

double lattice_concentration(const KernelSpec& kernel, double spacing, double volume) {
    const int reach = static_cast<int>(std::ceil(kernel.support_radius / spacing)) + 1;
    double c = 0.0;
    for (int ix = -reach; ix <= reach; ++ix)
        for (int iy = -reach; iy <= reach; ++iy)
            c += volume * kernel_w(std::hypot(ix * spacing, iy * spacing), kernel);
    return c;
}

std::vector<std::uint8_t> classify_surface(const ParticleSystem& sys,
                                           const NeighborTable& table) {
    std::vector<std::uint8_t> surface(sys.size(), 0);
    if (!sys.has_free_surface) return surface;  // interior flows have no surface
    const std::vector<double> c = kernel_concentration(sys, table);
    const double cutoff = sys.surface_threshold * sys.interior_concentration;
    for (std::size_t i = 0; i < sys.size(); ++i)
        if (sys.kind[i] == ParticleKind::Fluid && c[i] < cutoff) surface[i] = 1;
    return surface;
}

std::vector<Vec2> sph_gradient(std::span<const double> field,
                               const ParticleSystem& sys,
                               const NeighborTable& table) {
    const int n = static_cast<int>(sys.size());
    const double volume = sys.mass / sys.rho0;
    std::vector<Vec2> grad(n);
    for (int i = 0; i < n; ++i) {
        Vec2 g{0.0, 0.0};
        for (int j : table.neighbors(i)) {
            const Vec2 d = sys.domain.min_image(sys.positions[i] - sys.positions[j]);
            const Vec2 gw = kernel_grad_w(d, sys.kernel);
            const double df = field[i] - field[j];
            g -= gw * (volume * df);
        }
        grad[i] = g;
    }
    return grad;
}

std::vector<double> sph_divergence(std::span<const Vec2> field,
                                   const ParticleSystem& sys,
                                   const NeighborTable& table) {
    const int n = static_cast<int>(sys.size());
    const double volume = sys.mass / sys.rho0;
    std::vector<double> div(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j : table.neighbors(i)) {
            const Vec2 d = sys.domain.min_image(sys.positions[i] - sys.positions[j]);
            const Vec2 gw = kernel_grad_w(d, sys.kernel);
            s -= volume * (field[i] - field[j]).dot(gw);
        }
        div[i] = s;
    }
    return div;
}

namespace {

template <class T>
std::vector<T> morris_apply(std::span<const double> coeff, std::span<const T> field,
                            const ParticleSystem& sys, const NeighborTable& table) {
    const int n = static_cast<int>(sys.size());
    std::vector<T> out(n, T{});
    for (int i = 0; i < n; ++i) {
        T acc{};
        for (int j : table.neighbors(i)) {
            const Vec2 d = sys.domain.min_image(sys.positions[i] - sys.positions[j]);
            const Vec2 gw = kernel_grad_w(d, sys.kernel);
            const double w = sys.mass * (coeff[i] + coeff[j]) * d.dot(gw) /
                             (sys.rho0 * (d.norm_sq() + sys.eta2));
            if constexpr (std::is_same_v<T, double>) {
                acc += w * (field[i] - field[j]);
            } else {
                acc += (field[i] - field[j]) * w;
            }
        }
        out[i] = acc;
    }
    return out;
}

}  // namespace

std::vector<double> sph_laplacian_morris(std::span<const double> coeff,
                                         std::span<const double> field,
                                         const ParticleSystem& sys,
                                         const NeighborTable& table) {
    if (!(sys.eta2 > 0.0)) throw ValidationError("sph_laplacian_morris: eta2 must be > 0");
    return morris_apply<double>(coeff, field, sys, table);
}

std::vector<Vec2> sph_laplacian_morris(std::span<const double> coeff,
                                       std::span<const Vec2> field,
                                       const ParticleSystem& sys,
                                       const NeighborTable& table) {
    if (!(sys.eta2 > 0.0)) throw ValidationError("sph_laplacian_morris: eta2 must be > 0");
    return morris_apply<Vec2>(coeff, field, sys, table);
}

Lsp assemble_ppe(const ParticleSystem& sys, const NeighborTable& table,
                 std::span<const Vec2> u_star) {
    const int n = static_cast<int>(sys.size());
    const std::vector<std::uint8_t> surface = classify_surface(sys, table);
    const bool any_surface = std::find(surface.begin(), surface.end(), 1) != surface.end();

    const std::vector<double> div = sph_divergence(u_star, sys, table);
    const double a = 1.0 / sys.rho0;  // uniform 1/rho coefficient

    std::vector<Triplet> entries;
    entries.reserve(table.indices.size() + n);
    std::vector<double> rhs(n, 0.0);
    double diag_sum = 0.0;
    int interior_rows = 0;

    std::vector<double> diag(n, 0.0);
    for (int i = 0; i < n; ++i) {
        if (surface[i]) continue;
        double di = 0.0;
        for (int j : table.neighbors(i)) {
            const Vec2 d = sys.domain.min_image(sys.positions[i] - sys.positions[j]);
            const Vec2 gw = kernel_grad_w(d, sys.kernel);
            const double c = sys.mass * 2.0 * a * d.dot(gw) /
                             (sys.rho0 * (d.norm_sq() + sys.eta2));
            // c < 0; negated operator keeps the system positive semi-definite
            di -= c;
            if (!surface[j]) entries.push_back({i, j, c});
        }
        diag[i] = di;
        if (di != 0.0) {
            diag_sum += std::abs(di);
            ++interior_rows;
        }
    }
    const double diag_scale = interior_rows > 0 ? diag_sum / interior_rows : 1.0;

    for (int i = 0; i < n; ++i) {
        if (surface[i]) {
            // Dirichlet P = 0 at the free surface, eliminated symmetrically
            entries.push_back({i, i, diag_scale});
            rhs[i] = 0.0;
            continue;
        }
        entries.push_back({i, i, diag[i] != 0.0 ? diag[i] : diag_scale});
        if (sys.kind[i] == ParticleKind::Fluid && sys.dt > 0.0)
            rhs[i] = -div[i] / sys.dt;  // negated with the operator
    }

    Lsp lsp;
    lsp.matrix = csr_from_triplets(n, entries);
    lsp.rhs = std::move(rhs);
    if (!any_surface) lsp.mean_pin = diag_scale;  // remove the Neumann null space
    return lsp;
}

StepResult isph_step(ParticleSystem& sys, PcPolicy& policy, SkipLedger& ledger,
                     std::int64_t step) {
    StepResult result;
    const int n = static_cast<int>(sys.size());
    const double dt = sys.compute_dt();
    sys.dt = dt;
    result.dt_used = dt;

    const std::vector<Vec2> x_old = sys.positions;
    const std::vector<Vec2> u_old = sys.velocities;

    // (1) intermediate advection
    for (int i = 0; i < n; ++i) {
        if (sys.kind[i] == ParticleKind::Fluid)
            sys.positions[i] = sys.domain.wrap(sys.positions[i] + sys.velocities[i] * dt);
    }

    // (2) neighbors at the intermediate positions
    const NeighborTable table =
        build_neighbors(sys.positions, sys.kernel.support_radius, sys.domain);

    // (3) viscous predictor u* = u + nu laplacian(u) dt
    std::vector<Vec2> u_star(n);
    if (sys.nu > 0.0) {
        const std::vector<double> coeff(n, sys.nu);
        const std::vector<Vec2> lap =
            sph_laplacian_morris(coeff, std::span<const Vec2>(sys.velocities), sys, table);
        for (int i = 0; i < n; ++i)
            u_star[i] = sys.kind[i] == ParticleKind::Fluid
                            ? sys.velocities[i] + lap[i] * dt
                            : Vec2{0.0, 0.0};
    } else {
        for (int i = 0; i < n; ++i)
            u_star[i] = sys.kind[i] == ParticleKind::Fluid ? sys.velocities[i]
                                                           : Vec2{0.0, 0.0};
    }

    {
        const std::vector<double> div = sph_divergence(u_star, sys, table);
        double acc = 0.0;
        for (int i = 0; i < n; ++i)
            if (sys.kind[i] == ParticleKind::Fluid) acc += div[i] * div[i];
        result.pre_divergence_rms = std::sqrt(acc / std::max(1, sys.fluid_count()));
    }

    // (4) pressure-Poisson system
    Lsp ppe = assemble_ppe(sys, table, u_star);

    // (5) policy decision: update overwrites pressures, skip carries them
    const PolicyOutcome outcome = policy.decide(sys.pressures, ppe, step);
    result.decision = outcome.decision;
    result.solve_iterations = outcome.solve_iterations;
    if (outcome.solver_failed) {
        result.ok = false;
        result.failure_reason = outcome.failure_reason;
        return result;
    }
    ledger.record(outcome.decision, outcome.solve_iterations);
    if (outcome.decision.action == PcAction::Update) sys.pressures = *outcome.solution;

    // (6) projection: u^{n+1} = u* - (grad P / rho + g) dt
    const std::vector<Vec2> grad_p = sph_gradient(sys.pressures, sys, table);
    for (int i = 0; i < n; ++i) {
        if (sys.kind[i] != ParticleKind::Fluid) continue;
        sys.velocities[i] =
            u_star[i] - (grad_p[i] * (1.0 / sys.rho0) + sys.gravity) * dt;
    }

    {
        const std::vector<double> div =
            sph_divergence(std::span<const Vec2>(sys.velocities), sys, table);
        double acc = 0.0;
        for (int i = 0; i < n; ++i)
            if (sys.kind[i] == ParticleKind::Fluid) acc += div[i] * div[i];
        result.post_divergence_rms = std::sqrt(acc / std::max(1, sys.fluid_count()));
    }

    // (7) advance positions from x^n with the velocity midpoint
    for (int i = 0; i < n; ++i) {
        if (sys.kind[i] != ParticleKind::Fluid) continue;
        sys.positions[i] =
            sys.domain.wrap(x_old[i] + (sys.velocities[i] + u_old[i]) * (0.5 * dt));
    }

    // (8) optional Fickian shifting along -grad(concentration)
    if (sys.shifting_enabled) {
        // surface particles are excluded: -grad C points outward there
        const std::vector<std::uint8_t> surface = classify_surface(sys, table);
        const double umax = sys.max_speed();
        const double coeff = 0.5 * sys.kernel.h * umax * dt;
        if (coeff > 0.0) {
            const double volume = sys.mass / sys.rho0;
            std::vector<double> u_comp(n), v_comp(n);
            for (int i = 0; i < n; ++i) {
                u_comp[i] = sys.velocities[i].x;
                v_comp[i] = sys.velocities[i].y;
            }
            const std::vector<Vec2> grad_u = sph_gradient(u_comp, sys, table);
            const std::vector<Vec2> grad_v = sph_gradient(v_comp, sys, table);
            for (int i = 0; i < n; ++i) {
                if (sys.kind[i] != ParticleKind::Fluid || surface[i]) continue;
                Vec2 gc{0.0, 0.0};
                for (int j : table.neighbors(i)) {
                    const Vec2 d =
                        sys.domain.min_image(sys.positions[i] - sys.positions[j]);
                    gc += kernel_grad_w(d, sys.kernel) * volume;
                }
                const Vec2 shift = gc * (-coeff);
                sys.positions[i] = sys.domain.wrap(sys.positions[i] + shift);
                // first-order transport of the velocity to the shifted spot
                sys.velocities[i].x += grad_u[i].dot(shift);
                sys.velocities[i].y += grad_v[i].dot(shift);
            }
        }
    }

    // (9) divergence / blow-up detection
    const double speed_limit = sys.blow_up_factor * sys.reference_speed;
    for (int i = 0; i < n; ++i) {
        const Vec2& p = sys.positions[i];
        const Vec2& v = sys.velocities[i];
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(v.x) ||
            !std::isfinite(v.y) || !std::isfinite(sys.pressures[i])) {
            result.ok = false;
            result.failure_reason = "non-finite particle state";
            return result;
        }
        if (speed_limit > 0.0 && v.norm() > speed_limit) {
            result.ok = false;
            result.failure_reason = "max speed exceeded blow-up threshold";
            return result;
        }
    }
    return result;
}

}  // namespace qpc
