#include "qpc/vlasov.hpp"

#include <algorithm>
#include <cmath>

namespace qpc {

namespace {

/// Cubic Lagrange weights on nodes {-1, 0, 1, 2} at fraction theta in [0,1).
struct CubicWeights {
    double wm1, w0, w1, w2;
};

CubicWeights cubic_weights(double theta) {
    const double t = theta;
    return {
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t * t - 1.0) * (t - 2.0) / 2.0,
        -t * (t + 1.0) * (t - 2.0) / 2.0,
        t * (t * t - 1.0) / 6.0,
    };
}

inline int wrap_index(int i, int n) {
    i %= n;
    return i < 0 ? i + n : i;
}

}  // namespace

double PhaseSpaceGrid::total_mass() const {
    double total = 0.0;
    for (int ix = 0; ix < nx; ++ix) {
        double col = 0.0;
        for (int iv = 0; iv < nv; ++iv) {
            const double w = (iv == 0 || iv == nv - 1) ? 0.5 : 1.0;
            col += w * at(ix, iv);
        }
        total += col;
    }
    return total * dx * dv;
}

double PhaseSpaceGrid::min_f() const { return *std::min_element(f.begin(), f.end()); }
double PhaseSpaceGrid::max_f() const { return *std::max_element(f.begin(), f.end()); }

PhaseSpaceGrid init_two_stream(int nx, int nv, double L, double v0, double vt,
                               double alpha, int k_mode, double v_max) {
    if (nx < 3 || nv < 8) throw ValidationError("init_two_stream: grid too small");
    if (!(L > 0.0) || !(vt > 0.0) || v0 < 0.0)
        throw ValidationError("init_two_stream: bad physical parameters");
    if (v_max <= 0.0) v_max = v0 + 8.0 * vt;
    if (v_max < v0 + 6.0 * vt)
        throw ValidationError("init_two_stream: v_max must cover v0 + 6 vt");

    PhaseSpaceGrid g;
    g.nx = nx;
    g.nv = nv;
    g.L = L;
    g.v_max = v_max;
    g.dx = L / nx;
    g.dv = 2.0 * v_max / (nv - 1);
    g.f.resize(static_cast<std::size_t>(nx) * nv);

    const double norm = g.background / (2.0 * std::sqrt(2.0 * M_PI) * vt);
    for (int ix = 0; ix < nx; ++ix) {
        const double x = ix * g.dx;
        const double mod = 1.0 + alpha * std::cos(2.0 * M_PI * k_mode * x / L);
        for (int iv = 0; iv < nv; ++iv) {
            const double v = g.velocity(iv);
            const double up = (v - v0) / vt;
            const double dn = (v + v0) / vt;
            g.at(ix, iv) =
                norm * (std::exp(-0.5 * up * up) + std::exp(-0.5 * dn * dn)) * mod;
        }
    }
    return g;
}

double TwoStreamSpec::L() const { return 2.0 * M_PI / k; }

PhaseSpaceGrid init_two_stream(const TwoStreamSpec& spec) {
    return init_two_stream(spec.nx, spec.nv, spec.L(), spec.v0, spec.vt, spec.alpha,
                           spec.k_mode, spec.v_max);
}

void advect_x(PhaseSpaceGrid& grid, double dt) {
    std::vector<double> row(grid.nx);
    for (int iv = 0; iv < grid.nv; ++iv) {
        const double shift = grid.velocity(iv) * dt / grid.dx;
        const double base = std::floor(shift);
        const int whole = static_cast<int>(base);
        const CubicWeights w = cubic_weights(shift - base);
        for (int ix = 0; ix < grid.nx; ++ix) {
            // departure point ix - shift; stencil around its floor
            const int d = ix - whole;
            row[ix] = w.wm1 * grid.at(wrap_index(d + 1, grid.nx), iv) +
                      w.w0 * grid.at(wrap_index(d, grid.nx), iv) +
                      w.w1 * grid.at(wrap_index(d - 1, grid.nx), iv) +
                      w.w2 * grid.at(wrap_index(d - 2, grid.nx), iv);
        }
        for (int ix = 0; ix < grid.nx; ++ix) grid.at(ix, iv) = row[ix];
    }
}

void advect_v(PhaseSpaceGrid& grid, std::span<const double> e_field, double dt) {
    if (static_cast<int>(e_field.size()) != grid.nx)
        throw ValidationError("advect_v: field length mismatch");
    std::vector<double> col(grid.nv);
    for (int ix = 0; ix < grid.nx; ++ix) {
        const double accel = grid.q / grid.m * e_field[ix];
        const double shift = accel * dt / grid.dv;
        if (shift == 0.0) continue;
        const double base = std::floor(shift);
        const int whole = static_cast<int>(base);
        const CubicWeights w = cubic_weights(shift - base);
        auto value = [&](int iv) {
            return (iv < 0 || iv >= grid.nv) ? 0.0 : grid.at(ix, iv);  // zero inflow
        };
        for (int iv = 0; iv < grid.nv; ++iv) {
            const int d = iv - whole;
            col[iv] = w.wm1 * value(d + 1) + w.w0 * value(d) + w.w1 * value(d - 1) +
                      w.w2 * value(d - 2);
        }
        for (int iv = 0; iv < grid.nv; ++iv) grid.at(ix, iv) = col[iv];
    }
}

std::vector<double> charge_density(const PhaseSpaceGrid& grid) {
    std::vector<double> rho(grid.nx);
    for (int ix = 0; ix < grid.nx; ++ix) {
        double density = 0.0;
        for (int iv = 0; iv < grid.nv; ++iv) {
            const double w = (iv == 0 || iv == grid.nv - 1) ? 0.5 : 1.0;
            density += w * grid.at(ix, iv);
        }
        density *= grid.dv;
        rho[ix] = grid.q * (density - grid.background);
    }
    return rho;
}

SparseMatrix assemble_poisson_1d(int nx, double dx) {
    if (nx < 3) throw ValidationError("assemble_poisson_1d: need nx >= 3");
    const double s = 1.0 / (dx * dx);
    std::vector<Triplet> entries;
    entries.reserve(static_cast<std::size_t>(nx) * 3);
    for (int i = 0; i < nx; ++i) {
        entries.push_back({i, i, 2.0 * s});
        entries.push_back({i, wrap_index(i - 1, nx), -s});
        entries.push_back({i, wrap_index(i + 1, nx), -s});
    }
    return csr_from_triplets(nx, entries);
}

Lsp poisson_lsp(const PhaseSpaceGrid& grid) {
    Lsp lsp;
    lsp.matrix = assemble_poisson_1d(grid.nx, grid.dx);
    lsp.rhs = charge_density(grid);
    for (double& b : lsp.rhs) b /= grid.eps0;
    lsp.mean_pin = 2.0 / (grid.dx * grid.dx);  // mean diagonal magnitude
    return lsp;
}

std::vector<double> e_field_from_phi(std::span<const double> phi, double dx) {
    const int nx = static_cast<int>(phi.size());
    std::vector<double> e(nx);
    for (int i = 0; i < nx; ++i)
        e[i] = -(phi[wrap_index(i + 1, nx)] - phi[wrap_index(i - 1, nx)]) / (2.0 * dx);
    return e;
}

namespace {

void subtract_mean(std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    for (double& x : v) x -= mean;
}

}  // namespace

void update_field(const PhaseSpaceGrid& grid, FieldState& field, std::int64_t step,
                  double tol) {
    Lsp lsp = poisson_lsp(grid);
    oracle_solve(lsp, tol);
    field.phi = *lsp.reference_solution;
    subtract_mean(field.phi);
    field.e_field = e_field_from_phi(field.phi, grid.dx);
    field.last_update_step = step;
    double emax = 0.0;
    for (double e : field.e_field) emax = std::max(emax, std::abs(e));
    if (field.e_reference <= 0.0) field.e_reference = emax;
}

std::pair<double, double> energies(const PhaseSpaceGrid& grid,
                                   const FieldState& field) {
    double uk = 0.0;
    for (int ix = 0; ix < grid.nx; ++ix) {
        double col = 0.0;
        for (int iv = 0; iv < grid.nv; ++iv) {
            const double w = (iv == 0 || iv == grid.nv - 1) ? 0.5 : 1.0;
            const double v = grid.velocity(iv);
            col += w * v * v * grid.at(ix, iv);
        }
        uk += col;
    }
    uk *= 0.5 * grid.m * grid.dx * grid.dv;

    double ue = 0.0;
    for (double e : field.e_field) ue += e * e;
    ue *= 0.5 * grid.eps0 * grid.dx;
    return {uk, ue};
}

VlasovStepResult vlasov_step(PhaseSpaceGrid& grid, FieldState& field,
                             PcPolicy& policy, SkipLedger& ledger,
                             std::int64_t step, double dt) {
    VlasovStepResult result;

    advect_x(grid, 0.5 * dt);

    Lsp candidate = poisson_lsp(grid);
    try {
        // the potential is only defined up to gauge; decisions compare the
        // zero-mean representative
        oracle_solve(candidate, policy.config().solve_tol);
        subtract_mean(*candidate.reference_solution);
    } catch (const SingularSystemError& e) {
        result.ok = false;
        result.failure_reason = e.what();
        return result;
    }

    const PolicyOutcome outcome = policy.decide(field.phi, candidate, step);
    result.decision = outcome.decision;
    result.solve_iterations = outcome.solve_iterations;
    if (outcome.solver_failed) {
        result.ok = false;
        result.failure_reason = outcome.failure_reason;
        return result;
    }
    ledger.record(outcome.decision, outcome.solve_iterations);
    if (outcome.decision.action == PcAction::Update) {
        field.phi = *outcome.solution;
        field.e_field = e_field_from_phi(field.phi, grid.dx);
        field.last_update_step = step;
    }

    advect_v(grid, field.e_field, dt);
    advect_x(grid, 0.5 * dt);

    for (double v : grid.f) {
        if (!std::isfinite(v)) {
            result.ok = false;
            result.failure_reason = "non-finite distribution function";
            return result;
        }
    }
    double emax = 0.0;
    for (double e : field.e_field) emax = std::max(emax, std::abs(e));
    if (field.e_reference > 0.0 && emax > 1e6 * field.e_reference) {
        result.ok = false;
        result.failure_reason = "electric field exceeded blow-up threshold";
    }
    return result;
}

}  // namespace qpc
