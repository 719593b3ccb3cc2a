#include "qpc/linsys.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace qpc {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

SparseMatrix csr_from_triplets(int n_rows, int n_cols, std::span<const Triplet> entries) {
    if (n_rows < 0 || n_cols < 0) throw ValidationError("csr_from_triplets: negative dimension");
    for (const auto& t : entries) {
        if (t.row < 0 || t.row >= n_rows || t.col < 0 || t.col >= n_cols)
            throw ValidationError("csr_from_triplets: index out of range");
    }
    std::vector<std::size_t> order(entries.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (entries[a].row != entries[b].row) return entries[a].row < entries[b].row;
        return entries[a].col < entries[b].col;
    });

    SparseMatrix m;
    m.n_rows = n_rows;
    m.n_cols = n_cols;
    m.row_offsets.assign(static_cast<std::size_t>(n_rows) + 1, 0);
    m.col_indices.reserve(entries.size());
    m.values.reserve(entries.size());

    int prev_row = -1, prev_col = -1;
    for (std::size_t k : order) {
        const Triplet& t = entries[k];
        if (t.row == prev_row && t.col == prev_col) {
            m.values.back() += t.value;  // duplicates sum
        } else {
            m.col_indices.push_back(t.col);
            m.values.push_back(t.value);
            prev_row = t.row;
            prev_col = t.col;
            ++m.row_offsets[static_cast<std::size_t>(t.row) + 1];
        }
    }
    for (int r = 0; r < n_rows; ++r) m.row_offsets[r + 1] += m.row_offsets[r];
    return m;
}

SparseMatrix csr_from_triplets(int n, std::span<const Triplet> entries) {
    return csr_from_triplets(n, n, entries);
}

SparseMatrix SparseMatrix::transposed() const {
    SparseMatrix t;
    t.n_rows = n_cols;
    t.n_cols = n_rows;
    t.row_offsets.assign(static_cast<std::size_t>(n_cols) + 1, 0);
    t.col_indices.resize(values.size());
    t.values.resize(values.size());
    for (int c : col_indices) ++t.row_offsets[c + 1];
    for (int r = 0; r < t.n_rows; ++r) t.row_offsets[r + 1] += t.row_offsets[r];
    std::vector<int> fill(t.row_offsets.begin(), t.row_offsets.end() - 1);
    for (int r = 0; r < n_rows; ++r) {
        for (int k = row_offsets[r]; k < row_offsets[r + 1]; ++k) {
            const int pos = fill[col_indices[k]]++;
            t.col_indices[pos] = r;
            t.values[pos] = values[k];
        }
    }
    return t;
}

bool SparseMatrix::is_symmetric(double tol) const {
    if (n_rows != n_cols) return false;
    const SparseMatrix t = transposed();
    if (t.row_offsets != row_offsets || t.col_indices != col_indices) return false;
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (std::abs(values[k] - t.values[k]) > tol) return false;
    }
    return true;
}

std::vector<double> spmv(const SparseMatrix& a, std::span<const double> v) {
    if (static_cast<int>(v.size()) != a.n_cols)
        throw ValidationError("spmv: dimension mismatch");
    std::vector<double> y(static_cast<std::size_t>(a.n_rows), 0.0);
    for (int r = 0; r < a.n_rows; ++r) {
        double s = 0.0;
        for (int k = a.row_offsets[r]; k < a.row_offsets[r + 1]; ++k)
            s += a.values[k] * v[a.col_indices[k]];
        y[r] = s;
    }
    return y;
}

std::vector<double> apply_operator(const Lsp& lsp, std::span<const double> v) {
    std::vector<double> y = spmv(lsp.matrix, v);
    if (lsp.mean_pin != 0.0 && !y.empty()) {
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        const double shift = lsp.mean_pin * mean;
        for (double& x : y) x += shift;
    }
    return y;
}

double relative_residual(const Lsp& lsp, std::span<const double> x) {
    std::vector<double> r = apply_operator(lsp, x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= lsp.rhs[i];
    return norm2(r) / std::max(norm2(lsp.rhs), kResidualFloor);
}

CgResult cg_solve(const Lsp& lsp, double tol, int max_iter, Precond precond) {
    const int n = lsp.dim();
    if (lsp.matrix.n_cols != n) throw ValidationError("cg_solve: matrix not square");
    if (static_cast<int>(lsp.rhs.size()) != n)
        throw ValidationError("cg_solve: rhs length mismatch");
    if (!(tol > 0.0)) throw ValidationError("cg_solve: tol must be positive");
    if (max_iter < 0) max_iter = 10 * n;

    CgResult res;
    res.x.assign(static_cast<std::size_t>(n), 0.0);

    const double bnorm = norm2(lsp.rhs);
    if (bnorm == 0.0) {
        res.converged = true;  // zero rhs: zero solution, zero iterations
        return res;
    }

    std::vector<double> inv_diag;
    if (precond == Precond::Jacobi) {
        inv_diag.assign(static_cast<std::size_t>(n), 1.0);
        const double pin = lsp.mean_pin / static_cast<double>(n);
        for (int r = 0; r < n; ++r) {
            double d = pin;
            for (int k = lsp.matrix.row_offsets[r]; k < lsp.matrix.row_offsets[r + 1]; ++k)
                if (lsp.matrix.col_indices[k] == r) d += lsp.matrix.values[k];
            if (d != 0.0) inv_diag[r] = 1.0 / d;
        }
    }
    auto precondition = [&](const std::vector<double>& r) {
        if (precond == Precond::None) return r;
        std::vector<double> z(r.size());
        for (std::size_t i = 0; i < r.size(); ++i) z[i] = inv_diag[i] * r[i];
        return z;
    };

    std::vector<double> r = lsp.rhs;  // x0 = 0
    std::vector<double> z = precondition(r);
    std::vector<double> p = z;
    double rz = dot(r, z);
    const double floor = std::max(bnorm, kResidualFloor);

    int it = 0;
    while (it < max_iter) {
        if (norm2(r) / floor <= tol) break;
        std::vector<double> ap = apply_operator(lsp, p);
        const double pap = dot(p, ap);
        if (pap <= 0.0) break;  // lost positive-definiteness; report as-is
        const double alpha = rz / pap;
        for (int i = 0; i < n; ++i) {
            res.x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        ++it;
        z = precondition(r);
        const double rz_next = dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }

    res.iterations = it;
    res.residual = relative_residual(lsp, res.x);  // true residual, not recurrence
    res.converged = res.residual <= tol;
    return res;
}

const std::vector<double>& oracle_solve(Lsp& lsp, double tol) {
    if (!lsp.reference_solution) {
        CgResult r = cg_solve(lsp, tol);
        if (!r.converged)
            throw SingularSystemError("oracle_solve: CG failed to converge (residual " +
                                      std::to_string(r.residual) + ")");
        lsp.reference_solution = std::move(r.x);
        lsp.reference_iterations = r.iterations;
    }
    return *lsp.reference_solution;
}

std::vector<double> direct_solve_dense(std::vector<std::vector<double>> a,
                                       std::vector<double> b) {
    const int n = static_cast<int>(a.size());
    if (static_cast<int>(b.size()) != n)
        throw ValidationError("direct_solve_dense: rhs length mismatch");
    double scale = 0.0;
    for (const auto& row : a) {
        if (static_cast<int>(row.size()) != n)
            throw ValidationError("direct_solve_dense: matrix not square");
        for (double v : row) scale = std::max(scale, std::abs(v));
    }
    const double pivot_floor = 1e-12 * std::max(scale, 1.0);

    for (int k = 0; k < n; ++k) {
        int piv = k;
        for (int i = k + 1; i < n; ++i)
            if (std::abs(a[i][k]) > std::abs(a[piv][k])) piv = i;
        if (std::abs(a[piv][k]) < pivot_floor)
            throw SingularSystemError("direct_solve_dense: singular pivot");
        std::swap(a[k], a[piv]);
        std::swap(b[k], b[piv]);
        for (int i = k + 1; i < n; ++i) {
            const double f = a[i][k] / a[k][k];
            if (f == 0.0) continue;
            for (int j = k; j < n; ++j) a[i][j] -= f * a[k][j];
            b[i] -= f * b[k];
        }
    }
    std::vector<double> x(static_cast<std::size_t>(n), 0.0);
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
        x[i] = s / a[i][i];
    }
    return x;
}

std::vector<std::vector<double>> to_dense(const Lsp& lsp) {
    const int n = lsp.matrix.n_rows;
    std::vector<std::vector<double>> d(n, std::vector<double>(lsp.matrix.n_cols, 0.0));
    for (int r = 0; r < n; ++r)
        for (int k = lsp.matrix.row_offsets[r]; k < lsp.matrix.row_offsets[r + 1]; ++k)
            d[r][lsp.matrix.col_indices[k]] += lsp.matrix.values[k];
    if (lsp.mean_pin != 0.0) {
        const double g = lsp.mean_pin / static_cast<double>(n);
        for (auto& row : d)
            for (double& v : row) v += g;
    }
    return d;
}

void dump_matrix(const SparseMatrix& a, std::ostream& out) {
    for (int r = 0; r < a.n_rows; ++r)
        for (int k = a.row_offsets[r]; k < a.row_offsets[r + 1]; ++k)
            out << r << ' ' << a.col_indices[k] << ' ' << a.values[k] << '\n';
}

}  // namespace qpc
