#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace qpc {

/// Raised when inputs violate an operation's preconditions.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised by the dense elimination solver on a (numerically) singular pivot.
class SingularSystemError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Triplet {
    int row = 0;
    int col = 0;
    double value = 0.0;
};

/// Compressed-sparse-row matrix. Rows are sorted by column index and hold
/// no duplicates once built through csr_from_triplets.
struct SparseMatrix {
    int n_rows = 0;
    int n_cols = 0;
    std::vector<int> row_offsets;   // n_rows + 1 entries, nondecreasing
    std::vector<int> col_indices;
    std::vector<double> values;

    int nnz() const { return static_cast<int>(values.size()); }
    SparseMatrix transposed() const;
    /// True when A[i][j] == A[j][i] for all stored entries within tol.
    bool is_symmetric(double tol = 0.0) const;
};

/// Sum duplicate entries and return the canonical sorted CSR matrix.
SparseMatrix csr_from_triplets(int n_rows, int n_cols, std::span<const Triplet> entries);
SparseMatrix csr_from_triplets(int n, std::span<const Triplet> entries);

/// y = A * v
std::vector<double> spmv(const SparseMatrix& a, std::span<const double> v);

/// One linear-system problem A x = b. `mean_pin`, when nonzero, augments the
/// operator with gamma * (1/n) * ones*ones^T applied matrix-free; the physics
/// assemblers use it to remove the Neumann/periodic pressure null space.
struct Lsp {
    SparseMatrix matrix;
    std::vector<double> rhs;
    double mean_pin = 0.0;
    std::optional<std::vector<double>> reference_solution;
    int reference_iterations = 0;  // CG iterations behind reference_solution

    int dim() const { return matrix.n_rows; }
};

/// Effective operator product: A*v plus the mean-pin rank-one term.
std::vector<double> apply_operator(const Lsp& lsp, std::span<const double> v);

/// Relative residual ||A x - b|| / max(||b||, eps_floor).
double relative_residual(const Lsp& lsp, std::span<const double> x);

constexpr double kResidualFloor = 1e-30;

enum class Precond { None, Jacobi };

struct CgResult {
    std::vector<double> x;
    int iterations = 0;
    double residual = 0.0;  // relative, against the effective operator
    bool converged = false;
};

/// Preconditioned conjugate gradient for symmetric (positive semi-definite
/// plus pin) systems. Defaults: tol 1e-8 relative, max_iter 10*n.
CgResult cg_solve(const Lsp& lsp, double tol = 1e-8, int max_iter = -1,
                  Precond precond = Precond::Jacobi);

/// Solve the cached reference solution, running CG on first use.
/// Throws SingularSystemError if CG does not converge.
const std::vector<double>& oracle_solve(Lsp& lsp, double tol = 1e-8);

/// Gaussian elimination with partial pivoting; test/oracle path for small
/// dense systems (n <= 64 intended).
std::vector<double> direct_solve_dense(std::vector<std::vector<double>> a,
                                       std::vector<double> b);

/// Dense rendering of the effective operator (matrix + pin); oracle helper.
std::vector<std::vector<double>> to_dense(const Lsp& lsp);

/// Plain-text coordinate dump, one "row col value" triple per line (0-indexed).
void dump_matrix(const SparseMatrix& a, std::ostream& out);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

}  // namespace qpc
