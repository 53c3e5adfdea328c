#pragma once

#include <cstddef>
#include <vector>

namespace cohevo {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b);
double norm2(const Vec& a);
double norm_inf(const Vec& a);
// y += alpha * x
void axpy(double alpha, const Vec& x, Vec& y);

/// Compressed sparse row matrix, square, symmetric storage is the caller's
/// business (both triangles stored).
struct CsrMatrix {
    std::size_t n = 0;
    std::vector<std::size_t> row_ptr;  // n+1
    std::vector<std::size_t> col;
    std::vector<double> val;

    void apply(const Vec& x, Vec& y) const;  // y = A x
    Vec diagonal() const;
};

/// Accumulates (i, j, v) triplets, duplicates summed on compress().
class TripletBuilder {
  public:
    explicit TripletBuilder(std::size_t n) : n_(n) {}
    void add(std::size_t i, std::size_t j, double v);
    CsrMatrix compress() const;

  private:
    std::size_t n_;
    std::vector<std::size_t> rows_, cols_;
    std::vector<double> vals_;
};

/// Column-major dense matrix, used for the Schur-reduced problems only
/// (desk-scale sizes).
struct DenseMatrix {
    std::size_t rows = 0, cols = 0;
    Vec data;

    DenseMatrix() = default;
    DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
    double& operator()(std::size_t i, std::size_t j) { return data[j * rows + i]; }
    double operator()(std::size_t i, std::size_t j) const { return data[j * rows + i]; }
};

/// In-place Cholesky factorization of a symmetric positive definite matrix.
/// Throws std::runtime_error if a pivot is not positive.
class CholeskyFactor {
  public:
    explicit CholeskyFactor(DenseMatrix a);
    Vec solve(const Vec& rhs) const;
    std::size_t size() const { return l_.rows; }

  private:
    DenseMatrix l_;
};

struct CgResult {
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
};

/// Preconditioned conjugate gradient with Jacobi preconditioner.
/// Solves A x = b starting from x (modified in place).
CgResult conjugate_gradient(const CsrMatrix& a, const Vec& b, Vec& x,
                            double tol = 1e-14, int max_iterations = 10000);

/// Largest-eigenvalue estimate by power iteration with a fixed seed.
double power_iteration(const CsrMatrix& a, int iterations = 50, unsigned seed = 0x9e3779b9u);

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
/// Test-oracle quality, O(n^3) per sweep; fine for small n.
Vec jacobi_eigenvalues(DenseMatrix a, int sweeps = 50);

}  // namespace cohevo
