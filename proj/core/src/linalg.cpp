#include "cohevo/linalg.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace cohevo {

double dot(const Vec& a, const Vec& b) {
    assert(a.size() == b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

double norm_inf(const Vec& a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::fabs(v));
    return m;
}

void axpy(double alpha, const Vec& x, Vec& y) {
    assert(x.size() == y.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void CsrMatrix::apply(const Vec& x, Vec& y) const {
    assert(x.size() == n);
    y.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += val[k] * x[col[k]];
        y[i] = s;
    }
}

Vec CsrMatrix::diagonal() const {
    Vec d(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
            if (col[k] == i) d[i] += val[k];
    return d;
}

void TripletBuilder::add(std::size_t i, std::size_t j, double v) {
    assert(i < n_ && j < n_);
    rows_.push_back(i);
    cols_.push_back(j);
    vals_.push_back(v);
}

CsrMatrix TripletBuilder::compress() const {
    CsrMatrix m;
    m.n = n_;
    m.row_ptr.assign(n_ + 1, 0);
    for (std::size_t r : rows_) m.row_ptr[r + 1]++;
    for (std::size_t i = 0; i < n_; ++i) m.row_ptr[i + 1] += m.row_ptr[i];

    std::vector<std::size_t> cursor(m.row_ptr.begin(), m.row_ptr.end() - 1);
    std::vector<std::size_t> col_tmp(rows_.size());
    Vec val_tmp(rows_.size());
    for (std::size_t k = 0; k < rows_.size(); ++k) {
        std::size_t at = cursor[rows_[k]]++;
        col_tmp[at] = cols_[k];
        val_tmp[at] = vals_[k];
    }

    // sort each row by column and merge duplicates
    m.col.reserve(col_tmp.size());
    m.val.reserve(val_tmp.size());
    std::vector<std::size_t> new_ptr(n_ + 1, 0);
    for (std::size_t i = 0; i < n_; ++i) {
        std::size_t lo = m.row_ptr[i], hi = m.row_ptr[i + 1];
        std::vector<std::size_t> order(hi - lo);
        std::iota(order.begin(), order.end(), lo);
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return col_tmp[a] < col_tmp[b]; });
        for (std::size_t k : order) {
            if (!m.col.empty() && m.col.size() > new_ptr[i] && m.col.back() == col_tmp[k]) {
                m.val.back() += val_tmp[k];
            } else {
                m.col.push_back(col_tmp[k]);
                m.val.push_back(val_tmp[k]);
            }
        }
        new_ptr[i + 1] = m.col.size();
    }
    m.row_ptr = std::move(new_ptr);
    return m;
}

CholeskyFactor::CholeskyFactor(DenseMatrix a) : l_(std::move(a)) {
    if (l_.rows != l_.cols) throw std::runtime_error("cholesky: matrix not square");
    const std::size_t n = l_.rows;
    for (std::size_t j = 0; j < n; ++j) {
        double d = l_(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l_(j, k) * l_(j, k);
        if (d <= 0.0) throw std::runtime_error("cholesky: matrix not positive definite");
        d = std::sqrt(d);
        l_(j, j) = d;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = l_(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l_(i, k) * l_(j, k);
            l_(i, j) = s / d;
        }
    }
}

Vec CholeskyFactor::solve(const Vec& rhs) const {
    const std::size_t n = l_.rows;
    if (rhs.size() != n) throw std::runtime_error("cholesky: rhs size mismatch");
    Vec y(rhs);
    for (std::size_t i = 0; i < n; ++i) {
        double s = y[i];
        for (std::size_t k = 0; k < i; ++k) s -= l_(i, k) * y[k];
        y[i] = s / l_(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = y[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= l_(k, ii) * y[k];
        y[ii] = s / l_(ii, ii);
    }
    return y;
}

CgResult conjugate_gradient(const CsrMatrix& a, const Vec& b, Vec& x, double tol,
                            int max_iterations) {
    CgResult res;
    Vec d = a.diagonal();
    for (double& v : d) v = (v > 0.0) ? 1.0 / v : 1.0;

    Vec ax(a.n), r(a.n), z(a.n), p(a.n), ap(a.n);
    a.apply(x, ax);
    for (std::size_t i = 0; i < a.n; ++i) r[i] = b[i] - ax[i];
    const double bnorm = std::max(norm2(b), 1e-300);
    for (std::size_t i = 0; i < a.n; ++i) z[i] = d[i] * r[i];
    p = z;
    double rz = dot(r, z);
    for (int it = 0; it < max_iterations; ++it) {
        res.residual = norm2(r) / bnorm;
        if (res.residual <= tol) {
            res.converged = true;
            res.iterations = it;
            return res;
        }
        a.apply(p, ap);
        const double alpha = rz / dot(p, ap);
        axpy(alpha, p, x);
        axpy(-alpha, ap, r);
        for (std::size_t i = 0; i < a.n; ++i) z[i] = d[i] * r[i];
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < a.n; ++i) p[i] = z[i] + beta * p[i];
    }
    res.iterations = max_iterations;
    res.residual = norm2(r) / bnorm;
    res.converged = res.residual <= tol;
    return res;
}

double power_iteration(const CsrMatrix& a, int iterations, unsigned seed) {
    if (a.n == 0) return 0.0;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Vec v(a.n);
    for (double& x : v) x = uni(rng);
    double nv = norm2(v);
    if (nv == 0.0) v[0] = 1.0, nv = 1.0;
    for (double& x : v) x /= nv;

    Vec av(a.n);
    double lambda = 0.0;
    for (int it = 0; it < iterations; ++it) {
        a.apply(v, av);
        lambda = dot(v, av);
        const double na = norm2(av);
        if (na == 0.0) return 0.0;
        for (std::size_t i = 0; i < a.n; ++i) v[i] = av[i] / na;
    }
    return lambda;
}

Vec jacobi_eigenvalues(DenseMatrix a, int sweeps) {
    if (a.rows != a.cols) throw std::runtime_error("jacobi: matrix not square");
    const std::size_t n = a.rows;
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-28) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::fabs(apq) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    Vec eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
    std::sort(eig.begin(), eig.end());
    return eig;
}

}  // namespace cohevo
