#include "btcgp/banded.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace btcgp {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kPivotFloor = 1e-300;

}  // namespace

BandedSymMatrix::BandedSymMatrix(Index n, Index k) : n_(n), k_(k) {
    if (n < 1) throw InvalidParams("matrix dimension must be at least 1");
    if (k < 0 || k > n - 1)
        throw BandwidthOutOfRange("bandwidth " + std::to_string(k) + " outside [0, " +
                                  std::to_string(n - 1) + "]");
    band_.assign(static_cast<std::size_t>((k + 1) * n), 0.0);
}

BandedSymMatrix band_from_dense(const Eigen::MatrixXd& a, Index k) {
    const Index n = a.rows();
    if (a.cols() != n) throw DimensionMismatch("band_from_dense expects a square matrix");
    BandedSymMatrix b(n, k);
    for (Index j = 0; j < n; ++j) {
        for (Index i = j; i < n; ++i) {
            if (std::abs(a(i, j) - a(j, i)) > kSymmetryTol)
                throw AsymmetricInput("entry (" + std::to_string(i) + "," + std::to_string(j) +
                                      ") differs from its transpose by more than 1e-12");
            if (i - j <= k) b.entry(i - j, j) = a(i, j);
        }
    }
    return b;
}

BandedSymMatrix add_diagonal(BandedSymMatrix b, double shift) {
    if (!(shift >= 0.0) || !std::isfinite(shift))
        throw InvalidParams("diagonal shift must be finite and non-negative");
    const Index s = b.stride();
    for (Index i = 0; i < b.dim(); ++i) b.band()[i * s] += shift;
    return b;
}

BandedCholeskyFactor cholesky_banded(const BandedSymMatrix& b) {
    const Index n = b.dim();
    const Index k = b.bandwidth();
    const Index s = k + 1;

    // Trailing all-zero diagonals cannot fill in, so restrict the sweep to
    // the occupied band.
    Index keff = 0;
    {
        const double* band = b.band().data();
        for (Index i = 0; i < n; ++i) {
            const double* col = band + i * s;
            const Index top = std::min(k, n - 1 - i);
            for (Index d = top; d > keff; --d) {
                if (col[d] != 0.0) {
                    keff = d;
                    break;
                }
            }
        }
    }

    std::vector<double> f = b.band();
    for (Index j = 0; j < n; ++j) {
        double* colj = f.data() + j * s;
        const Index w = std::min(keff, n - 1 - j);
        const double piv = colj[0];
        if (!std::isfinite(piv) || !(piv > kPivotFloor)) throw NotPositiveDefinite(j);
        const double d = std::sqrt(piv);
        colj[0] = d;
        const double inv = 1.0 / d;
        for (Index r = 1; r <= w; ++r) colj[r] *= inv;
        for (Index c = 1; c <= w; ++c) {
            const double lam = colj[c];
            if (lam == 0.0) continue;
            double* tgt = f.data() + (j + c) * s;
            const double* src = colj + c;
            const Index len = w - c;
            for (Index r = 0; r <= len; ++r) tgt[r] -= lam * src[r];
        }
    }
    return BandedCholeskyFactor(n, k, keff, std::move(f));
}

Eigen::MatrixXd solve_banded(const BandedCholeskyFactor& f, const Eigen::MatrixXd& rhs) {
    const Index n = f.dim();
    if (rhs.rows() != n)
        throw DimensionMismatch("rhs has " + std::to_string(rhs.rows()) + " rows, expected " +
                                std::to_string(n));
    const Index s = f.stride();
    const Index ke = f.effective_bandwidth();
    const double* band = f.band().data();

    Eigen::MatrixXd x = rhs;
    for (Index col = 0; col < x.cols(); ++col) {
        double* xc = x.col(col).data();
        // L z = b
        for (Index j = 0; j < n; ++j) {
            const double* cj = band + j * s;
            const double zj = xc[j] / cj[0];
            xc[j] = zj;
            const Index w = std::min(ke, n - 1 - j);
            for (Index d = 1; d <= w; ++d) xc[j + d] -= cj[d] * zj;
        }
        // L^T x = z
        for (Index j = n - 1; j >= 0; --j) {
            const double* cj = band + j * s;
            const Index w = std::min(ke, n - 1 - j);
            double acc = xc[j];
            for (Index d = 1; d <= w; ++d) acc -= cj[d] * xc[j + d];
            xc[j] = acc / cj[0];
        }
    }
    return x;
}

double logdet_banded(const BandedCholeskyFactor& f) {
    const Index s = f.stride();
    const double* band = f.band().data();
    double acc = 0.0;
    for (Index i = 0; i < f.dim(); ++i) acc += std::log(band[i * s]);
    return 2.0 * acc;
}

double quad_form(const BandedCholeskyFactor& f, const Eigen::VectorXd& y) {
    const Index n = f.dim();
    if (y.size() != n)
        throw DimensionMismatch("vector has length " + std::to_string(y.size()) + ", expected " +
                                std::to_string(n));
    const Index s = f.stride();
    const Index ke = f.effective_bandwidth();
    const double* band = f.band().data();

    Eigen::VectorXd z = y;
    double acc = 0.0;
    for (Index j = 0; j < n; ++j) {
        const double* cj = band + j * s;
        const double zj = z[j] / cj[0];
        acc += zj * zj;
        const Index w = std::min(ke, n - 1 - j);
        for (Index d = 1; d <= w; ++d) z[j + d] -= cj[d] * zj;
    }
    return acc;
}

Eigen::MatrixXd to_dense(const BandedSymMatrix& b) {
    const Index n = b.dim();
    const Index k = b.bandwidth();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (Index j = 0; j < n; ++j) {
        const Index w = std::min(k, n - 1 - j);
        for (Index d = 0; d <= w; ++d) {
            a(j + d, j) = b.entry(d, j);
            a(j, j + d) = b.entry(d, j);
        }
    }
    return a;
}

}  // namespace btcgp
