#pragma once

#include <vector>

#include <Eigen/Core>

#include "btcgp/errors.hpp"

namespace btcgp {

using Index = Eigen::Index;

/// Symmetric n-by-n matrix stored as its lower band of width k+1.
///
/// Storage is column-indexed: band entry (d, i) holds A(i+d, i) for diagonal
/// offset d in [0, k], laid out so that one column occupies k+1 contiguous
/// doubles. Entries with i+d >= n are padding and are kept at exactly zero.
class BandedSymMatrix {
public:
    BandedSymMatrix(Index n, Index k);

    Index dim() const noexcept { return n_; }
    Index bandwidth() const noexcept { return k_; }
    Index stride() const noexcept { return k_ + 1; }

    double entry(Index d, Index i) const { return band_[i * (k_ + 1) + d]; }
    double& entry(Index d, Index i) { return band_[i * (k_ + 1) + d]; }

    const std::vector<double>& band() const noexcept { return band_; }
    std::vector<double>& band() noexcept { return band_; }

private:
    Index n_;
    Index k_;
    std::vector<double> band_;  // (k+1) * n entries
};

/// Lower-triangular Cholesky factor in the same band layout as its source
/// matrix. The factor of a k-banded matrix is itself k-banded; trailing
/// all-zero diagonals of the source never fill in, so solves and the
/// factorization only walk the occupied part of the band.
class BandedCholeskyFactor {
public:
    Index dim() const noexcept { return n_; }
    Index bandwidth() const noexcept { return k_; }
    Index stride() const noexcept { return k_ + 1; }

    /// Widest diagonal offset that holds any nonzero entry.
    Index effective_bandwidth() const noexcept { return keff_; }

    double entry(Index d, Index i) const { return band_[i * (k_ + 1) + d]; }

    const std::vector<double>& band() const noexcept { return band_; }

private:
    friend BandedCholeskyFactor cholesky_banded(const BandedSymMatrix& b);

    BandedCholeskyFactor(Index n, Index k, Index keff, std::vector<double> band)
        : n_(n), k_(k), keff_(keff), band_(std::move(band)) {}

    Index n_;
    Index k_;
    Index keff_;
    std::vector<double> band_;
};

/// Keeps entries with |i-j| <= k and zeroes the rest.
/// Throws AsymmetricInput if A deviates from symmetry by more than 1e-12
/// per entry, BandwidthOutOfRange unless 0 <= k <= n-1.
BandedSymMatrix band_from_dense(const Eigen::MatrixXd& a, Index k);

/// Adds shift >= 0 to every diagonal entry; off-diagonals are untouched.
BandedSymMatrix add_diagonal(BandedSymMatrix b, double shift);

/// Banded Cholesky factorization B = L * L^T without pivoting.
/// Cost is O(n k^2); a pivot that is non-finite or <= 1e-300 raises
/// NotPositiveDefinite with the offending index.
BandedCholeskyFactor cholesky_banded(const BandedSymMatrix& b);

/// Solves (L L^T) X = rhs by forward and back substitution, O(n k m).
Eigen::MatrixXd solve_banded(const BandedCholeskyFactor& f, const Eigen::MatrixXd& rhs);

/// log det(L L^T) = 2 * sum_i log L(i,i).
double logdet_banded(const BandedCholeskyFactor& f);

/// y^T (L L^T)^{-1} y computed as ||L^{-1} y||^2; non-negative by construction.
double quad_form(const BandedCholeskyFactor& f, const Eigen::VectorXd& y);

/// Expands the band into a full symmetric matrix.
Eigen::MatrixXd to_dense(const BandedSymMatrix& b);

}  // namespace btcgp
