#include <doctest.h>

#include <random>

#include "btcgp/banded.hpp"
#include "oracles.hpp"

using namespace btcgp;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_SUITE_BEGIN("banded");

TEST_CASE("band_from_dense keeps the requested band") {
    SUBCASE("k = n-1 keeps every entry") {
        std::mt19937_64 rng(11);
        const MatrixXd a = oracle::random_symmetric(3, rng);
        const BandedSymMatrix b = band_from_dense(a, 2);
        CHECK(to_dense(b) == a);
    }
    SUBCASE("k = 1 zeroes the corner") {
        MatrixXd a(3, 3);
        a << 4, 1, 0.1, 1, 4, 1, 0.1, 1, 4;
        const BandedSymMatrix b = band_from_dense(a, 1);
        MatrixXd expected(3, 3);
        expected << 4, 1, 0, 1, 4, 1, 0, 1, 4;
        CHECK(to_dense(b) == expected);
    }
    SUBCASE("k = 0 keeps the diagonal only") {
        std::mt19937_64 rng(12);
        const MatrixXd a = oracle::random_symmetric(4, rng);
        const BandedSymMatrix b = band_from_dense(a, 0);
        CHECK(to_dense(b) == MatrixXd(a.diagonal().asDiagonal()));
    }
    SUBCASE("asymmetric input is rejected") {
        MatrixXd a = MatrixXd::Identity(3, 3);
        a(0, 1) = 1e-6;
        CHECK_THROWS_AS(band_from_dense(a, 2), AsymmetricInput);
    }
    SUBCASE("bandwidth out of range") {
        const MatrixXd a = MatrixXd::Identity(3, 3);
        CHECK_THROWS_AS(band_from_dense(a, 3), BandwidthOutOfRange);
        CHECK_THROWS_AS(band_from_dense(a, -1), BandwidthOutOfRange);
    }
    SUBCASE("padding entries stay zero") {
        std::mt19937_64 rng(13);
        const BandedSymMatrix b = band_from_dense(oracle::random_symmetric(5, rng), 3);
        for (Index i = 0; i < 5; ++i)
            for (Index d = 0; d <= 3; ++d)
                if (i + d >= 5) CHECK(b.entry(d, i) == 0.0);
    }
}

TEST_CASE("band round-trips through to_dense bit-exactly") {
    std::mt19937_64 rng(21);
    for (const Index k : {0, 1, 3, 7}) {
        const MatrixXd a = oracle::random_symmetric(8, rng);
        const BandedSymMatrix b = band_from_dense(a, k);
        const BandedSymMatrix again = band_from_dense(to_dense(b), k);
        CHECK(again.band() == b.band());
    }
}

TEST_CASE("add_diagonal shifts only the diagonal") {
    SUBCASE("identity plus 2") {
        BandedSymMatrix eye(5, 1);
        for (Index i = 0; i < 5; ++i) eye.entry(0, i) = 1.0;
        const BandedSymMatrix shifted = add_diagonal(eye, 2.0);
        for (Index i = 0; i < 5; ++i) {
            CHECK(shifted.entry(0, i) == 3.0);
            if (i < 4) CHECK(shifted.entry(1, i) == 0.0);
        }
        CHECK(shifted.bandwidth() == 1);
    }
    SUBCASE("commutes with the cut-off") {
        std::mt19937_64 rng(31);
        const MatrixXd a = oracle::random_symmetric(7, rng);
        const double s = 2.5;
        const MatrixXd a_shifted = a + s * MatrixXd::Identity(7, 7);
        for (const Index k : {0, 2, 6}) {
            const BandedSymMatrix lhs = add_diagonal(band_from_dense(a, k), s);
            const BandedSymMatrix rhs = band_from_dense(a_shifted, k);
            CHECK(lhs.band() == rhs.band());
        }
    }
    SUBCASE("zero shift is the identity") {
        std::mt19937_64 rng(32);
        const BandedSymMatrix b = band_from_dense(oracle::random_symmetric(6, rng), 2);
        CHECK(add_diagonal(b, 0.0).band() == b.band());
    }
    SUBCASE("negative shift is rejected") {
        BandedSymMatrix eye(2, 0);
        eye.entry(0, 0) = eye.entry(0, 1) = 1.0;
        CHECK_THROWS_AS(add_diagonal(eye, -1.0), InvalidParams);
    }
}

TEST_CASE("cholesky_banded") {
    SUBCASE("identity factors to identity") {
        BandedSymMatrix eye(6, 2);
        for (Index i = 0; i < 6; ++i) eye.entry(0, i) = 1.0;
        const BandedCholeskyFactor f = cholesky_banded(eye);
        for (Index i = 0; i < 6; ++i) {
            CHECK(f.entry(0, i) == 1.0);
            for (Index d = 1; d <= 2 && i + d < 6; ++d) CHECK(f.entry(d, i) == 0.0);
        }
    }
    SUBCASE("2x2 worked example") {
        MatrixXd a(2, 2);
        a << 4, 2, 2, 5;
        const BandedCholeskyFactor f = cholesky_banded(band_from_dense(a, 1));
        CHECK(f.entry(0, 0) == 2.0);
        CHECK(f.entry(1, 0) == 1.0);
        CHECK(f.entry(0, 1) == 2.0);
    }
    SUBCASE("matches the dense factorization") {
        std::mt19937_64 rng(41);
        const MatrixXd b = oracle::random_spd_banded(200, 10, rng);
        const BandedCholeskyFactor f = cholesky_banded(band_from_dense(b, 10));
        const MatrixXd l = Eigen::LLT<MatrixXd>(b).matrixL();
        for (Index j = 0; j < 200; ++j)
            for (Index d = 0; d <= std::min<Index>(10, 199 - j); ++d)
                CHECK(f.entry(d, j) ==
                      doctest::Approx(l(j + d, j)).epsilon(1e-10));
    }
    SUBCASE("indefinite input reports the failing pivot") {
        MatrixXd a(2, 2);
        a << 1, 2, 2, 1;
        try {
            cholesky_banded(band_from_dense(a, 1));
            FAIL("expected NotPositiveDefinite");
        } catch (const NotPositiveDefinite& e) {
            CHECK(e.pivot_index() == 1);
        }
    }
}

TEST_CASE("solve_banded") {
    SUBCASE("identity factor returns the rhs") {
        BandedSymMatrix eye(4, 1);
        for (Index i = 0; i < 4; ++i) eye.entry(0, i) = 1.0;
        const BandedCholeskyFactor f = cholesky_banded(eye);
        std::mt19937_64 rng(51);
        const MatrixXd rhs = oracle::random_symmetric(4, rng);
        CHECK(solve_banded(f, rhs) == rhs);
    }
    SUBCASE("2x2 worked example") {
        MatrixXd a(2, 2);
        a << 4, 2, 2, 5;
        const BandedCholeskyFactor f = cholesky_banded(band_from_dense(a, 1));
        Eigen::MatrixXd rhs(2, 1);
        rhs << 4, 2;
        const MatrixXd x = solve_banded(f, rhs);
        CHECK(x(0, 0) == 1.0);
        CHECK(x(1, 0) == 0.0);
    }
    SUBCASE("matches the dense solve") {
        std::mt19937_64 rng(52);
        const MatrixXd b = oracle::random_spd_banded(300, 15, rng);
        const BandedCholeskyFactor f = cholesky_banded(band_from_dense(b, 15));
        MatrixXd rhs(300, 3);
        for (Index c = 0; c < 3; ++c) rhs.col(c) = oracle::random_vector(300, rng);
        const MatrixXd got = solve_banded(f, rhs);
        const MatrixXd want = Eigen::LLT<MatrixXd>(b).solve(rhs);
        CHECK((got - want).norm() <= 1e-9 * want.norm());
    }
    SUBCASE("row-count mismatch") {
        BandedSymMatrix eye(4, 0);
        for (Index i = 0; i < 4; ++i) eye.entry(0, i) = 1.0;
        const BandedCholeskyFactor f = cholesky_banded(eye);
        CHECK_THROWS_AS(solve_banded(f, MatrixXd::Zero(3, 1)), DimensionMismatch);
    }
}

TEST_CASE("logdet_banded") {
    SUBCASE("identity") {
        BandedSymMatrix eye(5, 2);
        for (Index i = 0; i < 5; ++i) eye.entry(0, i) = 1.0;
        CHECK(logdet_banded(cholesky_banded(eye)) == 0.0);
    }
    SUBCASE("2x2 worked example") {
        MatrixXd a(2, 2);
        a << 4, 2, 2, 5;
        CHECK(logdet_banded(cholesky_banded(band_from_dense(a, 1))) ==
              doctest::Approx(std::log(16.0)).epsilon(1e-12));
    }
    SUBCASE("matches the dense log-determinant") {
        std::mt19937_64 rng(61);
        const MatrixXd b = oracle::random_spd_banded(150, 8, rng);
        const double got = logdet_banded(cholesky_banded(band_from_dense(b, 8)));
        CHECK(got == doctest::Approx(oracle::dense_logdet(b)).epsilon(1e-9));
    }
}

TEST_CASE("quad_form") {
    SUBCASE("zero vector") {
        BandedSymMatrix eye(3, 1);
        for (Index i = 0; i < 3; ++i) eye.entry(0, i) = 1.0;
        CHECK(quad_form(cholesky_banded(eye), VectorXd::Zero(3)) == 0.0);
    }
    SUBCASE("identity gives the squared norm") {
        BandedSymMatrix eye(2, 0);
        eye.entry(0, 0) = eye.entry(0, 1) = 1.0;
        VectorXd y(2);
        y << 3, 4;
        CHECK(quad_form(cholesky_banded(eye), y) == 25.0);
    }
    SUBCASE("matches the dense quadratic form and stays positive") {
        std::mt19937_64 rng(71);
        const MatrixXd b = oracle::random_spd_banded(120, 6, rng);
        const BandedCholeskyFactor f = cholesky_banded(band_from_dense(b, 6));
        for (int rep = 0; rep < 5; ++rep) {
            const VectorXd y = oracle::random_vector(120, rng);
            const double got = quad_form(f, y);
            const double want = y.dot(Eigen::LLT<MatrixXd>(b).solve(y));
            CHECK(got == doctest::Approx(want).epsilon(1e-9));
            CHECK(got > 0.0);
        }
    }
    SUBCASE("length mismatch") {
        BandedSymMatrix eye(3, 0);
        for (Index i = 0; i < 3; ++i) eye.entry(0, i) = 1.0;
        CHECK_THROWS_AS(quad_form(cholesky_banded(eye), VectorXd::Zero(2)), DimensionMismatch);
    }
}

TEST_CASE("cut-off operator properties") {
    std::mt19937_64 rng(81);
    const Index n = 9;
    SUBCASE("idempotence, bit-level") {
        for (const Index k : {0, 2, 5, 8}) {
            const MatrixXd a = oracle::random_symmetric(n, rng);
            const BandedSymMatrix once = band_from_dense(a, k);
            const BandedSymMatrix twice = band_from_dense(to_dense(once), k);
            CHECK(twice.band() == once.band());
        }
    }
    SUBCASE("linearity within 1e-12") {
        const MatrixXd a = oracle::random_symmetric(n, rng);
        const MatrixXd c = oracle::random_symmetric(n, rng);
        const double alpha = 0.7, beta = -1.3;
        for (const Index k : {1, 4}) {
            const MatrixXd lhs = to_dense(band_from_dense(alpha * a + beta * c, k));
            const MatrixXd rhs = alpha * to_dense(band_from_dense(a, k)) +
                                 beta * to_dense(band_from_dense(c, k));
            CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);
        }
    }
    SUBCASE("full bandwidth is the identity") {
        const MatrixXd a = oracle::random_symmetric(n, rng);
        CHECK(to_dense(band_from_dense(a, n - 1)) == a);
    }
}

TEST_CASE("factor-solve consistency") {
    std::mt19937_64 rng(91);
    for (const Index k : {1, 5, 20}) {
        const Index n = 80;
        const MatrixXd b = oracle::random_spd_banded(n, k, rng);
        const BandedSymMatrix band = band_from_dense(b, k);
        const BandedCholeskyFactor f = cholesky_banded(band);
        const MatrixXd rhs = oracle::random_vector(n, rng);
        const MatrixXd back = to_dense(band) * solve_banded(f, rhs);
        CHECK((back - rhs).norm() <= 1e-8 * rhs.norm());
    }
}

TEST_SUITE_END();
