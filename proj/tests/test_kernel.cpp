#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "btcgp/kernel.hpp"
#include "oracles.hpp"

using namespace btcgp;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd equispaced(Index n, double delta) {
    VectorXd x(n);
    for (Index i = 0; i < n; ++i) x[i] = static_cast<double>(i) * delta;
    return x;
}

const SeHyperParams kCaseA{5.0, 1.0, 0.10};
const SeHyperParams kCaseB{1.0, 0.75, 0.01};
const SeHyperParams kCaseC{0.8, 2.0, 0.05};

}  // namespace

TEST_SUITE_BEGIN("kernel");

TEST_CASE("se_kernel") {
    const SeHyperParams unit{1.0, 1.0, 0.1};
    CHECK(se_kernel(0.0, SeHyperParams{3.5, 0.7, 0.2}) == 3.5);
    CHECK(se_kernel(1.0, unit) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
    SUBCASE("decays below any epsilon") {
        const double eps = 1e-12;
        const double tau = std::sqrt(2.0 * std::log(1.0 / eps)) + 0.1;
        CHECK(se_kernel(tau, unit) < eps);
    }
    SUBCASE("invalid hyperparameters") {
        CHECK_THROWS_AS(se_kernel(1.0, SeHyperParams{0.0, 1.0, 1.0}), InvalidParams);
        CHECK_THROWS_AS(se_kernel(1.0, SeHyperParams{1.0, -1.0, 1.0}), InvalidParams);
        CHECK_THROWS_AS(se_kernel(1.0, SeHyperParams{1.0, 1.0, 0.0}), InvalidParams);
    }
}

TEST_CASE("gram_dense") {
    SUBCASE("single point") {
        VectorXd x(1);
        x << 2.5;
        const MatrixXd g = gram_dense(x, x, SeHyperParams{4.0, 1.0, 0.1});
        CHECK(g.rows() == 1);
        CHECK(g(0, 0) == 4.0);
    }
    SUBCASE("long equispaced series has a vanishing corner") {
        const SeHyperParams p{1.0, 1.0, 0.1};
        const VectorXd x = equispaced(1000, 0.01);
        const MatrixXd g = gram_dense(x, x, p);
        CHECK(g(0, 999) == doctest::Approx(std::exp(-0.5 * 9.99 * 9.99)).epsilon(1e-12));
        CHECK(g(0, 999) < 1e-20);
        CHECK(g.diagonal().minCoeff() == 1.0);
    }
    SUBCASE("symmetric and positive definite for random inputs") {
        // Spacing well above the length-scale keeps the smallest eigenvalue
        // resolvable in double precision.
        std::mt19937_64 rng(101);
        const VectorXd x = oracle::random_sorted_x(12, rng, 0.8, 1.5);
        const MatrixXd g = gram_dense(x, x, SeHyperParams{2.0, 0.5, 0.1});
        CHECK((g - g.transpose()).cwiseAbs().maxCoeff() == 0.0);
        CHECK(oracle::min_eigenvalue(g) > 0.0);
    }
}

TEST_CASE("gram_banded matches the dense path bit for bit") {
    std::mt19937_64 rng(111);
    const SeHyperParams p{2.5, 0.6, 0.05};
    const VectorXd x = oracle::random_sorted_x(40, rng);
    for (const Index k : {0, 1, 7, 39}) {
        const BandedSymMatrix direct = gram_banded(x, p, k);
        const BandedSymMatrix viadense = band_from_dense(gram_dense(x, x, p), k);
        CHECK(direct.band() == viadense.band());
    }
    SUBCASE("three points by hand") {
        const VectorXd x = equispaced(3, 1.0);
        const BandedSymMatrix b = gram_banded(x, SeHyperParams{1.0, 1.0, 0.1}, 1);
        CHECK(b.entry(0, 0) == 1.0);
        CHECK(b.entry(1, 0) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
    }
    SUBCASE("unsorted input is rejected") {
        VectorXd x(3);
        x << 0.0, 1.0, 0.5;
        CHECK_THROWS_AS(gram_banded(x, kCaseA, 1), DuplicatePoints);
    }
}

TEST_CASE("min_spacing") {
    VectorXd x(3);
    x << 0.0, 0.2, 0.4;
    CHECK(min_spacing(x) == 0.2);
    VectorXd x2(3);
    x2 << 0.0, 0.05, 1.0;
    CHECK(min_spacing(x2) == 0.05);
    SUBCASE("equals the brute-force minimum over all pairs") {
        std::mt19937_64 rng(121);
        const VectorXd xs = oracle::random_sorted_x(60, rng);
        CHECK(min_spacing(xs) == oracle::min_pairwise_distance(xs));
    }
    SUBCASE("rejects duplicates and short inputs") {
        VectorXd dup(3);
        dup << 0.0, 0.5, 0.5;
        CHECK_THROWS_AS(min_spacing(dup), DuplicatePoints);
        CHECK_THROWS_AS(min_spacing(VectorXd::Zero(1)), TooFewPoints);
    }
}

TEST_CASE("theoretical_bandwidth") {
    CHECK(theoretical_bandwidth(kCaseA, 0.2) == 19);
    CHECK(theoretical_bandwidth(kCaseB, 0.1) == 31);
    CHECK(theoretical_bandwidth(kCaseC, 0.2) == 38);
    CHECK(theoretical_bandwidth(SeHyperParams{0.01, 0.1, 1.0}, 1.0) == 2);

    SUBCASE("monotone in each argument inside the log branch") {
        std::mt19937_64 rng(131);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int rep = 0; rep < 200; ++rep) {
            const SeHyperParams p{std::exp(u(rng) * 2.0 - 0.5), 0.3 + u(rng) * 2.0,
                                  0.001 + u(rng) * 0.05};
            const double delta = 0.05 + u(rng) * 0.2;
            const Index base = theoretical_bandwidth(p, delta);
            CHECK(base >= 2);
            SeHyperParams larger_l = p;
            larger_l.lengthscale *= 1.2;
            CHECK(theoretical_bandwidth(larger_l, delta) >= base);
            SeHyperParams larger_s = p;
            larger_s.signal_var *= 1.5;
            CHECK(theoretical_bandwidth(larger_s, delta) >= base);
            SeHyperParams larger_n = p;
            larger_n.noise_var *= 1.5;
            CHECK(theoretical_bandwidth(larger_n, delta) <= base);
            CHECK(theoretical_bandwidth(p, delta * 1.2) <= base);
        }
    }
    SUBCASE("invalid delta") {
        CHECK_THROWS_AS(theoretical_bandwidth(kCaseA, 0.0), InvalidParams);
    }
}

TEST_CASE("thm1_margin") {
    const VectorXd x = equispaced(2000, 0.2);
    SUBCASE("the tabulated bandwidth is certified") {
        CHECK(thm1_margin(x, kCaseA, 19) >= 0.0);
    }
    SUBCASE("full bandwidth returns the bound itself") {
        const double l2 = kCaseA.lengthscale * kCaseA.lengthscale;
        const double d2 = 0.2 * 0.2;
        const double bound =
            kCaseA.noise_var * 3.0 * d2 / (4.0 * l2) * std::exp(-1.5 * d2 / l2);
        const VectorXd xs = equispaced(50, 0.2);
        CHECK(thm1_margin(xs, kCaseA, 49) == doctest::Approx(bound).epsilon(1e-14));
        CHECK(thm1_margin(xs, kCaseA, 49) > 0.0);
    }
    SUBCASE("a tiny bandwidth is rejected by the certificate") {
        CHECK(thm1_margin(x, kCaseA, 1) < 0.0);
    }
}

TEST_CASE("thin_to_spacing") {
    SUBCASE("already spaced data is untouched") {
        const Dataset1D data(equispaced(10, 0.5), VectorXd::LinSpaced(10, 0, 9));
        const Dataset1D out = thin_to_spacing(data, 0.5);
        CHECK(out.x() == data.x());
        CHECK(out.y() == data.y());
    }
    SUBCASE("greedy trace") {
        VectorXd x(4), y(4);
        x << 0.0, 0.05, 0.1, 0.2;
        y << 1, 2, 3, 4;
        const Dataset1D out = thin_to_spacing(Dataset1D(x, y), 0.1);
        REQUIRE(out.size() == 3);
        CHECK(out.x()[0] == 0.0);
        CHECK(out.x()[1] == 0.1);
        CHECK(out.x()[2] == 0.2);
        CHECK(out.y()[2] == 4.0);
    }
    SUBCASE("result satisfies the spacing bound") {
        std::mt19937_64 rng(141);
        const VectorXd x = oracle::random_sorted_x(200, rng, 0.01, 0.2);
        const Dataset1D out = thin_to_spacing(Dataset1D(x, VectorXd::Zero(200)), 0.15);
        for (Index i = 0; i + 1 < out.size(); ++i) CHECK(out.x()[i + 1] - out.x()[i] >= 0.15);
        CHECK(min_spacing(out.x()) >= 0.15);
    }
}

TEST_CASE("Dataset1D invariants") {
    VectorXd x(3), y(3);
    x << 0, 1, 2;
    y << 1, 2, 3;
    const Dataset1D data(x, y);
    CHECK(data.delta() == 1.0);
    CHECK_THROWS_AS(Dataset1D(x, VectorXd::Zero(2)), DimensionMismatch);
    VectorXd bad(3);
    bad << 0, 2, 1;
    CHECK_THROWS_AS(Dataset1D(bad, y), DuplicatePoints);
    CHECK(Dataset1D(VectorXd::Zero(1), VectorXd::Zero(1)).delta() ==
          std::numeric_limits<double>::infinity());
}

TEST_CASE("positive definiteness at the selected bandwidth") {
    // Randomized draws: the banded factorization succeeds at the selected
    // bandwidth, and a dense eigenvalue oracle agrees for moderate sizes.
    std::mt19937_64 rng(151);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 60; ++rep) {
        const Index n = 100 + static_cast<Index>(u(rng) * 300);
        const double delta = 0.05 + u(rng) * 0.45;
        const SeHyperParams p{std::exp(u(rng) * std::log(100.0) - std::log(10.0)),
                              delta * (1.0 + u(rng) * 19.0),
                              std::exp(u(rng) * std::log(1000.0) - std::log(1000.0))};
        const VectorXd x = equispaced(n, delta);
        const Index k = std::min<Index>(theoretical_bandwidth(p, delta), n - 1);
        const BandedSymMatrix cov = add_diagonal(gram_banded(x, p, k), p.noise_var);
        CHECK_NOTHROW(cholesky_banded(cov));
        if (n <= 300) CHECK(oracle::min_eigenvalue(to_dense(cov)) > 0.0);
    }
}

TEST_CASE("row-sum eigenvalue bound on the cut-off") {
    // For a symmetric positive definite matrix, the cut-off stays positive
    // definite whenever the largest excluded row sum is below the smallest
    // eigenvalue.
    std::mt19937_64 rng(161);
    for (int rep = 0; rep < 10; ++rep) {
        const MatrixXd a = oracle::random_spd_banded(30, 29, rng);
        const double lambda_min = oracle::min_eigenvalue(a);
        for (Index k = 28; k >= 0; --k) {
            double worst = 0.0;
            for (Index i = 0; i < 30; ++i) {
                double row = 0.0;
                for (Index j = 0; j < 30; ++j)
                    if (std::abs(i - j) > k) row += std::abs(a(i, j));
                worst = std::max(worst, row);
            }
            if (worst < lambda_min)
                CHECK(oracle::min_eigenvalue(oracle::dense_cutoff(a, k)) > 0.0);
        }
    }
}

TEST_SUITE_END();
