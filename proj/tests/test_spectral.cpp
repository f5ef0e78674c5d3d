#include <doctest.h>

#include <cmath>

#include "sic/spectral.hpp"
#include "support.hpp"

using namespace sic;
namespace ts = testsupport;

TEST_SUITE("spectral") {

TEST_CASE("two perfectly correlated rows give one positive eigenvalue of 2") {
    Eigen::MatrixXd m(2, 5);
    m << 0.1, -0.2, 0.3, 0.0, -0.1,
         0.2, -0.4, 0.6, 0.0, -0.2; // row 1 doubled
    const EigenSystem eig = correlation_eigen(m);
    REQUIRE(eig.count() == 1);
    CHECK(eig.values(0) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("orthogonal demeaned rows give an identity correlation spectrum") {
    Eigen::MatrixXd m(3, 8);
    m << 1, -1, 1, -1, 1, -1, 1, -1,
         1, 1, -1, -1, 1, 1, -1, -1,
         1, -1, -1, 1, 1, -1, -1, 1;
    const EigenSystem eig = correlation_eigen(m);
    REQUIRE(eig.count() == 3);
    for (int a = 0; a < 3; ++a) CHECK(eig.values(a) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Gram path matches the direct N x N path") {
    const Eigen::MatrixXd m = ts::random_matrix(8, 5, 55); // d-1 = 4 <= 8: Gram path
    const EigenSystem eig = correlation_eigen(m);

    const Eigen::MatrixXd psi = sample_correlation(m);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> direct(psi);
    REQUIRE(direct.info() == Eigen::Success);

    REQUIRE(eig.count() == 4);
    for (int a = 0; a < eig.count(); ++a) {
        const double expected = direct.eigenvalues()(7 - a);
        CHECK(std::fabs(eig.values(a) - expected) < 1e-8);
    }
    // Same spectral reconstruction regardless of path.
    Eigen::MatrixXd recon = Eigen::MatrixXd::Zero(8, 8);
    for (int a = 0; a < eig.count(); ++a)
        recon += eig.values(a) * eig.vectors.col(a) * eig.vectors.col(a).transpose();
    CHECK((recon - psi).cwiseAbs().maxCoeff() < 1e-8);
    // Orthonormal vectors.
    const Eigen::MatrixXd gram = eig.vectors.transpose() * eig.vectors;
    CHECK((gram - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("erank basics") {
    SUBCASE("n equal eigenvalues give exactly n") {
        for (int n : {1, 3, 7}) {
            Eigen::VectorXd v = Eigen::VectorXd::Constant(n, 0.37);
            CHECK(std::fabs(erank(v) - static_cast<double>(n)) < 1e-10);
        }
    }
    SUBCASE("single positive value gives 1") {
        Eigen::VectorXd v(1);
        v << 5.0;
        CHECK(erank(v) == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("(2,1,1) gives 2^1.5") {
        Eigen::VectorXd v(3);
        v << 2.0, 1.0, 1.0;
        CHECK(std::fabs(erank(v) - std::pow(2.0, 1.5)) < 1e-10);
    }
    SUBCASE("scale invariance") {
        Eigen::VectorXd v(4);
        v << 3.0, 2.0, 1.0, 0.5;
        CHECK(erank(v) == doctest::Approx(erank(Eigen::VectorXd(17.5 * v))).epsilon(1e-13));
    }
    SUBCASE("empty input is an error") {
        CHECK_THROWS_AS(erank(Eigen::VectorXd()), DataError);
        Eigen::VectorXd z(2);
        z << 0.0, 0.0;
        CHECK_THROWS_AS(erank(z), DataError);
    }
}

TEST_CASE("dynamic cluster numbers") {
    SUBCASE("paper grid: K1 = 100, KP = 10, P = 4") {
        // erank chosen so Round gives 10; N/(d-1) chosen so Round gives 100.
        const std::vector<int> k = dynamic_cluster_numbers(2000, 21, 10.0, 4);
        CHECK(k == std::vector<int>{100, 46, 22, 10});
    }
    SUBCASE("N = 2000, d = 21 fixes K1 = 100") {
        const std::vector<int> k = dynamic_cluster_numbers(2000, 21, 10.0, 1);
        REQUIRE(k.size() == 1);
        CHECK(k[0] == 100);
    }
    SUBCASE("P = 2 interpolates nothing") {
        const std::vector<int> k = dynamic_cluster_numbers(840, 21, 7.2, 2);
        CHECK(k == std::vector<int>{42, 7});
    }
    SUBCASE("K1 < KP collapses to one level") {
        const std::vector<int> k = dynamic_cluster_numbers(40, 21, 9.7, 3);
        CHECK(k == std::vector<int>{2});
    }
    SUBCASE("trailing count of 1 is dropped") {
        const std::vector<int> k = dynamic_cluster_numbers(200, 21, 1.2, 3);
        REQUIRE(!k.empty());
        CHECK(k.back() > 1);
        CHECK(k.front() == 10);
    }
    SUBCASE("log spacing within rounding slack") {
        const std::vector<int> k = dynamic_cluster_numbers(2000, 21, 10.0, 5);
        REQUIRE(k.size() == 5);
        const double lk1 = std::log(static_cast<double>(k.front()));
        const double lkp = std::log(static_cast<double>(k.back()));
        for (std::size_t mu = 0; mu < k.size(); ++mu) {
            const double t = static_cast<double>(mu) / static_cast<double>(k.size() - 1);
            const double target = lk1 + t * (lkp - lk1);
            const double slack = std::log(1.0 + 0.5 / static_cast<double>(k[mu]));
            CHECK(std::fabs(std::log(static_cast<double>(k[mu])) - target) <= slack + 1e-12);
        }
        for (std::size_t mu = 1; mu < k.size(); ++mu) CHECK(k[mu] < k[mu - 1]);
    }
}

TEST_CASE("top-down split counts from a cluster-count vector") {
    CHECK(derive_topdown_counts({100, 32, 10}) == std::vector<int>{10, 3, 3});
    CHECK(derive_topdown_counts({10}) == std::vector<int>{10});
    CHECK(derive_topdown_counts({100, 10}) == std::vector<int>{10, 10});
    CHECK_THROWS_AS(derive_topdown_counts({10, 10}), DataError);
}

TEST_CASE("classify_dynamic single level uses the N/(d-1) rule") {
    const ReturnMatrix ret(ts::random_matrix(40, 21, 7, 0.02));
    const MultilevelClassification ml = classify_dynamic(ret, 1, 50, 5, false, 11);
    REQUIRE(ml.num_levels() == 1);
    CHECK(ml.levels[0].num_clusters() <= 2);
    CHECK(ml.levels[0].num_clusters() >= 1);
}

TEST_CASE("classify_dynamic with a 3-factor panel lands on k = (5, 3)") {
    // Three orthogonal market-like factors with tiny idiosyncratic noise:
    // the correlation spectrum has three dominant, nearly equal eigenvalues,
    // so eRank rounds to 3 while K1 = Round(100/20) = 5.
    sic::SplitRng rng(99);
    const int n = 100, d = 21;
    Eigen::MatrixXd factors(3, d);
    for (int f = 0; f < 3; ++f)
        for (int s = 0; s < d; ++s) factors(f, s) = ts::normal_draw(rng);
    Eigen::MatrixXd m(n, d);
    for (int i = 0; i < n; ++i) {
        const int f = i % 3;
        const double beta = 0.5 + 0.05 * ts::normal_draw(rng);
        for (int s = 0; s < d; ++s)
            m(i, s) = beta * factors(f, s) + 0.02 * ts::normal_draw(rng);
    }
    const ReturnMatrix ret(m);

    // Verify the construction against the entropy definition directly.
    const EigenSystem eig = correlation_eigen(ret);
    double total = 0.0, entropy = 0.0;
    for (int a = 0; a < eig.count(); ++a) total += eig.values(a);
    for (int a = 0; a < eig.count(); ++a) {
        const double p = eig.values(a) / total;
        entropy -= p * std::log(p);
    }
    REQUIRE(std::llround(std::exp(entropy)) == 3);

    const MultilevelClassification ml = classify_dynamic(ret, 2, 50, 10, false, 4);
    ml.validate();
    CHECK(ml.cluster_counts().size() == 2);
    CHECK(ml.levels[0].num_clusters() <= 5);
    CHECK(ml.levels[1].num_clusters() <= 3);

    const MultilevelClassification td = classify_dynamic(ret, 2, 50, 10, true, 4);
    td.validate();
}

TEST_CASE("statistical risk model") {
    SUBCASE("full factor count reproduces the correlation matrix") {
        const Eigen::MatrixXd m = ts::random_matrix(9, 6, 31);
        const RiskModel model = statistical_risk_model(m, 5);
        const Eigen::MatrixXd psi = sample_correlation(m);
        CHECK((model.gamma - psi).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(model.specific_variance.maxCoeff() < 1e-10);
    }
    SUBCASE("a stock orthogonal to the retained factors keeps unit specific variance") {
        // Rows 0-2 move together; row 3 is orthogonal to them, so the top
        // factor carries no loading for it.
        Eigen::MatrixXd m(4, 5);
        m << 1.0, -1.0, 2.0, -2.0, 0.0,
             2.0, -2.0, 4.0, -4.0, 0.0,
             0.5, -0.5, 1.0, -1.0, 0.0,
             1.0, 1.0, -1.0, -1.0, 0.0;
        const RiskModel model = statistical_risk_model(m, 1);
        CHECK(model.specific_variance(3) == doctest::Approx(1.0).epsilon(1e-10));
    }
    SUBCASE("random panel with F = 2 matches the element-wise assembly") {
        const Eigen::MatrixXd m = ts::random_matrix(6, 5, 47);
        const RiskModel model = statistical_risk_model(m, 2);
        const EigenSystem eig = correlation_eigen(m);
        Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(6, 6);
        for (int a = 0; a < 2; ++a)
            expected += eig.values(a) * eig.vectors.col(a) * eig.vectors.col(a).transpose();
        for (int i = 0; i < 6; ++i) {
            const double xi2 = 1.0 - expected(i, i);
            CHECK(std::fabs(model.specific_variance(i) - xi2) < 1e-10);
            expected(i, i) = 1.0;
        }
        CHECK((model.gamma - expected).cwiseAbs().maxCoeff() < 1e-10);
    }
    SUBCASE("unit diagonal, symmetry, PSD") {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const Eigen::MatrixXd m = ts::random_matrix(10, 7, 300 + seed);
            const RiskModel model = statistical_risk_model(m);
            for (int i = 0; i < 10; ++i) CHECK(model.gamma(i, i) == 1.0);
            CHECK((model.gamma - model.gamma.transpose()).cwiseAbs().maxCoeff() < 1e-14);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(model.gamma);
            CHECK(solver.eigenvalues()(0) >= -1e-10);
        }
    }
    SUBCASE("factor count validation") {
        const Eigen::MatrixXd m = ts::random_matrix(6, 5, 3);
        CHECK_THROWS_AS(statistical_risk_model(m, 0), DataError);
        CHECK_THROWS_AS(statistical_risk_model(m, 5), DataError);
    }
    SUBCASE("floor option lowers the auto factor count at most by one") {
        const Eigen::MatrixXd m = ts::random_matrix(12, 8, 91);
        const RiskModel rounded = statistical_risk_model(m, kAutoFactors, false);
        const RiskModel floored = statistical_risk_model(m, kAutoFactors, true);
        const int fr = static_cast<int>(rounded.factor_loadings.cols());
        const int ff = static_cast<int>(floored.factor_loadings.cols());
        CHECK(ff <= fr);
        CHECK(fr - ff <= 1);
    }
}

} // TEST_SUITE
