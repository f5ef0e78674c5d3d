#include <doctest.h>

#include <cmath>
#include <set>

#include "sic/kmeans.hpp"
#include "support.hpp"

using namespace sic;
namespace ts = testsupport;

namespace {

// Exhaustive minimum of the k-means objective over all 2-cluster partitions
// of up to ~20 points (both clusters non-empty).
double brute_force_best_g2(const Eigen::MatrixXd& points, std::vector<int>* best_labels) {
    const int n = static_cast<int>(points.rows());
    const int d = static_cast<int>(points.cols());
    double best = std::numeric_limits<double>::infinity();
    for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
        Eigen::RowVectorXd c0 = Eigen::RowVectorXd::Zero(d);
        Eigen::RowVectorXd c1 = Eigen::RowVectorXd::Zero(d);
        int n0 = 0, n1 = 0;
        for (int i = 0; i < n; ++i) {
            if (mask & (1u << i)) {
                c1 += points.row(i);
                ++n1;
            } else {
                c0 += points.row(i);
                ++n0;
            }
        }
        c0 /= n0;
        c1 /= n1;
        double g = 0.0;
        for (int i = 0; i < n; ++i)
            g += (mask & (1u << i)) ? (points.row(i) - c1).squaredNorm()
                                    : (points.row(i) - c0).squaredNorm();
        if (g < best) {
            best = g;
            if (best_labels != nullptr) {
                best_labels->assign(static_cast<std::size_t>(n), 0);
                for (int i = 0; i < n; ++i)
                    if (mask & (1u << i)) (*best_labels)[static_cast<std::size_t>(i)] = 1;
            }
        }
    }
    return best;
}

} // namespace

TEST_SUITE("kmeans") {

TEST_CASE("k equal to N puts every point in its own cluster with zero objective") {
    const Eigen::MatrixXd m = ts::random_matrix(5, 3, 2);
    const ClusterAssignment res = kmeans_cluster(m, 5, 10, 1);
    CHECK(res.num_clusters() == 5);
    std::set<int> distinct(res.labels.begin(), res.labels.end());
    CHECK(distinct.size() == 5);
    CHECK(res.objective == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("k = 1 yields the column means as the single center") {
    const Eigen::MatrixXd m = ts::random_matrix(6, 4, 3);
    const ClusterAssignment res = kmeans_cluster(m, 1, 10, 9);
    REQUIRE(res.num_clusters() == 1);
    for (int s = 0; s < 4; ++s)
        CHECK(res.centers(0, s) == doctest::Approx(m.col(s).mean()).epsilon(1e-14));
}

TEST_CASE("two well-separated blobs reach the brute-force global minimum") {
    const ts::Blobs blobs = ts::make_blobs(2, 4, 3, 0.05, 71);
    std::vector<int> best_labels;
    const double best_g = brute_force_best_g2(blobs.points, &best_labels);

    const ClusterAssignment res = kmeans_cluster(blobs.points, 2, 50, 5);
    CHECK(res.objective == doctest::Approx(best_g).epsilon(1e-10));
    CHECK(ts::same_partition(res.labels, best_labels));
    CHECK(ts::same_partition(res.labels, blobs.labels));
}

TEST_CASE("objective trace never increases") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Eigen::MatrixXd m = ts::random_matrix(40, 8, 100 + seed);
        const ClusterAssignment res = kmeans_cluster(m, 6, 30, seed);
        for (std::size_t t = 1; t < res.objective_trace.size(); ++t)
            CHECK(res.objective_trace[t] <=
                  res.objective_trace[t - 1] * (1.0 + 1e-12) + 1e-12);
    }
}

TEST_CASE("identical rows always share a label") {
    Eigen::MatrixXd m = ts::random_matrix(10, 4, 8);
    m.row(7) = m.row(2);
    m.row(9) = m.row(2);
    const ClusterAssignment res = kmeans_cluster(m, 3, 20, 4);
    CHECK(res.labels[7] == res.labels[2]);
    CHECK(res.labels[9] == res.labels[2]);
}

TEST_CASE("argument validation") {
    const Eigen::MatrixXd m = ts::random_matrix(4, 3, 6);
    CHECK_THROWS_AS(kmeans_cluster(m, 5, 10, 1), DataError);
    CHECK_THROWS_AS(kmeans_cluster(m, 0, 10, 1), DataError);
    Eigen::MatrixXd bad = m;
    bad(0, 0) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(kmeans_cluster(bad, 2, 10, 1), DataError);
}

TEST_CASE("aggregation with num_try = 1 is that single sampling") {
    const Eigen::MatrixXd m = ts::random_matrix(9, 5, 33, 0.02);
    const BinaryClassification agg = aggregate_samplings(m, 3, 10, 1, 77, false);
    const Eigen::MatrixXd normed = normalize_returns(m);
    const ClusterAssignment single = kmeans_cluster(normed, 3, 10, 77);
    CHECK(agg.labels() == BinaryClassification(single.labels).labels());
}

TEST_CASE("duplicated rows are always co-clustered by aggregation") {
    Eigen::MatrixXd m = ts::random_matrix(8, 5, 19, 0.02);
    m.row(5) = m.row(1);
    const BinaryClassification agg = aggregate_samplings(m, 3, 20, 5, 11, false);
    CHECK(agg.label(5) == agg.label(1));
}

TEST_CASE("aggregation recovers planted blobs for any sampling count") {
    const ts::Blobs blobs = ts::make_blobs(3, 6, 8, 0.01, 321);
    for (int num_try : {1, 10, 100}) {
        const BinaryClassification agg =
            aggregate_samplings(blobs.points, 3, 100, num_try, 1234, false);
        CHECK(ts::rand_index(agg.labels(), blobs.labels) == 1.0);
    }
}

TEST_CASE("aggregation matches the independent transcription bit for bit") {
    // Small panels, every flag combination; the acceptance suite runs the
    // larger seeded sweep.
    for (std::uint64_t trial = 0; trial < 8; ++trial) {
        const int n = 5 + static_cast<int>(trial % 7);
        const int d = 3 + static_cast<int>(trial % 3);
        const int k = 2 + static_cast<int>(trial % 2);
        const int num_try = 1 + static_cast<int>(trial % 5);
        const bool demean = trial % 2 == 1;
        const Eigen::MatrixXd m = ts::random_matrix(n, d, 900 + trial, 0.05);

        const auto got = detail::aggregate_with_state(m, k, 10, num_try, 55 + trial, demean);
        const auto expected = ts::oracle::aggregate(m, k, 10, num_try, 55 + trial, demean);
        CHECK(got.state.vote == expected.vote);
        CHECK(got.classification.labels() == expected.labels);
    }
}

TEST_CASE("aggregation is deterministic in the seed") {
    const Eigen::MatrixXd m = ts::random_matrix(12, 6, 44, 0.03);
    const BinaryClassification a = aggregate_samplings(m, 4, 15, 7, 99, true);
    const BinaryClassification b = aggregate_samplings(m, 4, 15, 7, 99, true);
    CHECK(a.labels() == b.labels());
}

} // TEST_SUITE
