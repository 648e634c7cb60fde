#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "spca/datagen.hpp"
#include "spca/estimator.hpp"
#include "spca/network.hpp"

using namespace spca;

TEST_CASE("scenario classification and discard count") {
    SystemModel m;
    m.nodes = 2;
    m.local_batch = 10;
    m.rates = {100.0, 20.0, 100.0};
    // demand = 100/20 + 100/(10*100) = 5.1 nodes; two nodes fall short.
    const auto [scenario, mu] = classify_and_mu(m);
    CHECK(scenario == Scenario::constrained);
    // mu = ceil(10*100/20 + 100/100 - 20) = ceil(31) = 31
    CHECK(mu == 31);

    m.nodes = 6;
    const auto [rich, none] = classify_and_mu(m);
    CHECK(rich == Scenario::resourceful);
    CHECK(none == 0);

    // The override wins in either regime.
    m.mu_override = 200;
    CHECK(classify_and_mu(m).second == 200);
    m.nodes = 2;
    CHECK(classify_and_mu(m).second == 200);
    m.mu_override = -1;
    CHECK_THROWS_AS(classify_and_mu(m), config_error);
    m.mu_override.reset();

    // Exactly enough nodes counts as resourceful.
    SystemModel edge;
    edge.nodes = 3;
    edge.local_batch = 1;
    edge.rates = {100.0, 50.0, 100.0};
    CHECK(classify_and_mu(edge).first == Scenario::resourceful);
    edge.nodes = 2;
    const auto [tight, one] = classify_and_mu(edge);
    CHECK(tight == Scenario::constrained);
    CHECK(one == 1);

    SystemModel bad;
    bad.nodes = 0;
    CHECK_THROWS_AS(classify_and_mu(bad), config_error);
    bad.nodes = 1;
    bad.rates = {0.0, 1.0, 1.0};
    CHECK_THROWS_AS(classify_and_mu(bad), config_error);
}

TEST_CASE("global arrival index for one sample per node") {
    CHECK(reindex_dk(1, 1, 4) == 1);
    CHECK(reindex_dk(4, 1, 4) == 4);
    CHECK(reindex_dk(1, 2, 4) == 5);
    CHECK(reindex_dk(3, 3, 4) == 11);

    std::vector<long long> seen;
    for (long long t = 1; t <= 3; ++t)
        for (int i = 1; i <= 4; ++i)
            seen.push_back(reindex_dk(i, t, 4));
    std::sort(seen.begin(), seen.end());
    for (int k = 0; k < 12; ++k)
        CHECK(seen[std::size_t(k)] == k + 1);

    CHECK_THROWS_AS(reindex_dk(0, 1, 4), config_error);
    CHECK_THROWS_AS(reindex_dk(5, 1, 4), config_error);
    CHECK_THROWS_AS(reindex_dk(1, 0, 4), config_error);
}

TEST_CASE("global arrival index for node-and-slot batches") {
    CHECK(reindex_dmk(1, 1, 1, 3, 6) == 1);
    CHECK(reindex_dmk(1, 3, 1, 3, 6) == 3);
    CHECK(reindex_dmk(2, 1, 1, 3, 6) == 4);
    CHECK(reindex_dmk(2, 3, 1, 3, 6) == 6);
    CHECK(reindex_dmk(1, 1, 2, 3, 6) == 7);

    std::vector<long long> seen;
    for (long long t = 1; t <= 2; ++t)
        for (int i = 1; i <= 2; ++i)
            for (long j = 1; j <= 3; ++j)
                seen.push_back(reindex_dmk(i, j, t, 3, 6));
    std::sort(seen.begin(), seen.end());
    for (int k = 0; k < 12; ++k)
        CHECK(seen[std::size_t(k)] == k + 1);

    CHECK_THROWS_AS(reindex_dmk(1, 1, 1, 4, 6), config_error);
    CHECK_THROWS_AS(reindex_dmk(3, 1, 1, 3, 6), config_error);
    CHECK_THROWS_AS(reindex_dmk(1, 4, 1, 3, 6), config_error);
    CHECK_THROWS_AS(reindex_dmk(1, 1, 0, 3, 6), config_error);
}

TEST_CASE("vector sum follows the fixed reduction order") {
    VectorXd a(1), b(1), c(1);
    a[0] = 1e16;
    b[0] = 1.0;
    c[0] = -1e16;
    // Left-to-right: (1e16 + 1) absorbs the 1, so the total is exactly 0.
    const VectorXd lr = distributed_vector_sum({a, b, c});
    CHECK(lr[0] == 0.0);
    // A different order keeps it: 1e16 + (-1e16) + 1 = 1.
    const VectorXd rl = distributed_vector_sum({a, c, b});
    CHECK(rl[0] == 1.0);

    const VectorXd single = distributed_vector_sum({a});
    CHECK(single[0] == a[0]);

    CHECK_THROWS_AS(distributed_vector_sum({}), invalid_batch_error);
    VectorXd wrong(2);
    wrong.setZero();
    CHECK_THROWS_AS(distributed_vector_sum({a, wrong}),
                    invalid_dimension_error);
}

TEST_CASE("one node with one sample is exactly a single-sample step") {
    const CovarianceSpec spec = make_covariance(5, 1.0, 0.2, 3);
    std::mt19937_64 rng(123);
    EigenEstimate a = random_unit_init(5, rng);
    EigenEstimate b = a;
    std::mt19937_64 srng(321);
    const SampleBatch stream = sample_stream(spec, 500, srng);
    for (long t = 1; t <= 500; ++t) {
        const SampleBatch x = stream.col(t - 1);
        const double gamma = 1.0 / double(t);
        a = krasulina_step(a, x, gamma);
        b = run_dk_iteration(b, x, gamma);
        REQUIRE((a.v - b.v).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("distributed runs reproduce the centralized mini-batch bitwise") {
    const CovarianceSpec spec = make_covariance(5, 1.0, 0.2, 7);
    for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
        std::mt19937_64 init_rng(seed);
        const EigenEstimate base = random_unit_init(5, init_rng);
        EigenEstimate central = base;
        EigenEstimate dk = base;
        EigenEstimate dmk = base;

        std::mt19937_64 stream_rng(seed + 100);
        const SampleBatch stream = sample_stream(spec, 10000, stream_rng);
        double worst = 0.0;
        for (long t = 1; t <= 1000; ++t) {
            const SampleBatch block = stream.middleCols((t - 1) * 10, 10);
            const double gamma = 2.5 / double(t);
            central = krasulina_step(central, block, gamma);
            // Ten nodes, one sample each.
            dk = run_dk_iteration(dk, block, gamma);
            // Five nodes, two samples each, same arrival order.
            dmk = run_dmk_iteration(dmk, block, 5, 2, gamma, 0).est;
            worst = std::max(worst,
                             (central.v - dk.v).cwiseAbs().maxCoeff());
            worst = std::max(worst,
                             (central.v - dmk.v).cwiseAbs().maxCoeff());
        }
        CHECK(worst == 0.0);
        CHECK(central.samples_processed == 10000);
        CHECK(dmk.samples_processed == 10000);
    }
}

TEST_CASE("equivalence holds for the oja variant too") {
    const CovarianceSpec spec = make_covariance(4, 1.0, 0.3, 9);
    std::mt19937_64 rng(55);
    EigenEstimate central = random_unit_init(4, rng);
    EigenEstimate dk = central;
    EigenEstimate dmk = central;
    std::mt19937_64 srng(56);
    const SampleBatch stream = sample_stream(spec, 600, srng);
    for (long t = 1; t <= 100; ++t) {
        const SampleBatch block = stream.middleCols((t - 1) * 6, 6);
        const double gamma = 0.8 / double(t);
        central = oja_step(central, block, gamma);
        dk = run_dk_iteration(dk, block, gamma, Algo::oja);
        dmk = run_dmk_iteration(dmk, block, 3, 2, gamma, 0, Algo::oja).est;
        REQUIRE((central.v - dk.v).cwiseAbs().maxCoeff() == 0.0);
        REQUIRE((central.v - dmk.v).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("a local batch of one reduces the batched run to one-per-node") {
    const CovarianceSpec spec = make_covariance(5, 1.0, 0.2, 13);
    std::mt19937_64 rng(77);
    EigenEstimate a = random_unit_init(5, rng);
    EigenEstimate b = a;
    std::mt19937_64 srng(78);
    const SampleBatch stream = sample_stream(spec, 800, srng);
    for (long t = 1; t <= 100; ++t) {
        const SampleBatch block = stream.middleCols((t - 1) * 8, 8);
        const double gamma = 1.5 / double(t);
        a = run_dk_iteration(a, block, gamma);
        b = run_dmk_iteration(b, block, 8, 1, gamma, 3).est;
        REQUIRE((a.v - b.v).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("batched iteration validates its block") {
    std::mt19937_64 rng(88);
    EigenEstimate est = random_unit_init(4, rng);
    SampleBatch block(4, 6);
    block.setOnes();
    CHECK_THROWS_AS(run_dmk_iteration(est, block, 2, 2, 0.1, 0),
                    invalid_batch_error);
    CHECK_THROWS_AS(run_dmk_iteration(est, block, 2, 3, 0.1, -1),
                    config_error);
    CHECK_THROWS_AS(run_dmk_iteration(est, block, 0, 3, 0.1, 0),
                    config_error);
    CHECK(run_dmk_iteration(est, block, 2, 3, 0.1, 5).discarded == 5);

    SampleBatch none(4, 0);
    CHECK_THROWS_AS(run_dk_iteration(est, none, 0.1), invalid_batch_error);
    SampleBatch wrong(3, 2);
    wrong.setOnes();
    CHECK_THROWS_AS(run_dk_iteration(est, wrong, 0.1), invalid_batch_error);
    EigenEstimate dead;
    dead.v = VectorXd::Zero(4);
    CHECK_THROWS_AS(run_dk_iteration(dead, block.leftCols(2), 0.1),
                    degenerate_iterate_error);
}

TEST_CASE("splitter accounting under a discard quota") {
    const CovarianceSpec spec = make_covariance(5, 1.0, 0.2, 21);
    std::mt19937_64 rng(99);
    auto src = make_source(spec, rng);
    Splitter splitter(*src, 100000);
    MatrixXd block(5, 100);

    long long fulls = 0;
    while (true) {
        const auto status = splitter.next_block(100, 200, block);
        if (status != Splitter::BlockStatus::full)
            break;
        ++fulls;
        const auto& cur = splitter.cursor();
        CHECK(cur.received == cur.processed + cur.discarded);
        CHECK(cur.processed == 100 * fulls);
    }
    const auto& cur = splitter.cursor();
    // 333 blocks of 300 arrivals, then 100 arrivals which exactly fill a
    // block whose trailing discards never arrive.
    CHECK(fulls == 334);
    CHECK(cur.iteration == 334);
    CHECK(cur.received == 100000);
    CHECK(cur.processed == 33400);
    CHECK(cur.discarded == 66600);
    CHECK(splitter.next_block(100, 200, block) == Splitter::BlockStatus::done);
}

TEST_CASE("splitter discards a trailing part too small to process") {
    const CovarianceSpec spec = make_covariance(5, 1.0, 0.2, 22);
    std::mt19937_64 rng(101);
    auto src = make_source(spec, rng);
    Splitter splitter(*src, 1000);
    MatrixXd block(5, 300);
    CHECK(splitter.next_block(300, 0, block) == Splitter::BlockStatus::full);
    CHECK(splitter.next_block(300, 0, block) == Splitter::BlockStatus::full);
    CHECK(splitter.next_block(300, 0, block) == Splitter::BlockStatus::full);
    CHECK(splitter.next_block(300, 0, block) ==
          Splitter::BlockStatus::exhausted);
    const auto& cur = splitter.cursor();
    CHECK(cur.received == 1000);
    CHECK(cur.processed == 900);
    CHECK(cur.discarded == 100);
    CHECK(cur.iteration == 3);
    CHECK(splitter.next_block(300, 0, block) == Splitter::BlockStatus::done);
}

TEST_CASE("splitter stops when a finite dataset runs dry") {
    MatrixXd data(2, 50);
    for (long k = 0; k < 50; ++k) {
        data(0, k) = double(k);
        data(1, k) = 1.0;
    }
    std::vector<long> order(50);
    for (long i = 0; i < 50; ++i)
        order[i] = i;
    DatasetSource src(data, order);
    Splitter splitter(src, 100);
    MatrixXd block(2, 30);
    CHECK(splitter.next_block(30, 0, block) == Splitter::BlockStatus::full);
    CHECK(block(0, 0) == 0.0);
    // Only 20 of the next 30 samples exist; they are pulled and discarded.
    CHECK(splitter.next_block(30, 0, block) ==
          Splitter::BlockStatus::exhausted);
    const auto& cur = splitter.cursor();
    CHECK(cur.received == 50);
    CHECK(cur.processed == 30);
    CHECK(cur.discarded == 20);
    CHECK(cur.iteration == 1);
    // A dry source keeps reporting exhaustion without moving the cursor.
    CHECK(splitter.next_block(30, 0, block) ==
          Splitter::BlockStatus::exhausted);
    CHECK(splitter.cursor().received == 50);
}

TEST_CASE("splitter conservation holds for random shapes") {
    std::mt19937_64 seeds(7);
    for (int rep = 0; rep < 10; ++rep) {
        const CovarianceSpec spec = make_covariance(3, 1.0, 0.2, 30 + rep);
        std::mt19937_64 rng(seeds());
        auto src = make_source(spec, rng);
        const long B = 1 + long(seeds() % 40);
        const long mu = long(seeds() % 60);
        const long long budget = 500 + (long long)(seeds() % 2000);
        Splitter splitter(*src, budget);
        MatrixXd block(3, B);
        long long fulls = 0;
        while (splitter.next_block(B, mu, block) == Splitter::BlockStatus::full)
            ++fulls;
        const auto& cur = splitter.cursor();
        CHECK(cur.received == budget);
        CHECK(cur.received == cur.processed + cur.discarded);
        CHECK(cur.processed == fulls * B);
        CHECK(cur.iteration == fulls);
    }
}

TEST_CASE("splitter argument validation") {
    const CovarianceSpec spec = make_covariance(3, 1.0, 0.2, 77);
    std::mt19937_64 rng(1);
    auto src = make_source(spec, rng);
    CHECK_THROWS_AS(Splitter(*src, 0), config_error);
    Splitter splitter(*src, 10);
    MatrixXd block(3, 2);
    CHECK_THROWS_AS(splitter.next_block(0, 0, block), config_error);
    CHECK_THROWS_AS(splitter.next_block(2, -1, block), config_error);
    CHECK_THROWS_AS(splitter.next_block(5, 0, block), invalid_batch_error);
}
