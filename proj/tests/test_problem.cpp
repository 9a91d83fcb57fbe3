#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "srdo/problem.hpp"

using namespace srdo;

namespace {

Problem small_problem(std::uint64_t seed) {
    Rng rng(seed);
    return generate({60, 6, 2, 3, 1.0, 0.0}, rng);
}

double central_difference(const Problem& p, std::size_t i, std::size_t l, const Vector& x, Eigen::Index c, double h) {
    Vector up = x, down = x;
    up(c) += h;
    down(c) -= h;
    return (sub_objective(p, i, l, up) - sub_objective(p, i, l, down)) / (2.0 * h);
}

} // namespace

TEST_CASE("generate shape and planted solution") {
    Rng rng(1);
    const Problem p = generate({250, 20, 5, 5, 1.0, 0.0}, rng);
    REQUIRE(p.partitions.size() == 5);
    for (const auto& part : p.partitions) {
        REQUIRE(part.blocks.size() == 5);
        for (const auto& b : part.blocks) {
            CHECK(b.g.rows() == 10);
            CHECK(b.g.cols() == 20);
        }
    }
    CHECK((p.x_star - p.x0).norm() <= 1e-10 * p.x0.norm());
    CHECK(objective(p, p.x0) <= 1e-16 * p.y.squaredNorm());
    CHECK((p.g * p.x_star - p.y).norm() <= 1e-8 * p.y.norm());
    for (Eigen::Index i = 0; i < p.x0.size(); ++i) {
        CHECK(p.x0(i) >= -1.0);
        CHECK(p.x0(i) <= 1.0);
    }

    // rows are sliced contiguously
    CHECK(p.partitions[1].blocks[2].g == p.g.middleRows((1 * 5 + 2) * 10, 10));

    Rng big(2);
    const Problem q = generate({2500, 100, 5, 5, 1.0, 0.0}, big);
    CHECK(q.partitions[0].blocks[0].g.rows() == 100);

    Rng bad(3);
    CHECK_THROWS_AS(generate({20, 20, 1, 1, 1.0, 0.0}, bad), DimensionError);
    CHECK_THROWS_AS(generate({251, 20, 5, 5, 1.0, 0.0}, bad), DimensionError);
}

TEST_CASE("sub_gradient") {
    const Problem p = small_problem(4);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t l = 0; l < 3; ++l) CHECK(sub_gradient(p, i, l, p.x0).norm() <= 1e-10);

    Matrix g(1, 1);
    g << 2.0;
    Vector y(1);
    y << 2.0;
    Vector x0(1);
    x0 << 1.0;
    const Problem tiny = assemble(g, y, x0, 1, 1);
    const Vector grad = sub_gradient(tiny, 0, 0, Vector::Zero(1));
    CHECK(grad(0) == doctest::Approx(-8.0));

    Rng rng(5);
    for (int t = 0; t < 10; ++t) {
        const Vector x = uniform_vector(6, -2.0, 2.0, rng);
        const std::size_t i = rng.below(2), l = rng.below(3);
        const Vector an = sub_gradient(p, i, l, x);
        Vector fd(6);
        for (Eigen::Index c = 0; c < 6; ++c) fd(c) = central_difference(p, i, l, x, c, 1e-6);
        CHECK((an - fd).norm() <= 1e-4 * an.norm());
    }
}

TEST_CASE("decomposition identities") {
    const Problem p = small_problem(6);
    CHECK(full_gradient(p, p.x_star).norm() <= 1e-8 * p.g.norm());
    Rng rng(7);
    for (int t = 0; t < 20; ++t) {
        const Vector x = uniform_vector(6, -3.0, 3.0, rng);
        Vector sum = Vector::Zero(6);
        double fsum = 0.0;
        for (std::size_t i = 0; i < 2; ++i) {
            sum += partition_gradient(p, i, x);
            for (std::size_t l = 0; l < 3; ++l) fsum += sub_objective(p, i, l, x);
        }
        const Vector full = full_gradient(p, x);
        CHECK((sum - full).norm() <= 1e-12 * std::max(1.0, full.norm()));
        CHECK(std::abs(fsum - objective(p, x)) <= 1e-10 * objective(p, x));
        CHECK(partition_objective(p, 0, x) + partition_objective(p, 1, x) == doctest::Approx(objective(p, x)));
    }
    CHECK(objective(p, p.x0) <= 1e-20);
}

TEST_CASE("x_star minimizes") {
    Rng rng(8);
    const Problem p = generate({60, 6, 2, 3, 1.0, 0.5}, rng);
    const double best = objective(p, p.x_star);
    for (int t = 0; t < 100; ++t) {
        Vector d(6);
        for (Eigen::Index c = 0; c < 6; ++c) d(c) = rng.normal();
        d *= 1e-3 / d.norm();
        CHECK(best <= objective(p, p.x_star + d));
    }
}

TEST_CASE("lipschitz") {
    const Problem id = assemble(Matrix::Identity(4, 4), Vector::Ones(4), Vector::Ones(4), 1, 1);
    CHECK(lipschitz(id, 0) == doctest::Approx(2.0).epsilon(1e-6));

    Matrix g(1, 1);
    g << 3.0;
    const Problem three = assemble(g, Vector::Ones(1), Vector::Ones(1), 1, 1);
    CHECK(lipschitz(three, 0) == doctest::Approx(18.0).epsilon(1e-6));

    Rng rng(9);
    const Problem p = generate({100, 20, 2, 1, 1.0, 0.0}, rng);
    CHECK(p.partitions[0].blocks[0].g.rows() == 50);
    const double li = p.partitions[0].lipschitz;
    for (int t = 0; t < 100; ++t) {
        const Vector x = uniform_vector(20, -1.0, 1.0, rng), z = uniform_vector(20, -1.0, 1.0, rng);
        CHECK((partition_gradient(p, 0, x) - partition_gradient(p, 0, z)).norm() <= li * (x - z).norm() * (1.0 + 1e-9));
    }
    const double mu = strong_convexity(p, 0);
    CHECK(mu > 0.0);
    CHECK(mu <= li);
}

TEST_CASE("partition minimizer") {
    Rng rng(10);
    const Problem p = generate({60, 6, 2, 3, 1.0, 0.3}, rng);
    for (std::size_t i = 0; i < 2; ++i) CHECK(partition_gradient(p, i, partition_minimizer(p, i)).norm() <= 1e-8);
}

TEST_CASE("problem text round trip") {
    const Problem p = small_problem(11);
    std::stringstream ss;
    write_problem(ss, p);
    const Problem q = read_problem(ss);
    CHECK(q.g == p.g);
    CHECK(q.y == p.y);
    CHECK(q.x0 == p.x0);
    CHECK(q.x_star == p.x_star);
    CHECK(q.partitions.size() == 2);

    std::stringstream junk("not-a-problem 1 2 3 4 5");
    CHECK_THROWS_AS(read_problem(junk), Error);
}
