#include "srdo/problem.hpp"

#include <istream>
#include <ostream>
#include <string>

namespace srdo {

namespace {

Matrix partition_rows(const Problem& problem, std::size_t partition) {
    const Partition& part = problem.partitions.at(partition);
    Eigen::Index rows = 0;
    for (const auto& block : part.blocks) rows += block.g.rows();
    Matrix out(rows, problem.dim());
    Eigen::Index at = 0;
    for (const auto& block : part.blocks) {
        out.middleRows(at, block.g.rows()) = block.g;
        at += block.g.rows();
    }
    return out;
}

Vector partition_targets(const Problem& problem, std::size_t partition) {
    const Partition& part = problem.partitions.at(partition);
    Eigen::Index rows = 0;
    for (const auto& block : part.blocks) rows += block.y.size();
    Vector out(rows);
    Eigen::Index at = 0;
    for (const auto& block : part.blocks) {
        out.segment(at, block.y.size()) = block.y;
        at += block.y.size();
    }
    return out;
}

const WorkerBlock& block_at(const Problem& problem, std::size_t partition, std::size_t worker) {
    return problem.partitions.at(partition).blocks.at(worker);
}

} // namespace

Problem assemble(Matrix g, Vector y, Vector x0, std::size_t partitions, std::size_t workers_per_partition) {
    const Eigen::Index m = g.rows();
    const auto pieces = static_cast<Eigen::Index>(partitions * workers_per_partition);
    if (pieces == 0 || m % pieces != 0) {
        throw DimensionError("problem: " + std::to_string(m) + " rows do not split into " +
                             std::to_string(pieces) + " equal blocks");
    }
    if (y.size() != m || x0.size() != g.cols()) throw DimensionError("problem: inconsistent data sizes");

    Problem problem;
    problem.g = std::move(g);
    problem.y = std::move(y);
    problem.x0 = std::move(x0);

    const Matrix gram = problem.g.transpose() * problem.g;
    problem.x_star = solve_least_squares(gram, problem.g.transpose() * problem.y).x;

    const Eigen::Index block_rows = m / pieces;
    problem.partitions.resize(partitions);
    for (std::size_t i = 0; i < partitions; ++i) {
        Partition& part = problem.partitions[i];
        part.index = i;
        part.blocks.resize(workers_per_partition);
        for (std::size_t l = 0; l < workers_per_partition; ++l) {
            const Eigen::Index start = static_cast<Eigen::Index>(i * workers_per_partition + l) * block_rows;
            WorkerBlock& block = part.blocks[l];
            block.g = problem.g.middleRows(start, block_rows);
            block.y = problem.y.segment(start, block_rows);
            block.lipschitz = 2.0 * power_iteration_lmax(block.g.transpose() * block.g);
        }
        part.lipschitz = lipschitz(problem, i);
    }
    return problem;
}

Problem generate(const ProblemShape& shape, Rng& rng) {
    if (shape.rows <= shape.cols) throw DimensionError("generate: need M > N for an overdetermined system");
    const auto pieces = static_cast<Eigen::Index>(shape.partitions * shape.workers_per_partition);
    if (pieces == 0 || shape.rows % pieces != 0) {
        throw DimensionError("generate: M must be divisible by p * workers_per_partition");
    }
    for (int attempt = 0;; ++attempt) {
        Matrix g = shape.g_scale * gaussian_matrix(shape.rows, shape.cols, rng);
        Vector x0 = uniform_vector(shape.cols, -1.0, 1.0, rng);
        Vector y = g * x0;
        if (shape.noise_std > 0.0)
            for (Eigen::Index r = 0; r < y.size(); ++r) y(r) += shape.noise_std * rng.normal();
        try {
            return assemble(std::move(g), std::move(y), std::move(x0), shape.partitions, shape.workers_per_partition);
        } catch (const RankDeficientError&) {
            if (attempt >= 1) throw;
        }
    }
}

Vector sub_gradient(const Problem& problem, std::size_t partition, std::size_t worker, const Vector& x) {
    const WorkerBlock& block = block_at(problem, partition, worker);
    return 2.0 * (block.g.transpose() * (block.g * x - block.y));
}

double sub_objective(const Problem& problem, std::size_t partition, std::size_t worker, const Vector& x) {
    const WorkerBlock& block = block_at(problem, partition, worker);
    return (block.g * x - block.y).squaredNorm();
}

Vector partition_gradient(const Problem& problem, std::size_t partition, const Vector& x) {
    const Partition& part = problem.partitions.at(partition);
    Vector sum = Vector::Zero(problem.dim());
    for (std::size_t l = 0; l < part.blocks.size(); ++l) sum += sub_gradient(problem, partition, l, x);
    return sum;
}

double partition_objective(const Problem& problem, std::size_t partition, const Vector& x) {
    double sum = 0.0;
    for (std::size_t l = 0; l < problem.workers(partition); ++l) sum += sub_objective(problem, partition, l, x);
    return sum;
}

Vector full_gradient(const Problem& problem, const Vector& x) {
    Vector sum = Vector::Zero(problem.dim());
    for (std::size_t i = 0; i < problem.partitions.size(); ++i) sum += partition_gradient(problem, i, x);
    return sum;
}

double objective(const Problem& problem, const Vector& x) { return (problem.g * x - problem.y).squaredNorm(); }

double lipschitz(const Problem& problem, std::size_t partition) {
    const Matrix gi = partition_rows(problem, partition);
    return 2.0 * power_iteration_lmax(gi.transpose() * gi);
}

double strong_convexity(const Problem& problem, std::size_t partition) {
    const Matrix gi = partition_rows(problem, partition);
    return 2.0 * power_iteration_lmin(gi.transpose() * gi);
}

Vector partition_minimizer(const Problem& problem, std::size_t partition) {
    const Matrix gi = partition_rows(problem, partition);
    return solve_least_squares(gi, partition_targets(problem, partition)).x;
}

void write_problem(std::ostream& out, const Problem& problem) {
    const std::size_t p = problem.partitions.size();
    const std::size_t w = p ? problem.partitions.front().blocks.size() : 0;
    out << "srdo-problem 1 " << problem.g.rows() << ' ' << problem.g.cols() << ' ' << p << ' ' << w << '\n';
    write_matrix(out, problem.g);
    write_matrix(out, problem.y.transpose());
    write_matrix(out, problem.x0.transpose());
    write_matrix(out, problem.x_star.transpose());
}

Problem read_problem(std::istream& in) {
    std::string magic;
    int version = 0;
    Eigen::Index m = 0, n = 0;
    std::size_t p = 0, w = 0;
    if (!(in >> magic >> version >> m >> n >> p >> w) || magic != "srdo-problem" || version != 1) {
        throw Error("read_problem: bad header");
    }
    Matrix g = read_matrix(in, m, n);
    Vector y = read_matrix(in, 1, m).transpose();
    Vector x0 = read_matrix(in, 1, n).transpose();
    Vector x_star = read_matrix(in, 1, n).transpose();
    Problem problem = assemble(std::move(g), std::move(y), std::move(x0), p, w);
    problem.x_star = std::move(x_star);
    return problem;
}

} // namespace srdo
