#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "srdo/linalg.hpp"

namespace srdo {

// Rows of G and y owned by one worker: f_l(x) = ||G_l x - y_l||^2.
struct WorkerBlock {
    Matrix g;
    Vector y;
    double lipschitz = 0.0; // 2 * lambda_max(G_l^T G_l)
};

struct Partition {
    std::size_t index = 0;
    std::vector<WorkerBlock> blocks;
    double lipschitz = 0.0; // 2 * lambda_max(G_i^T G_i)
};

/// Distributed least-squares instance f(x) = ||G x - y||^2 split row-wise
/// into partitions and worker blocks.
struct Problem {
    Matrix g;
    Vector y;
    Vector x0;     // planted solution
    Vector x_star; // least-squares solution
    std::vector<Partition> partitions;

    Eigen::Index dim() const { return g.cols(); }
    std::size_t workers(std::size_t partition) const { return partitions.at(partition).blocks.size(); }
};

struct ProblemShape {
    Eigen::Index rows = 0; // M
    Eigen::Index cols = 0; // N
    std::size_t partitions = 1;
    std::size_t workers_per_partition = 1;
    // G entries are g_scale * N(0, 1).
    double g_scale = 1.0;
    // y = G x0 + noise_std * N(0, 1); zero keeps the system consistent.
    double noise_std = 0.0;
};

/// Draws G, x0 ~ U[-1,1]^N and y, solves for x_star and slices the rows
/// contiguously into equal blocks. A rank-deficient draw is retried once.
Problem generate(const ProblemShape& shape, Rng& rng);

/// Builds a problem from explicit data (row-contiguous equal blocks).
Problem assemble(Matrix g, Vector y, Vector x0, std::size_t partitions, std::size_t workers_per_partition);

Vector sub_gradient(const Problem& problem, std::size_t partition, std::size_t worker, const Vector& x);
double sub_objective(const Problem& problem, std::size_t partition, std::size_t worker, const Vector& x);
Vector partition_gradient(const Problem& problem, std::size_t partition, const Vector& x);
double partition_objective(const Problem& problem, std::size_t partition, const Vector& x);
Vector full_gradient(const Problem& problem, const Vector& x);
double objective(const Problem& problem, const Vector& x);

/// 2 * lambda_max(G_i^T G_i) by power iteration.
double lipschitz(const Problem& problem, std::size_t partition);
/// Strong-convexity modulus 2 * lambda_min(G_i^T G_i).
double strong_convexity(const Problem& problem, std::size_t partition);

/// Least-squares minimizer of a single partition function.
Vector partition_minimizer(const Problem& problem, std::size_t partition);

/// Text bundle: header line, then G, y, x0 and x_star.
void write_problem(std::ostream& out, const Problem& problem);
Problem read_problem(std::istream& in);

} // namespace srdo
