#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <string>

#include "srdo/error.hpp"

namespace srdo {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;

/// Deterministic PRNG: xoshiro256** seeded through splitmix64.
///
/// The stream for a given seed is identical on every platform. Normal
/// deviates use the Box-Muller transform on two 53-bit uniforms, caching
/// the second deviate of each pair. Independent sub-streams are obtained
/// with derive(), which hashes a seed together with a list of tags
/// (purpose, iteration, index...) so that a draw depends only on its
/// coordinates and never on how many draws other consumers made.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> tags);

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64();
    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer on [0, bound), bound > 0, without modulo bias.
    std::uint64_t below(std::uint64_t bound);
    double normal();

private:
    std::uint64_t seed_;
    std::uint64_t s_[4];
    bool has_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t& state);

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& a) {
    return a.derived().array().isFinite().all();
}

template <typename DerivedA, typename DerivedB>
auto mat_mul(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b)
    -> MatrixX<typename DerivedA::Scalar> {
    if (a.cols() != b.rows()) {
        throw DimensionError("mat_mul: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                             " times " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
    }
    MatrixX<typename DerivedA::Scalar> out = a * b;
    if (!all_finite(out)) throw Error("mat_mul: non-finite product");
    return out;
}

/// Max over rows of the row's l1 norm (the induced infinity norm).
template <typename Derived>
typename Derived::Scalar norm_inf_rows(const Eigen::MatrixBase<Derived>& a) {
    if (a.size() == 0) return typename Derived::Scalar(0);
    return a.cwiseAbs().rowwise().sum().maxCoeff();
}

/// Max over rows of the row's l2 norm.
template <typename Derived>
typename Derived::Scalar norm_2inf_rows(const Eigen::MatrixBase<Derived>& a) {
    if (a.size() == 0) return typename Derived::Scalar(0);
    return a.rowwise().norm().maxCoeff();
}

struct LeastSquaresSolution {
    Vector x;
    double residual = 0.0; // ||a x - b||_2 of the returned solution
};

inline constexpr double kPivotThreshold = 1e-10;

/// argmin ||a x - b||_2 via column-pivoted Householder QR. Throws
/// RankDeficientError when a pivot falls below kPivotThreshold relative to
/// the largest one.
LeastSquaresSolution solve_least_squares(const Matrix& a, const Vector& b);

/// Row form: argmin ||x^T a - b^T||_2, i.e. the MATLAB `b' / a`.
LeastSquaresSolution solve_least_squares_rows(const Matrix& a, const Vector& b);

Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng);
Vector uniform_vector(Eigen::Index n, double lo, double hi, Rng& rng);

/// Largest eigenvalue of a symmetric positive semidefinite matrix. Stops
/// once the eigen-residual ||a v - lambda v|| drops below tol * lambda.
double power_iteration_lmax(const Matrix& a, int iters = 20000, double tol = 1e-6);

/// Smallest eigenvalue of a symmetric PSD matrix by power iteration on the
/// shifted matrix lmax*I - a.
double power_iteration_lmin(const Matrix& a, int iters = 20000, double tol = 1e-6);

/// Plain-text dump: one row per line, space separated, 17 significant digits.
void write_matrix(std::ostream& out, const Matrix& a);
/// Reads `rows` lines of `cols` numbers each.
Matrix read_matrix(std::istream& in, Eigen::Index rows, Eigen::Index cols);

} // namespace srdo
