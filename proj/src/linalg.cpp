#include "srdo/linalg.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>

namespace srdo {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

} // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64(sm);
}

Rng Rng::derive(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t h = seed;
    std::uint64_t mixed = splitmix64(h);
    for (std::uint64_t tag : tags) {
        std::uint64_t st = mixed ^ (tag + 0x632BE59BD9B4E019ULL);
        mixed = splitmix64(st);
    }
    return Rng(mixed);
}

std::uint64_t Rng::next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::below(std::uint64_t bound) {
    if (bound == 0) throw Error("Rng::below: zero bound");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t r = next_u64();
    while (r >= limit) r = next_u64();
    return r % bound;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

LeastSquaresSolution solve_least_squares(const Matrix& a, const Vector& b) {
    if (a.rows() != b.size()) {
        throw DimensionError("solve_least_squares: matrix has " + std::to_string(a.rows()) +
                             " rows, rhs has " + std::to_string(b.size()));
    }
    if (a.cols() == 0) return {Vector(0), b.norm()};
    if (a.rows() < a.cols()) {
        throw RankDeficientError("solve_least_squares: underdetermined system", 0.0);
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(a);
    const auto diag = qr.matrixQR().diagonal().cwiseAbs();
    const double top = diag.maxCoeff();
    const double ratio = top > 0.0 ? diag.minCoeff() / top : 0.0;
    if (!(ratio >= kPivotThreshold)) {
        throw RankDeficientError("solve_least_squares: pivot ratio " + std::to_string(ratio) +
                                     " below threshold",
                                 ratio);
    }
    LeastSquaresSolution sol;
    sol.x = qr.solve(b);
    sol.residual = (a * sol.x - b).norm();
    return sol;
}

LeastSquaresSolution solve_least_squares_rows(const Matrix& a, const Vector& b) {
    return solve_least_squares(a.transpose(), b);
}

Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    Matrix out(rows, cols);
    // row-major fill so the stream maps to entries in reading order
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = rng.normal();
    return out;
}

Vector uniform_vector(Eigen::Index n, double lo, double hi, Rng& rng) {
    Vector out(n);
    for (Eigen::Index i = 0; i < n; ++i) out(i) = rng.uniform(lo, hi);
    return out;
}

double power_iteration_lmax(const Matrix& a, int iters, double tol) {
    if (a.rows() != a.cols()) throw DimensionError("power_iteration_lmax: matrix not square");
    const Eigen::Index n = a.rows();
    if (n == 0) return 0.0;
    if (a.cwiseAbs().maxCoeff() == 0.0) return 0.0;

    Rng rng(0x5EED0F9017ULL);
    Vector v = uniform_vector(n, 0.5, 1.5, rng);
    v.normalize();
    double lambda = v.dot(a * v);
    for (int it = 0; it < iters; ++it) {
        Vector w = a * v;
        lambda = v.dot(w);
        const double residual = (w - lambda * v).norm();
        if (residual <= tol * std::abs(lambda)) return lambda;
        const double wn = w.norm();
        if (wn == 0.0) return 0.0;
        v = w / wn;
    }
    throw NonConvergenceError("power_iteration_lmax: no convergence after " + std::to_string(iters) +
                                  " iterations",
                              lambda);
}

double power_iteration_lmin(const Matrix& a, int iters, double tol) {
    const double lmax = power_iteration_lmax(a, iters, tol);
    if (lmax == 0.0) return 0.0;
    const Matrix shifted = lmax * Matrix::Identity(a.rows(), a.cols()) - a;
    const double top = power_iteration_lmax(shifted, iters, tol);
    return std::max(0.0, lmax - top);
}

void write_matrix(std::ostream& out, const Matrix& a) {
    char buf[32];
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        for (Eigen::Index c = 0; c < a.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", a(r, c));
            if (c > 0) out << ' ';
            out << buf;
        }
        out << '\n';
    }
}

Matrix read_matrix(std::istream& in, Eigen::Index rows, Eigen::Index cols) {
    Matrix a(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c)
            if (!(in >> a(r, c))) throw Error("read_matrix: truncated matrix data");
    return a;
}

} // namespace srdo
