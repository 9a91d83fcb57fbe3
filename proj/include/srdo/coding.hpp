#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <vector>

#include "srdo/linalg.hpp"

namespace srdo {

using Subset = std::vector<std::size_t>;

/// Gradient-coding scheme for one partition of n workers tolerating s
/// stragglers: cyclic encode matrix B (n x n, s+1 nonzeros per row) and
/// decode matrix A with one row per (n-s)-subset of workers, so that
/// A * B is the all-ones matrix.
struct CodingScheme {
    std::size_t n_workers = 0;
    std::size_t stragglers = 0;
    Matrix encode; // B
    Matrix decode; // A, rows in lexicographic subset order
    std::vector<Subset> subsets;
    std::map<Subset, std::size_t> subset_index;

    std::size_t subset_size() const { return n_workers - stragglers; }
};

/// Workers of one partition that delivered at a given step.
struct StragglerSet {
    std::vector<std::size_t> connected; // sorted, unique
    std::size_t total = 0;

    static StragglerSet all(std::size_t total);
    /// Builds the connected set from the list of straggling workers.
    static StragglerSet from_stragglers(std::size_t total, const std::vector<std::size_t>& stragglers);

    std::size_t straggler_count() const { return total - connected.size(); }
    bool contains(std::size_t worker) const;
};

inline constexpr double kSchemeTolerance = 1e-8;
inline constexpr std::size_t kMaxDecodeRows = 1'000'000;

/// Number of k-subsets of an n-set, saturating at SIZE_MAX.
std::size_t binomial(std::size_t n, std::size_t k);

/// All k-subsets of {0..n-1} in lexicographic order.
std::vector<Subset> lexicographic_subsets(std::size_t n, std::size_t k);

/// Random cyclic encode matrix. Row i has support {i, ..., i+s} mod n with
/// a leading coefficient of 1; the others put the row in the null space of
/// a random s x n matrix whose columns sum to zero. A singular s x s
/// subsystem triggers a redraw (at most 8 retries).
Matrix build_b_cyc(std::size_t n_workers, std::size_t s, Rng& rng);

struct DecodeMatrix {
    Matrix decode;
    std::vector<Subset> subsets;
    std::map<Subset, std::size_t> subset_index;
};

/// One least-squares fit x^T B(I,:) = 1^T per (n-s)-subset I.
DecodeMatrix build_a(const Matrix& encode, std::size_t s);

/// build_b_cyc followed by build_a.
CodingScheme make_scheme(std::size_t n_workers, std::size_t s, Rng& rng);
/// Wraps an arbitrary encode matrix (used for injected corruptions).
CodingScheme make_scheme(const Matrix& encode, std::size_t s);

struct DecodeSelection {
    std::size_t row = 0;
    Subset subset;
    std::vector<std::size_t> active;
};

/// Deterministic decode-row choice: the lexicographically smallest
/// (n-s)-subset of the connected workers when there are enough of them,
/// otherwise the smallest (n-s)-subset containing all connected workers,
/// with only the connected workers active.
DecodeSelection select_decode_row(const CodingScheme& scheme, const StragglerSet& connected);

/// Sum over active workers of A[row, j] * g_j.
Vector decode(const CodingScheme& scheme, std::size_t row,
              const std::map<std::size_t, Vector>& coded_gradients,
              const std::vector<std::size_t>& active);

/// max |(A B)_{rc} - 1|.
double verify_scheme(const CodingScheme& scheme);

/// l1 norm of a decode row restricted to the given workers.
double decode_row_l1(const CodingScheme& scheme, std::size_t row, const std::vector<std::size_t>& workers);

void write_scheme(std::ostream& out, const CodingScheme& scheme);

} // namespace srdo
