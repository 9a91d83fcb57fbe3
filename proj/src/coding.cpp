#include "srdo/coding.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

namespace srdo {

StragglerSet StragglerSet::all(std::size_t total) {
    StragglerSet set;
    set.total = total;
    set.connected.resize(total);
    for (std::size_t j = 0; j < total; ++j) set.connected[j] = j;
    return set;
}

StragglerSet StragglerSet::from_stragglers(std::size_t total, const std::vector<std::size_t>& stragglers) {
    std::vector<bool> out(total, false);
    for (std::size_t j : stragglers) {
        if (j >= total) throw Error("StragglerSet: worker index out of range");
        out[j] = true;
    }
    StragglerSet set;
    set.total = total;
    for (std::size_t j = 0; j < total; ++j)
        if (!out[j]) set.connected.push_back(j);
    return set;
}

bool StragglerSet::contains(std::size_t worker) const {
    return std::binary_search(connected.begin(), connected.end(), worker);
}

std::size_t binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::size_t result = 1;
    for (std::size_t i = 1; i <= k; ++i) {
        const std::size_t num = n - k + i;
        if (result > std::numeric_limits<std::size_t>::max() / num) return std::numeric_limits<std::size_t>::max();
        result = result * num / i;
    }
    return result;
}

std::vector<Subset> lexicographic_subsets(std::size_t n, std::size_t k) {
    std::vector<Subset> out;
    if (k > n) return out;
    Subset current(k);
    for (std::size_t i = 0; i < k; ++i) current[i] = i;
    while (true) {
        out.push_back(current);
        if (k == 0) break;
        std::size_t i = k;
        while (i > 0 && current[i - 1] == n - k + (i - 1)) --i;
        if (i == 0) break;
        ++current[i - 1];
        for (std::size_t j = i; j < k; ++j) current[j] = current[j - 1] + 1;
    }
    return out;
}

Matrix build_b_cyc(std::size_t n_workers, std::size_t s, Rng& rng) {
    if (n_workers == 0 || s >= n_workers) {
        throw SchemeError("build_b_cyc: need 0 <= s < n_workers (n=" + std::to_string(n_workers) +
                          ", s=" + std::to_string(s) + ")");
    }
    const auto n = static_cast<Eigen::Index>(n_workers);
    const auto ss = static_cast<Eigen::Index>(s);
    if (s == 0) return Matrix::Identity(n, n);

    constexpr int kMaxRetries = 8;
    for (int attempt = 0; attempt <= kMaxRetries; ++attempt) {
        Matrix h = gaussian_matrix(ss, n, rng);
        h.col(n - 1) = -h.leftCols(n - 1).rowwise().sum();

        Matrix b = Matrix::Zero(n, n);
        bool singular = false;
        for (Eigen::Index i = 0; i < n && !singular; ++i) {
            Matrix sub(ss, ss);
            for (Eigen::Index t = 0; t < ss; ++t) sub.col(t) = h.col((i + 1 + t) % n);
            Eigen::ColPivHouseholderQR<Matrix> qr(sub);
            const auto diag = qr.matrixQR().diagonal().cwiseAbs();
            const double top = diag.maxCoeff();
            if (!(top > 0.0) || diag.minCoeff() / top < kPivotThreshold) {
                singular = true;
                break;
            }
            const Vector coeffs = qr.solve(Vector(h.col(i)));
            b(i, i) = 1.0;
            for (Eigen::Index t = 0; t < ss; ++t) b(i, (i + 1 + t) % n) = -coeffs(t);
        }
        if (!singular) return b;
    }
    throw SchemeError("build_b_cyc: singular subsystem after 8 retries");
}

DecodeMatrix build_a(const Matrix& encode, std::size_t s) {
    const auto n = static_cast<std::size_t>(encode.rows());
    if (encode.cols() != encode.rows()) throw DimensionError("build_a: encode matrix must be square");
    if (s >= n) throw SchemeError("build_a: need s < n_workers");
    const std::size_t rows = binomial(n, s);
    if (rows > kMaxDecodeRows) {
        throw SchemeError("build_a: C(" + std::to_string(n) + "," + std::to_string(s) +
                          ") exceeds the decode-row cap");
    }

    DecodeMatrix out;
    out.subsets = lexicographic_subsets(n, n - s);
    out.decode = Matrix::Zero(static_cast<Eigen::Index>(out.subsets.size()), encode.cols());
    const Vector ones = Vector::Ones(encode.cols());
    for (std::size_t r = 0; r < out.subsets.size(); ++r) {
        const Subset& subset = out.subsets[r];
        Matrix picked(static_cast<Eigen::Index>(subset.size()), encode.cols());
        for (std::size_t t = 0; t < subset.size(); ++t)
            picked.row(static_cast<Eigen::Index>(t)) = encode.row(static_cast<Eigen::Index>(subset[t]));

        auto name = [&] {
            std::ostringstream os;
            os << '{';
            for (std::size_t t = 0; t < subset.size(); ++t) os << (t ? "," : "") << subset[t];
            os << '}';
            return os.str();
        };
        LeastSquaresSolution fit;
        try {
            fit = solve_least_squares_rows(picked, ones);
        } catch (const RankDeficientError&) {
            throw SchemeError("build_a: rank-deficient rows for subset " + name(), subset);
        }
        if (!(fit.residual <= kSchemeTolerance)) {
            throw SchemeError("build_a: decode fit residual " + std::to_string(fit.residual) +
                                  " for subset " + name(),
                              subset);
        }
        for (std::size_t t = 0; t < subset.size(); ++t)
            out.decode(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(subset[t])) =
                fit.x(static_cast<Eigen::Index>(t));
        out.subset_index.emplace(subset, r);
    }
    return out;
}

CodingScheme make_scheme(const Matrix& encode, std::size_t s) {
    CodingScheme scheme;
    scheme.n_workers = static_cast<std::size_t>(encode.rows());
    scheme.stragglers = s;
    scheme.encode = encode;
    DecodeMatrix a = build_a(encode, s);
    scheme.decode = std::move(a.decode);
    scheme.subsets = std::move(a.subsets);
    scheme.subset_index = std::move(a.subset_index);
    return scheme;
}

CodingScheme make_scheme(std::size_t n_workers, std::size_t s, Rng& rng) {
    return make_scheme(build_b_cyc(n_workers, s, rng), s);
}

DecodeSelection select_decode_row(const CodingScheme& scheme, const StragglerSet& connected) {
    const std::size_t m = scheme.subset_size();
    DecodeSelection sel;
    if (connected.connected.size() >= m) {
        sel.subset.assign(connected.connected.begin(), connected.connected.begin() + static_cast<std::ptrdiff_t>(m));
        sel.active = sel.subset;
    } else {
        sel.subset = connected.connected;
        for (std::size_t j = 0; j < scheme.n_workers && sel.subset.size() < m; ++j)
            if (!connected.contains(j)) sel.subset.push_back(j);
        std::sort(sel.subset.begin(), sel.subset.end());
        sel.active = connected.connected;
    }
    sel.row = scheme.subset_index.at(sel.subset);
    return sel;
}

Vector decode(const CodingScheme& scheme, std::size_t row, const std::map<std::size_t, Vector>& coded_gradients,
              const std::vector<std::size_t>& active) {
    if (active.empty()) {
        if (coded_gradients.empty()) return Vector();
        return Vector::Zero(coded_gradients.begin()->second.size());
    }
    Vector sum;
    for (std::size_t j : active) {
        const auto it = coded_gradients.find(j);
        if (it == coded_gradients.end()) {
            throw Error("decode: missing coded gradient from worker " + std::to_string(j));
        }
        const double coeff = scheme.decode(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j));
        if (sum.size() == 0) {
            sum = coeff * it->second;
        } else {
            if (it->second.size() != sum.size()) throw DimensionError("decode: gradient dimension mismatch");
            sum += coeff * it->second;
        }
    }
    return sum;
}

double verify_scheme(const CodingScheme& scheme) {
    if (scheme.decode.size() == 0) return 0.0;
    const Matrix product = scheme.decode * scheme.encode;
    return (product.array() - 1.0).abs().maxCoeff();
}

double decode_row_l1(const CodingScheme& scheme, std::size_t row, const std::vector<std::size_t>& workers) {
    double sum = 0.0;
    for (std::size_t j : workers)
        sum += std::abs(scheme.decode(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j)));
    return sum;
}

void write_scheme(std::ostream& out, const CodingScheme& scheme) {
    out << "# n_workers " << scheme.n_workers << " s " << scheme.stragglers << '\n';
    out << "# B " << scheme.encode.rows() << ' ' << scheme.encode.cols() << '\n';
    write_matrix(out, scheme.encode);
    out << "# A " << scheme.decode.rows() << ' ' << scheme.decode.cols() << '\n';
    write_matrix(out, scheme.decode);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", verify_scheme(scheme));
    out << "# max|AB-1| " << buf << '\n';
}

} // namespace srdo
