#pragma once

/**
 * @file encoding.hpp
 * @brief Monomial feature vector M and coefficient vector A of a predictable
 *        multiperiod strategy.
 *
 * A path of returns R = (R_1^1..R_1^n, ..., R_T^1..R_T^n) is laid out
 * period-major; the path position of R_t^i is (t-1)n + (i-1). The monomial
 * vector stacks three blocks:
 *
 *   degree 1:  R_t^i                 (nT entries)
 *   degree 2:  R_d^c R_t^i           ((nT)^2 entries)
 *   degree 3:  R_b^a R_d^c R_t^i     ((nT)^3 entries, order 2 only)
 *
 * with the index order 'abcdit' (a fastest). Inside a block, with x, y, z the
 * path positions of (a,b), (c,d), (i,t), the block-local 0-based position is
 * x + nT(y + nT z). The coefficient on R_t^i (times history monomials) is the
 * period-t weight on asset i, so a coefficient whose history factor is not
 * strictly earlier than t must be zero (the predictability mask).
 */

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "mvdro/error.hpp"

namespace mvdro {

using Index = Eigen::Index;

/// 1-based multi-index; unused components (a,b for degree 2; a,b,c,d for degree 1) are 0.
struct MultiIndex {
    int degree = 1;
    int a = 0, b = 0, c = 0, d = 0, i = 1, t = 1;

    friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
};

class MonomialEncoding {
public:
    MonomialEncoding(int assets, int periods, int order);

    int assets() const noexcept { return n_; }
    int periods() const noexcept { return T_; }
    int order() const noexcept { return order_; }
    Index path_dim() const noexcept { return Index(n_) * T_; }
    Index dim() const noexcept;

    Index block_offset(int degree) const;
    Index block_size(int degree) const;

    /// Global 0-based position of a multi-index in M (and A).
    Index flat_index(const MultiIndex& idx) const;
    /// Inverse of flat_index over [0, dim()).
    MultiIndex unflatten(Index position) const;

    /// Block-local 1-based position, the convention of the ceiling formulas.
    Index block_position(const MultiIndex& idx) const;
    MultiIndex unflatten_block(int degree, Index p) const;

    /// Path position (0-based) of R_t^i with 1-based (i, t).
    Index path_index(int asset, int period) const noexcept {
        return Index(period - 1) * n_ + (asset - 1);
    }

    /// True iff the coefficient at this position is forced to zero by predictability.
    bool masked(Index position) const;
    bool masked(const MultiIndex& idx) const;

    /// Positions that are not masked, ascending.
    std::vector<Index> free_positions() const;

    friend bool operator==(const MonomialEncoding&, const MonomialEncoding&) = default;

private:
    void check(const MultiIndex& idx) const;

    int n_;
    int T_;
    int order_;
};

MonomialEncoding build_encoding(int assets, int periods, int order);

/// Boolean vector over A positions; true means forced zero.
std::vector<bool> predictability_mask(const MonomialEncoding& enc);

/// Monomial vector M(path). No masking is applied to M.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>
monomial_vector(const MonomialEncoding& enc, const Eigen::MatrixBase<Derived>& path) {
    using Scalar = typename Derived::Scalar;
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    const Index k = enc.path_dim();
    if (path.size() != k) {
        throw Error(ErrorCode::DimensionMismatch,
                    "path length " + std::to_string(path.size()) + " != nT = " + std::to_string(k));
    }
    const Vec r = path.derived().reshaped();
    Vec m(enc.dim());
    m.head(k) = r;
    // degree 2: position y + k z holds r[y] * r[z]
    for (Index z = 0; z < k; ++z) {
        m.segment(k + k * z, k) = r * r[z];
    }
    if (enc.order() == 2) {
        const Index off = k + k * k;
        for (Index z = 0; z < k; ++z) {
            for (Index y = 0; y < k; ++y) {
                m.segment(off + k * (y + k * z), k) = r * (r[y] * r[z]);
            }
        }
    }
    return m;
}

/// Strategy coefficients over an encoding. Masked entries are structural zeros.
class CoefficientVector {
public:
    explicit CoefficientVector(const MonomialEncoding& enc);
    /// Throws MaskViolation when a masked entry is nonzero.
    CoefficientVector(const MonomialEncoding& enc, Eigen::VectorXd values);
    /// No mask check, for problems solved with predictability deliberately ignored.
    static CoefficientVector unchecked(const MonomialEncoding& enc, Eigen::VectorXd values);

    const MonomialEncoding& encoding() const noexcept { return enc_; }
    const Eigen::VectorXd& values() const noexcept { return values_; }

    double operator[](const MultiIndex& idx) const { return values_[enc_.flat_index(idx)]; }
    /// Sets an unmasked coefficient; masked targets throw MaskViolation.
    void set(const MultiIndex& idx, double value);

    /// f-block of period t (1-based), n entries.
    Eigen::VectorXd constant_terms(int period) const;

private:
    MonomialEncoding enc_;
    Eigen::VectorXd values_;
};

/// Period-t weights pi_t from coefficients and the returns of periods 1..t-1.
///
/// `history` is period-major and must hold at least n(t-1) entries; entries
/// beyond that are ignored.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>
strategy_weights(const MonomialEncoding& enc, const Eigen::VectorXd& coef,
                 const Eigen::MatrixBase<Derived>& history, int period) {
    using Scalar = typename Derived::Scalar;
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    const int n = enc.assets();
    const Index k = enc.path_dim();
    if (period < 1 || period > enc.periods()) {
        throw Error(ErrorCode::IndexOutOfRange, "period " + std::to_string(period));
    }
    if (coef.size() != enc.dim()) {
        throw Error(ErrorCode::DimensionMismatch, "coefficient vector length");
    }
    const Index known = Index(n) * (period - 1);
    if (history.size() < known) {
        throw Error(ErrorCode::HistoryTooShort, "need " + std::to_string(known) + " returns, got " +
                                                    std::to_string(history.size()));
    }
    const Vec h = history.derived().reshaped().head(known);

    Vec w(n);
    for (int i = 1; i <= n; ++i) {
        const Index z = enc.path_index(i, period);
        Scalar v = Scalar(coef[z]);
        // g coefficients: positions k + y + k z with y < known
        for (Index y = 0; y < known; ++y) {
            v += Scalar(coef[k + y + k * z]) * h[y];
        }
        if (enc.order() == 2) {
            const Index off = k + k * k;
            for (Index y = 0; y < known; ++y) {
                for (Index x = 0; x < known; ++x) {
                    v += Scalar(coef[off + x + k * (y + k * z)]) * h[x] * h[y];
                }
            }
        }
        w[i - 1] = v;
    }
    return w;
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>
strategy_weights(const CoefficientVector& a, const Eigen::MatrixBase<Derived>& history, int period) {
    return strategy_weights(a.encoding(), a.values(), history, period);
}

}  // namespace mvdro
