#include "mvdro/encoding.hpp"

#include <algorithm>
#include <string>

namespace mvdro {

MonomialEncoding::MonomialEncoding(int assets, int periods, int order)
    : n_(assets), T_(periods), order_(order) {
    if (order != 1 && order != 2) {
        throw Error(ErrorCode::UnsupportedOrder, "Taylor order must be 1 or 2, got " + std::to_string(order));
    }
    if (assets < 1 || periods < 1) {
        throw Error(ErrorCode::InvalidArgument, "need n >= 1 and T >= 1");
    }
}

Index MonomialEncoding::dim() const noexcept {
    const Index k = path_dim();
    return order_ == 1 ? k + k * k : k + k * k + k * k * k;
}

Index MonomialEncoding::block_offset(int degree) const {
    const Index k = path_dim();
    switch (degree) {
        case 1: return 0;
        case 2: return k;
        case 3:
            if (order_ == 2) return k + k * k;
            break;
        default: break;
    }
    throw Error(ErrorCode::IndexOutOfRange, "degree " + std::to_string(degree) + " not in encoding");
}

Index MonomialEncoding::block_size(int degree) const {
    const Index k = path_dim();
    block_offset(degree);
    Index s = k;
    for (int j = 1; j < degree; ++j) s *= k;
    return s;
}

void MonomialEncoding::check(const MultiIndex& idx) const {
    auto in = [](int v, int hi) { return v >= 1 && v <= hi; };
    bool ok = idx.degree >= 1 && idx.degree <= order_ + 1 && in(idx.i, n_) && in(idx.t, T_);
    if (idx.degree >= 2) ok = ok && in(idx.c, n_) && in(idx.d, T_);
    else ok = ok && idx.c == 0 && idx.d == 0;
    if (idx.degree == 3) ok = ok && in(idx.a, n_) && in(idx.b, T_);
    else ok = ok && idx.a == 0 && idx.b == 0;
    if (!ok) {
        throw Error(ErrorCode::IndexOutOfRange, "multi-index out of range for n=" + std::to_string(n_) +
                                                    ", T=" + std::to_string(T_));
    }
}

Index MonomialEncoding::block_position(const MultiIndex& idx) const {
    check(idx);
    const Index k = path_dim();
    const Index z = path_index(idx.i, idx.t);
    switch (idx.degree) {
        case 1: return z + 1;
        case 2: return path_index(idx.c, idx.d) + k * z + 1;
        default: return path_index(idx.a, idx.b) + k * (path_index(idx.c, idx.d) + k * z) + 1;
    }
}

Index MonomialEncoding::flat_index(const MultiIndex& idx) const {
    return block_offset(idx.degree) + block_position(idx) - 1;
}

MultiIndex MonomialEncoding::unflatten_block(int degree, Index p) const {
    if (p < 1 || p > block_size(degree)) {
        throw Error(ErrorCode::IndexOutOfRange, "block position " + std::to_string(p));
    }
    const Index k = path_dim();
    Index rest = p - 1;
    auto split = [&](int& asset, int& period) {
        const Index x = rest % k;
        rest /= k;
        asset = int(x % n_) + 1;
        period = int(x / n_) + 1;
    };
    MultiIndex idx;
    idx.degree = degree;
    if (degree == 3) split(idx.a, idx.b);
    if (degree >= 2) split(idx.c, idx.d);
    split(idx.i, idx.t);
    return idx;
}

MultiIndex MonomialEncoding::unflatten(Index position) const {
    if (position < 0 || position >= dim()) {
        throw Error(ErrorCode::IndexOutOfRange, "position " + std::to_string(position));
    }
    for (int degree = order_ + 1; degree >= 1; --degree) {
        const Index off = block_offset(degree);
        if (position >= off) return unflatten_block(degree, position - off + 1);
    }
    throw Error(ErrorCode::IndexOutOfRange, "position " + std::to_string(position));
}

bool MonomialEncoding::masked(const MultiIndex& idx) const {
    check(idx);
    if (idx.degree >= 2 && idx.d >= idx.t) return true;
    if (idx.degree == 3 && idx.b >= idx.t) return true;
    return false;
}

bool MonomialEncoding::masked(Index position) const { return masked(unflatten(position)); }

std::vector<Index> MonomialEncoding::free_positions() const {
    std::vector<Index> out;
    const Index k = path_dim();
    const int n = n_;
    for (Index z = 0; z < k; ++z) out.push_back(z);
    // degree 2: free iff the history position y lies in an earlier period than z
    for (Index z = 0; z < k; ++z) {
        const Index known = (z / n) * n;
        for (Index y = 0; y < known; ++y) out.push_back(k + y + k * z);
    }
    if (order_ == 2) {
        const Index off = k + k * k;
        for (Index z = 0; z < k; ++z) {
            const Index known = (z / n) * n;
            for (Index y = 0; y < known; ++y)
                for (Index x = 0; x < known; ++x) out.push_back(off + x + k * (y + k * z));
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

MonomialEncoding build_encoding(int assets, int periods, int order) {
    return MonomialEncoding(assets, periods, order);
}

std::vector<bool> predictability_mask(const MonomialEncoding& enc) {
    std::vector<bool> mask(static_cast<std::size_t>(enc.dim()), true);
    for (Index p : enc.free_positions()) mask[static_cast<std::size_t>(p)] = false;
    return mask;
}

CoefficientVector::CoefficientVector(const MonomialEncoding& enc)
    : enc_(enc), values_(Eigen::VectorXd::Zero(enc.dim())) {}

CoefficientVector::CoefficientVector(const MonomialEncoding& enc, Eigen::VectorXd values)
    : enc_(enc), values_(std::move(values)) {
    if (values_.size() != enc_.dim()) {
        throw Error(ErrorCode::DimensionMismatch, "coefficient vector has length " +
                                                      std::to_string(values_.size()) + ", encoding needs " +
                                                      std::to_string(enc_.dim()));
    }
    const auto mask = predictability_mask(enc_);
    for (Index p = 0; p < values_.size(); ++p) {
        if (mask[static_cast<std::size_t>(p)] && values_[p] != 0.0) {
            throw Error(ErrorCode::MaskViolation, "nonzero coefficient at masked position " + std::to_string(p));
        }
    }
}

CoefficientVector CoefficientVector::unchecked(const MonomialEncoding& enc, Eigen::VectorXd values) {
    if (values.size() != enc.dim()) {
        throw Error(ErrorCode::DimensionMismatch, "coefficient vector has length " + std::to_string(values.size()) +
                                                      ", encoding needs " + std::to_string(enc.dim()));
    }
    CoefficientVector out(enc);
    out.values_ = std::move(values);
    return out;
}

void CoefficientVector::set(const MultiIndex& idx, double value) {
    if (enc_.masked(idx)) {
        throw Error(ErrorCode::MaskViolation, "coefficient is masked by predictability");
    }
    values_[enc_.flat_index(idx)] = value;
}

Eigen::VectorXd CoefficientVector::constant_terms(int period) const {
    if (period < 1 || period > enc_.periods()) {
        throw Error(ErrorCode::IndexOutOfRange, "period " + std::to_string(period));
    }
    return values_.segment(Index(period - 1) * enc_.assets(), enc_.assets());
}

}  // namespace mvdro
