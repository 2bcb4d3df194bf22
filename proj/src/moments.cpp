#include "mvdro/moments.hpp"

#include <algorithm>
#include <map>

namespace mvdro {

Eigen::MatrixXd EmpiricalMoments::variance() const {
    Eigen::MatrixXd v = second - mean * mean.transpose();
    return 0.5 * (v + v.transpose());
}

Eigen::VectorXd EmpiricalMoments::restrict(const Eigen::VectorXd& full) const {
    if (full.size() != full_dim) {
        throw Error(ErrorCode::DimensionMismatch, "vector length " + std::to_string(full.size()) +
                                                      " != moment dimension " + std::to_string(full_dim));
    }
    Eigen::VectorXd local(dim());
    Eigen::VectorXd rest = full;
    for (Index j = 0; j < dim(); ++j) {
        const Index p = positions[std::size_t(j)];
        local[j] = full[p];
        rest[p] = 0.0;
    }
    if (rest.cwiseAbs().maxCoeff() != 0.0) {
        throw Error(ErrorCode::DimensionMismatch, "nonzero coefficient outside the moment coverage");
    }
    return local;
}

Eigen::VectorXd EmpiricalMoments::embed(const Eigen::VectorXd& local) const {
    if (local.size() != dim()) throw Error(ErrorCode::DimensionMismatch, "local vector length");
    Eigen::VectorXd full = Eigen::VectorXd::Zero(full_dim);
    for (Index j = 0; j < dim(); ++j) full[positions[std::size_t(j)]] = local[j];
    return full;
}

Eigen::MatrixXd monomial_rows(const PathSamples& samples, const MonomialEncoding& enc,
                              const std::vector<Index>& positions) {
    if (samples.samples.cols() != enc.path_dim()) {
        throw Error(ErrorCode::DimensionMismatch, "sample length does not match encoding nT");
    }
    Eigen::MatrixXd rows(samples.count(), Index(positions.size()));
    for (Index s = 0; s < samples.count(); ++s) {
        const Eigen::VectorXd m = monomial_vector(enc, samples.samples.row(s).transpose());
        for (std::size_t j = 0; j < positions.size(); ++j) rows(s, Index(j)) = m[positions[j]];
    }
    return rows;
}

EmpiricalMoments moments_from_rows(const Eigen::MatrixXd& rows) {
    if (rows.rows() < 2) {
        throw Error(ErrorCode::TooFewSamples, "need N >= 2 samples, got " + std::to_string(rows.rows()));
    }
    EmpiricalMoments mom;
    mom.full_dim = rows.cols();
    mom.positions.resize(std::size_t(rows.cols()));
    for (Index j = 0; j < rows.cols(); ++j) mom.positions[std::size_t(j)] = j;
    mom.count = rows.rows();
    const double inv = 1.0 / double(rows.rows());
    mom.mean = rows.colwise().sum().transpose() * inv;
    Eigen::MatrixXd s = (rows.transpose() * rows) * inv;
    mom.second = 0.5 * (s + s.transpose());
    return mom;
}

namespace {

EmpiricalMoments moments_on(const PathSamples& samples, const MonomialEncoding& enc, std::vector<Index> positions) {
    EmpiricalMoments mom = moments_from_rows(monomial_rows(samples, enc, positions));
    mom.full_dim = enc.dim();
    mom.positions = std::move(positions);
    return mom;
}

}  // namespace

EmpiricalMoments empirical_moments(const PathSamples& samples, const MonomialEncoding& enc) {
    std::vector<Index> all(std::size_t(enc.dim()));
    for (Index p = 0; p < enc.dim(); ++p) all[std::size_t(p)] = p;
    return moments_on(samples, enc, std::move(all));
}

EmpiricalMoments free_moments(const PathSamples& samples, const MonomialEncoding& enc) {
    return moments_on(samples, enc, enc.free_positions());
}

EmpiricalMoments restrict_moments(const EmpiricalMoments& mom, const std::vector<Index>& positions) {
    std::vector<Index> local;
    local.reserve(positions.size());
    for (Index p : positions) {
        const auto it = std::lower_bound(mom.positions.begin(), mom.positions.end(), p);
        if (it == mom.positions.end() || *it != p) {
            throw Error(ErrorCode::DimensionMismatch, "position " + std::to_string(p) + " not covered");
        }
        local.push_back(Index(it - mom.positions.begin()));
    }
    EmpiricalMoments out;
    out.full_dim = mom.full_dim;
    out.positions = positions;
    out.count = mom.count;
    out.mean = mom.mean(local);
    out.second = mom.second(local, local);
    return out;
}

std::vector<std::vector<Index>> duplicate_groups(const MonomialEncoding& enc, const std::vector<Index>& positions) {
    // key: degree followed by the sorted path positions of all factors
    std::map<std::vector<Index>, std::vector<Index>> by_key;
    std::vector<std::vector<Index>> keys;
    for (std::size_t j = 0; j < positions.size(); ++j) {
        const MultiIndex idx = enc.unflatten(positions[j]);
        std::vector<Index> factors{enc.path_index(idx.i, idx.t)};
        if (idx.degree >= 2) factors.push_back(enc.path_index(idx.c, idx.d));
        if (idx.degree == 3) factors.push_back(enc.path_index(idx.a, idx.b));
        std::sort(factors.begin(), factors.end());
        std::vector<Index> key{idx.degree};
        key.insert(key.end(), factors.begin(), factors.end());
        auto [it, inserted] = by_key.try_emplace(key);
        if (inserted) keys.push_back(key);
        it->second.push_back(Index(j));
    }
    std::vector<std::vector<Index>> groups;
    groups.reserve(keys.size());
    for (const auto& key : keys) groups.push_back(by_key[key]);
    return groups;
}

Eigen::MatrixXd tie_matrix(const std::vector<std::vector<Index>>& groups, Index dim) {
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(dim, Index(groups.size()));
    for (std::size_t g = 0; g < groups.size(); ++g)
        for (Index j : groups[g]) p(j, Index(g)) = 1.0;
    return p;
}

}  // namespace mvdro
