#pragma once

#include <Eigen/Dense>

#include <vector>

#include "mvdro/encoding.hpp"
#include "mvdro/market_data.hpp"

namespace mvdro {

/// Sample mean and second moment of the monomial vector M under the empirical measure.
///
/// Moments may cover only a subset of M's coordinates (`positions`, ascending);
/// coefficients outside that subset must be zero whenever the moments are used.
/// Covering only the free positions is the zero-component reduction.
struct EmpiricalMoments {
    Index full_dim = 0;
    std::vector<Index> positions;
    Eigen::VectorXd mean;    // E_Q[M] on positions
    Eigen::MatrixXd second;  // E_Q[M M^T] on positions, symmetrized
    Index count = 0;

    Index dim() const { return mean.size(); }
    bool covers_all() const { return dim() == full_dim; }

    /// Var_Q(M) = second - mean mean^T, symmetrized.
    Eigen::MatrixXd variance() const;

    /// Picks the covered coordinates of a full-length vector. Throws
    /// DimensionMismatch if an uncovered coordinate is nonzero.
    Eigen::VectorXd restrict(const Eigen::VectorXd& full) const;
    /// Inverse of restrict: zeros outside positions.
    Eigen::VectorXd embed(const Eigen::VectorXd& local) const;
};

/// Rows of M(sample) restricted to `positions`, one row per sample.
Eigen::MatrixXd monomial_rows(const PathSamples& samples, const MonomialEncoding& enc,
                              const std::vector<Index>& positions);

/// Moments from explicit realizations m_j (one per row); positions are 0..cols-1.
EmpiricalMoments moments_from_rows(const Eigen::MatrixXd& rows);

/// Full-coverage moments; dim_M^2 storage.
EmpiricalMoments empirical_moments(const PathSamples& samples, const MonomialEncoding& enc);
/// Moments over the unmasked coordinates only.
EmpiricalMoments free_moments(const PathSamples& samples, const MonomialEncoding& enc);

/// Restricts moments to a subset of their positions (global indices, ascending).
EmpiricalMoments restrict_moments(const EmpiricalMoments& mom, const std::vector<Index>& positions);

/// Groups of covered coordinates (local indices) whose monomials are structurally
/// identical, e.g. R_b^a R_d^c R_t^i and R_d^c R_b^a R_t^i. Singletons included.
std::vector<std::vector<Index>> duplicate_groups(const MonomialEncoding& enc, const std::vector<Index>& positions);

/// 0/1 matrix (positions x groups) mapping one coefficient per group onto every member.
Eigen::MatrixXd tie_matrix(const std::vector<std::vector<Index>>& groups, Index dim);

}  // namespace mvdro
