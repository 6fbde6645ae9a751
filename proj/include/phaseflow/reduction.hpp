#pragma once

#include <span>
#include <vector>

#include "phaseflow/common.hpp"

namespace phaseflow::reduction {

struct SnapshotMatrix {
    Matrix data;                            // N snapshots x D degrees of freedom
    std::vector<double> quadrature_weights; // optional, length D, strictly positive
};

/// Mean field plus orthonormal modes under the (optionally weighted) inner
/// product, singular values sorted descending. Mode signs are canonicalized
/// so each mode's largest-magnitude entry is positive.
struct PodBasis {
    std::vector<double> mean;               // length D
    Matrix modes;                           // D x r
    std::vector<double> singular_values;    // length r
    std::vector<double> quadrature_weights; // empty = Euclidean

    std::size_t field_dim() const { return mean.size(); }
    std::size_t rank() const { return singular_values.size(); }
};

struct PodResult {
    PodBasis basis;
    Matrix coefficients; // N x r, a_i(t) by orthogonal projection
};

/// Mean-subtracted SVD; keeps the smallest rank whose cumulative squared
/// singular values reach energy_target in (0, 1].
PodResult pod(const SnapshotMatrix& snapshots, double energy_target);

/// Same with an explicit mode count.
PodResult pod_fixed(const SnapshotMatrix& snapshots, std::size_t n_modes);

std::vector<double> project(const PodBasis& basis, std::span<const double> field);
std::vector<double> reconstruct(const PodBasis& basis, std::span<const double> coefficients);

} // namespace phaseflow::reduction
