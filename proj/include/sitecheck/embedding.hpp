// Copyright 2026 sitecheck contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace sitecheck {

/// Dimension of page-patch and query-token embeddings.
inline constexpr std::size_t kPatchDim = 128;

/// Tolerance for the unit-norm invariant on stored embeddings.
inline constexpr double kUnitNormTolerance = 1e-6;

/// A dense embedding. All embeddings handed out by providers are
/// unit-normalized; `dim()` is the provider-defined dimension.
struct Embedding {
    std::vector<double> values;

    std::size_t dim() const { return values.size(); }

    bool operator==(const Embedding&) const = default;
};

double l2_norm(const Embedding& e);

/// Scales `e` to unit L2 norm in place and returns it.
/// Throws DegenerateVectorError for (near-)zero or non-finite input.
Embedding& normalize_l2(Embedding& e);

/// Dot product; throws DimMismatchError when dimensions differ.
double dot(const Embedding& a, const Embedding& b);

bool is_unit_norm(const Embedding& e, double tol = kUnitNormTolerance);

bool all_finite(const Embedding& e);

/// Multi-vector representation of one regulation page: one unit vector per
/// 16x16-pixel patch cell, all of dimension kPatchDim.
struct PatchMatrix {
    std::string page_id;
    std::vector<Embedding> patches;

    bool operator==(const PatchMatrix&) const = default;
};

/// True when the matrix satisfies its invariants (>= 1 patch, uniform
/// kPatchDim dimension, every patch unit-normalized).
bool valid_patch_matrix(const PatchMatrix& m);

}  // namespace sitecheck
