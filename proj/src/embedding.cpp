// Copyright 2026 sitecheck contributors
// SPDX-License-Identifier: Apache-2.0

#include "sitecheck/embedding.hpp"

#include <cmath>

#include "sitecheck/errors.hpp"

namespace sitecheck {

double l2_norm(const Embedding& e) {
    double sq = 0.0;
    for (double v : e.values) sq += v * v;
    return std::sqrt(sq);
}

Embedding& normalize_l2(Embedding& e) {
    if (!all_finite(e)) {
        throw DegenerateVectorError("embedding contains non-finite values");
    }
    const double norm = l2_norm(e);
    if (!(norm > 1e-12)) {
        throw DegenerateVectorError("embedding has (near-)zero norm");
    }
    for (double& v : e.values) v /= norm;
    return e;
}

double dot(const Embedding& a, const Embedding& b) {
    if (a.dim() != b.dim()) {
        throw DimMismatchError("embedding dimensions differ: " + std::to_string(a.dim()) +
                               " vs " + std::to_string(b.dim()));
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) acc += a.values[i] * b.values[i];
    return acc;
}

bool is_unit_norm(const Embedding& e, double tol) {
    return std::abs(l2_norm(e) - 1.0) <= tol;
}

bool all_finite(const Embedding& e) {
    for (double v : e.values) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

bool valid_patch_matrix(const PatchMatrix& m) {
    if (m.patches.empty()) return false;
    for (const Embedding& p : m.patches) {
        if (p.dim() != kPatchDim || !is_unit_norm(p)) return false;
    }
    return true;
}

}  // namespace sitecheck
