#pragma once

#include <optional>
#include <string>

#include "hcrbm/baselines.hpp"

namespace hcrbm {

/// A saved RBM model: flat (no edge matrix) or hierarchical (edge matrix
/// plus the taxonomy text it was trained with).
struct RbmCheckpoint {
    RbmParams params;
    std::optional<Matrix> edge_matrix;  // m x n
    std::string tree_text;              // nonempty iff edge_matrix is set
};

/// Binary checkpoint, little-endian: magic "HRBM", u32 version 1, u32
/// n d K m, then row-major f64 W, b, c, d_bias, U; if m > 0 the edge matrix
/// and a length-prefixed taxonomy text follow.
void save_rbm_checkpoint(const std::string& path, const RbmParams& p);
void save_rbm_checkpoint(const std::string& path, const RbmParams& p, const Matrix& edge_matrix,
                         const std::string& tree_text);
RbmCheckpoint load_rbm_checkpoint(const std::string& path);

/// Linear models use the same layout under magic "HMNL" with u32 d K m and
/// blocks coef, bias (+ edge matrix and taxonomy for corrMNL).
struct LinearCheckpoint {
    LinearLogit model;
    std::string tree_text;
};

void save_linear_checkpoint(const std::string& path, const LinearLogit& m,
                            const std::string& tree_text = "");
LinearCheckpoint load_linear_checkpoint(const std::string& path);

/// Cascades are saved as a directory: manifest.txt with `node_name =
/// filename` lines (metadata in # comments), taxonomy.tree, and one flat RBM
/// checkpoint per internal node.
void save_cascade_checkpoint(const std::string& dir, const CascadeModel& model, Variant variant);
CascadeModel load_cascade_checkpoint(const std::string& dir, Variant* variant_out = nullptr);

}  // namespace hcrbm
