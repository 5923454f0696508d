#pragma once

#include <optional>

#include "hcrbm/hier.hpp"

namespace hcrbm {

/// Flat classification RBM trained by CD-1 with an unconstrained U.
RbmParams train_flat_rbm(const Dataset& data, const TrainConfig& cfg, RunMetrics* metrics = nullptr);

/// One trained classifier per internal tree node, over that node's children.
struct CascadeNode {
    int tree_node = -1;
    std::vector<int> child_nodes;  // tree node ids, edge order
    RbmParams rbm;
};

struct CascadeModel {
    TaxonomyTree tree;
    std::vector<CascadeNode> nodes;  // internal nodes, pre-order (root first)
    bool hidden_projection = false;  // true for HHRBM

    const CascadeNode* node_for(int tree_node) const {
        for (const auto& n : nodes)
            if (n.tree_node == tree_node) return &n;
        return nullptr;
    }
};

/// Hidden-mean representation sigmoid(Wx + c), the input HHRBM nodes pass
/// down to their children.
Vector hidden_projection(const RbmParams& p, const Vector& x);

/// Top-down cascade: split the training data at each internal node by which
/// child subtree holds the example's leaf (HRBMh/HRBMs share the training;
/// hard vs soft matters only at prediction).
CascadeModel train_cascade(const Dataset& data, const TaxonomyTree& tree, const TrainConfig& cfg,
                           RunMetrics* metrics = nullptr);

/// Cascade whose non-root nodes consume the parent's hidden-mean projection;
/// cfg.hidden lists per-level widths (clamped to the last entry).
CascadeModel train_hhrbm(const Dataset& data, const TaxonomyTree& tree, const TrainConfig& cfg,
                         RunMetrics* metrics = nullptr);

/// Follow the argmax child from the root until a leaf is reached.
int cascade_predict_hard(const CascadeModel& model, const Vector& x);

/// Per-class score = product of child-selection probabilities along the
/// root->leaf path; scores form a probability vector over classes.
Vector cascade_scores_soft(const CascadeModel& model, const Vector& x);

/// Multiclass logistic regression; coef is d x K.
struct LinearLogit {
    Matrix coef;
    Vector bias;
    std::optional<EdgeParams> edges;  // set for corrMNL

    int feature_count() const { return static_cast<int>(coef.rows()); }
    int class_count() const { return static_cast<int>(coef.cols()); }
};

Vector linear_posterior(const LinearLogit& m, const Vector& x);

/// Softmax regression by mini-batch gradient ascent, zero initialization.
LinearLogit train_mnl(const Dataset& data, const TrainConfig& cfg, RunMetrics* metrics = nullptr);

/// MNL whose class coefficients are path sums of per-edge d-vectors.
LinearLogit train_corrmnl(const Dataset& data, const TaxonomyTree& tree, const TrainConfig& cfg,
                          RunMetrics* metrics = nullptr);

}  // namespace hcrbm
