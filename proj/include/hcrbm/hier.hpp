#pragma once

#include "hcrbm/config.hpp"
#include "hcrbm/dataset.hpp"
#include "hcrbm/metrics.hpp"
#include "hcrbm/rbm.hpp"
#include "hcrbm/taxonomy.hpp"

namespace hcrbm {

/// One parameter row per tree edge plus the fixed 0/1 path indicator they
/// compose through. `width` is n for label weights and d for corrMNL
/// coefficients; the compose/penalty machinery is shared.
struct EdgeParams {
    Matrix A;          // M x width, row e = parameter vector of edge e
    Matrix indicator;  // M x K
    double C = 0.0;
    PenaltyMode mode = PenaltyMode::abs;

    int edge_count() const { return static_cast<int>(A.rows()); }
    int width() const { return static_cast<int>(A.cols()); }
    int class_count() const { return static_cast<int>(indicator.cols()); }
};

/// N(0, 0.01^2) entries drawn row by row.
Matrix init_edge_matrix(int edge_count, int width, Rng& rng);

/// width x K matrix; column k = sum of the edge rows on class k's root path,
/// accumulated in ascending edge order.
Matrix compose_U(const EdgeParams& e);

/// Sum over ancestor pairs of the pair score: raw a_mu.a_nu, abs |.|, or (.)^2.
double orthogonal_penalty(const EdgeParams& e, const std::vector<std::pair<int, int>>& pairs);

/// Gradient of orthogonal_penalty w.r.t. A. With paper_partial only the
/// descendant side of each pair accumulates, reproducing the one-sided
/// Eq. 8 form.
Matrix penalty_gradient(const EdgeParams& e, const std::vector<std::pair<int, int>>& pairs,
                        bool paper_partial = false);

/// Chain-rule routing of an ascent-oriented grad_U into edge space, minus
/// C times the penalty gradient.
Matrix hier_gradient(const Matrix& grad_U, const EdgeParams& e,
                     const std::vector<std::pair<int, int>>& pairs, bool paper_partial = false);

struct HcrbmModel {
    RbmParams rbm;
    EdgeParams edges;
    TaxonomyTree tree;
};

/// CD-1 training with the hierarchical prior: per batch, update W, b, c and
/// d_bias directly, route grad_U through the edges, then recompose U.
HcrbmModel train_hcrbm(const Dataset& data, const TaxonomyTree& tree, const TrainConfig& cfg,
                       RunMetrics* metrics = nullptr);

}  // namespace hcrbm
