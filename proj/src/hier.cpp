#include "hcrbm/hier.hpp"

namespace hcrbm {

Matrix init_edge_matrix(int edge_count, int width, Rng& rng) {
    Matrix A(edge_count, width);
    for (int e = 0; e < edge_count; ++e)
        for (int j = 0; j < width; ++j) A(e, j) = 0.01 * rng.gaussian();
    return A;
}

Matrix compose_U(const EdgeParams& e) {
    Matrix U = Matrix::Zero(e.width(), e.class_count());
    for (int k = 0; k < e.class_count(); ++k)
        for (int m = 0; m < e.edge_count(); ++m)
            if (e.indicator(m, k) != 0.0) U.col(k) += e.A.row(m).transpose();
    return U;
}

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : v < 0.0 ? -1.0 : 0.0; }

}  // namespace

double orthogonal_penalty(const EdgeParams& e, const std::vector<std::pair<int, int>>& pairs) {
    double total = 0.0;
    for (const auto& [nu, mu] : pairs) {
        double dot = e.A.row(nu).dot(e.A.row(mu));
        switch (e.mode) {
            case PenaltyMode::raw: total += dot; break;
            case PenaltyMode::abs: total += std::abs(dot); break;
            case PenaltyMode::squared: total += dot * dot; break;
        }
    }
    return total;
}

Matrix penalty_gradient(const EdgeParams& e, const std::vector<std::pair<int, int>>& pairs,
                        bool paper_partial) {
    Matrix g = Matrix::Zero(e.edge_count(), e.width());
    for (const auto& [nu, mu] : pairs) {
        double dot = e.A.row(nu).dot(e.A.row(mu));
        double factor = 1.0;
        switch (e.mode) {
            case PenaltyMode::raw: factor = 1.0; break;
            case PenaltyMode::abs: factor = sign(dot); break;
            case PenaltyMode::squared: factor = 2.0 * dot; break;
        }
        g.row(nu) += factor * e.A.row(mu);
        if (!paper_partial) g.row(mu) += factor * e.A.row(nu);
    }
    return g;
}

Matrix hier_gradient(const Matrix& grad_U, const EdgeParams& e,
                     const std::vector<std::pair<int, int>>& pairs, bool paper_partial) {
    require(grad_U.rows() == e.width() && grad_U.cols() == e.class_count(),
            "hier_gradient: shape mismatch");
    Matrix g = e.indicator * grad_U.transpose();  // M x width
    if (e.C > 0.0) g -= e.C * penalty_gradient(e, pairs, paper_partial);
    return g;
}

namespace {

void check_finite(const RbmParams& p, const Matrix& A, int epoch) {
    if (!p.all_finite() || !A.allFinite())
        throw std::runtime_error("train_hcrbm: non-finite parameter detected in epoch " +
                                 std::to_string(epoch) + "; try a smaller learning rate");
}

}  // namespace

HcrbmModel train_hcrbm(const Dataset& data, const TaxonomyTree& tree, const TrainConfig& cfg,
                       RunMetrics* metrics) {
    cfg.validate();
    require(data.size() > 0, "train_hcrbm: empty dataset");
    require(data.num_classes <= tree.num_classes(), "train_hcrbm: label outside tree classes");
    const int n = cfg.hidden.front();
    const int K = tree.num_classes();

    Rng init_rng(cfg.seed, 0);
    Rng cd_rng(cfg.seed, 1);

    RbmParams p = init_rbm_base(n, data.feature_count(), K, init_rng);
    EdgeParams edges{init_edge_matrix(tree.num_edges(), n, init_rng), indicator_matrix(tree), cfg.C,
                     cfg.penalty};
    const auto pairs = ancestor_pairs(tree);
    p.U = compose_U(edges);

    const int N = data.size();
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        double recon_sum = 0.0;
        for (int start = 0; start < N; start += cfg.batch_size) {
            int len = std::min(cfg.batch_size, N - start);
            Matrix Xb = data.X.middleRows(start, len);
            std::vector<int> yb(data.y.begin() + start, data.y.begin() + start + len);
            double recon = 0.0;
            GradientSet g = cd1_gradient(p, Xb, yb, cd_rng, &recon);
            recon_sum += recon * len;
            apply_gradient(p, g, cfg.lr);
            Matrix gA = hier_gradient(g.U, edges, pairs, cfg.paper_partial_grad);
            edges.A += cfg.lr * gA;
            p.U = compose_U(edges);
        }
        check_finite(p, edges.A, epoch);
        if (metrics)
            metrics->epochs.push_back({epoch, recon_sum / N, orthogonal_penalty(edges, pairs),
                                       error_rate(p, data.X, data.y)});
    }
    return {std::move(p), std::move(edges), tree};
}

}  // namespace hcrbm
