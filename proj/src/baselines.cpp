#include "hcrbm/baselines.hpp"

#include <functional>
#include <iostream>

namespace hcrbm {

namespace {

void check_finite_or_throw(const RbmParams& p, int epoch, const char* who) {
    if (!p.all_finite())
        throw std::runtime_error(std::string(who) + ": non-finite parameter detected in epoch " +
                                 std::to_string(epoch) + "; try a smaller learning rate");
}

}  // namespace

RbmParams train_flat_rbm(const Dataset& data, const TrainConfig& cfg, RunMetrics* metrics) {
    cfg.validate();
    require(data.size() > 0, "train_flat_rbm: empty dataset");
    const int n = cfg.hidden.front();
    const int K = data.num_classes;

    Rng init_rng(cfg.seed, 0);
    Rng cd_rng(cfg.seed, 1);
    RbmParams p = init_rbm_base(n, data.feature_count(), K, init_rng);
    init_label_weights(p, init_rng);

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
        }
        check_finite_or_throw(p, epoch, "train_flat_rbm");
        if (metrics)
            metrics->epochs.push_back({epoch, recon_sum / N, 0.0, error_rate(p, data.X, data.y)});
    }
    return p;
}

Vector hidden_projection(const RbmParams& p, const Vector& x) {
    return (p.W * x + p.c).unaryExpr([](double t) { return sigmoid(t); });
}

namespace {

Matrix hidden_projection_batch(const RbmParams& p, const Matrix& X) {
    return ((p.W * X.transpose()).colwise() + p.c)
        .unaryExpr([](double t) { return sigmoid(t); })
        .transpose();
}

/// local child index under `node` for every class whose leaf sits below it
std::vector<std::vector<int>> build_child_slots(const TaxonomyTree& tree) {
    std::vector<std::vector<int>> slot(tree.num_nodes(), std::vector<int>(tree.num_classes(), -1));
    for (int k = 0; k < tree.num_classes(); ++k) {
        std::vector<int> path;  // root -> leaf
        for (int v = tree.leaf_of_class[k]; v != -1; v = tree.parent[v]) path.push_back(v);
        std::reverse(path.begin(), path.end());
        for (std::size_t i = 0; i + 1 < path.size(); ++i) {
            const auto& ch = tree.children[path[i]];
            for (std::size_t s = 0; s < ch.size(); ++s)
                if (ch[s] == path[i + 1]) slot[path[i]][k] = static_cast<int>(s);
        }
    }
    return slot;
}

CascadeModel train_cascade_impl(const Dataset& data, const TaxonomyTree& tree, const TrainConfig& cfg,
                                bool hidden_projection_mode, RunMetrics* metrics) {
    cfg.validate();
    require(data.size() > 0, "train_cascade: empty dataset");
    require(data.num_classes <= tree.num_classes(), "train_cascade: label outside tree classes");

    CascadeModel model;
    model.tree = tree;
    model.hidden_projection = hidden_projection_mode;
    const auto slot = build_child_slots(tree);

    // pre-order walk, training parents before children so projections exist
    std::function<void(int, const std::vector<int>&, const Matrix&, int)> walk =
        [&](int node, const std::vector<int>& idx, const Matrix& inputs, int level) {
            if (tree.is_leaf(node)) return;
            const auto& ch = tree.children[node];

            Dataset sub;
            sub.X = inputs;
            sub.y.resize(idx.size());
            for (std::size_t i = 0; i < idx.size(); ++i) sub.y[i] = slot[node][data.y[idx[i]]];
            sub.num_classes = static_cast<int>(ch.size());

            TrainConfig node_cfg = cfg;
            node_cfg.seed = node == tree.root ? cfg.seed : mix_seed(cfg.seed, static_cast<std::uint64_t>(node) + 1);
            int width = cfg.hidden[std::min<std::size_t>(level, cfg.hidden.size() - 1)];
            node_cfg.hidden = {hidden_projection_mode ? width : cfg.hidden.front()};

            CascadeNode cn;
            cn.tree_node = node;
            cn.child_nodes = ch;
            if (sub.X.rows() > 0) {
                cn.rbm = train_flat_rbm(sub, node_cfg, node == tree.root ? metrics : nullptr);
            } else {
                std::cerr << "warning: cascade node '" << tree.names[node]
                          << "' has no training examples; classifier left at initialization\n";
                Rng init_rng(node_cfg.seed, 0);
                cn.rbm = init_rbm_base(node_cfg.hidden.front(), static_cast<int>(inputs.cols()),
                                       sub.num_classes, init_rng);
                init_label_weights(cn.rbm, init_rng);
            }
            std::vector<int> seen(ch.size(), 0);
            for (int v : sub.y) ++seen[v];
            for (std::size_t s = 0; s < ch.size(); ++s) {
                if (seen[s] || sub.X.rows() == 0) continue;
                std::cerr << "warning: cascade node '" << tree.names[node] << "': child '"
                          << tree.names[ch[s]] << "' has no training examples; its prior is forced to zero\n";
                cn.rbm.d_bias[static_cast<int>(s)] = -1e30;
            }

            Matrix child_inputs =
                hidden_projection_mode ? hidden_projection_batch(cn.rbm, inputs) : Matrix();
            model.nodes.push_back(std::move(cn));

            for (std::size_t s = 0; s < ch.size(); ++s) {
                if (tree.is_leaf(ch[s])) continue;
                std::vector<int> sel;
                for (std::size_t i = 0; i < idx.size(); ++i)
                    if (slot[node][data.y[idx[i]]] == static_cast<int>(s)) sel.push_back(static_cast<int>(i));
                std::vector<int> child_idx(sel.size());
                const Matrix& pool = hidden_projection_mode ? child_inputs : inputs;
                Matrix child_X(sel.size(), pool.cols());
                for (std::size_t i = 0; i < sel.size(); ++i) {
                    child_idx[i] = idx[sel[i]];
                    child_X.row(static_cast<Eigen::Index>(i)) = pool.row(sel[i]);
                }
                walk(ch[s], child_idx, child_X, level + 1);
            }
        };

    std::vector<int> all(data.size());
    for (int i = 0; i < data.size(); ++i) all[i] = i;
    walk(tree.root, all, data.X, 0);
    return model;
}

}  // namespace

CascadeModel train_cascade(const Dataset& data, const TaxonomyTree& tree, const TrainConfig& cfg,
                           RunMetrics* metrics) {
    return train_cascade_impl(data, tree, cfg, false, metrics);
}

CascadeModel train_hhrbm(const Dataset& data, const TaxonomyTree& tree, const TrainConfig& cfg,
                         RunMetrics* metrics) {
    return train_cascade_impl(data, tree, cfg, true, metrics);
}

int cascade_predict_hard(const CascadeModel& model, const Vector& x) {
    int node = model.tree.root;
    Vector input = x;
    while (!model.tree.is_leaf(node)) {
        const CascadeNode* cn = model.node_for(node);
        require(cn != nullptr, "cascade_predict_hard: missing classifier for node");
        Vector post = class_posterior(cn->rbm, input);
        int s = argmax_lowest(post);
        if (model.hidden_projection) input = hidden_projection(cn->rbm, input);
        node = cn->child_nodes[s];
    }
    return model.tree.class_of_node[node];
}

Vector cascade_scores_soft(const CascadeModel& model, const Vector& x) {
    Vector scores = Vector::Zero(model.tree.num_classes());
    std::function<void(int, const Vector&, double)> walk = [&](int node, const Vector& input,
                                                               double prob) {
        if (model.tree.is_leaf(node)) {
            scores[model.tree.class_of_node[node]] = prob;
            return;
        }
        const CascadeNode* cn = model.node_for(node);
        require(cn != nullptr, "cascade_scores_soft: missing classifier for node");
        Vector post = class_posterior(cn->rbm, input);
        Vector next = model.hidden_projection ? hidden_projection(cn->rbm, input) : input;
        for (std::size_t s = 0; s < cn->child_nodes.size(); ++s)
            walk(cn->child_nodes[s], next, prob * post[static_cast<Eigen::Index>(s)]);
    };
    walk(model.tree.root, x, 1.0);
    return scores;
}

Vector linear_posterior(const LinearLogit& m, const Vector& x) {
    require(x.size() == m.feature_count(), "linear_posterior: shape mismatch");
    return softmax(m.coef.transpose() * x + m.bias);
}

namespace {

double linear_error_rate(const LinearLogit& m, const Matrix& X, const std::vector<int>& y) {
    Matrix scores = (X * m.coef).rowwise() + m.bias.transpose();
    long wrong = 0;
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        if (argmax_lowest(scores.row(i).transpose()) != y[i]) ++wrong;
    return static_cast<double>(wrong) / static_cast<double>(X.rows());
}

/// shared mini-batch loop; update applies (grad_coef, grad_bias) for a batch
template <typename Update>
void mnl_epochs(const Dataset& data, const TrainConfig& cfg, LinearLogit& m,
                const EdgeParams* edges, const std::vector<std::pair<int, int>>* pairs,
                RunMetrics* metrics, Update update) {
    const int N = data.size();
    const int K = m.class_count();
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        for (int start = 0; start < N; start += cfg.batch_size) {
            int len = std::min(cfg.batch_size, N - start);
            Matrix Xb = data.X.middleRows(start, len);
            Matrix G(K, len);  // one-hot minus posterior, per column
            for (int i = 0; i < len; ++i) {
                Vector post = softmax(m.coef.transpose() * Xb.row(i).transpose() + m.bias);
                G.col(i) = -post;
                G(data.y[start + i], i) += 1.0;
            }
            Matrix grad_coef = Xb.transpose() * G.transpose() / static_cast<double>(len);
            Vector grad_bias = G.rowwise().mean();
            update(grad_coef, grad_bias);
        }
        if (!m.coef.allFinite() || !m.bias.allFinite())
            throw std::runtime_error("mnl: non-finite parameter detected in epoch " +
                                     std::to_string(epoch));
        if (metrics) {
            double penalty = edges ? orthogonal_penalty(*edges, *pairs) : 0.0;
            metrics->epochs.push_back({epoch, 0.0, penalty, linear_error_rate(m, data.X, data.y)});
        }
    }
}

}  // namespace

LinearLogit train_mnl(const Dataset& data, const TrainConfig& cfg, RunMetrics* metrics) {
    cfg.validate();
    require(data.size() > 0, "train_mnl: empty dataset");
    LinearLogit m{Matrix::Zero(data.feature_count(), data.num_classes),
                  Vector::Zero(data.num_classes), std::nullopt};
    mnl_epochs(data, cfg, m, nullptr, nullptr, metrics,
               [&](const Matrix& gc, const Vector& gb) {
                   m.coef += cfg.lr * gc;
                   m.bias += cfg.lr * gb;
               });
    return m;
}

LinearLogit train_corrmnl(const Dataset& data, const TaxonomyTree& tree, const TrainConfig& cfg,
                          RunMetrics* metrics) {
    cfg.validate();
    require(data.size() > 0, "train_corrmnl: empty dataset");
    require(data.num_classes <= tree.num_classes(), "train_corrmnl: label outside tree classes");

    EdgeParams edges{Matrix::Zero(tree.num_edges(), data.feature_count()), indicator_matrix(tree),
                     0.0, cfg.penalty};
    const auto pairs = ancestor_pairs(tree);
    LinearLogit m{compose_U(edges), Vector::Zero(tree.num_classes()), std::nullopt};
    mnl_epochs(data, cfg, m, &edges, &pairs, metrics,
               [&](const Matrix& gc, const Vector& gb) {
                   edges.A += cfg.lr * hier_gradient(gc, edges, pairs, false);
                   m.coef = compose_U(edges);
                   m.bias += cfg.lr * gb;
               });
    m.edges = std::move(edges);
    return m;
}

}  // namespace hcrbm
