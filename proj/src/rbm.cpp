#include "hcrbm/rbm.hpp"

namespace hcrbm {

GradientSet GradientSet::zeros_like(const RbmParams& p) {
    return {Matrix::Zero(p.W.rows(), p.W.cols()), Vector::Zero(p.b.size()), Vector::Zero(p.c.size()),
            Vector::Zero(p.d_bias.size()), Matrix::Zero(p.U.rows(), p.U.cols())};
}

void GradientSet::accumulate(const GradientSet& g, double scale) {
    W += scale * g.W;
    b += scale * g.b;
    c += scale * g.c;
    d_bias += scale * g.d_bias;
    U += scale * g.U;
}

double GradientSet::squared_norm() const {
    return W.squaredNorm() + b.squaredNorm() + c.squaredNorm() + d_bias.squaredNorm() + U.squaredNorm();
}

RbmParams init_rbm_base(int n, int d, int K, Rng& rng) {
    require(n >= 1 && d >= 1 && K >= 1, "init_rbm_base: dimensions must be positive");
    RbmParams p;
    p.W.resize(n, d);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < d; ++i) p.W(j, i) = 0.01 * rng.gaussian();
    p.b = Vector::Zero(d);
    p.c = Vector::Zero(n);
    p.d_bias = Vector::Zero(K);
    p.U = Matrix::Zero(n, K);
    return p;
}

void init_label_weights(RbmParams& p, Rng& rng) {
    for (int k = 0; k < p.class_count(); ++k)
        for (int j = 0; j < p.hidden_count(); ++j) p.U(j, k) = 0.01 * rng.gaussian();
}

double energy(const RbmParams& p, int y, const Vector& x, const Vector& h) {
    require(x.size() == p.visible_count() && h.size() == p.hidden_count(), "energy: shape mismatch");
    require(y >= 0 && y < p.class_count(), "energy: class index out of range");
    return -h.dot(p.W * x) - p.b.dot(x) - p.c.dot(h) - p.d_bias[y] - p.U.col(y).dot(h);
}

Vector class_posterior(const RbmParams& p, const Vector& x) {
    require(x.size() == p.visible_count(), "class_posterior: shape mismatch");
    Vector z = p.W * x + p.c;
    Vector score(p.class_count());
    for (int k = 0; k < p.class_count(); ++k) {
        double s = p.d_bias[k];
        for (int j = 0; j < p.hidden_count(); ++j) s += softplus(z[j] + p.U(j, k));
        score[k] = s;
    }
    return softmax(score);
}

Matrix class_posterior_batch(const RbmParams& p, const Matrix& X) {
    require(X.cols() == p.visible_count(), "class_posterior_batch: shape mismatch");
    const auto N = X.rows();
    const int n = p.hidden_count(), K = p.class_count();
    Matrix Z = (p.W * X.transpose()).colwise() + p.c;  // n x N
    Matrix score(N, K);
    for (int k = 0; k < K; ++k) {
        Matrix sp = (Z.colwise() + p.U.col(k)).unaryExpr([](double t) { return softplus(t); });
        score.col(k) = sp.colwise().sum().transpose().array() + p.d_bias[k];
    }
    Matrix post(N, K);
    for (Eigen::Index i = 0; i < N; ++i) post.row(i) = softmax(score.row(i).transpose()).transpose();
    return post;
}

Vector hidden_given_xy(const RbmParams& p, const Vector& x, int y) {
    require(x.size() == p.visible_count(), "hidden_given_xy: shape mismatch");
    require(y >= 0 && y < p.class_count(), "hidden_given_xy: class index out of range");
    Vector z = p.W * x + p.c + p.U.col(y);
    return z.unaryExpr([](double t) { return sigmoid(t); });
}

Vector visible_given_h(const RbmParams& p, const Vector& h) {
    require(h.size() == p.hidden_count(), "visible_given_h: shape mismatch");
    Vector z = p.W.transpose() * h + p.b;
    return z.unaryExpr([](double t) { return sigmoid(t); });
}

Vector label_given_h(const RbmParams& p, const Vector& h) {
    require(h.size() == p.hidden_count(), "label_given_h: shape mismatch");
    return softmax(p.U.transpose() * h + p.d_bias);
}

GradientSet cd1_gradient(const RbmParams& p, const Matrix& X, const std::vector<int>& y, Rng& rng,
                         double* recon_error) {
    const auto B = X.rows();
    require(B > 0, "cd1_gradient: empty batch");
    require(X.cols() == p.visible_count(), "cd1_gradient: shape mismatch");
    require(static_cast<Eigen::Index>(y.size()) == B, "cd1_gradient: label count mismatch");
    const int n = p.hidden_count(), K = p.class_count();

    Matrix Y0 = Matrix::Zero(K, B);
    for (Eigen::Index i = 0; i < B; ++i) {
        require(y[i] >= 0 && y[i] < K, "cd1_gradient: class index out of range");
        Y0(y[i], i) = 1.0;
    }

    // positive phase: exact hidden means given the clamped example
    Matrix Xt = X.transpose();                                    // d x B
    Matrix H0 = ((p.W * Xt + p.U * Y0).colwise() + p.c).unaryExpr([](double t) { return sigmoid(t); });

    // negative phase: sample h, reconstruct x and y as means, re-estimate h
    Matrix Hs(n, B);
    for (Eigen::Index i = 0; i < B; ++i)
        for (int j = 0; j < n; ++j) Hs(j, i) = rng.bernoulli(H0(j, i)) ? 1.0 : 0.0;
    Matrix Xr = ((p.W.transpose() * Hs).colwise() + p.b).unaryExpr([](double t) { return sigmoid(t); });
    Matrix Yr = (p.U.transpose() * Hs).colwise() + p.d_bias;      // K x B
    for (Eigen::Index i = 0; i < B; ++i) Yr.col(i) = softmax(Yr.col(i));
    Matrix H1 = ((p.W * Xr + p.U * Yr).colwise() + p.c).unaryExpr([](double t) { return sigmoid(t); });

    GradientSet g;
    g.W = (H0 * X - H1 * Xr.transpose()) / static_cast<double>(B);
    g.b = (Xt - Xr).rowwise().mean();
    g.c = (H0 - H1).rowwise().mean();
    g.d_bias = (Y0 - Yr).rowwise().mean();
    g.U = (H0 * Y0.transpose() - H1 * Yr.transpose()) / static_cast<double>(B);
    if (recon_error) *recon_error = (Xt - Xr).squaredNorm() / static_cast<double>(B);
    return g;
}

double free_energy(const RbmParams& p, const Vector& x, int y) {
    Vector z = p.W * x + p.c + p.U.col(y);
    double s = p.b.dot(x) + p.d_bias[y];
    for (int j = 0; j < p.hidden_count(); ++j) s += softplus(z[j]);
    return s;
}

namespace {

void check_enumerable(const RbmParams& p, const char* who) {
    if (p.visible_count() > 14 || p.hidden_count() > 14)
        throw std::invalid_argument(std::string(who) + ": dimensions too large for enumeration");
}

double enumerated_log_z(const RbmParams& p) {
    const int d = p.visible_count(), K = p.class_count();
    Vector terms(static_cast<Eigen::Index>(K) << d);
    Vector x(d);
    for (long mask = 0; mask < (1L << d); ++mask) {
        for (int i = 0; i < d; ++i) x[i] = (mask >> i) & 1 ? 1.0 : 0.0;
        for (int k = 0; k < K; ++k) terms[mask * K + k] = free_energy(p, x, k);
    }
    return log_sum_exp(terms);
}

}  // namespace

double exact_joint_loglik(const RbmParams& p, const Vector& x, int y) {
    check_enumerable(p, "exact_joint_loglik");
    require(x.size() == p.visible_count(), "exact_joint_loglik: shape mismatch");
    require(y >= 0 && y < p.class_count(), "exact_joint_loglik: class index out of range");
    for (Eigen::Index i = 0; i < x.size(); ++i)
        require(x[i] == 0.0 || x[i] == 1.0, "exact_joint_loglik: x must be binary");
    return free_energy(p, x, y) - enumerated_log_z(p);
}

GradientSet exact_loglik_gradient(const RbmParams& p, const Matrix& X, const std::vector<int>& y) {
    check_enumerable(p, "exact_loglik_gradient");
    const auto N = X.rows();
    require(N > 0, "exact_loglik_gradient: empty dataset");
    const int d = p.visible_count(), K = p.class_count();

    GradientSet g = GradientSet::zeros_like(p);
    for (Eigen::Index i = 0; i < N; ++i) {
        Vector x = X.row(i).transpose();
        Vector h = hidden_given_xy(p, x, y[i]);
        g.W += h * x.transpose();
        g.b += x;
        g.c += h;
        g.d_bias[y[i]] += 1.0;
        g.U.col(y[i]) += h;
    }
    double inv_n = 1.0 / static_cast<double>(N);
    g.W *= inv_n;
    g.b *= inv_n;
    g.c *= inv_n;
    g.d_bias *= inv_n;
    g.U *= inv_n;

    double log_z = enumerated_log_z(p);
    Vector x(d);
    for (long mask = 0; mask < (1L << d); ++mask) {
        for (int i = 0; i < d; ++i) x[i] = (mask >> i) & 1 ? 1.0 : 0.0;
        for (int k = 0; k < K; ++k) {
            double w = std::exp(free_energy(p, x, k) - log_z);
            Vector h = hidden_given_xy(p, x, k);
            g.W -= w * (h * x.transpose());
            g.b -= w * x;
            g.c -= w * h;
            g.d_bias[k] -= w;
            g.U.col(k) -= w * h;
        }
    }
    return g;
}

void apply_gradient(RbmParams& p, const GradientSet& g, double lr) {
    require(g.W.rows() == p.W.rows() && g.W.cols() == p.W.cols() && g.b.size() == p.b.size() &&
                g.c.size() == p.c.size() && g.d_bias.size() == p.d_bias.size() &&
                g.U.rows() == p.U.rows() && g.U.cols() == p.U.cols(),
            "apply_gradient: shape mismatch");
    if (!g.all_finite()) throw std::runtime_error("apply_gradient: non-finite gradient entries");
    p.W += lr * g.W;
    p.b += lr * g.b;
    p.c += lr * g.c;
    p.d_bias += lr * g.d_bias;
    p.U += lr * g.U;
}

double error_rate(const RbmParams& p, const Matrix& X, const std::vector<int>& y) {
    if (X.rows() == 0) return 0.0;
    Matrix post = class_posterior_batch(p, X);
    long wrong = 0;
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        if (argmax_lowest(post.row(i).transpose()) != y[i]) ++wrong;
    return static_cast<double>(wrong) / static_cast<double>(X.rows());
}

}  // namespace hcrbm
