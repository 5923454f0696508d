#pragma once

#include <vector>

#include "hcrbm/common.hpp"
#include "hcrbm/rng.hpp"

namespace hcrbm {

/// The five parameter blocks of a classification RBM with n hidden units,
/// d visible units and K classes.
struct RbmParams {
    Matrix W;       // n x d, hidden-visible weights
    Vector b;       // d, visible bias
    Vector c;       // n, hidden bias
    Vector d_bias;  // K, class bias
    Matrix U;       // n x K, hidden-label weights

    int hidden_count() const { return static_cast<int>(W.rows()); }
    int visible_count() const { return static_cast<int>(W.cols()); }
    int class_count() const { return static_cast<int>(U.cols()); }
    bool all_finite() const {
        return W.allFinite() && b.allFinite() && c.allFinite() && d_bias.allFinite() && U.allFinite();
    }
};

/// Log-likelihood gradient blocks, ascent orientation, shapes as RbmParams.
struct GradientSet {
    Matrix W;
    Vector b;
    Vector c;
    Vector d_bias;
    Matrix U;

    static GradientSet zeros_like(const RbmParams& p);
    void accumulate(const GradientSet& g, double scale = 1.0);
    double squared_norm() const;
    bool all_finite() const {
        return W.allFinite() && b.allFinite() && c.allFinite() && d_bias.allFinite() && U.allFinite();
    }
};

/// W ~ N(0, 0.01^2) drawn row by row; biases and U zero.
RbmParams init_rbm_base(int n, int d, int K, Rng& rng);

/// U ~ N(0, 0.01^2) drawn column by column (flat models only; hierarchical
/// models compose U from edge parameters drawn at the same stream position).
void init_label_weights(RbmParams& p, Rng& rng);

/// Energy of a joint configuration (y one-hot, h binary).
double energy(const RbmParams& p, int y, const Vector& x, const Vector& h);

/// Exact closed-form p(y|x), computed in log space.
Vector class_posterior(const RbmParams& p, const Vector& x);

/// Row i of the result is the posterior for row i of X.
Matrix class_posterior_batch(const RbmParams& p, const Matrix& X);

Vector hidden_given_xy(const RbmParams& p, const Vector& x, int y);
Vector visible_given_h(const RbmParams& p, const Vector& h);
Vector label_given_h(const RbmParams& p, const Vector& h);

/// One step of contrastive divergence over a batch (rows of X are examples).
/// Hidden samples are drawn example-major from `rng`. If recon_error is given
/// it receives the mean squared reconstruction norm of the batch.
GradientSet cd1_gradient(const RbmParams& p, const Matrix& X, const std::vector<int>& y, Rng& rng,
                         double* recon_error = nullptr);

/// Negative free energy b.x + d_y + sum_j softplus(c_j + U_jy + (Wx)_j);
/// equals log p(x, y) up to the -log Z constant.
double free_energy(const RbmParams& p, const Vector& x, int y);

/// log p(x, y) by full enumeration; requires binary x and n, d <= 14.
double exact_joint_loglik(const RbmParams& p, const Vector& x, int y);

/// Exact gradient of the mean joint log-likelihood over a small dataset,
/// computed from enumerated model expectations.
GradientSet exact_loglik_gradient(const RbmParams& p, const Matrix& X, const std::vector<int>& y);

/// Theta <- Theta + lr * grad (ascent), all five blocks.
void apply_gradient(RbmParams& p, const GradientSet& g, double lr);

/// Error rate of argmax-posterior prediction over a labeled set.
double error_rate(const RbmParams& p, const Matrix& X, const std::vector<int>& y);

}  // namespace hcrbm
