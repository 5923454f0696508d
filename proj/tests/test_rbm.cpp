#include <doctest.h>

#include "hcrbm/rbm.hpp"
#include "oracles.hpp"

using namespace hcrbm;

TEST_CASE("energy matches a hand computation") {
    RbmParams p;
    p.W.resize(2, 3);
    p.W << 1, 0, -1,
           0, 2, 0;
    p.b.resize(3);
    p.b << 0.5, -0.5, 1;
    p.c.resize(2);
    p.c << 0.25, -0.25;
    p.d_bias.resize(2);
    p.d_bias << 0.1, -0.1;
    p.U.resize(2, 2);
    p.U << 1, -1,
           2, 0;
    Vector x(3), h(2);
    x << 1, 1, 0;
    h << 1, 1;
    // Wx = (1, 2) so h'Wx = 3; b'x = 0; c'h = 0; d_0 = 0.1; (U'h)_0 = 3
    double expected = -3.0 - 0.0 - 0.0 - 0.1 - 3.0;
    CHECK(energy(p, 0, x, h) == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("class_posterior agrees with hidden-state enumeration") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        int n = 1 + static_cast<int>(rng.below(6));
        int d = 1 + static_cast<int>(rng.below(5));
        int K = 2 + static_cast<int>(rng.below(3));
        RbmParams p = oracle::random_params(n, d, K, rng);
        Vector x = oracle::random_binary_vector(d, rng);
        Vector fast = class_posterior(p, x);
        Vector slow = oracle::enum_posterior(p, x);
        CHECK((fast - slow).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(fast.sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("class_posterior_batch equals per-row posterior") {
    Rng rng(12);
    RbmParams p = oracle::random_params(5, 7, 4, rng);
    Matrix X(6, 7);
    for (int i = 0; i < 6; ++i) X.row(i) = oracle::random_binary_vector(7, rng).transpose();
    Matrix P = class_posterior_batch(p, X);
    REQUIRE(P.rows() == 6);
    REQUIRE(P.cols() == 4);
    for (int i = 0; i < 6; ++i) {
        Vector one = class_posterior(p, X.row(i).transpose());
        CHECK((P.row(i).transpose() - one).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("conditionals match enumeration and closed forms") {
    Rng rng(13);
    RbmParams p = oracle::random_params(4, 5, 3, rng);
    Vector x = oracle::random_binary_vector(5, rng);

    Vector hm = hidden_given_xy(p, x, 1);
    Vector hm_enum = oracle::enum_hidden_mean(p, x, 1);
    CHECK((hm - hm_enum).cwiseAbs().maxCoeff() < 1e-12);

    Vector h = oracle::random_binary_vector(4, rng);
    Vector xv = visible_given_h(p, h);
    for (int i = 0; i < 5; ++i)
        CHECK(xv[i] == doctest::Approx(sigmoid(p.b[i] + p.W.col(i).dot(h))).epsilon(1e-14));

    Vector yv = label_given_h(p, h);
    Vector logits = p.d_bias + p.U.transpose() * h;
    CHECK((yv - softmax(logits)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(yv.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("free_energy equals the enumerated log score") {
    Rng rng(14);
    RbmParams p = oracle::random_params(6, 4, 3, rng);
    Vector x = oracle::random_binary_vector(4, rng);
    for (int k = 0; k < 3; ++k)
        CHECK(free_energy(p, x, k) ==
              doctest::Approx(oracle::enum_log_score(p, x, k)).epsilon(1e-12));
}

TEST_CASE("exact_joint_loglik matches full enumeration") {
    Rng rng(15);
    RbmParams p = oracle::random_params(4, 4, 3, rng);
    for (int trial = 0; trial < 5; ++trial) {
        Vector x = oracle::random_binary_vector(4, rng);
        int y = static_cast<int>(rng.below(3));
        CHECK(exact_joint_loglik(p, x, y) ==
              doctest::Approx(oracle::enum_joint_loglik(p, x, y)).epsilon(1e-12));
    }
}

TEST_CASE("exact_joint_loglik refuses oversized or non-binary input") {
    Rng rng(16);
    RbmParams p = oracle::random_params(15, 4, 2, rng);
    Vector x = oracle::random_binary_vector(4, rng);
    CHECK_THROWS_AS(exact_joint_loglik(p, x, 0), std::invalid_argument);

    RbmParams q = oracle::random_params(3, 3, 2, rng);
    Vector bad(3);
    bad << 0.5, 0, 1;
    CHECK_THROWS_AS(exact_joint_loglik(q, bad, 0), std::invalid_argument);
}

TEST_CASE("exact_loglik_gradient passes finite differences") {
    Rng rng(17);
    RbmParams p = oracle::random_params(3, 3, 3, rng);
    Matrix X(2, 3);
    X.row(0) = oracle::random_binary_vector(3, rng).transpose();
    X.row(1) = oracle::random_binary_vector(3, rng).transpose();
    std::vector<int> y = {0, 2};
    GradientSet g = exact_loglik_gradient(p, X, y);
    auto obj = [&]() {
        return 0.5 * (exact_joint_loglik(p, X.row(0).transpose(), 0) +
                      exact_joint_loglik(p, X.row(1).transpose(), 2));
    };
    CHECK(oracle::fd_max_error(obj, p.W.data(), p.W.size(), g.W.data(), 1e-5) < 1e-7);
    CHECK(oracle::fd_max_error(obj, p.U.data(), p.U.size(), g.U.data(), 1e-5) < 1e-7);
    CHECK(oracle::fd_max_error(obj, p.b.data(), p.b.size(), g.b.data(), 1e-5) < 1e-7);
    CHECK(oracle::fd_max_error(obj, p.c.data(), p.c.size(), g.c.data(), 1e-5) < 1e-7);
    CHECK(oracle::fd_max_error(obj, p.d_bias.data(), p.d_bias.size(), g.d_bias.data(), 1e-5) <
          1e-7);
}

TEST_CASE("cd1_gradient is deterministic in the rng state") {
    Rng rng(18);
    RbmParams p = oracle::random_params(4, 6, 3, rng);
    Matrix X(3, 6);
    for (int i = 0; i < 3; ++i) X.row(i) = oracle::random_binary_vector(6, rng).transpose();
    std::vector<int> y = {0, 1, 2};

    Rng a(5, 1), b(5, 1), c(6, 1);
    double ra = 0, rb = 0, rc = 0;
    GradientSet ga = cd1_gradient(p, X, y, a, &ra);
    GradientSet gb = cd1_gradient(p, X, y, b, &rb);
    GradientSet gc = cd1_gradient(p, X, y, c, &rc);
    CHECK((ga.W == gb.W));
    CHECK((ga.U == gb.U));
    CHECK((ga.b == gb.b));
    CHECK((ga.c == gb.c));
    CHECK((ga.d_bias == gb.d_bias));
    CHECK(ra == rb);
    CHECK((ga.W != gc.W));
    CHECK(ra > 0.0);
}

TEST_CASE("cd1_gradient expectation vanishes near a maximum-likelihood fit") {
    // fit tiny exact model, then check the averaged CD-1 update is near zero
    Matrix X(2, 3);
    X << 1, 0, 1,
         0, 1, 0;
    std::vector<int> y = {0, 1};
    Rng init(21, 0);
    RbmParams p = oracle::random_params(2, 3, 2, init, 0.1);
    for (int step = 0; step < 3000; ++step) {
        GradientSet g = exact_loglik_gradient(p, X, y);
        apply_gradient(p, g, 0.5);
    }
    // the fit should make the training pairs far more likely than chance
    CHECK(exact_joint_loglik(p, X.row(0).transpose(), 0) > std::log(0.2));

    Rng rng(22, 1);
    GradientSet sum = GradientSet::zeros_like(p);
    const int draws = 20000;
    for (int i = 0; i < draws; ++i) {
        GradientSet g = cd1_gradient(p, X, y, rng);
        sum.accumulate(g, 1.0 / draws);
    }
    double norm = std::sqrt(sum.squared_norm());
    CHECK(norm < 0.05);
}

TEST_CASE("apply_gradient rejects non-finite gradients") {
    Rng rng(23);
    RbmParams p = oracle::random_params(2, 2, 2, rng);
    GradientSet g = GradientSet::zeros_like(p);
    g.W(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(apply_gradient(p, g, 0.1), std::runtime_error);
}

TEST_CASE("uniform posterior predicts the lowest class index") {
    RbmParams p;
    p.W = Matrix::Zero(3, 4);
    p.U = Matrix::Zero(3, 5);
    p.b = Vector::Zero(4);
    p.c = Vector::Zero(3);
    p.d_bias = Vector::Zero(5);
    Vector x(4);
    x << 1, 0, 1, 0;
    Vector post = class_posterior(p, x);
    CHECK(post.maxCoeff() == doctest::Approx(0.2));
    CHECK(argmax_lowest(post) == 0);
}

TEST_CASE("error_rate counts argmax mismatches") {
    RbmParams p;
    p.W = Matrix::Zero(2, 2);
    p.b = Vector::Zero(2);
    p.c = Vector::Zero(2);
    p.d_bias.resize(3);
    p.d_bias << 0, 1, -1;  // always predicts class 1
    p.U = Matrix::Zero(2, 3);
    Matrix X = Matrix::Zero(4, 2);
    std::vector<int> y = {1, 1, 0, 2};
    CHECK(error_rate(p, X, y) == doctest::Approx(0.5));
}
