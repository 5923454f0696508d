#include "hcrbm/harness.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace hcrbm {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string format_double(const char* fmt, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

}  // namespace

int LoadedModel::feature_count() const {
    if (rbm) return rbm->params.visible_count();
    if (linear) return linear->model.feature_count();
    const CascadeNode* root = cascade->node_for(cascade->tree.root);
    return root ? root->rbm.visible_count() : 0;
}

int LoadedModel::class_count() const {
    if (rbm) return rbm->params.class_count();
    if (linear) return linear->model.class_count();
    return cascade->tree.num_classes();
}

Vector LoadedModel::scores(const Vector& x) const {
    if (rbm) return class_posterior(rbm->params, x);
    if (linear) return linear_posterior(linear->model, x);
    return cascade_scores_soft(*cascade, x);
}

int LoadedModel::predict(const Vector& x) const {
    if (variant == Variant::cascade_hard) return cascade_predict_hard(*cascade, x);
    return argmax_lowest(scores(x));
}

LoadedModel load_model(const std::string& path) {
    LoadedModel model;
    if (fs::is_directory(path)) {
        Variant variant = Variant::cascade_soft;
        model.cascade = load_cascade_checkpoint(path, &variant);
        model.variant = variant;
        return model;
    }
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw std::runtime_error("cannot open checkpoint '" + path + "'");
    char magic[5] = {};
    probe.read(magic, 4);
    std::string tag(magic, magic + probe.gcount());
    probe.close();
    if (tag == "HRBM") {
        model.rbm = load_rbm_checkpoint(path);
        model.variant = model.rbm->edge_matrix ? Variant::hrbm : Variant::rbm;
    } else if (tag == "HMNL") {
        model.linear = load_linear_checkpoint(path);
        model.variant = model.linear->model.edges ? Variant::corrmnl : Variant::mnl;
    } else {
        throw std::runtime_error("checkpoint '" + path + "': unrecognized format");
    }
    return model;
}

void save_model(const std::string& path, const LoadedModel& model) {
    if (model.rbm) {
        if (model.rbm->edge_matrix)
            save_rbm_checkpoint(path, model.rbm->params, *model.rbm->edge_matrix, model.rbm->tree_text);
        else
            save_rbm_checkpoint(path, model.rbm->params);
    } else if (model.linear) {
        save_linear_checkpoint(path, model.linear->model, model.linear->tree_text);
    } else {
        save_cascade_checkpoint(path, *model.cascade, model.variant);
    }
}

EvalResult evaluate(const LoadedModel& model, const Dataset& test) {
    require(test.feature_count() == model.feature_count(),
            "evaluate: feature dimension mismatch (test " + std::to_string(test.feature_count()) +
                ", model " + std::to_string(model.feature_count()) + ")");
    const int K = model.class_count();
    require(test.num_classes <= K, "evaluate: test labels outside model classes");
    EvalResult r;
    r.confusion = Eigen::MatrixXi::Zero(K, K);
    long wrong = 0;
    for (int i = 0; i < test.size(); ++i) {
        int pred = model.predict(test.X.row(i).transpose());
        r.confusion(test.y[i], pred) += 1;
        if (pred != test.y[i]) ++wrong;
    }
    r.error_rate = test.size() ? static_cast<double>(wrong) / test.size() : 0.0;
    return r;
}

std::string confusion_csv(const EvalResult& r) {
    std::ostringstream out;
    out << "true_class";
    for (Eigen::Index k = 0; k < r.confusion.cols(); ++k) out << ",pred_" << k;
    out << "\n";
    for (Eigen::Index t = 0; t < r.confusion.rows(); ++t) {
        out << t;
        for (Eigen::Index k = 0; k < r.confusion.cols(); ++k) out << "," << r.confusion(t, k);
        out << "\n";
    }
    return out.str();
}

TrainOutcome run_training(const Dataset& train, const std::optional<TaxonomyTree>& tree,
                          const TrainConfig& cfg) {
    cfg.validate();
    if (variant_uses_tree(cfg.variant))
        require(tree.has_value(),
                "variant " + to_string(cfg.variant) + " requires a label taxonomy (--tree)");

    TrainOutcome out;
    out.model.variant = cfg.variant;
    auto t0 = std::chrono::steady_clock::now();
    switch (cfg.variant) {
        case Variant::rbm:
            out.model.rbm = RbmCheckpoint{train_flat_rbm(train, cfg, &out.metrics), std::nullopt, ""};
            break;
        case Variant::hrbm: {
            HcrbmModel m = train_hcrbm(train, *tree, cfg, &out.metrics);
            out.model.rbm = RbmCheckpoint{std::move(m.rbm), std::move(m.edges.A), serialize_tree(*tree)};
            break;
        }
        case Variant::mnl:
            out.model.linear = LinearCheckpoint{train_mnl(train, cfg, &out.metrics), ""};
            break;
        case Variant::corrmnl:
            out.model.linear =
                LinearCheckpoint{train_corrmnl(train, *tree, cfg, &out.metrics), serialize_tree(*tree)};
            break;
        case Variant::cascade_hard:
        case Variant::cascade_soft:
            out.model.cascade = train_cascade(train, *tree, cfg, &out.metrics);
            break;
        case Variant::hhrbm:
            out.model.cascade = train_hhrbm(train, *tree, cfg, &out.metrics);
            break;
    }
    out.metrics.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

std::string metrics_json(const TrainConfig& cfg, const RunMetrics& metrics) {
    ordered_json j;
    j["config"]["variant"] = to_string(cfg.variant);
    j["config"]["hidden"] = cfg.hidden;
    j["config"]["lr"] = cfg.lr;
    j["config"]["C"] = cfg.C;
    j["config"]["penalty"] = to_string(cfg.penalty);
    j["config"]["paper_partial_grad"] = cfg.paper_partial_grad;
    j["config"]["epochs"] = cfg.epochs;
    j["config"]["batch_size"] = cfg.batch_size;
    j["config"]["seed"] = cfg.seed;
    j["epochs"] = ordered_json::array();
    for (const auto& e : metrics.epochs)
        j["epochs"].push_back({{"epoch", e.epoch},
                               {"recon_error", e.recon_error},
                               {"penalty", e.penalty},
                               {"train_error", e.train_error}});
    if (metrics.test_error)
        j["test_error"] = *metrics.test_error;
    else
        j["test_error"] = nullptr;
    j["seconds"] = metrics.seconds;
    return j.dump(2) + "\n";
}

std::string epoch_csv(const RunMetrics& metrics) {
    std::ostringstream out;
    out << "epoch,recon_error,penalty,train_error\n";
    for (const auto& e : metrics.epochs)
        out << e.epoch << ',' << format_double("%.10g", e.recon_error) << ','
            << format_double("%.10g", e.penalty) << ',' << format_double("%.10g", e.train_error)
            << "\n";
    return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    if (auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
}

namespace {

/// central finite difference of `f` w.r.t. every coefficient of `block`
template <typename F>
double fd_block_max_error(F&& f, double* block, Eigen::Index count, const double* analytic,
                          double step) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < count; ++i) {
        double saved = block[i];
        block[i] = saved + step;
        double up = f();
        block[i] = saved - step;
        double down = f();
        block[i] = saved;
        double fd = (up - down) / (2.0 * step);
        worst = std::max(worst, std::abs(fd - analytic[i]));
    }
    return worst;
}

}  // namespace

GradCheckReport gradcheck(int n, int d, int K, std::uint64_t seed, const std::string& flip_block) {
    if (n > 4 || d > 4)
        throw std::invalid_argument("gradcheck: dims too large for enumeration (n,d <= 4)");
    require(n >= 1 && d >= 1 && K >= 2, "gradcheck: need n,d >= 1 and K >= 2");

    Rng rng(seed, 0);
    RbmParams p;
    p.W.resize(n, d);
    p.U.resize(n, K);
    p.b.resize(d);
    p.c.resize(n);
    p.d_bias.resize(K);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < d; ++i) p.W(j, i) = 0.5 * rng.gaussian();
    for (int i = 0; i < d; ++i) p.b[i] = 0.5 * rng.gaussian();
    for (int j = 0; j < n; ++j) p.c[j] = 0.5 * rng.gaussian();
    for (int k = 0; k < K; ++k) p.d_bias[k] = 0.5 * rng.gaussian();
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < K; ++k) p.U(j, k) = 0.5 * rng.gaussian();

    const int examples = 3;
    Matrix X(examples, d);
    std::vector<int> y(examples);
    for (int i = 0; i < examples; ++i) {
        for (int j = 0; j < d; ++j) X(i, j) = rng.bernoulli(0.5) ? 1.0 : 0.0;
        y[i] = static_cast<int>(rng.below(K));
    }

    GradientSet g = exact_loglik_gradient(p, X, y);
    if (!flip_block.empty()) {
        if (flip_block == "W") g.W = -g.W;
        else if (flip_block == "b") g.b = -g.b;
        else if (flip_block == "c") g.c = -g.c;
        else if (flip_block == "d") g.d_bias = -g.d_bias;
        else if (flip_block == "U") g.U = -g.U;
        else throw std::invalid_argument("gradcheck: unknown block '" + flip_block + "'");
    }

    auto objective = [&]() {
        double s = 0.0;
        for (int i = 0; i < examples; ++i) s += exact_joint_loglik(p, X.row(i).transpose(), y[i]);
        return s / examples;
    };

    GradCheckReport report;
    const double step = 1e-5, tol = 1e-6;
    report.block_errors = {
        {"W", fd_block_max_error(objective, p.W.data(), p.W.size(), g.W.data(), step)},
        {"b", fd_block_max_error(objective, p.b.data(), p.b.size(), g.b.data(), step)},
        {"c", fd_block_max_error(objective, p.c.data(), p.c.size(), g.c.data(), step)},
        {"d", fd_block_max_error(objective, p.d_bias.data(), p.d_bias.size(), g.d_bias.data(), step)},
        {"U", fd_block_max_error(objective, p.U.data(), p.U.size(), g.U.data(), step)},
    };

    // penalty gradient on a depth-3 chain, all three modes
    TaxonomyTree chain = parse_tree(
        "[edges]\nroot -> a\na -> b\nb -> leaf\n[classes]\nleaf = 0\n");
    auto pairs = ancestor_pairs(chain);
    const int width = 6;
    EdgeParams edges{Matrix(3, width), indicator_matrix(chain), 1.0, PenaltyMode::raw};
    bool clear_of_zero = false;
    while (!clear_of_zero) {
        for (int e = 0; e < 3; ++e)
            for (int j = 0; j < width; ++j) edges.A(e, j) = rng.gaussian();
        clear_of_zero = true;
        for (const auto& [nu, mu] : pairs)
            if (std::abs(edges.A.row(nu).dot(edges.A.row(mu))) < 1e-2) clear_of_zero = false;
    }
    for (PenaltyMode mode : {PenaltyMode::raw, PenaltyMode::abs, PenaltyMode::squared}) {
        edges.mode = mode;
        Matrix pg = penalty_gradient(edges, pairs);
        auto pen = [&]() { return orthogonal_penalty(edges, pairs); };
        double err = fd_block_max_error(pen, edges.A.data(), edges.A.size(), pg.data(), 1e-6);
        report.penalty_errors.emplace_back(to_string(mode), err);
    }

    // Eq. 8 child-side term: in raw mode the partial gradient row of each edge
    // must equal the sum of its ancestors' rows exactly
    edges.mode = PenaltyMode::raw;
    Matrix partial = penalty_gradient(edges, pairs, true);
    Matrix expected = Matrix::Zero(3, width);
    expected.row(1) = edges.A.row(0);
    expected.row(2) = edges.A.row(0) + edges.A.row(1);
    report.raw_child_term_error = (partial - expected).cwiseAbs().maxCoeff();

    report.pass = true;
    for (const auto& [name, err] : report.block_errors)
        if (!(err <= tol)) {
            report.pass = false;
            report.failed_block = name;
        }
    for (const auto& [name, err] : report.penalty_errors)
        if (!(err <= 1e-8)) {
            report.pass = false;
            report.failed_block = "penalty-" + name;
        }
    if (report.raw_child_term_error != 0.0) {
        report.pass = false;
        report.failed_block = "penalty-partial";
    }
    return report;
}

namespace {

std::string resolve_data_root(const ExperimentOptions& opt) {
    if (!opt.data_root.empty()) return opt.data_root;
    if (const char* env = std::getenv("HRBM_DATA_DIR"); env && *env) return env;
    return "data";
}

std::string find_tree_file(const ExperimentOptions& opt, const std::string& name) {
    if (!opt.tree_path.empty()) return opt.tree_path;
    for (const std::string candidate :
         {resolve_data_root(opt) + "/" + name, std::string("data/") + name}) {
        if (fs::exists(candidate)) return candidate;
    }
    throw std::runtime_error("taxonomy file '" + name + "' not found (looked under '" +
                             resolve_data_root(opt) + "' and 'data/'); pass --tree");
}

struct MnistData {
    Dataset train;
    Dataset test;
    TaxonomyTree tree;
};

MnistData load_mnist(const ExperimentOptions& opt) {
    std::string root = resolve_data_root(opt) + "/mnist/";
    MnistData m{load_idx_files(root + "train-images-idx3-ubyte", root + "train-labels-idx1-ubyte"),
                load_idx_files(root + "t10k-images-idx3-ubyte", root + "t10k-labels-idx1-ubyte"),
                load_tree(find_tree_file(opt, "mnist.tree"))};
    return m;
}

struct NewsData {
    Dataset train;
    Dataset test;
    TaxonomyTree tree;
};

NewsData load_20news(const ExperimentOptions& opt) {
    std::string root = resolve_data_root(opt) + "/20news/";
    NewsData m{load_table_file(root + "20newsgroups_train_binary_5000_voc.txt"),
               load_table_file(root + "20newsgroups_test_binary_5000_voc.txt"),
               load_tree(find_tree_file(opt, "20news.tree"))};
    return m;
}

/// paper hyperparameters for the MNIST protocols
TrainConfig mnist_config(Variant v, std::uint64_t seed, bool desk) {
    TrainConfig cfg;
    cfg.variant = v;
    cfg.seed = seed;
    cfg.lr = 0.1;
    cfg.epochs = desk ? 20 : 100;
    cfg.batch_size = 100;
    if (v == Variant::hhrbm)
        cfg.hidden = desk ? std::vector<int>{50, 25, 20, 20} : std::vector<int>{100, 50, 25, 20};
    else
        cfg.hidden = {desk ? 50 : 100};
    if (v == Variant::hrbm) {
        cfg.C = 0.1;
        cfg.penalty = PenaltyMode::abs;
    }
    return cfg;
}

/// paper hyperparameters for the 20 Newsgroups protocol
TrainConfig news_config(Variant v, double C, std::uint64_t seed, bool desk) {
    TrainConfig cfg;
    cfg.variant = v;
    cfg.seed = seed;
    cfg.batch_size = 100;
    if (v == Variant::hrbm) {
        cfg.hidden = {desk ? 200 : 1500};
        cfg.lr = 0.01;
        cfg.epochs = desk ? 50 : 200;
        cfg.C = C;
        cfg.penalty = PenaltyMode::abs;
    } else if (v == Variant::hhrbm) {
        cfg.hidden = desk ? std::vector<int>{200, 100, 50, 50} : std::vector<int>{1000, 500, 200, 200};
        cfg.lr = 0.1;
        cfg.epochs = desk ? 50 : 100;
    } else if (v == Variant::mnl || v == Variant::corrmnl) {
        cfg.hidden = {1};
        cfg.lr = 0.01;
        cfg.epochs = desk ? 50 : 200;
    } else {
        cfg.hidden = {desk ? 200 : 2000};
        cfg.lr = 0.1;
        cfg.epochs = desk ? 50 : 100;
    }
    return cfg;
}

double run_error(const Dataset& train, const Dataset& test, const std::optional<TaxonomyTree>& tree,
                 const TrainConfig& cfg, EvalResult* detail = nullptr) {
    TrainOutcome out = run_training(train, tree, cfg);
    EvalResult r = evaluate(out.model, test);
    if (detail) *detail = r;
    return r.error_rate;
}

std::string fmt_err(double v) { return format_double("%.6f", v); }

const std::vector<Variant> kTable1Variants = {
    Variant::rbm,          Variant::hrbm, Variant::cascade_hard, Variant::cascade_soft,
    Variant::hhrbm,        Variant::mnl,  Variant::corrmnl,
};

std::string experiment_table1(const ExperimentOptions& opt) {
    MnistData mnist = load_mnist(opt);
    Dataset train = balanced_sample_total(mnist.train, 5000, 1);
    Dataset test = balanced_sample_total(mnist.test, 1000, 1);

    std::ostringstream out;
    out << "variant,seed,test_error\n";
    auto seeds = opt.seeds;
    std::sort(seeds.begin(), seeds.end());
    for (Variant v : kTable1Variants) {
        double sum = 0.0;
        for (auto seed : seeds) {
            TrainConfig cfg = mnist_config(v, seed, opt.desk_scale);
            double err = run_error(train, test, mnist.tree, cfg);
            sum += err;
            out << to_string(v) << ',' << seed << ',' << fmt_err(err) << "\n";
        }
        out << to_string(v) << ",mean," << fmt_err(sum / seeds.size()) << "\n";
    }
    return out.str();
}

std::string experiment_fig4a(const ExperimentOptions& opt) {
    MnistData mnist = load_mnist(opt);
    Dataset test = balanced_sample_total(mnist.test, 1000, 1);

    std::ostringstream out;
    out << "train_size,variant,seed,test_error\n";
    auto seeds = opt.seeds;
    std::sort(seeds.begin(), seeds.end());
    for (int size : {1000, 2000, 3000, 4000, 5000}) {
        Dataset train = balanced_sample_total(mnist.train, size, 1);
        for (Variant v : {Variant::rbm, Variant::hrbm}) {
            double sum = 0.0;
            for (auto seed : seeds) {
                double err = run_error(train, test, mnist.tree, mnist_config(v, seed, opt.desk_scale));
                sum += err;
                out << size << ',' << to_string(v) << ',' << seed << ',' << fmt_err(err) << "\n";
            }
            out << size << ',' << to_string(v) << ",mean," << fmt_err(sum / seeds.size()) << "\n";
        }
    }
    return out.str();
}

std::string experiment_fig4b(const ExperimentOptions& opt) {
    MnistData mnist = load_mnist(opt);
    Dataset test = balanced_sample_total(mnist.test, 1000, 1);

    std::ostringstream out;
    out << "rare_count,variant,rare_digit,seed,test_error,rare_class_error\n";
    auto seeds = opt.seeds;
    std::sort(seeds.begin(), seeds.end());
    for (int rare : {10, 50, 100, 200, 500}) {
        for (Variant v : {Variant::rbm, Variant::hrbm}) {
            double sum_all = 0.0, sum_rare = 0.0;
            int runs = 0;
            for (int digit = 0; digit < 10; ++digit) {
                Dataset train = rare_class_sample(mnist.train, digit, rare, 500, 1);
                for (auto seed : seeds) {
                    EvalResult detail;
                    double err = run_error(train, test, mnist.tree,
                                           mnist_config(v, seed, opt.desk_scale), &detail);
                    double row_total = detail.confusion.row(digit).sum();
                    double rare_err =
                        row_total > 0 ? 1.0 - detail.confusion(digit, digit) / row_total : 0.0;
                    sum_all += err;
                    sum_rare += rare_err;
                    ++runs;
                    out << rare << ',' << to_string(v) << ',' << digit << ',' << seed << ','
                        << fmt_err(err) << ',' << fmt_err(rare_err) << "\n";
                }
            }
            out << rare << ',' << to_string(v) << ",mean,mean," << fmt_err(sum_all / runs) << ','
                << fmt_err(sum_rare / runs) << "\n";
        }
    }
    return out.str();
}

std::string experiment_table2(const ExperimentOptions& opt) {
    NewsData news = load_20news(opt);

    std::ostringstream out;
    out << "variant,C,seed,test_error\n";
    auto seeds = opt.seeds;
    std::sort(seeds.begin(), seeds.end());

    struct Setting {
        Variant v;
        double C;
    };
    const std::vector<Setting> settings = {
        {Variant::rbm, 0.0},          {Variant::cascade_hard, 0.0}, {Variant::cascade_soft, 0.0},
        {Variant::hhrbm, 0.0},        {Variant::mnl, 0.0},          {Variant::corrmnl, 0.0},
        {Variant::hrbm, 0.0},         {Variant::hrbm, 0.1},
    };
    for (const auto& s : settings) {
        double sum = 0.0;
        for (auto seed : seeds) {
            TrainConfig cfg = news_config(s.v, s.C, seed, opt.desk_scale);
            double err = run_error(news.train, news.test, news.tree, cfg);
            sum += err;
            out << to_string(s.v) << ',' << s.C << ',' << seed << ',' << fmt_err(err) << "\n";
        }
        out << to_string(s.v) << ',' << s.C << ",mean," << fmt_err(sum / seeds.size()) << "\n";
    }
    return out.str();
}

}  // namespace

std::vector<std::string> experiment_names() { return {"table1", "fig4a", "fig4b", "table2"}; }

std::string run_experiment(const std::string& name, const ExperimentOptions& opt) {
    require(!opt.seeds.empty(), "experiment: no seeds given");
    if (name == "table1") return experiment_table1(opt);
    if (name == "fig4a") return experiment_fig4a(opt);
    if (name == "fig4b") return experiment_fig4b(opt);
    if (name == "table2") return experiment_table2(opt);
    std::string names;
    for (const auto& n : experiment_names()) names += (names.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown protocol '" + name + "' (available: " + names + ")");
}

}  // namespace hcrbm
