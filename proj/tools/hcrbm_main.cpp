#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "hcrbm/harness.hpp"

namespace {

using namespace hcrbm;

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        size_t used = 0;
        int v = std::stoi(item, &used);
        require(used == item.size(), "bad integer list entry '" + item + "'");
        out.push_back(v);
    }
    require(!out.empty(), "empty integer list");
    return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> out;
    for (int v : parse_int_list(text)) {
        require(v >= 0, "seeds must be non-negative");
        out.push_back(static_cast<std::uint64_t>(v));
    }
    return out;
}

struct DataArgs {
    std::string data;
    std::string labels;
    std::string format = "table";
};

void add_data_options(CLI::App* cmd, DataArgs& a, const char* what) {
    cmd->add_option("--data", a.data, std::string(what) + " features (idx) or table file")->required();
    cmd->add_option("--labels", a.labels, std::string(what) + " labels (idx format only)");
    cmd->add_option("--format", a.format, "input format")->check(CLI::IsMember({"idx", "table"}));
}

Dataset load_data(const DataArgs& a) {
    if (a.format == "idx") {
        require(!a.labels.empty(), "idx format needs --labels alongside --data");
        return load_idx_files(a.data, a.labels);
    }
    if (!a.labels.empty())
        std::cerr << "warning: --labels is ignored for table format (labels are in the table)\n";
    return load_table_file(a.data);
}

std::string csv_sibling(const std::string& json_path) {
    std::filesystem::path p(json_path);
    p.replace_extension(".csv");
    return p.string();
}

int cmd_train(const DataArgs& train_args, const DataArgs& test_args, bool have_test,
              const std::string& variant_name, const std::string& tree_path,
              const std::string& hidden_list, const std::string& penalty_name, TrainConfig cfg,
              const std::string& model_out, const std::string& metrics_out) {
    cfg.variant = variant_from_name(variant_name);
    cfg.penalty = penalty_mode_from_name(penalty_name);
    cfg.hidden = parse_int_list(hidden_list);

    std::optional<TaxonomyTree> tree;
    if (!tree_path.empty()) {
        if (!variant_uses_tree(cfg.variant))
            std::cerr << "warning: variant " << to_string(cfg.variant)
                      << " does not use a taxonomy; --tree ignored\n";
        else
            tree = load_tree(tree_path);
    }

    Dataset train = load_data(train_args);
    TrainOutcome out = run_training(train, tree, cfg);
    for (const auto& e : out.metrics.epochs)
        std::cout << "epoch " << e.epoch << " recon_error=" << e.recon_error
                  << " penalty=" << e.penalty << " train_error=" << e.train_error << "\n";

    if (have_test) {
        Dataset test = load_data(test_args);
        EvalResult r = evaluate(out.model, test);
        out.metrics.test_error = r.error_rate;
        std::cout << "test_error=" << r.error_rate << "\n";
    }

    save_model(model_out, out.model);
    write_text_file(metrics_out, metrics_json(cfg, out.metrics));
    write_text_file(csv_sibling(metrics_out), epoch_csv(out.metrics));
    std::cout << "model written to " << model_out << "\n";
    std::cout << "metrics written to " << metrics_out << " and " << csv_sibling(metrics_out) << "\n";
    return 0;
}

int cmd_eval(const std::string& model_path, const DataArgs& data_args,
             const std::string& metrics_out) {
    LoadedModel model = load_model(model_path);
    Dataset test = load_data(data_args);
    EvalResult r = evaluate(model, test);
    std::cout << "error_rate=" << r.error_rate << "\n";
    if (!metrics_out.empty()) {
        write_text_file(metrics_out, confusion_csv(r));
        std::cout << "confusion matrix written to " << metrics_out << "\n";
    }
    return 0;
}

int cmd_gradcheck(int n, int d, int K, std::uint64_t seed, const std::string& flip_block) {
    GradCheckReport report = gradcheck(n, d, K, seed, flip_block);
    for (const auto& [name, err] : report.block_errors)
        std::cout << "block " << name << ": max_abs_err=" << err << "\n";
    for (const auto& [name, err] : report.penalty_errors)
        std::cout << "penalty " << name << ": max_abs_err=" << err << "\n";
    std::cout << "penalty partial child-term: max_abs_err=" << report.raw_child_term_error << "\n";
    if (report.pass) {
        std::cout << "gradcheck PASS\n";
        return 0;
    }
    std::cout << "gradcheck FAIL (" << report.failed_block << ")\n";
    return 1;
}

int cmd_experiment(const std::string& protocol, const std::string& seed_list,
                   const ExperimentOptions& base, const std::string& out_path) {
    ExperimentOptions opt = base;
    opt.seeds = parse_seed_list(seed_list);
    std::string csv = run_experiment(protocol, opt);
    if (out_path == "-") {
        std::cout << csv;
    } else {
        std::string path = out_path.empty() ? protocol + ".csv" : out_path;
        write_text_file(path, csv);
        std::cout << "results written to " << path << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"classification RBM with hierarchical label prior"};
    app.require_subcommand(1);

    // train
    auto* train = app.add_subcommand("train", "train a model and write a checkpoint");
    DataArgs train_args, test_args;
    std::string variant_name = "hrbm", tree_path, hidden_list = "100", penalty_name = "abs";
    std::string model_out = "model.out", metrics_out = "metrics.json";
    TrainConfig cfg;
    add_data_options(train, train_args, "training");
    train->add_option("--test-data", test_args.data, "held-out features");
    train->add_option("--test-labels", test_args.labels, "held-out labels (idx format only)");
    train->add_option("--variant", variant_name, "model variant")
        ->check(CLI::IsMember({"rbm", "hrbm", "mnl", "corrmnl", "cascade-hard", "cascade-soft", "hhrbm"}));
    train->add_option("--tree", tree_path, "label taxonomy file");
    train->add_option("--hidden", hidden_list, "hidden layer sizes, comma separated");
    train->add_option("--lr", cfg.lr, "learning rate");
    train->add_option("--C", cfg.C, "orthogonality penalty weight");
    train->add_option("--penalty", penalty_name, "penalty mode")
        ->check(CLI::IsMember({"abs", "raw", "squared"}));
    train->add_flag("--paper-partial-grad", cfg.paper_partial_grad,
                    "use the one-sided penalty gradient");
    train->add_option("--epochs", cfg.epochs, "training epochs");
    train->add_option("--batch-size", cfg.batch_size, "minibatch size");
    train->add_option("--seed", cfg.seed, "RNG seed");
    train->add_option("--model-out", model_out, "checkpoint path (directory for cascades)");
    train->add_option("--metrics-out", metrics_out, "metrics JSON path (CSV written alongside)");

    // eval
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    std::string model_path, eval_metrics_out;
    DataArgs eval_args;
    eval->add_option("--model", model_path, "checkpoint path")->required();
    add_data_options(eval, eval_args, "evaluation");
    eval->add_option("--metrics-out", eval_metrics_out, "write the confusion matrix CSV here");

    // gradcheck
    auto* grad = app.add_subcommand("gradcheck", "finite-difference check of the exact gradients");
    int gc_n = 3, gc_d = 3, gc_k = 3;
    std::uint64_t gc_seed = 1;
    std::string flip_block;
    grad->add_option("--hidden", gc_n, "hidden units (<= 4)");
    grad->add_option("--visible", gc_d, "visible units (<= 4)");
    grad->add_option("--classes", gc_k, "classes");
    grad->add_option("--seed", gc_seed, "RNG seed");
    grad->add_option("--flip-block", flip_block, "negate one analytic block to prove sensitivity");

    // experiment
    auto* exp = app.add_subcommand("experiment", "run a paper protocol end to end");
    std::string protocol, seed_list = "1,2,3", exp_out;
    ExperimentOptions exp_opt;
    exp->add_option("protocol", protocol, "one of: table1, fig4a, fig4b, table2")->required();
    exp->add_option("--seeds", seed_list, "training seeds, comma separated");
    exp->add_flag("--desk-scale", exp_opt.desk_scale, "shrink hidden sizes and epochs for quick runs");
    exp->add_option("--data", exp_opt.data_root, "dataset root (default $HRBM_DATA_DIR or ./data)");
    exp->add_option("--tree", exp_opt.tree_path, "taxonomy file override");
    exp->add_option("--out", exp_out, "output CSV path ('-' for stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) {
            test_args.format = train_args.format;
            return cmd_train(train_args, test_args, !test_args.data.empty(), variant_name,
                             tree_path, hidden_list, penalty_name, cfg, model_out, metrics_out);
        }
        if (eval->parsed()) return cmd_eval(model_path, eval_args, eval_metrics_out);
        if (grad->parsed()) return cmd_gradcheck(gc_n, gc_d, gc_k, gc_seed, flip_block);
        if (exp->parsed()) return cmd_experiment(protocol, seed_list, exp_opt, exp_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
