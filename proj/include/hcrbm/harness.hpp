#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "hcrbm/checkpoint.hpp"

namespace hcrbm {

/// A trained or loaded model of any variant, with a uniform predict surface.
struct LoadedModel {
    Variant variant = Variant::rbm;
    std::optional<RbmCheckpoint> rbm;       // rbm / hrbm
    std::optional<CascadeModel> cascade;    // cascade-hard / cascade-soft / hhrbm
    std::optional<LinearCheckpoint> linear; // mnl / corrmnl

    int feature_count() const;
    int class_count() const;
    /// class posterior (rbm/linear) or soft path scores (cascades)
    Vector scores(const Vector& x) const;
    /// argmax of scores, except cascade-hard which routes by argmax per node
    int predict(const Vector& x) const;
};

/// Detect the checkpoint kind (cascade directory, HRBM or HMNL file).
LoadedModel load_model(const std::string& path);
void save_model(const std::string& path, const LoadedModel& model);

struct EvalResult {
    double error_rate = 0.0;
    Eigen::MatrixXi confusion;  // rows = true class, cols = predicted
};

EvalResult evaluate(const LoadedModel& model, const Dataset& test);

std::string confusion_csv(const EvalResult& r);

/// Train the configured variant; hierarchical variants require a tree.
struct TrainOutcome {
    LoadedModel model;
    RunMetrics metrics;
};

TrainOutcome run_training(const Dataset& train, const std::optional<TaxonomyTree>& tree,
                          const TrainConfig& cfg);

/// {config, epochs, test_error, seconds} with the full effective config.
std::string metrics_json(const TrainConfig& cfg, const RunMetrics& metrics);
/// epoch,recon_error,penalty,train_error rows; byte-stable across runs
std::string epoch_csv(const RunMetrics& metrics);
void write_text_file(const std::string& path, const std::string& content);

/// Exact-gradient and penalty-gradient finite-difference checks; flip_block
/// (one of W b c d U) negates that analytic block to demonstrate detection.
struct GradCheckReport {
    std::vector<std::pair<std::string, double>> block_errors;  // per-block max abs error
    std::vector<std::pair<std::string, double>> penalty_errors;  // per-mode max abs error
    double raw_child_term_error = 0.0;  // symbolic Eq. 8 comparison on a chain
    bool pass = false;
    std::string failed_block;
};

GradCheckReport gradcheck(int n, int d, int K, std::uint64_t seed, const std::string& flip_block = "");

/// Experiment protocols (table1, fig4a, fig4b, table2); rows as CSV text.
struct ExperimentOptions {
    std::vector<std::uint64_t> seeds{1, 2, 3};
    bool desk_scale = false;
    std::string data_root;   // falls back to $HRBM_DATA_DIR, then "data"
    std::string tree_path;   // optional override
};

std::vector<std::string> experiment_names();
std::string run_experiment(const std::string& name, const ExperimentOptions& opt);

}  // namespace hcrbm
