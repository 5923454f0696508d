#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hcrbm/harness.hpp"

namespace py = pybind11;
using namespace hcrbm;

namespace {

Dataset make_dataset(Matrix X, std::vector<int> y) {
    require(X.rows() == static_cast<Eigen::Index>(y.size()),
            "Dataset: X rows must match the label count");
    Dataset d;
    d.X = std::move(X);
    d.y = std::move(y);
    for (int label : d.y) {
        require(label >= 0, "Dataset: labels must be non-negative");
        d.num_classes = std::max(d.num_classes, label + 1);
    }
    d.provenance = "python";
    return d;
}

py::dict metrics_dict(const RunMetrics& m) {
    py::list epochs;
    for (const auto& e : m.epochs) {
        py::dict row;
        row["epoch"] = e.epoch;
        row["recon_error"] = e.recon_error;
        row["penalty"] = e.penalty;
        row["train_error"] = e.train_error;
        epochs.append(row);
    }
    py::dict out;
    out["epochs"] = epochs;
    out["test_error"] = m.test_error ? py::cast(*m.test_error) : py::none();
    out["seconds"] = m.seconds;
    return out;
}

EdgeParams edges_from(const Matrix& A, const TaxonomyTree& tree, const std::string& mode) {
    require(A.rows() == tree.num_edges(), "edge matrix must have one row per tree edge");
    return {A, indicator_matrix(tree), 0.0, penalty_mode_from_name(mode)};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "classification RBM with a hierarchical prior over class labels";

    py::class_<TaxonomyTree>(m, "Tree")
        .def_static("parse", &parse_tree, py::arg("text"))
        .def_static("load", &load_tree, py::arg("path"))
        .def_static("star", &star_tree, py::arg("num_classes"))
        .def_property_readonly("num_nodes", &TaxonomyTree::num_nodes)
        .def_property_readonly("num_edges", &TaxonomyTree::num_edges)
        .def_property_readonly("num_classes", &TaxonomyTree::num_classes)
        .def("serialize", [](const TaxonomyTree& t) { return serialize_tree(t); })
        .def("path_edges", [](const TaxonomyTree& t, int cls) { return path_edges(t, cls); },
             py::arg("cls"))
        .def("__repr__", [](const TaxonomyTree& t) {
            return "<Tree nodes=" + std::to_string(t.num_nodes()) +
                   " classes=" + std::to_string(t.num_classes()) + ">";
        });

    py::class_<Dataset>(m, "Dataset")
        .def(py::init(&make_dataset), py::arg("X"), py::arg("y"))
        .def_property_readonly("X", [](const Dataset& d) { return d.X; })
        .def_property_readonly("y", [](const Dataset& d) { return d.y; })
        .def_readonly("num_classes", &Dataset::num_classes)
        .def_readonly("provenance", &Dataset::provenance)
        .def("__len__", &Dataset::size)
        .def("__repr__", [](const Dataset& d) {
            return "<Dataset n=" + std::to_string(d.size()) +
                   " d=" + std::to_string(d.feature_count()) +
                   " classes=" + std::to_string(d.num_classes) + ">";
        });

    m.def("load_idx_files", &load_idx_files, py::arg("images_path"), py::arg("labels_path"));
    m.def("load_table_file", &load_table_file, py::arg("path"), py::arg("label_first") = false);
    m.def("load_table", &load_table, py::arg("text"), py::arg("label_first") = false);
    m.def("save_table", &save_table, py::arg("data"));
    m.def("balanced_sample", &balanced_sample, py::arg("data"), py::arg("per_class"),
          py::arg("seed"));
    m.def("balanced_sample_total", &balanced_sample_total, py::arg("data"), py::arg("total"),
          py::arg("seed"));
    m.def("rare_class_sample", &rare_class_sample, py::arg("data"), py::arg("rare_class"),
          py::arg("rare_count"), py::arg("other_count"), py::arg("seed"));

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_property(
            "variant", [](const TrainConfig& c) { return to_string(c.variant); },
            [](TrainConfig& c, const std::string& s) { c.variant = variant_from_name(s); })
        .def_property(
            "penalty", [](const TrainConfig& c) { return to_string(c.penalty); },
            [](TrainConfig& c, const std::string& s) { c.penalty = penalty_mode_from_name(s); })
        .def_readwrite("hidden", &TrainConfig::hidden)
        .def_readwrite("lr", &TrainConfig::lr)
        .def_readwrite("C", &TrainConfig::C)
        .def_readwrite("paper_partial_grad", &TrainConfig::paper_partial_grad)
        .def_readwrite("epochs", &TrainConfig::epochs)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("seed", &TrainConfig::seed);

    py::class_<LoadedModel>(m, "Model")
        .def_property_readonly("variant",
                               [](const LoadedModel& mdl) { return to_string(mdl.variant); })
        .def_property_readonly("feature_count", &LoadedModel::feature_count)
        .def_property_readonly("class_count", &LoadedModel::class_count)
        .def("scores", &LoadedModel::scores, py::arg("x"),
             "class probabilities for one example")
        .def("predict", &LoadedModel::predict, py::arg("x"))
        .def("predict_batch",
             [](const LoadedModel& mdl, const Matrix& X) {
                 std::vector<int> out(X.rows());
                 for (Eigen::Index i = 0; i < X.rows(); ++i)
                     out[i] = mdl.predict(X.row(i).transpose());
                 return out;
             },
             py::arg("X"))
        .def("save", [](const LoadedModel& mdl, const std::string& path) { save_model(path, mdl); },
             py::arg("path"))
        .def("__repr__", [](const LoadedModel& mdl) {
            return "<Model variant=" + to_string(mdl.variant) + ">";
        });

    m.def(
        "train",
        [](const Dataset& data, const TrainConfig& cfg, const std::optional<TaxonomyTree>& tree) {
            TrainOutcome out = run_training(data, tree, cfg);
            return py::make_tuple(std::move(out.model), metrics_dict(out.metrics));
        },
        py::arg("data"), py::arg("config"), py::arg("tree") = py::none(),
        "train a model; returns (model, metrics)");

    m.def("load_model", &load_model, py::arg("path"));

    m.def(
        "evaluate",
        [](const LoadedModel& mdl, const Dataset& test) {
            EvalResult r = evaluate(mdl, test);
            return py::make_tuple(r.error_rate, r.confusion);
        },
        py::arg("model"), py::arg("test"), "returns (error_rate, confusion_matrix)");

    m.def(
        "compose_u",
        [](const Matrix& A, const TaxonomyTree& tree) {
            return compose_U(edges_from(A, tree, "abs"));
        },
        py::arg("A"), py::arg("tree"), "label weights as path sums of edge rows");

    m.def(
        "orthogonal_penalty",
        [](const Matrix& A, const TaxonomyTree& tree, const std::string& mode) {
            EdgeParams e = edges_from(A, tree, mode);
            return orthogonal_penalty(e, ancestor_pairs(tree));
        },
        py::arg("A"), py::arg("tree"), py::arg("mode") = "abs");

    m.def(
        "gradcheck",
        [](int hidden, int visible, int classes, std::uint64_t seed,
           const std::string& flip_block) {
            GradCheckReport r = gradcheck(hidden, visible, classes, seed, flip_block);
            py::dict out;
            out["pass"] = r.pass;
            py::dict blocks;
            for (const auto& [name, err] : r.block_errors) blocks[name.c_str()] = err;
            out["block_errors"] = blocks;
            py::dict penalties;
            for (const auto& [name, err] : r.penalty_errors) penalties[name.c_str()] = err;
            out["penalty_errors"] = penalties;
            out["raw_child_term_error"] = r.raw_child_term_error;
            out["failed_block"] = r.failed_block;
            return out;
        },
        py::arg("hidden") = 3, py::arg("visible") = 3, py::arg("classes") = 3, py::arg("seed") = 1,
        py::arg("flip_block") = "");
}
