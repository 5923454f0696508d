#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hcrbm/common.hpp"
#include "hcrbm/rng.hpp"

namespace hcrbm {

/// Labeled examples. Rows of X are feature vectors with entries in [0,1].
struct Dataset {
    Matrix X;
    std::vector<int> y;
    int num_classes = 0;
    std::string provenance;

    int size() const { return static_cast<int>(X.rows()); }
    int feature_count() const { return static_cast<int>(X.cols()); }
};

/// Parse a big-endian IDX image/label file pair; pixels are scaled by /255.
Dataset load_idx(const std::string& image_bytes, const std::string& label_bytes);
Dataset load_idx_files(const std::string& images_path, const std::string& labels_path);

/// Parse whitespace-separated rows of feature values in [0,1] plus one
/// integer class label per line (label last unless label_first).
Dataset load_table(const std::string& text, bool label_first = false);
Dataset load_table_file(const std::string& path, bool label_first = false);

/// Render back to the table format (label last) for audit.
std::string save_table(const Dataset& data);

/// Uniform without-replacement sample of per_class examples from every class,
/// order shuffled deterministically by seed.
Dataset balanced_sample(const Dataset& data, int per_class, std::uint64_t seed);

/// balanced_sample with total/num_classes per class; total must divide evenly.
Dataset balanced_sample_total(const Dataset& data, int total, std::uint64_t seed);

/// rare_count examples of rare_class, other_count of every other class.
Dataset rare_class_sample(const Dataset& data, int rare_class, int rare_count, int other_count,
                          std::uint64_t seed);

}  // namespace hcrbm
