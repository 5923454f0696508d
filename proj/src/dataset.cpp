#include "hcrbm/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace hcrbm {

namespace {

std::uint32_t read_u32_be(const std::string& bytes, std::size_t off, const char* what) {
    if (off + 4 > bytes.size()) throw std::invalid_argument(std::string("idx: truncated ") + what);
    auto u = [&](std::size_t i) { return static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[off + i])); };
    return (u(0) << 24) | (u(1) << 16) | (u(2) << 8) | u(3);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

Dataset load_idx(const std::string& image_bytes, const std::string& label_bytes) {
    std::uint32_t img_magic = read_u32_be(image_bytes, 0, "image header");
    if (img_magic != 2051)
        throw std::invalid_argument("idx: wrong image magic " + std::to_string(img_magic) +
                                    " (expected 2051)");
    std::uint32_t count = read_u32_be(image_bytes, 4, "image header");
    std::uint32_t rows = read_u32_be(image_bytes, 8, "image header");
    std::uint32_t cols = read_u32_be(image_bytes, 12, "image header");

    std::uint32_t lbl_magic = read_u32_be(label_bytes, 0, "label header");
    if (lbl_magic != 2049)
        throw std::invalid_argument("idx: wrong label magic " + std::to_string(lbl_magic) +
                                    " (expected 2049)");
    std::uint32_t lbl_count = read_u32_be(label_bytes, 4, "label header");
    if (count != lbl_count)
        throw std::invalid_argument("idx: image count " + std::to_string(count) +
                                    " != label count " + std::to_string(lbl_count));

    std::size_t d = static_cast<std::size_t>(rows) * cols;
    if (image_bytes.size() < 16 + static_cast<std::size_t>(count) * d)
        throw std::invalid_argument("idx: truncated image payload");
    if (label_bytes.size() < 8 + count) throw std::invalid_argument("idx: truncated label payload");

    Dataset data;
    data.X.resize(count, static_cast<Eigen::Index>(d));
    data.y.resize(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto* px = reinterpret_cast<const unsigned char*>(image_bytes.data()) + 16 + i * d;
        for (std::size_t j = 0; j < d; ++j) data.X(i, static_cast<Eigen::Index>(j)) = px[j] / 255.0;
        data.y[i] = static_cast<unsigned char>(label_bytes[8 + i]);
    }
    data.num_classes = 0;
    for (int v : data.y) data.num_classes = std::max(data.num_classes, v + 1);
    data.provenance = "idx";
    return data;
}

Dataset load_idx_files(const std::string& images_path, const std::string& labels_path) {
    Dataset data = load_idx(read_file(images_path), read_file(labels_path));
    data.provenance = "idx:" + images_path;
    return data;
}

Dataset load_table(const std::string& text, bool label_first) {
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::vector<double> values;
        std::string tok;
        while (ls >> tok) {
            char* end = nullptr;
            double v = std::strtod(tok.c_str(), &end);
            if (end != tok.c_str() + tok.size())
                throw std::invalid_argument("table line " + std::to_string(lineno) +
                                            ": non-numeric token '" + tok + "'");
            values.push_back(v);
        }
        if (values.empty()) continue;
        if (values.size() < 2)
            throw std::invalid_argument("table line " + std::to_string(lineno) +
                                        ": need at least one feature and a label");
        if (width == 0) width = values.size();
        if (values.size() != width)
            throw std::invalid_argument("table line " + std::to_string(lineno) + ": has " +
                                        std::to_string(values.size()) + " values, expected " +
                                        std::to_string(width));
        double label = label_first ? values.front() : values.back();
        if (label != std::floor(label) || label < 0.0)
            throw std::invalid_argument("table line " + std::to_string(lineno) +
                                        ": label must be a nonnegative integer");
        if (label_first)
            values.erase(values.begin());
        else
            values.pop_back();
        for (double v : values)
            if (v < 0.0 || v > 1.0)
                throw std::invalid_argument("table line " + std::to_string(lineno) +
                                            ": feature outside [0,1]");
        rows.push_back(std::move(values));
        labels.push_back(static_cast<int>(label));
    }
    if (rows.empty()) throw std::invalid_argument("table: no data lines");

    Dataset data;
    data.X.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width - 1));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j + 1 < width; ++j)
            data.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    data.y = std::move(labels);
    data.num_classes = 0;
    for (int v : data.y) data.num_classes = std::max(data.num_classes, v + 1);
    data.provenance = "table";
    return data;
}

Dataset load_table_file(const std::string& path, bool label_first) {
    Dataset data = load_table(read_file(path), label_first);
    data.provenance = "table:" + path;
    return data;
}

std::string save_table(const Dataset& data) {
    std::ostringstream out;
    char buf[64];
    for (int i = 0; i < data.size(); ++i) {
        for (int j = 0; j < data.feature_count(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", data.X(i, j));
            out << buf << ' ';
        }
        out << data.y[i] << '\n';
    }
    return out.str();
}

namespace {

/// choose want[k] indices of class k uniformly without replacement, then
/// shuffle the combined order; a count of zero skips the class
Dataset subsample(const Dataset& data, const std::vector<int>& want, std::uint64_t seed,
                  const std::string& protocol) {
    std::vector<std::vector<int>> by_class(data.num_classes);
    for (int i = 0; i < data.size(); ++i) by_class[data.y[i]].push_back(i);

    Rng rng(seed, 0);
    std::vector<int> picked;
    for (int k = 0; k < data.num_classes; ++k) {
        int t = want[k];
        if (t <= 0) continue;
        auto& pool = by_class[k];
        if (static_cast<int>(pool.size()) < t)
            throw std::invalid_argument("sample: class " + std::to_string(k) + " has only " +
                                        std::to_string(pool.size()) + " examples, need " +
                                        std::to_string(t));
        for (int i = 0; i < t; ++i)
            std::swap(pool[i], pool[i + static_cast<int>(rng.below(pool.size() - i))]);
        picked.insert(picked.end(), pool.begin(), pool.begin() + t);
    }
    shuffle(picked, rng);

    Dataset out;
    out.X.resize(static_cast<Eigen::Index>(picked.size()), data.X.cols());
    out.y.resize(picked.size());
    for (std::size_t i = 0; i < picked.size(); ++i) {
        out.X.row(static_cast<Eigen::Index>(i)) = data.X.row(picked[i]);
        out.y[i] = data.y[picked[i]];
    }
    out.num_classes = data.num_classes;
    out.provenance = data.provenance + "|" + protocol;
    return out;
}

}  // namespace

Dataset balanced_sample(const Dataset& data, int per_class, std::uint64_t seed) {
    require(per_class >= 0, "balanced_sample: negative per-class count");
    std::vector<int> want(data.num_classes, per_class);
    return subsample(data, want, seed,
                     "balanced(per_class=" + std::to_string(per_class) +
                         ",seed=" + std::to_string(seed) + ")");
}

Dataset balanced_sample_total(const Dataset& data, int total, std::uint64_t seed) {
    require(data.num_classes > 0, "balanced_sample_total: dataset has no classes");
    require(total % data.num_classes == 0,
            "balanced_sample_total: total " + std::to_string(total) + " not divisible by " +
                std::to_string(data.num_classes) + " classes");
    return balanced_sample(data, total / data.num_classes, seed);
}

Dataset rare_class_sample(const Dataset& data, int rare_class, int rare_count, int other_count,
                          std::uint64_t seed) {
    require(rare_class >= 0 && rare_class < data.num_classes,
            "rare_class_sample: rare class out of range");
    require(rare_count >= 0 && other_count >= 0, "rare_class_sample: negative count");
    if (rare_count == 0)
        std::cerr << "warning: rare class " << rare_class
                  << " sampled with zero examples; it is absent from the result\n";
    std::vector<int> want(data.num_classes, other_count);
    want[rare_class] = rare_count;
    return subsample(data, want, seed,
                     "rare(class=" + std::to_string(rare_class) + ",rare=" + std::to_string(rare_count) +
                         ",other=" + std::to_string(other_count) + ",seed=" + std::to_string(seed) + ")");
}

}  // namespace hcrbm
