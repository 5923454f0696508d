#include "hcrbm/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace hcrbm {

namespace {

namespace fs = std::filesystem;

void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char buf[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                            static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(buf), 4);
}

void put_f64(std::ostream& out, double v) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(bits >> (8 * i));
    out.write(reinterpret_cast<const char*>(buf), 8);
}

void put_matrix(std::ostream& out, const Matrix& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) put_f64(out, m(r, c));
}

void put_vector(std::ostream& out, const Vector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) put_f64(out, v[i]);
}

struct Reader {
    std::string bytes;
    std::size_t pos = 0;
    std::string path;

    [[noreturn]] void fail(const std::string& msg) const {
        throw std::runtime_error("checkpoint '" + path + "': " + msg);
    }
    void need(std::size_t n) const {
        if (pos + n > bytes.size()) fail("truncated file");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
        pos += 4;
        return v;
    }
    double f64() {
        need(8);
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i)
            bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
        pos += 8;
        return std::bit_cast<double>(bits);
    }
    Matrix matrix(Eigen::Index rows, Eigen::Index cols) {
        Matrix m(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = f64();
        return m;
    }
    Vector vector(Eigen::Index n) {
        Vector v(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = f64();
        return v;
    }
    std::string text(std::size_t n) {
        need(n);
        std::string s = bytes.substr(pos, n);
        pos += n;
        return s;
    }
};

Reader open_reader(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return Reader{buf.str(), 0, path};
}

std::ofstream open_writer(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint '" + path + "'");
    return out;
}

void check_magic(Reader& r, const char* magic) {
    std::string found = r.text(4);
    if (found != magic) r.fail("bad magic (expected " + std::string(magic) + ")");
    std::uint32_t version = r.u32();
    if (version != 1) r.fail("unsupported format version " + std::to_string(version));
}

void save_rbm_impl(const std::string& path, const RbmParams& p, const Matrix* A,
                   const std::string& tree_text) {
    auto out = open_writer(path);
    out.write("HRBM", 4);
    put_u32(out, 1);
    put_u32(out, static_cast<std::uint32_t>(p.hidden_count()));
    put_u32(out, static_cast<std::uint32_t>(p.visible_count()));
    put_u32(out, static_cast<std::uint32_t>(p.class_count()));
    put_u32(out, A ? static_cast<std::uint32_t>(A->rows()) : 0);
    put_matrix(out, p.W);
    put_vector(out, p.b);
    put_vector(out, p.c);
    put_vector(out, p.d_bias);
    put_matrix(out, p.U);
    if (A) {
        put_matrix(out, *A);
        put_u32(out, static_cast<std::uint32_t>(tree_text.size()));
        out.write(tree_text.data(), static_cast<std::streamsize>(tree_text.size()));
    }
    if (!out) throw std::runtime_error("failed writing checkpoint '" + path + "'");
}

}  // namespace

void save_rbm_checkpoint(const std::string& path, const RbmParams& p) {
    save_rbm_impl(path, p, nullptr, "");
}

void save_rbm_checkpoint(const std::string& path, const RbmParams& p, const Matrix& edge_matrix,
                         const std::string& tree_text) {
    require(!tree_text.empty(), "save_rbm_checkpoint: hierarchical checkpoint needs taxonomy text");
    save_rbm_impl(path, p, &edge_matrix, tree_text);
}

RbmCheckpoint load_rbm_checkpoint(const std::string& path) {
    Reader r = open_reader(path);
    check_magic(r, "HRBM");
    std::uint32_t n = r.u32(), d = r.u32(), K = r.u32(), m = r.u32();
    RbmCheckpoint ck;
    ck.params.W = r.matrix(n, d);
    ck.params.b = r.vector(d);
    ck.params.c = r.vector(n);
    ck.params.d_bias = r.vector(K);
    ck.params.U = r.matrix(n, K);
    if (m > 0) {
        ck.edge_matrix = r.matrix(m, n);
        ck.tree_text = r.text(r.u32());
    }
    return ck;
}

void save_linear_checkpoint(const std::string& path, const LinearLogit& m,
                            const std::string& tree_text) {
    auto out = open_writer(path);
    out.write("HMNL", 4);
    put_u32(out, 1);
    put_u32(out, static_cast<std::uint32_t>(m.feature_count()));
    put_u32(out, static_cast<std::uint32_t>(m.class_count()));
    put_u32(out, m.edges ? static_cast<std::uint32_t>(m.edges->A.rows()) : 0);
    put_matrix(out, m.coef);
    put_vector(out, m.bias);
    if (m.edges) {
        require(!tree_text.empty(), "save_linear_checkpoint: corrMNL checkpoint needs taxonomy text");
        put_matrix(out, m.edges->A);
        put_u32(out, static_cast<std::uint32_t>(tree_text.size()));
        out.write(tree_text.data(), static_cast<std::streamsize>(tree_text.size()));
    }
    if (!out) throw std::runtime_error("failed writing checkpoint '" + path + "'");
}

LinearCheckpoint load_linear_checkpoint(const std::string& path) {
    Reader r = open_reader(path);
    check_magic(r, "HMNL");
    std::uint32_t d = r.u32(), K = r.u32(), m = r.u32();
    LinearCheckpoint ck;
    ck.model.coef = r.matrix(d, K);
    ck.model.bias = r.vector(K);
    if (m > 0) {
        Matrix A = r.matrix(m, d);
        ck.tree_text = r.text(r.u32());
        TaxonomyTree tree = parse_tree(ck.tree_text);
        ck.model.edges = EdgeParams{std::move(A), indicator_matrix(tree), 0.0, PenaltyMode::abs};
    }
    return ck;
}

void save_cascade_checkpoint(const std::string& dir, const CascadeModel& model, Variant variant) {
    fs::create_directories(dir);
    std::ofstream tree_out(fs::path(dir) / "taxonomy.tree", std::ios::binary);
    tree_out << serialize_tree(model.tree);
    if (!tree_out) throw std::runtime_error("failed writing taxonomy under '" + dir + "'");

    std::ostringstream manifest;
    manifest << "# variant = " << to_string(variant) << "\n";
    for (const auto& node : model.nodes) {
        std::string filename = "node_" + std::to_string(node.tree_node) + ".hrbm";
        save_rbm_checkpoint((fs::path(dir) / filename).string(), node.rbm);
        manifest << model.tree.names[node.tree_node] << " = " << filename << "\n";
    }
    std::ofstream man_out(fs::path(dir) / "manifest.txt", std::ios::binary);
    man_out << manifest.str();
    if (!man_out) throw std::runtime_error("failed writing manifest under '" + dir + "'");
}

CascadeModel load_cascade_checkpoint(const std::string& dir, Variant* variant_out) {
    CascadeModel model;
    model.tree = load_tree((fs::path(dir) / "taxonomy.tree").string());

    std::ifstream man(fs::path(dir) / "manifest.txt");
    if (!man) throw std::runtime_error("cannot open manifest under '" + dir + "'");
    Variant variant = Variant::cascade_soft;
    std::string line;
    while (std::getline(man, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string first, eq, value;
        if (line[0] == '#') {
            std::string hash;
            ls >> hash >> first >> eq >> value;
            if (first == "variant" && eq == "=") variant = variant_from_name(value);
            continue;
        }
        if (!(ls >> first >> eq >> value) || eq != "=")
            throw std::runtime_error("manifest under '" + dir + "': bad line '" + line + "'");
        int node = -1;
        for (int v = 0; v < model.tree.num_nodes(); ++v)
            if (model.tree.names[v] == first) node = v;
        if (node < 0)
            throw std::runtime_error("manifest under '" + dir + "': unknown node '" + first + "'");
        RbmCheckpoint ck = load_rbm_checkpoint((fs::path(dir) / value).string());
        model.nodes.push_back({node, model.tree.children[node], std::move(ck.params)});
    }
    model.hidden_projection = variant == Variant::hhrbm;
    if (variant_out) *variant_out = variant;
    return model;
}

}  // namespace hcrbm
