#include "hcrbm/taxonomy.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

namespace hcrbm {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
    std::istringstream in(line);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

[[noreturn]] void fail(int lineno, const std::string& msg) {
    throw std::invalid_argument("taxonomy line " + std::to_string(lineno) + ": " + msg);
}

}  // namespace

TaxonomyTree parse_tree(const std::string& text) {
    TaxonomyTree tree;
    std::map<std::string, int> id_of;
    auto intern = [&](const std::string& name) {
        auto it = id_of.find(name);
        if (it != id_of.end()) return it->second;
        int id = tree.num_nodes();
        id_of.emplace(name, id);
        tree.names.push_back(name);
        tree.parent.push_back(-1);
        tree.parent_edge.push_back(-1);
        tree.children.emplace_back();
        tree.class_of_node.push_back(-1);
        return id;
    };

    enum class Section { none, edges, classes };
    Section section = Section::none;
    bool saw_edges = false, saw_classes = false;
    std::map<int, int> leaf_of_class;

    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        auto first = raw.find_first_not_of(" \t");
        if (first == std::string::npos || raw[first] == '#') continue;
        std::string line = raw.substr(first);
        if (line == "[edges]") {
            section = Section::edges;
            saw_edges = true;
            continue;
        }
        if (line == "[classes]") {
            section = Section::classes;
            saw_classes = true;
            continue;
        }
        auto tokens = tokenize(line);
        if (section == Section::none) fail(lineno, "content before any section header");
        if (section == Section::edges) {
            if (tokens.size() != 3 || tokens[1] != "->")
                fail(lineno, "expected 'parent -> child'");
            if (tokens[0].find("->") != std::string::npos || tokens[2].find("->") != std::string::npos)
                fail(lineno, "node names may not contain '->'");
            int p = intern(tokens[0]);
            int c = intern(tokens[2]);
            if (p == c) fail(lineno, "cycle detected: node '" + tokens[0] + "' is its own parent");
            if (tree.parent[c] != -1)
                fail(lineno, "node '" + tokens[2] + "' has multiple parents");
            tree.parent[c] = p;
            tree.parent_edge[c] = tree.num_edges();
            tree.children[p].push_back(c);
            tree.edges.emplace_back(p, c);
        } else {
            if (tokens.size() != 3 || tokens[1] != "=")
                fail(lineno, "expected 'leaf_name = class_index'");
            auto it = id_of.find(tokens[0]);
            if (it == id_of.end())
                fail(lineno, "unknown node '" + tokens[0] + "' in [classes]");
            int node = it->second;
            int cls;
            try {
                size_t pos = 0;
                cls = std::stoi(tokens[2], &pos);
                if (pos != tokens[2].size()) throw std::invalid_argument("");
            } catch (const std::exception&) {
                fail(lineno, "class index '" + tokens[2] + "' is not an integer");
            }
            if (cls < 0) fail(lineno, "class index must be nonnegative");
            if (tree.class_of_node[node] != -1)
                fail(lineno, "node '" + tokens[0] + "' assigned two class indices");
            if (leaf_of_class.count(cls))
                fail(lineno, "class index " + std::to_string(cls) + " assigned twice");
            tree.class_of_node[node] = cls;
            leaf_of_class[cls] = node;
        }
    }

    if (!saw_edges) throw std::invalid_argument("taxonomy: missing [edges] section");
    if (!saw_classes) throw std::invalid_argument("taxonomy: missing [classes] section");
    if (tree.num_nodes() == 0) throw std::invalid_argument("taxonomy: empty tree");

    for (int v = 0; v < tree.num_nodes(); ++v) {
        if (tree.parent[v] != -1) continue;
        if (tree.root != -1)
            throw std::invalid_argument("taxonomy: multiple roots ('" + tree.names[tree.root] +
                                        "' and '" + tree.names[v] + "')");
        tree.root = v;
    }
    if (tree.root == -1) throw std::invalid_argument("taxonomy: cycle detected (no root)");
    for (int v = 0; v < tree.num_nodes(); ++v) {
        int cur = v, steps = 0;
        while (cur != tree.root) {
            cur = tree.parent[cur];
            if (++steps > tree.num_nodes())
                throw std::invalid_argument("taxonomy: cycle detected at node '" + tree.names[v] + "'");
        }
    }

    for (int v = 0; v < tree.num_nodes(); ++v) {
        bool leaf = tree.children[v].empty();
        if (leaf && tree.class_of_node[v] == -1)
            throw std::invalid_argument("taxonomy: leaf '" + tree.names[v] + "' has no class index");
        if (!leaf && tree.class_of_node[v] != -1)
            throw std::invalid_argument("taxonomy: class assigned to non-leaf '" + tree.names[v] + "'");
    }
    int k = 0;
    for (const auto& [cls, node] : leaf_of_class) {
        if (cls != k)
            throw std::invalid_argument("taxonomy: class indices not contiguous from 0 (missing " +
                                        std::to_string(k) + ")");
        tree.leaf_of_class.push_back(node);
        ++k;
    }
    return tree;
}

TaxonomyTree load_tree(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open taxonomy file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_tree(buf.str());
}

std::string serialize_tree(const TaxonomyTree& tree) {
    std::ostringstream out;
    out << "[edges]\n";
    for (const auto& [p, c] : tree.edges)
        out << tree.names[p] << " -> " << tree.names[c] << "\n";
    out << "[classes]\n";
    for (int k = 0; k < tree.num_classes(); ++k)
        out << tree.names[tree.leaf_of_class[k]] << " = " << k << "\n";
    return out.str();
}

TaxonomyTree star_tree(int num_classes) {
    std::ostringstream out;
    out << "[edges]\n";
    for (int k = 0; k < num_classes; ++k) out << "root -> c" << k << "\n";
    out << "[classes]\n";
    for (int k = 0; k < num_classes; ++k) out << "c" << k << " = " << k << "\n";
    return parse_tree(out.str());
}

std::vector<int> path_edges(const TaxonomyTree& tree, int cls) {
    require(cls >= 0 && cls < tree.num_classes(), "class index out of range");
    std::vector<int> path;
    for (int v = tree.leaf_of_class[cls]; v != tree.root; v = tree.parent[v])
        path.push_back(tree.parent_edge[v]);
    std::reverse(path.begin(), path.end());
    return path;
}

Matrix indicator_matrix(const TaxonomyTree& tree) {
    Matrix P = Matrix::Zero(tree.num_edges(), tree.num_classes());
    for (int k = 0; k < tree.num_classes(); ++k)
        for (int e : path_edges(tree, k)) P(e, k) = 1.0;
    return P;
}

std::vector<std::pair<int, int>> ancestor_pairs(const TaxonomyTree& tree) {
    std::vector<std::pair<int, int>> pairs;
    for (int e = 0; e < tree.num_edges(); ++e) {
        for (int v = tree.edges[e].first; v != tree.root; v = tree.parent[v])
            pairs.emplace_back(e, tree.parent_edge[v]);
    }
    std::sort(pairs.begin(), pairs.end());
    return pairs;
}

}  // namespace hcrbm
