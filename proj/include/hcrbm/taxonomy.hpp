#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hcrbm/common.hpp"

namespace hcrbm {

/// Rooted label hierarchy. Node ids follow first mention in the file, edge
/// ids follow the order of the [edges] section; both are stable across
/// parse/serialize round trips.
struct TaxonomyTree {
    std::vector<std::string> names;          // node id -> name
    std::vector<std::pair<int, int>> edges;  // edge id -> (parent node, child node)
    std::vector<int> parent;                 // node id -> parent node, -1 at root
    std::vector<int> parent_edge;            // node id -> incoming edge, -1 at root
    std::vector<std::vector<int>> children;  // node id -> child nodes in edge order
    std::vector<int> class_of_node;          // node id -> class index, -1 if none
    std::vector<int> leaf_of_class;          // class index -> leaf node id
    int root = -1;

    int num_nodes() const { return static_cast<int>(names.size()); }
    int num_edges() const { return static_cast<int>(edges.size()); }
    int num_classes() const { return static_cast<int>(leaf_of_class.size()); }
    bool is_leaf(int node) const { return children[node].empty(); }

    /// edges between the root and `node` (root has depth 0)
    int depth(int node) const {
        int d = 0;
        while (parent[node] >= 0) {
            node = parent[node];
            ++d;
        }
        return d;
    }
};

/// Parse the two-section taxonomy text format; throws std::invalid_argument
/// with a description of the first problem found.
TaxonomyTree parse_tree(const std::string& text);

TaxonomyTree load_tree(const std::string& path);

/// Canonical text form: [edges] in edge order, [classes] in class order.
std::string serialize_tree(const TaxonomyTree& tree);

/// Root plus one leaf per class, edges in class order.
TaxonomyTree star_tree(int num_classes);

/// Edge ids along the root->leaf(cls) path, in root-to-leaf order.
std::vector<int> path_edges(const TaxonomyTree& tree, int cls);

/// M x K matrix with P(e,k) = 1 iff edge e lies on the root->leaf(k) path.
Matrix indicator_matrix(const TaxonomyTree& tree);

/// All (edge, strict-ancestor-edge) pairs, sorted by (edge, ancestor).
std::vector<std::pair<int, int>> ancestor_pairs(const TaxonomyTree& tree);

}  // namespace hcrbm
