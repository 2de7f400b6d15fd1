// Copyright 2026 The dnls-nfr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DNLS_TREES_HPP
#define DNLS_TREES_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dnls {

using NodeId = int;
inline constexpr NodeId kNoNode = -1;

/// Largest generation enumerate_trees accepts; |T(6)| = 10395.
inline constexpr int kMaxEnumeratedGeneration = 6;

struct TreeNode {
  NodeId id = kNoNode;
  NodeId parent = kNoNode;
  int slot = 0;        // 1, 2 or 3 for the child position under `parent`; 0 for the root
  int generation = 0;  // j such that the node was created when T_j was formed
  int root_generation = 0;  // j if the node is r^(j), 0 while terminal
  std::array<NodeId, 3> children{kNoNode, kNoNode, kNoNode};

  bool terminal() const { return children[0] == kNoNode; }
};

/// Four-node tree added at generation j: the j-th root and its children.
struct GenerationTree {
  NodeId root = kNoNode;
  std::array<NodeId, 3> children{kNoNode, kNoNode, kNoNode};
};

/// Ternary tree that remembers the order in which its parental nodes were
/// created. Node ids are creation-ordered; the root is node 0 and growing a
/// terminal appends its three children with consecutive ids. Child slot 2 is
/// the conjugated slot.
class OrderedTree {
 public:
  /// The single tree of the first generation.
  OrderedTree();

  int generation() const { return static_cast<int>(roots_.size()); }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const TreeNode& node(NodeId id) const;
  int node_count() const { return static_cast<int>(nodes_.size()); }

  /// p^(1), ..., p^(J-1): the terminal turned parental at each growth step.
  const std::vector<NodeId>& chronicle() const { return chronicle_; }

  /// r^(j) for j = 1..J (1-based).
  NodeId root_of_generation(int j) const;

  bool is_terminal(NodeId id) const { return node(id).terminal(); }

  /// Terminal nodes in planar (left-to-right) order.
  std::vector<NodeId> terminals() const;
  std::vector<NodeId> parentals() const;

  /// Breadth-first order, children visited by slot.
  std::vector<NodeId> breadth_first() const;

  /// Number of slot-2 edges on the path from the root to `id`, mod 2.
  /// An odd count means the node's factor enters conjugated.
  bool conjugated(NodeId id) const;

  /// +1 for an unconjugated node, -1 for a conjugated one.
  int orientation(NodeId id) const { return conjugated(id) ? -1 : 1; }

  /// Generation whose projection owns `id` as a child (0 for the root).
  int owning_generation(NodeId id) const;

  OrderedTree grow(NodeId terminal) const;

  GenerationTree projection(int j) const;

  /// pi_j^inf: children of r^(j) that are terminal in the full tree.
  std::vector<NodeId> essential_terminals(int j) const;

  /// P(r^(1), r^(j)): the chain of root nodes of strictly increasing generation.
  std::vector<NodeId> shortest_root_path(int j) const;

  /// Nested parenthesized form. Grammar:
  ///   node := '*' | GEN '(' node node node ')'
  /// where GEN is the generation j at which the node became r^(j). The
  /// labels recover the chronicle.
  std::string serialize() const;
  static OrderedTree parse(std::string_view text);

  bool operator==(const OrderedTree& o) const { return serialize() == o.serialize(); }

 private:
  std::vector<TreeNode> nodes_;
  std::vector<NodeId> chronicle_;
  std::vector<NodeId> roots_;
};

/// All ordered trees of generation J in canonical order: chronicles sorted
/// lexicographically by the breadth-first rank of the terminal grown at each
/// step. The count is (2J-1)!!.
std::vector<OrderedTree> enumerate_trees(int generation);

/// (2J-1)!! computed by the recurrence c_J = (2J-1) c_{J-1}.
std::int64_t double_factorial_count(int generation);

/// Frequencies on every node of a tree with derived modulation data.
/// mu[j-1] is the raw modulation of generation j evaluated on the unconjugated
/// tuple; phase[j-1] = orientation(r^(j)) * mu[j-1] is the frequency that
/// actually appears in the time oscillation of that generation.
template <typename Scalar>
struct IndexAssignment {
  OrderedTree tree;
  std::vector<Scalar> xi;  // by node id

  std::vector<Scalar> mu;
  std::vector<Scalar> mu_tilde;
  std::vector<Scalar> phase;
  std::vector<Scalar> phase_tilde;

  /// (xi^(j), xi_1^(j), xi_2^(j), xi_3^(j)).
  std::array<Scalar, 4> generation_frequencies(int j) const {
    const GenerationTree g = tree.projection(j);
    return {xi[g.root], xi[g.children[0]], xi[g.children[1]], xi[g.children[2]]};
  }

  Scalar mu_expanded(int j) const {
    const auto f = generation_frequencies(j);
    return f[0] * f[0] - f[1] * f[1] + f[2] * f[2] - f[3] * f[3];
  }
  Scalar mu_outer(int j) const {
    const auto f = generation_frequencies(j);
    return Scalar(2) * (f[0] - f[1]) * (f[0] - f[3]);
  }
  /// Canonical factored form 2(xi_2 - xi_1)(xi_2 - xi_3).
  Scalar mu_inner(int j) const {
    const auto f = generation_frequencies(j);
    return Scalar(2) * (f[2] - f[1]) * (f[2] - f[3]);
  }
};

/// Relative agreement with an absolute floor, used for the modulation
/// cross-formula checks.
template <typename Scalar>
bool nearly_equal(Scalar a, Scalar b, Scalar rel = Scalar(1e-10), Scalar abs_floor = Scalar(1e-12)) {
  const Scalar scale = std::max(std::abs(a), std::abs(b));
  return std::abs(a - b) <= std::max(abs_floor, rel * scale);
}

/// Propagates leaf frequencies upward by xi_a = xi_a1 - xi_a2 + xi_a3 and
/// computes mu_j, mu~_j. If `root_frequency` is given it must agree with the
/// propagated value to 1e-9 relative.
template <typename Scalar>
IndexAssignment<Scalar> assign_indices(const OrderedTree& tree, const std::map<NodeId, Scalar>& leaf_frequencies,
                                       std::optional<Scalar> root_frequency = std::nullopt) {
  IndexAssignment<Scalar> a{tree, std::vector<Scalar>(tree.node_count(), Scalar(0)), {}, {}, {}, {}};
  for (NodeId leaf : tree.terminals()) {
    auto it = leaf_frequencies.find(leaf);
    if (it == leaf_frequencies.end())
      throw std::invalid_argument("assign_indices: missing frequency for terminal node " + std::to_string(leaf));
    a.xi[leaf] = it->second;
  }
  // children always carry larger ids than their parent
  for (NodeId id = tree.node_count() - 1; id >= 0; --id) {
    const TreeNode& nd = tree.node(id);
    if (nd.terminal()) continue;
    a.xi[id] = a.xi[nd.children[0]] - a.xi[nd.children[1]] + a.xi[nd.children[2]];
  }
  if (root_frequency) {
    const Scalar r = *root_frequency;
    const Scalar scale = std::max(std::abs(r), std::abs(a.xi[0]));
    if (std::abs(r - a.xi[0]) > Scalar(1e-9) * std::max(scale, Scalar(1)))
      throw std::invalid_argument("assign_indices: root frequency inconsistent with leaves");
  }
  const int J = tree.generation();
  Scalar acc(0), acc_phase(0);
  for (int j = 1; j <= J; ++j) {
    const Scalar m = a.mu_inner(j);
    const Scalar p = Scalar(tree.orientation(tree.root_of_generation(j))) * m;
    acc += m;
    acc_phase += p;
    a.mu.push_back(m);
    a.mu_tilde.push_back(acc);
    a.phase.push_back(p);
    a.phase_tilde.push_back(acc_phase);
  }
  return a;
}

}  // namespace dnls

#endif  // DNLS_TREES_HPP
