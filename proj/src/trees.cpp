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

#include "dnls/trees.hpp"

#include <algorithm>
#include <cctype>
#include <deque>

namespace dnls {

OrderedTree::OrderedTree() {
  nodes_.push_back(TreeNode{0, kNoNode, 0, 1, 1, {1, 2, 3}});
  for (int s = 1; s <= 3; ++s) nodes_.push_back(TreeNode{s, 0, s, 1, 0, {kNoNode, kNoNode, kNoNode}});
  roots_.push_back(0);
}

const TreeNode& OrderedTree::node(NodeId id) const {
  if (id < 0 || id >= node_count()) throw std::out_of_range("OrderedTree: invalid node id " + std::to_string(id));
  return nodes_[static_cast<size_t>(id)];
}

NodeId OrderedTree::root_of_generation(int j) const {
  if (j < 1 || j > generation())
    throw std::out_of_range("OrderedTree: generation " + std::to_string(j) + " out of range");
  return roots_[static_cast<size_t>(j - 1)];
}

std::vector<NodeId> OrderedTree::terminals() const {
  std::vector<NodeId> out;
  std::vector<NodeId> stack{0};
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    const TreeNode& nd = node(id);
    if (nd.terminal()) {
      out.push_back(id);
      continue;
    }
    for (int s = 2; s >= 0; --s) stack.push_back(nd.children[static_cast<size_t>(s)]);
  }
  return out;
}

std::vector<NodeId> OrderedTree::parentals() const {
  std::vector<NodeId> out;
  for (const auto& nd : nodes_)
    if (!nd.terminal()) out.push_back(nd.id);
  return out;
}

std::vector<NodeId> OrderedTree::breadth_first() const {
  std::vector<NodeId> out;
  std::deque<NodeId> queue{0};
  while (!queue.empty()) {
    const NodeId id = queue.front();
    queue.pop_front();
    out.push_back(id);
    const TreeNode& nd = node(id);
    if (!nd.terminal())
      for (NodeId c : nd.children) queue.push_back(c);
  }
  return out;
}

bool OrderedTree::conjugated(NodeId id) const {
  bool odd = false;
  for (NodeId cur = id; cur != 0; cur = node(cur).parent)
    if (node(cur).slot == 2) odd = !odd;
  return odd;
}

int OrderedTree::owning_generation(NodeId id) const {
  if (id == 0) return 0;
  const NodeId parent = node(id).parent;
  return node(parent).root_generation;
}

OrderedTree OrderedTree::grow(NodeId terminal) const {
  if (terminal < 0 || terminal >= node_count())
    throw std::invalid_argument("grow: invalid node id " + std::to_string(terminal));
  if (!is_terminal(terminal)) throw std::invalid_argument("grow: node " + std::to_string(terminal) + " is not terminal");
  OrderedTree out(*this);
  const int gen = generation() + 1;
  const NodeId first = out.node_count();
  TreeNode& p = out.nodes_[static_cast<size_t>(terminal)];
  p.root_generation = gen;
  p.children = {first, first + 1, first + 2};
  for (int s = 1; s <= 3; ++s)
    out.nodes_.push_back(TreeNode{first + s - 1, terminal, s, gen, 0, {kNoNode, kNoNode, kNoNode}});
  out.chronicle_.push_back(terminal);
  out.roots_.push_back(terminal);
  return out;
}

GenerationTree OrderedTree::projection(int j) const {
  const NodeId r = root_of_generation(j);
  return GenerationTree{r, node(r).children};
}

std::vector<NodeId> OrderedTree::essential_terminals(int j) const {
  std::vector<NodeId> out;
  for (NodeId c : projection(j).children)
    if (is_terminal(c)) out.push_back(c);
  return out;
}

std::vector<NodeId> OrderedTree::shortest_root_path(int j) const {
  std::vector<NodeId> path{root_of_generation(j)};
  // each r^(j), j >= 2, is a child of exactly one earlier root
  for (NodeId cur = path.back(); cur != 0;) {
    cur = node(cur).parent;
    path.push_back(cur);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

namespace {

void serialize_node(const OrderedTree& t, NodeId id, std::string& out) {
  const TreeNode& nd = t.node(id);
  if (nd.terminal()) {
    out += '*';
    return;
  }
  out += std::to_string(nd.root_generation);
  out += '(';
  for (NodeId c : nd.children) serialize_node(t, c, out);
  out += ')';
}

struct ParsedNode {
  int label = 0;  // 0 for terminal
  std::vector<ParsedNode> children;
};

ParsedNode parse_node(std::string_view text, size_t& pos) {
  if (pos >= text.size()) throw std::invalid_argument("OrderedTree::parse: unexpected end of input");
  if (text[pos] == '*') {
    ++pos;
    return {};
  }
  if (!std::isdigit(static_cast<unsigned char>(text[pos])))
    throw std::invalid_argument("OrderedTree::parse: expected '*' or generation label");
  int label = 0;
  while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos])))
    label = label * 10 + (text[pos++] - '0');
  if (pos >= text.size() || text[pos] != '(') throw std::invalid_argument("OrderedTree::parse: expected '('");
  ++pos;
  ParsedNode out{label, {}};
  for (int s = 0; s < 3; ++s) out.children.push_back(parse_node(text, pos));
  if (pos >= text.size() || text[pos] != ')') throw std::invalid_argument("OrderedTree::parse: expected ')'");
  ++pos;
  return out;
}

// Locates the parsed node carrying `label`, returning its path of child slots.
bool find_label(const ParsedNode& nd, int label, std::vector<int>& path) {
  if (nd.label == label) return true;
  for (int s = 0; s < static_cast<int>(nd.children.size()); ++s) {
    path.push_back(s);
    if (find_label(nd.children[static_cast<size_t>(s)], label, path)) return true;
    path.pop_back();
  }
  return false;
}

int count_parental(const ParsedNode& nd) {
  if (nd.label == 0) return 0;
  int c = 1;
  for (const auto& ch : nd.children) c += count_parental(ch);
  return c;
}

}  // namespace

std::string OrderedTree::serialize() const {
  std::string out;
  serialize_node(*this, 0, out);
  return out;
}

OrderedTree OrderedTree::parse(std::string_view text) {
  size_t pos = 0;
  const ParsedNode root = parse_node(text, pos);
  if (pos != text.size()) throw std::invalid_argument("OrderedTree::parse: trailing characters");
  if (root.label != 1) throw std::invalid_argument("OrderedTree::parse: root must carry label 1");
  const int J = count_parental(root);
  OrderedTree t;
  for (int j = 2; j <= J; ++j) {
    std::vector<int> path;
    if (!find_label(root, j, path))
      throw std::invalid_argument("OrderedTree::parse: missing generation label " + std::to_string(j));
    NodeId cur = 0;
    for (int s : path) {
      const TreeNode& nd = t.node(cur);
      if (nd.terminal()) throw std::invalid_argument("OrderedTree::parse: labels violate the growth order");
      cur = nd.children[static_cast<size_t>(s)];
    }
    t = t.grow(cur);
  }
  if (t.serialize() != text) throw std::invalid_argument("OrderedTree::parse: inconsistent generation labels");
  return t;
}

std::int64_t double_factorial_count(int generation) {
  if (generation < 1) throw std::invalid_argument("double_factorial_count: generation must be >= 1");
  std::int64_t c = 1;
  for (int j = 2; j <= generation; ++j) c *= 2 * j - 1;
  return c;
}

namespace {

void enumerate_from(const OrderedTree& t, int target, std::vector<OrderedTree>& out) {
  if (t.generation() == target) {
    out.push_back(t);
    return;
  }
  for (NodeId id : t.breadth_first())
    if (t.is_terminal(id)) enumerate_from(t.grow(id), target, out);
}

}  // namespace

std::vector<OrderedTree> enumerate_trees(int generation) {
  if (generation < 1 || generation > kMaxEnumeratedGeneration)
    throw std::invalid_argument("enumerate_trees: generation must be in [1, " +
                                std::to_string(kMaxEnumeratedGeneration) + "]");
  std::vector<OrderedTree> out;
  out.reserve(static_cast<size_t>(double_factorial_count(generation)));
  enumerate_from(OrderedTree{}, generation, out);
  return out;
}

}  // namespace dnls
