#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace spectral_causal {

using Node = std::size_t;
using NodeSet = std::set<Node>;
using Edge = std::pair<Node, Node>;   // u -> v
using UEdge = std::pair<Node, Node>;  // unordered, stored with first < second
using UEdgeSet = std::set<UEdge>;

UEdge make_uedge(Node a, Node b);

// Directed graph over nodes [0, n). Cycles allowed, self-loops not.
class CausalGraph {
 public:
  CausalGraph() = default;
  explicit CausalGraph(std::size_t n);
  CausalGraph(std::size_t n, const std::vector<Edge>& edges);

  std::size_t size() const { return n_; }
  void add_edge(Node u, Node v);
  void remove_edge(Node u, Node v);
  bool has_edge(Node u, Node v) const { return edges_.count({u, v}) > 0; }
  bool adjacent(Node a, Node b) const { return has_edge(a, b) || has_edge(b, a); }
  const std::set<Edge>& edges() const { return edges_; }
  const NodeSet& parents(Node v) const { return parents_.at(v); }
  const NodeSet& children(Node v) const { return children_.at(v); }

  bool operator==(const CausalGraph& other) const { return n_ == other.n_ && edges_ == other.edges_; }

 private:
  void check_node(Node v) const;
  std::size_t n_ = 0;
  std::set<Edge> edges_;
  std::vector<NodeSet> parents_;
  std::vector<NodeSet> children_;
};

// Partially directed graph; directed and undirected parts never share a pair.
struct Cpdag {
  std::size_t n = 0;
  std::set<Edge> directed;
  UEdgeSet undirected;

  bool operator==(const Cpdag& other) const {
    return n == other.n && directed == other.directed && undirected == other.undirected;
  }
  UEdgeSet skeleton() const;
  bool adjacent(Node a, Node b) const;
};

// a -> c <- b with a < b.
struct Collider {
  Node a, c, b;
  auto operator<=>(const Collider&) const = default;
};

UEdgeSet topology(const CausalGraph& g);
NodeSet kin_set(const CausalGraph& g, Node v);
UEdgeSet kin_graph(const CausalGraph& g);
// Kin pairs that are not adjacent (linked only through a shared child).
UEdgeSet strict_spouse_pairs(const CausalGraph& g);
std::set<Collider> colliders(const CausalGraph& g);
std::set<Collider> unshielded_colliders(const CausalGraph& g);

NodeSet descendants(const CausalGraph& g, Node v);
NodeSet ancestors_inclusive(const CausalGraph& g, const NodeSet& seeds);
bool on_directed_cycle(const CausalGraph& g, Node v);
bool is_acyclic(const CausalGraph& g);

bool d_separated(const CausalGraph& g, const NodeSet& x, const NodeSet& z, const NodeSet& y);

// Per-condition outcome for the door criteria; `violated` uses the
// condition labels C1..C3 (single door), B1..B2 (back door) or F1..F3
// (front door), numbered in the order the criteria are usually stated.
struct AdmissibilityReport {
  bool admissible = false;
  std::vector<std::string> violated;
};

AdmissibilityReport single_door_check(const CausalGraph& g, Node u, Node y, const NodeSet& z);
bool single_door_admissible(const CausalGraph& g, Node u, Node y, const NodeSet& z);
AdmissibilityReport back_door_check(const CausalGraph& g, const NodeSet& w, const NodeSet& y, const NodeSet& z);
bool back_door_admissible(const CausalGraph& g, const NodeSet& w, const NodeSet& y, const NodeSet& z);
AdmissibilityReport front_door_check(const CausalGraph& g, const NodeSet& w, const NodeSet& y, const NodeSet& z);
bool front_door_admissible(const CausalGraph& g, const NodeSet& w, const NodeSet& y, const NodeSet& z);

// Applies Meek rules R1-R4 until no rule fires. Returns number of edges oriented.
std::size_t apply_meek_rules(Cpdag& g);

}  // namespace spectral_causal
