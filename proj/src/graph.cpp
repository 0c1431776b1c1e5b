#include "spectral_causal/graph.hpp"

#include <array>
#include <deque>

#include "spectral_causal/errors.hpp"

namespace spectral_causal {

UEdge make_uedge(Node a, Node b) { return a < b ? UEdge{a, b} : UEdge{b, a}; }

CausalGraph::CausalGraph(std::size_t n) : n_(n), parents_(n), children_(n) {}

CausalGraph::CausalGraph(std::size_t n, const std::vector<Edge>& edges) : CausalGraph(n) {
  for (const auto& [u, v] : edges) add_edge(u, v);
}

void CausalGraph::check_node(Node v) const {
  if (v >= n_) throw ArgumentError("node " + std::to_string(v) + " out of range for graph of size " + std::to_string(n_));
}

void CausalGraph::add_edge(Node u, Node v) {
  check_node(u);
  check_node(v);
  if (u == v) throw ArgumentError("self-loop on node " + std::to_string(u));
  edges_.insert({u, v});
  children_[u].insert(v);
  parents_[v].insert(u);
}

void CausalGraph::remove_edge(Node u, Node v) {
  if (edges_.erase({u, v})) {
    children_[u].erase(v);
    parents_[v].erase(u);
  }
}

UEdgeSet Cpdag::skeleton() const {
  UEdgeSet out = undirected;
  for (const auto& [u, v] : directed) out.insert(make_uedge(u, v));
  return out;
}

bool Cpdag::adjacent(Node a, Node b) const {
  return directed.count({a, b}) || directed.count({b, a}) || undirected.count(make_uedge(a, b));
}

UEdgeSet topology(const CausalGraph& g) {
  UEdgeSet out;
  for (const auto& [u, v] : g.edges()) out.insert(make_uedge(u, v));
  return out;
}

NodeSet kin_set(const CausalGraph& g, Node v) {
  if (v >= g.size()) throw ArgumentError("node out of range");
  NodeSet out = g.parents(v);
  for (Node c : g.children(v)) {
    out.insert(c);
    for (Node p : g.parents(c)) out.insert(p);
  }
  out.erase(v);
  return out;
}

UEdgeSet kin_graph(const CausalGraph& g) {
  UEdgeSet out;
  for (Node v = 0; v < g.size(); ++v)
    for (Node k : kin_set(g, v)) out.insert(make_uedge(v, k));
  return out;
}

UEdgeSet strict_spouse_pairs(const CausalGraph& g) {
  UEdgeSet out;
  for (const auto& e : kin_graph(g))
    if (!g.adjacent(e.first, e.second)) out.insert(e);
  return out;
}

std::set<Collider> colliders(const CausalGraph& g) {
  std::set<Collider> out;
  for (Node c = 0; c < g.size(); ++c) {
    const auto& pa = g.parents(c);
    for (auto i = pa.begin(); i != pa.end(); ++i)
      for (auto j = std::next(i); j != pa.end(); ++j) out.insert({*i, c, *j});
  }
  return out;
}

std::set<Collider> unshielded_colliders(const CausalGraph& g) {
  std::set<Collider> out;
  for (const auto& col : colliders(g))
    if (!g.adjacent(col.a, col.b)) out.insert(col);
  return out;
}

NodeSet descendants(const CausalGraph& g, Node v) {
  if (v >= g.size()) throw ArgumentError("node out of range");
  NodeSet seen;
  std::deque<Node> queue(g.children(v).begin(), g.children(v).end());
  while (!queue.empty()) {
    Node u = queue.front();
    queue.pop_front();
    if (!seen.insert(u).second) continue;
    for (Node c : g.children(u)) queue.push_back(c);
  }
  return seen;
}

NodeSet ancestors_inclusive(const CausalGraph& g, const NodeSet& seeds) {
  NodeSet seen;
  std::deque<Node> queue(seeds.begin(), seeds.end());
  while (!queue.empty()) {
    Node u = queue.front();
    queue.pop_front();
    if (!seen.insert(u).second) continue;
    for (Node p : g.parents(u)) queue.push_back(p);
  }
  return seen;
}

bool on_directed_cycle(const CausalGraph& g, Node v) { return descendants(g, v).count(v) > 0; }

bool is_acyclic(const CausalGraph& g) {
  std::vector<std::size_t> indegree(g.size());
  for (Node v = 0; v < g.size(); ++v) indegree[v] = g.parents(v).size();
  std::deque<Node> ready;
  for (Node v = 0; v < g.size(); ++v)
    if (indegree[v] == 0) ready.push_back(v);
  std::size_t removed = 0;
  while (!ready.empty()) {
    Node u = ready.front();
    ready.pop_front();
    ++removed;
    for (Node c : g.children(u))
      if (--indegree[c] == 0) ready.push_back(c);
  }
  return removed == g.size();
}

namespace {

void check_sets(const CausalGraph& g, std::initializer_list<const NodeSet*> sets) {
  NodeSet all;
  for (const NodeSet* s : sets) {
    for (Node v : *s) {
      if (v >= g.size()) throw ArgumentError("node " + std::to_string(v) + " out of range");
      if (!all.insert(v).second) throw ArgumentError("node sets must be pairwise disjoint (node " + std::to_string(v) + ")");
    }
  }
}

CausalGraph without_out_edges(const CausalGraph& g, const NodeSet& from) {
  CausalGraph out = g;
  for (Node w : from)
    for (Node c : g.children(w)) out.remove_edge(w, c);
  return out;
}

}  // namespace

// Reachability over (node, arrival direction) states. A trail may pass a
// non-collider outside z and a collider that is an ancestor of z.
bool d_separated(const CausalGraph& g, const NodeSet& x, const NodeSet& z, const NodeSet& y) {
  check_sets(g, {&x, &z, &y});
  if (x.empty() || y.empty()) return true;
  const NodeSet anc = ancestors_inclusive(g, z);
  enum Dir { kUp = 0, kDown = 1 };  // up: arrived from a child; down: from a parent
  std::vector<std::array<bool, 2>> visited(g.size(), {false, false});
  std::deque<std::pair<Node, Dir>> queue;
  for (Node s : x) queue.push_back({s, kUp});
  while (!queue.empty()) {
    auto [v, dir] = queue.front();
    queue.pop_front();
    if (visited[v][dir]) continue;
    visited[v][dir] = true;
    const bool in_z = z.count(v) > 0;
    if (!in_z && y.count(v)) return false;
    if (dir == kUp) {
      if (in_z) continue;
      for (Node p : g.parents(v)) queue.push_back({p, kUp});
      for (Node c : g.children(v)) queue.push_back({c, kDown});
    } else {
      if (!in_z)
        for (Node c : g.children(v)) queue.push_back({c, kDown});
      if (anc.count(v))
        for (Node p : g.parents(v)) queue.push_back({p, kUp});
    }
  }
  return true;
}

AdmissibilityReport single_door_check(const CausalGraph& g, Node u, Node y, const NodeSet& z) {
  if (u >= g.size() || y >= g.size()) throw ArgumentError("node out of range");
  if (!g.has_edge(u, y)) throw ArgumentError("single-door check requires edge " + std::to_string(u) + "->" + std::to_string(y));
  const NodeSet uy{u}, yy{y};
  check_sets(g, {&uy, &yy, &z});
  AdmissibilityReport r;
  for (Node d : descendants(g, y)) {
    if (z.count(d)) {
      r.violated.push_back("C1");
      break;
    }
  }
  CausalGraph cut = g;
  cut.remove_edge(u, y);
  if (!d_separated(cut, uy, z, yy)) r.violated.push_back("C2");
  if (on_directed_cycle(g, y)) r.violated.push_back("C3");
  r.admissible = r.violated.empty();
  return r;
}

bool single_door_admissible(const CausalGraph& g, Node u, Node y, const NodeSet& z) {
  return single_door_check(g, u, y, z).admissible;
}

AdmissibilityReport back_door_check(const CausalGraph& g, const NodeSet& w, const NodeSet& y, const NodeSet& z) {
  check_sets(g, {&w, &y, &z});
  AdmissibilityReport r;
  NodeSet desc;
  for (Node v : w) {
    NodeSet d = descendants(g, v);
    desc.insert(d.begin(), d.end());
  }
  for (Node v : z) {
    if (desc.count(v)) {
      r.violated.push_back("B1");
      break;
    }
  }
  if (!d_separated(without_out_edges(g, w), w, z, y)) r.violated.push_back("B2");
  r.admissible = r.violated.empty();
  return r;
}

bool back_door_admissible(const CausalGraph& g, const NodeSet& w, const NodeSet& y, const NodeSet& z) {
  return back_door_check(g, w, y, z).admissible;
}

AdmissibilityReport front_door_check(const CausalGraph& g, const NodeSet& w, const NodeSet& y, const NodeSet& z) {
  check_sets(g, {&w, &y, &z});
  AdmissibilityReport r;
  // (i) directed paths from w to y avoiding z
  {
    NodeSet seen;
    std::deque<Node> queue;
    for (Node s : w)
      for (Node c : g.children(s)) queue.push_back(c);
    bool reached = false;
    while (!queue.empty() && !reached) {
      Node v = queue.front();
      queue.pop_front();
      if (z.count(v) || !seen.insert(v).second) continue;
      if (y.count(v)) reached = true;
      for (Node c : g.children(v)) queue.push_back(c);
    }
    if (reached) r.violated.push_back("F1");
  }
  // (ii) back-door paths from z to y blocked by w; (iii) no back-door path from w to z
  if (!z.empty() && !d_separated(without_out_edges(g, z), z, w, y)) r.violated.push_back("F2");
  if (!z.empty() && !d_separated(without_out_edges(g, w), w, NodeSet{}, z)) r.violated.push_back("F3");
  r.admissible = r.violated.empty();
  return r;
}

bool front_door_admissible(const CausalGraph& g, const NodeSet& w, const NodeSet& y, const NodeSet& z) {
  return front_door_check(g, w, y, z).admissible;
}

namespace {

bool is_undirected(const Cpdag& g, Node a, Node b) { return g.undirected.count(make_uedge(a, b)) > 0; }
bool is_directed(const Cpdag& g, Node a, Node b) { return g.directed.count({a, b}) > 0; }

void orient(Cpdag& g, Node a, Node b) {
  g.undirected.erase(make_uedge(a, b));
  g.directed.insert({a, b});
}

bool meek_pass(Cpdag& g) {
  const std::size_t n = g.n;
  std::vector<UEdge> und(g.undirected.begin(), g.undirected.end());
  for (const auto& e : und) {
    for (int side = 0; side < 2; ++side) {
      Node a = side ? e.second : e.first;
      Node b = side ? e.first : e.second;
      if (!is_undirected(g, a, b)) break;
      // R1: c -> a - b, c and b nonadjacent
      for (Node c = 0; c < n; ++c) {
        if (is_directed(g, c, a) && c != b && !g.adjacent(c, b)) {
          orient(g, a, b);
          return true;
        }
      }
      // R2: a -> c -> b with a - b
      for (Node c = 0; c < n; ++c) {
        if (is_directed(g, a, c) && is_directed(g, c, b)) {
          orient(g, a, b);
          return true;
        }
      }
      // R3: a - c -> b, a - d -> b, c and d nonadjacent
      for (Node c = 0; c < n; ++c) {
        if (!(is_undirected(g, a, c) && is_directed(g, c, b))) continue;
        for (Node d = c + 1; d < n; ++d) {
          if (is_undirected(g, a, d) && is_directed(g, d, b) && !g.adjacent(c, d)) {
            orient(g, a, b);
            return true;
          }
        }
      }
      // R4: a - c -> d -> b, a adjacent d, c and b nonadjacent
      for (Node c = 0; c < n; ++c) {
        if (!is_undirected(g, a, c) || c == b || g.adjacent(c, b)) continue;
        for (Node d = 0; d < n; ++d) {
          if (is_directed(g, c, d) && is_directed(g, d, b) && g.adjacent(a, d)) {
            orient(g, a, b);
            return true;
          }
        }
      }
    }
  }
  return false;
}

}  // namespace

std::size_t apply_meek_rules(Cpdag& g) {
  std::size_t count = 0;
  while (meek_pass(g)) ++count;
  return count;
}

}  // namespace spectral_causal
