#include "spectral_causal/discovery.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "spectral_causal/errors.hpp"
#include "spectral_causal/parallel.hpp"

namespace spectral_causal {

void DiscoveryConfig::check() const {
  if (!(tau > 0.0) || !(tau_im > 0.0)) throw ArgumentError("tau and tau_im must be positive");
  if (!(sigma_split > 0.0 && sigma_split < std::numbers::pi)) throw ArgumentError("sigma_split must lie in (0, pi)");
  if (floor && !(*floor >= 0.0)) throw ArgumentError("floor must be nonnegative");
}

DiscoveryConfig analytic_config() {
  DiscoveryConfig cfg;
  cfg.tau = 1e-6;
  cfg.tau_im = 1e-6;
  return cfg;
}

std::vector<std::size_t> frequency_sampling_policy(const FrequencyPolicy& policy, std::size_t num_bins) {
  if (num_bins == 0) throw ArgumentError("empty frequency grid");
  std::vector<std::size_t> out;
  switch (policy.kind) {
    case FrequencyPolicy::Kind::all_bins:
      out.resize(num_bins);
      for (std::size_t k = 0; k < num_bins; ++k) out[k] = k;
      break;
    case FrequencyPolicy::Kind::bins:
      if (policy.bins.empty()) throw ArgumentError("bin list is empty");
      for (std::size_t k : policy.bins) {
        if (k >= num_bins) throw ArgumentError("bin " + std::to_string(k) + " outside the grid");
        out.push_back(k);
      }
      std::sort(out.begin(), out.end());
      out.erase(std::unique(out.begin(), out.end()), out.end());
      break;
    case FrequencyPolicy::Kind::single_bin: {
      std::vector<std::size_t> allowed;
      for (std::size_t k = 1; k < num_bins; ++k)
        if (!(num_bins % 2 == 0 && k == num_bins / 2)) allowed.push_back(k);
      if (allowed.empty()) throw ArgumentError("grid has no bin besides DC and Nyquist");
      std::mt19937_64 rng(mix_seed(policy.seed, 0));
      std::uniform_int_distribution<std::size_t> pick(0, allowed.size() - 1);
      out.push_back(allowed[pick(rng)]);
      break;
    }
  }
  return out;
}

std::vector<WienerField> full_wiener_fields(const SpectralMatrixField& phi, const DiscoveryConfig& cfg) {
  cfg.check();
  if (phi.n < 2) throw ArgumentError("discovery needs at least two nodes");
  std::vector<WienerField> fields(phi.n);
  WienerOptions opts;
  opts.floor = cfg.floor;
  parallel_for(phi.n, [&](std::size_t i) { fields[i] = wiener_from_psd(phi, i, complement(phi.n, i), opts); });
  return fields;
}

namespace {

void check_fields(const std::vector<WienerField>& fields) {
  const std::size_t n = fields.size();
  if (n < 2) throw ArgumentError("need Wiener fields for at least two nodes");
  for (std::size_t i = 0; i < n; ++i) {
    if (fields[i].target != i || fields[i].conditioning != complement(n, i))
      throw ArgumentError("fields must hold W_i against the full complement, in node order");
    if (fields[i].num_bins() != fields[0].num_bins()) throw ArgumentError("fields disagree on the grid");
  }
}

// Max of stat(W_i[j](w_k)) over the policy bins, skipping regularized ones.
template <typename Stat>
double max_bin(const WienerField& f, Node j, const std::vector<std::size_t>& bins, Stat stat) {
  const auto row = static_cast<Eigen::Index>(f.index_of(j));
  double best = 0.0;
  std::size_t used = 0;
  for (std::size_t k : bins) {
    if (f.flagged(k)) continue;
    best = std::max(best, stat(f.coeffs(row, static_cast<Eigen::Index>(k))));
    ++used;
  }
  if (used == 0) throw ConditioningError("every examined bin is degenerate: " + join_bins(bins), bins);
  return best;
}

template <typename Stat>
UEdgeSet threshold_pairs(const std::vector<WienerField>& fields, const DiscoveryConfig& cfg, double tau, Stat stat) {
  check_fields(fields);
  const auto bins = frequency_sampling_policy(cfg.policy, fields[0].num_bins());
  UEdgeSet out;
  for (Node i = 0; i < fields.size(); ++i)
    for (Node j = 0; j < fields.size(); ++j)
      if (i != j && max_bin(fields[i], j, bins, stat) > tau) out.insert(make_uedge(i, j));
  return out;
}

// max-bin |W_{i . [j, rest]}[j]| solved only at the policy bins.
double partial_statistic(const SpectralMatrixField& phi, Node i, Node j, const std::vector<Node>& rest,
                         const std::vector<std::size_t>& bins, const DiscoveryConfig& cfg) {
  std::vector<Node> cond;
  cond.push_back(j);
  cond.insert(cond.end(), rest.begin(), rest.end());
  const auto m = static_cast<Eigen::Index>(cond.size());
  WienerOptions opts;
  opts.floor = cfg.floor;
  Eigen::MatrixXcd block(m, m);
  Eigen::VectorXcd rhs(m);
  double best = 0.0;
  std::size_t used = 0;
  for (std::size_t k : bins) {
    const auto& p = phi.phi[k];
    for (Eigen::Index a = 0; a < m; ++a) {
      const auto ca = static_cast<Eigen::Index>(cond[a]);
      rhs(a) = p(static_cast<Eigen::Index>(i), ca);
      for (Eigen::Index b = 0; b < m; ++b) block(a, b) = p(ca, static_cast<Eigen::Index>(cond[b]));
    }
    BinSolution s = solve_wiener_bin(block, rhs, k, opts);
    if (s.regularized) continue;
    best = std::max(best, std::abs(s.w(0)));
    ++used;
  }
  if (used == 0) throw ConditioningError("every examined bin is degenerate: " + join_bins(bins), bins);
  return best;
}

void check_ensemble(const SpectralEnsemble& ens) {
  if (ens.num_segments() < ens.n() + 2)
    throw ArgumentError("ensemble needs R >= n + 2 segments, got R = " + std::to_string(ens.num_segments()));
}

void for_each_subset(const std::vector<Node>& pool, std::size_t size, std::vector<Node>& current, std::size_t start,
                     std::set<std::vector<Node>>& out) {
  if (current.size() == size) {
    out.insert(current);
    return;
  }
  for (std::size_t k = start; k < pool.size(); ++k) {
    current.push_back(pool[k]);
    for_each_subset(pool, size, current, k + 1, out);
    current.pop_back();
  }
}

std::set<std::vector<Node>> subsets_of_size(const NodeSet& pool, Node exclude, std::size_t size) {
  std::vector<Node> items;
  for (Node v : pool)
    if (v != exclude) items.push_back(v);
  std::set<std::vector<Node>> out;
  if (items.size() < size) return out;
  std::vector<Node> current;
  for_each_subset(items, size, current, 0, out);
  return out;
}

}  // namespace

UEdgeSet kin_edges(const std::vector<WienerField>& fields, const DiscoveryConfig& cfg) {
  cfg.check();
  return threshold_pairs(fields, cfg, cfg.tau, [](Complex w) { return std::abs(w); });
}

ImaginarySkeleton skeleton_imaginary(const std::vector<WienerField>& fields, const DiscoveryConfig& cfg) {
  cfg.check();
  ImaginarySkeleton out;
  out.edges = threshold_pairs(fields, cfg, cfg.tau_im, [](Complex w) { return std::abs(w.imag()); });
  out.low_confidence = out.edges.empty() && !kin_edges(fields, cfg).empty();
  return out;
}

UEdgeSet strict_spouses(const UEdgeSet& kin, const UEdgeSet& skeleton) {
  UEdgeSet out;
  std::set_difference(kin.begin(), kin.end(), skeleton.begin(), skeleton.end(), std::inserter(out, out.end()));
  return out;
}

PhaseResult wiener_phase_cpdag(const SpectralMatrixField& phi, const DiscoveryConfig& cfg) {
  PhaseResult out;
  const std::size_t n = phi.n;
  auto fields = full_wiener_fields(phi, cfg);
  out.wiener_fields = n;
  out.kin = kin_edges(fields, cfg);
  auto skel = skeleton_imaginary(fields, cfg);
  out.skeleton = skel.edges;
  out.low_confidence = skel.low_confidence;
  out.spouses = strict_spouses(out.kin, out.skeleton);
  const auto bins = frequency_sampling_policy(cfg.policy, phi.num_bins());

  for (const auto& [i, j] : out.spouses) {
    std::vector<Node> candidates;
    for (Node c = 0; c < n; ++c)
      if (c != i && c != j && out.skeleton.count(make_uedge(i, c)) && out.skeleton.count(make_uedge(j, c)))
        candidates.push_back(c);
    out.candidate_checks += candidates.size();
    if (candidates.size() == 1) {
      out.colliders.insert({i, candidates[0], j});
      continue;
    }
    for (Node c : candidates) {
      ++out.collider_wiener_solves;
      if (partial_statistic(phi, i, j, {c}, bins, cfg) > cfg.tau) out.colliders.insert({i, c, j});
    }
  }

  std::set<Edge> proposed;
  for (const auto& col : out.colliders) {
    proposed.insert({col.a, col.c});
    proposed.insert({col.b, col.c});
  }
  out.cpdag.n = n;
  for (const auto& [u, v] : proposed) {
    if (proposed.count({v, u})) {
      out.orientation_conflicts.insert(make_uedge(u, v));
      continue;
    }
    out.cpdag.directed.insert({u, v});
  }
  for (const auto& e : out.skeleton)
    if (!out.cpdag.directed.count({e.first, e.second}) && !out.cpdag.directed.count({e.second, e.first}))
      out.cpdag.undirected.insert(e);
  return out;
}

PhaseResult wiener_phase_cpdag(const SpectralEnsemble& ens, const DiscoveryConfig& cfg) {
  check_ensemble(ens);
  return wiener_phase_cpdag(estimate_psd_ensemble(ens), cfg);
}

PcResult wiener_pc(const SpectralMatrixField& phi, const DiscoveryConfig& cfg) {
  cfg.check();
  const std::size_t n = phi.n;
  if (n < 2) throw ArgumentError("discovery needs at least two nodes");
  const auto bins = frequency_sampling_policy(cfg.policy, phi.num_bins());
  const std::size_t q_max = cfg.q_max ? *cfg.q_max : n - 2;
  PcResult out;

  std::vector<NodeSet> adj(n);
  for (Node i = 0; i < n; ++i)
    for (Node j = 0; j < n; ++j)
      if (i != j) adj[i].insert(j);

  for (std::size_t level = 0;; ++level) {
    const std::vector<NodeSet> snapshot = adj;  // PC-stable: sets frozen per level
    bool eligible = false;
    for (Node i = 0; i < n; ++i) {
      for (Node j = i + 1; j < n; ++j) {
        if (!adj[i].count(j)) continue;
        auto sets = subsets_of_size(snapshot[i], j, level);
        auto more = subsets_of_size(snapshot[j], i, level);
        sets.insert(more.begin(), more.end());
        if (sets.empty()) continue;
        eligible = true;
        if (level > q_max) break;
        for (const auto& s : sets) {
          ++out.ci_tests;
          if (partial_statistic(phi, i, j, s, bins, cfg) <= cfg.tau) {
            adj[i].erase(j);
            adj[j].erase(i);
            out.sepsets[make_uedge(i, j)] = NodeSet(s.begin(), s.end());
            break;
          }
        }
      }
      if (eligible && level > q_max) break;
    }
    if (!eligible) break;
    if (level > q_max) {
      out.partial = true;
      break;
    }
  }

  std::set<Edge> directed;
  for (Node i = 0; i < n; ++i)
    for (Node j = i + 1; j < n; ++j) {
      if (adj[i].count(j)) continue;
      const NodeSet& sep = out.sepsets[make_uedge(i, j)];
      for (Node c : adj[i]) {
        if (!adj[j].count(c) || sep.count(c)) continue;
        for (Node a : {i, j})
          if (!directed.count({c, a})) directed.insert({a, c});
      }
    }
  out.cpdag.n = n;
  out.cpdag.directed = directed;
  for (Node i = 0; i < n; ++i)
    for (Node j : adj[i])
      if (i < j && !directed.count({i, j}) && !directed.count({j, i})) out.cpdag.undirected.insert({i, j});
  apply_meek_rules(out.cpdag);
  return out;
}

PcResult wiener_pc(const SpectralEnsemble& ens, const DiscoveryConfig& cfg) {
  check_ensemble(ens);
  return wiener_pc(estimate_psd_ensemble(ens), cfg);
}

std::vector<PhaseStat> phase_diagnostics(const std::vector<WienerField>& fields,
                                         const std::vector<std::pair<Node, Node>>& pairs, const DiscoveryConfig& cfg) {
  cfg.check();
  check_fields(fields);
  std::vector<PhaseStat> out;
  for (const auto& [i, j] : pairs) {
    if (i >= fields.size() || j >= fields.size() || i == j) throw ArgumentError("invalid node pair for diagnostics");
    PhaseStat st;
    st.i = i;
    st.j = j;
    const WienerField& f = fields[i];
    const auto row = static_cast<Eigen::Index>(f.index_of(j));
    Complex resultant(0.0, 0.0);
    for (std::size_t k = 0; k < f.num_bins(); ++k) {
      const Complex w = f.coeffs(row, static_cast<Eigen::Index>(k));
      if (f.flagged(k) || w == Complex(0.0, 0.0)) continue;
      resultant += w / std::abs(w);
      ++st.bins_used;
    }
    if (st.bins_used > 0) {
      st.available = true;
      const double rbar = std::min(1.0, std::abs(resultant) / static_cast<double>(st.bins_used));
      st.mean = std::arg(resultant);
      st.std = rbar > 0.0 ? std::min(std::numbers::pi, std::sqrt(-2.0 * std::log(rbar))) : std::numbers::pi;
      st.spurious = st.std < cfg.sigma_split;
    }
    out.push_back(st);
  }
  return out;
}

}  // namespace spectral_causal
