#include "spectral_causal/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "spectral_causal/errors.hpp"

namespace spectral_causal {

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading '" + path + "'");
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

Json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ArgumentError("'" + source + "' is not valid JSON: " + e.what());
  }
}

Json read_json_file(const std::string& path) { return parse_json_text(read_text_file(path), path); }

void write_json_file(const std::string& path, const Json& j) { write_text_file(path, j.dump(2) + "\n"); }

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

template <typename T>
T field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ArgumentError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ArgumentError(std::string("field '") + key + "' has the wrong type: " + e.what());
  }
}

Eigen::MatrixXd matrix_from(const Json& j, const char* key, std::size_t rows, std::size_t cols) {
  auto v = field<std::vector<std::vector<double>>>(j, key);
  if (v.size() != rows) throw StructuralError(std::string("'") + key + "' must have " + std::to_string(rows) + " rows");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (v[r].size() != cols)
      throw StructuralError(std::string("'") + key + "' row " + std::to_string(r) + " must have " +
                            std::to_string(cols) + " entries");
    for (std::size_t c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v[r][c];
  }
  return m;
}

Json rows_of(const Eigen::MatrixXd& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

Json complex_json(Complex z) { return {{"re", z.real()}, {"im", z.imag()}}; }

Json complex_list(const std::vector<Complex>& v) {
  Json out = Json::array();
  for (const auto& z : v) out.push_back(complex_json(z));
  return out;
}

Json node_list(const NodeSet& s) { return Json(std::vector<Node>(s.begin(), s.end())); }

Json report_json(const AdmissibilityReport& r) { return {{"admissible", r.admissible}, {"violated", r.violated}}; }

}  // namespace

Json to_json(const ArSpec& spec) {
  Json lags = rows_of(spec.self_lags);
  Json gains = rows_of(spec.cross_gains);
  std::vector<double> noise(spec.noise_std.data(), spec.noise_std.data() + spec.noise_std.size());
  return {{"n", spec.n()}, {"self_lags", lags}, {"cross_gains", gains}, {"noise_std", noise}};
}

ArSpec ar_spec_from_json(const Json& j) {
  const auto n = field<std::size_t>(j, "n");
  if (n == 0) throw StructuralError("AR spec needs n >= 1");
  ArSpec spec;
  spec.self_lags = matrix_from(j, "self_lags", n, kArLags);
  spec.cross_gains = matrix_from(j, "cross_gains", n, n);
  auto noise = field<std::vector<double>>(j, "noise_std");
  if (noise.size() != n) throw StructuralError("'noise_std' must have n entries");
  spec.noise_std = Eigen::Map<Eigen::VectorXd>(noise.data(), static_cast<Eigen::Index>(n));
  spec.check();
  return spec;
}

Json to_json(const LdimSpec& spec) {
  const std::size_t n = spec.n(), N = spec.grid().size();
  Json h = Json::array();
  for (std::size_t k = 0; k < N; ++k) {
    Json m = Json::array();
    for (std::size_t r = 0; r < n; ++r) {
      Json row = Json::array();
      for (std::size_t c = 0; c < n; ++c) {
        const Complex z = spec.h().values[k](static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        row.push_back({{"re", z.real()}, {"im", z.imag()}});
      }
      m.push_back(row);
    }
    h.push_back(m);
  }
  return {{"n", n}, {"num_bins", N}, {"h", h}, {"noise", rows_of(spec.noise().diag)}};
}

bool is_ldim_json(const Json& j) { return j.is_object() && j.contains("h"); }

LdimSpec ldim_from_json(const Json& j) {
  const auto n = field<std::size_t>(j, "n");
  const auto N = field<std::size_t>(j, "num_bins");
  if (n == 0 || N == 0) throw StructuralError("LDIM spec needs n >= 1 and num_bins >= 1");
  const Json& h = j.at("h");
  if (!h.is_array() || h.size() != N) throw StructuralError("'h' must have num_bins entries");
  TransferMatrixField tf = TransferMatrixField::zeros(n, N);
  for (std::size_t k = 0; k < N; ++k) {
    if (!h[k].is_array() || h[k].size() != n) throw StructuralError("'h' entries must be n x n");
    for (std::size_t r = 0; r < n; ++r) {
      if (!h[k][r].is_array() || h[k][r].size() != n) throw StructuralError("'h' entries must be n x n");
      for (std::size_t c = 0; c < n; ++c) {
        const Json& z = h[k][r][c];
        Complex v;
        if (z.is_object() && z.contains("re") && z.contains("im")) {
          v = Complex(z.at("re").get<double>(), z.at("im").get<double>());
        } else if (z.is_array() && z.size() == 2) {
          v = Complex(z[0].get<double>(), z[1].get<double>());
        } else {
          throw StructuralError("'h' values must be {\"re\", \"im\"} objects");
        }
        tf.values[k](static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
      }
    }
  }
  NoisePsd noise;
  if (j.contains("noise") && j.at("noise").is_number()) {
    noise = NoisePsd::constant(n, N, j.at("noise").get<double>());
  } else {
    noise.diag = matrix_from(j, "noise", n, N);
  }
  const double tol = j.contains("edge_tolerance") ? field<double>(j, "edge_tolerance") : kEdgeTolerance;
  return LdimSpec(FrequencyGrid(N), std::move(tf), std::move(noise), tol);
}

Json to_json(const CausalGraph& g) {
  Json edges = Json::array();
  for (const auto& [u, v] : g.edges()) edges.push_back({u, v});
  return {{"n", g.size()}, {"edges", edges}};
}

CausalGraph graph_from_json(const Json& j) {
  const auto n = field<std::size_t>(j, "n");
  auto edges = field<std::vector<std::vector<std::size_t>>>(j, "edges");
  CausalGraph g(n);
  for (const auto& e : edges) {
    if (e.size() != 2) throw ArgumentError("edges must be [u, v] pairs");
    g.add_edge(e[0], e[1]);
  }
  return g;
}

Json to_json(const Cpdag& g) {
  Json directed = Json::array(), undirected = Json::array();
  for (const auto& [u, v] : g.directed) directed.push_back({u, v});
  for (const auto& [a, b] : g.undirected) undirected.push_back({a, b});
  return {{"n", g.n}, {"directed", directed}, {"undirected", undirected}};
}

Cpdag cpdag_from_json(const Json& j) {
  Cpdag g;
  g.n = field<std::size_t>(j, "n");
  for (const auto& e : field<std::vector<std::vector<std::size_t>>>(j, "directed")) {
    if (e.size() != 2 || e[0] >= g.n || e[1] >= g.n) throw ArgumentError("bad directed edge");
    g.directed.insert({e[0], e[1]});
  }
  for (const auto& e : field<std::vector<std::vector<std::size_t>>>(j, "undirected")) {
    if (e.size() != 2 || e[0] >= g.n || e[1] >= g.n) throw ArgumentError("bad undirected edge");
    g.undirected.insert(make_uedge(e[0], e[1]));
  }
  return g;
}

Json to_json(const PhaseResult& r) {
  Json j = to_json(r.cpdag);
  Json colliders = Json::array();
  for (const auto& c : r.colliders) colliders.push_back({c.a, c.c, c.b});
  j["colliders"] = colliders;
  j["sepsets"] = Json::object();
  auto pairs = [](const UEdgeSet& s) {
    Json out = Json::array();
    for (const auto& [a, b] : s) out.push_back({a, b});
    return out;
  };
  j["kin"] = pairs(r.kin);
  j["skeleton"] = pairs(r.skeleton);
  j["strict_spouses"] = pairs(r.spouses);
  j["orientation_conflicts"] = pairs(r.orientation_conflicts);
  j["low_confidence"] = r.low_confidence;
  j["counters"] = {{"wiener_fields", r.wiener_fields},
                   {"candidate_checks", r.candidate_checks},
                   {"collider_wiener_solves", r.collider_wiener_solves}};
  return j;
}

Json to_json(const PcResult& r) {
  Json j = to_json(r.cpdag);
  j["colliders"] = Json::array();
  Json sep = Json::object();
  for (const auto& [e, s] : r.sepsets) sep[std::to_string(e.first) + "," + std::to_string(e.second)] = node_list(s);
  j["sepsets"] = sep;
  j["ci_tests"] = r.ci_tests;
  j["partial"] = r.partial;
  return j;
}

Json to_json(const WienerField& f) {
  Json coeffs = Json::array();
  for (Eigen::Index c = 0; c < f.coeffs.rows(); ++c) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < f.coeffs.cols(); ++k) row.push_back(complex_json(f.coeffs(c, k)));
    coeffs.push_back(row);
  }
  return {{"target", f.target}, {"conditioning", f.conditioning}, {"num_bins", f.num_bins()},
          {"coeffs", coeffs},   {"flags", f.flags}};
}

Json to_json(const DirectEffectEstimate& e) {
  Json j;
  j["alpha"] = complex_list(e.alpha);
  j["u"] = e.u;
  j["y"] = e.y;
  j["adjustment"] = e.adjustment;
  j["num_bins"] = e.alpha.size();
  j["flags"] = e.flags;
  j["admissibility"] = report_json(e.report);
  return j;
}

Json to_json(const AdjustedDensity& d) {
  Json comps = Json::array();
  for (const auto& c : d.components)
    comps.push_back({{"weight", c.weight}, {"mean", {c.mean.real(), c.mean.imag()}}, {"variance", c.variance}});
  return {{"mean", {d.mean.real(), d.mean.imag()}}, {"variance", d.variance}, {"components", comps}};
}

Json to_json(const InterventionContrast& c) {
  Json nodes = Json::array();
  for (const auto& nc : c.nodes)
    nodes.push_back({{"node", nc.node},
                     {"affected", nc.affected},
                     {"max_z", nc.max_z},
                     {"argmax_bin", nc.argmax_bin},
                     {"argmax_channel", nc.argmax_imag ? "im" : "re"},
                     {"re_means", {nc.re_means_1, nc.re_means_2}},
                     {"im_means", {nc.im_means_1, nc.im_means_2}},
                     {"z_re", nc.z_re},
                     {"z_im", nc.z_im}});
  return {{"intervened", c.intervened}, {"labels", {c.label_1, c.label_2}}, {"segments", c.segments},
          {"segment_length", c.segment_length}, {"z_crit", c.z_crit}, {"nodes", nodes}};
}

Json to_json(const BoundParams& p) {
  return {{"n", p.n},   {"T", p.T},   {"L", p.L},   {"C", p.C}, {"decay_base", p.decay_base},
          {"M", p.M}, {"c1", p.c1}, {"epsilon", p.epsilon}};
}

Json to_json(const ScalingReport& r) {
  return {{"method", r.method},
          {"axis", r.axis},
          {"values", r.values},
          {"median_seconds", r.median_seconds},
          {"tests", r.tests},
          {"slope", r.fit.slope},
          {"slope_ci", {r.fit.ci_low, r.fit.ci_high}},
          {"claimed_exponent", r.claimed_exponent},
          {"verdict", r.verdict}};
}

void write_panel_csv(const std::string& path, const TimeSeriesPanel& panel) {
  const bool streaming = panel.is_streaming();
  std::string text;
  text.reserve(panel.num_segments() * panel.segment_length() * panel.n() * 24 + 64);
  text += "segment,t";
  for (std::size_t i = 0; i < panel.n(); ++i) text += ",node_" + std::to_string(i);
  text += '\n';
  char buf[40];
  for (std::size_t r = 0; r < panel.num_segments(); ++r) {
    const auto& seg = panel.segment(r);
    for (std::size_t t = 0; t < panel.segment_length(); ++t) {
      text += std::to_string(r) + "," + std::to_string(t);
      for (std::size_t i = 0; i < panel.n(); ++i) {
        std::snprintf(buf, sizeof buf, ",%.17g", seg(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)));
        text += buf;
      }
      text += '\n';
    }
  }
  write_text_file(path, text);
  const PanelMeta& m = panel.meta();
  Json meta = {{"layout", streaming ? "streaming" : "segmented"},
               {"n", panel.n()},
               {"segments", panel.num_segments()},
               {"length", panel.segment_length()},
               {"seed", m.seed},
               {"spec_hash", m.spec_hash}};
  if (m.intervention)
    meta["intervention"] = {{"node", m.intervention->node}, {"sequence", m.intervention->sequence}};
  write_json_file(path + ".meta.json", meta);
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(std::string_view s, std::size_t line_no) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ArgumentError("line " + std::to_string(line_no) + ": '" + std::string(s) + "' is not a number");
  return v;
}

}  // namespace

TimeSeriesPanel read_panel_csv(const std::string& path) {
  const std::string text = read_text_file(path);
  std::vector<std::string_view> lines;
  std::string_view all(text);
  std::size_t start = 0;
  while (start < all.size()) {
    std::size_t end = all.find('\n', start);
    if (end == std::string_view::npos) end = all.size();
    std::string_view line = all.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.push_back(line);
    start = end + 1;
  }
  if (lines.empty()) throw ArgumentError("panel '" + path + "' is empty");
  const auto header = split_commas(lines[0]);
  if (header.size() < 2 || header[0] != "segment" || header[1] != "t")
    throw ArgumentError("panel header must start with 'segment,t'");
  constexpr std::size_t lead = 2;
  const std::size_t n = header.size() - lead;
  if (n == 0) throw ArgumentError("panel has no series columns");
  if (lines.size() < 2) throw ArgumentError("panel '" + path + "' has no samples");

  std::vector<std::vector<std::vector<double>>> segs;  // [segment][t][node]
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto cells = split_commas(lines[li]);
    if (cells.size() != header.size()) throw ArgumentError("line " + std::to_string(li + 1) + " has the wrong width");
    const auto r = static_cast<std::size_t>(parse_double(cells[0], li + 1));
    const auto t = static_cast<std::size_t>(parse_double(cells[1], li + 1));
    if (r > segs.size()) throw ArgumentError("segments must appear in order");
    if (r == segs.size()) segs.emplace_back();
    if (t != segs[r].size()) throw ArgumentError("time index out of order at line " + std::to_string(li + 1));
    std::vector<double> row(n);
    for (std::size_t i = 0; i < n; ++i) row[i] = parse_double(cells[lead + i], li + 1);
    segs[r].push_back(std::move(row));
  }
  std::vector<Eigen::MatrixXd> mats;
  for (const auto& s : segs) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(s.size()));
    for (std::size_t t = 0; t < s.size(); ++t)
      for (std::size_t i = 0; i < n; ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = s[t][i];
    mats.push_back(std::move(m));
  }
  PanelMeta meta;
  // Without a sidecar a single segment is read as a streaming panel.
  bool streaming = mats.size() == 1;
  std::ifstream probe(path + ".meta.json");
  if (probe) {
    Json mj = read_json_file(path + ".meta.json");
    if (mj.contains("layout")) streaming = mj.at("layout").get<std::string>() == "streaming";
    if (mj.contains("seed")) meta.seed = mj.at("seed").get<std::uint64_t>();
    if (mj.contains("spec_hash")) meta.spec_hash = mj.at("spec_hash").get<std::string>();
    if (mj.contains("intervention"))
      meta.intervention = InterventionSpec{mj["intervention"].at("node").get<Node>(),
                                           mj["intervention"].at("sequence").get<std::vector<double>>()};
  }
  if (streaming && mats.size() != 1) throw ArgumentError("streaming panel must hold a single segment");
  if (streaming) return TimeSeriesPanel::streaming(std::move(mats[0]), std::move(meta));
  return TimeSeriesPanel::segmented(std::move(mats), std::move(meta));
}

}  // namespace spectral_causal
