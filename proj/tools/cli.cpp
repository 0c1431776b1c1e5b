#include "cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>

#include "spectral_causal/bench.hpp"
#include "spectral_causal/bounds.hpp"
#include "spectral_causal/discovery.hpp"
#include "spectral_causal/effects.hpp"
#include "spectral_causal/errors.hpp"
#include "spectral_causal/io.hpp"
#include "spectral_causal/model.hpp"
#include "spectral_causal/simulate.hpp"
#include "spectral_causal/spectral.hpp"

namespace spectral_causal {

namespace {

struct Options {
  std::uint64_t seed = 0;
  std::string out;

  // simulate
  std::string spec;
  std::string mode = "ar";
  std::optional<std::size_t> T, R, N, burn_in, node;
  std::string seq, seq2;

  // discover
  std::string panel;
  std::string algo = "phase";
  double tau = 0.1, tau_im = 0.1, sigma_split = 1.0;
  std::string freq_policy = "all";
  std::optional<std::size_t> q_max, segment;

  // effect
  std::string graph, edge, adjust;
  bool backdoor = false, frontdoor = false;
  std::optional<std::size_t> cause, outcome;
  std::string w_star = "1,0";
  std::size_t bin = 1, bins = 64, strata = kDefaultStrata;

  // intervene
  double z_crit = kDefaultZCrit;

  // bound
  std::string kind;
  double n = 0, T_bound = 0, L = 0, C = 1, decay_base = 0.5, M = 1, epsilon = 0.1;
  std::optional<double> c1, confidence;
  std::optional<std::size_t> block;

  // bench
  std::string axis = "N", values, family = "collider", qs = "2,3,4,5,6";
  std::size_t bench_n = 4, bench_N = 8, bench_T = 4096, reps = 3;
};

struct RunContext {
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
};

std::vector<double> parse_numbers(const std::string& text, const std::string& what) {
  std::string cleaned = text;
  for (char& c : cleaned)
    if (c == ',' || c == '[' || c == ']' || c == ';') c = ' ';
  std::istringstream in(cleaned);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ArgumentError(what + ": '" + tok + "' is not a number");
    }
  }
  return out;
}

std::vector<std::size_t> parse_indices(const std::string& text, const std::string& what) {
  std::vector<std::size_t> out;
  for (double v : parse_numbers(text, what)) {
    if (!(v >= 0.0) || v != std::floor(v)) throw ArgumentError(what + " must be nonnegative integers");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

template <typename T>
T required(const std::optional<T>& v, const std::string& flag) {
  if (!v) throw ArgumentError("missing required flag " + flag);
  return *v;
}

void require_text(const std::string& v, const std::string& flag) {
  if (v.empty()) throw ArgumentError("missing required flag " + flag);
}

void emit_json(const Options& o, RunContext& ctx, const Json& j, std::ostream& out) {
  if (o.out.empty()) {
    out << j.dump(2) << "\n";
    return;
  }
  write_json_file(o.out, j);
  ctx.outputs.push_back(o.out);
}

InterventionSpec load_intervention(std::size_t node, const std::string& path, RunContext& ctx) {
  ctx.inputs.push_back(path);
  InterventionSpec iv;
  iv.node = node;
  iv.sequence = parse_numbers(read_text_file(path), "sequence file '" + path + "'");
  if (iv.sequence.empty()) throw ArgumentError("sequence file '" + path + "' is empty");
  return iv;
}

void cmd_simulate(const Options& o, RunContext& ctx) {
  require_text(o.spec, "--spec");
  require_text(o.out, "--out");
  ctx.inputs.push_back(o.spec);
  const std::string spec_text = read_text_file(o.spec);
  const Json sj = parse_json_text(spec_text, o.spec);
  std::optional<InterventionSpec> iv;
  if (o.node || !o.seq.empty()) {
    require_text(o.seq, "--seq");
    iv = load_intervention(required(o.node, "--node"), o.seq, ctx);
  }
  TimeSeriesPanel panel = [&] {
    if (o.mode == "circular") {
      if (iv) throw ArgumentError("circular mode does not support interventions");
      const std::size_t R = required(o.R, "--R");
      if (is_ldim_json(sj)) {
        LdimSpec ldim = ldim_from_json(sj);
        if (o.N && *o.N != ldim.grid().size()) throw ArgumentError("--N disagrees with the LDIM grid");
        return simulate_circular(ldim, R, o.seed);
      }
      return simulate_circular(ar_to_ldim(ar_spec_from_json(sj), required(o.N, "--N")), R, o.seed);
    }
    if (is_ldim_json(sj)) throw ArgumentError("mode '" + o.mode + "' needs an AR spec");
    const ArSpec spec = ar_spec_from_json(sj);
    if (o.mode == "ar") {
      const std::size_t T = required(o.T, "--T");
      if (iv) return apply_intervention(spec, ArRun{ArRun::Mode::streaming, T, 1, o.seed, o.burn_in}, *iv);
      return simulate_ar(spec, T, o.seed, o.burn_in);
    }
    if (o.mode == "restart") {
      const std::size_t R = required(o.R, "--R"), N = required(o.N, "--N");
      if (iv) return apply_intervention(spec, ArRun{ArRun::Mode::restart, N, R, o.seed, std::nullopt}, *iv);
      return restart_and_record(spec, R, N, o.seed);
    }
    throw ArgumentError("unknown mode '" + o.mode + "' (ar, circular, restart)");
  }();
  panel.meta().spec_hash = fnv1a_hex(spec_text);
  write_panel_csv(o.out, panel);
  ctx.outputs.push_back(o.out);
  ctx.outputs.push_back(o.out + ".meta.json");
}

FrequencyPolicy parse_policy(const std::string& text, std::uint64_t seed) {
  FrequencyPolicy p;
  if (text == "all") return p;
  if (text == "single" || text.rfind("single:", 0) == 0) {
    p.kind = FrequencyPolicy::Kind::single_bin;
    p.seed = seed;
    if (text.size() > 7) {
      auto v = parse_indices(text.substr(7), "--freq-policy seed");
      if (v.size() != 1) throw ArgumentError("--freq-policy single:SEED takes one seed");
      p.seed = v[0];
    }
    return p;
  }
  if (text.rfind("bins:", 0) == 0) {
    p.kind = FrequencyPolicy::Kind::bins;
    p.bins = parse_indices(text.substr(5), "--freq-policy bins");
    return p;
  }
  throw ArgumentError("--freq-policy must be all, single[:SEED] or bins:k1,k2,...");
}

SpectralEnsemble load_ensemble(const Options& o, RunContext& ctx) {
  ctx.inputs.push_back(o.panel);
  TimeSeriesPanel panel = read_panel_csv(o.panel);
  if (panel.is_streaming()) {
    if (!o.segment) throw ArgumentError("panel layout is streaming; pass --segment N or use a segmented panel");
    panel = panel.resegment(*o.segment);
  }
  return segment_fft(panel);
}

void cmd_discover(const Options& o, RunContext& ctx, std::ostream& out) {
  require_text(o.panel, "--panel");
  DiscoveryConfig cfg;
  cfg.tau = o.tau;
  cfg.tau_im = o.tau_im;
  cfg.sigma_split = o.sigma_split;
  cfg.policy = parse_policy(o.freq_policy, o.seed);
  cfg.q_max = o.q_max;
  cfg.check();
  const SpectralEnsemble ens = load_ensemble(o, ctx);
  if (o.algo == "phase") {
    PhaseResult r = wiener_phase_cpdag(ens, cfg);
    emit_json(o, ctx, to_json(r), out);
    if (!o.out.empty()) {
      auto fields = full_wiener_fields(estimate_psd_ensemble(ens), cfg);
      std::vector<std::pair<Node, Node>> pairs;
      for (const auto& [a, b] : r.kin) {
        pairs.emplace_back(a, b);
        pairs.emplace_back(b, a);
      }
      std::string csv = "i,j,phase_mean,phase_std,classified_spurious\n";
      for (const auto& st : phase_diagnostics(fields, pairs, cfg)) {
        csv += std::to_string(st.i) + "," + std::to_string(st.j) + ",";
        csv += st.available ? format_double(st.mean) + "," + format_double(st.std) + "," +
                                  (st.spurious ? "true" : "false")
                            : std::string("nan,nan,unavailable");
        csv += "\n";
      }
      write_text_file(o.out + ".diagnostics.csv", csv);
      ctx.outputs.push_back(o.out + ".diagnostics.csv");
    }
  } else if (o.algo == "pc") {
    emit_json(o, ctx, to_json(wiener_pc(ens, cfg)), out);
  } else {
    throw ArgumentError("unknown --algo '" + o.algo + "' (phase, pc)");
  }
}

NodeSet parse_set(const std::string& text) {
  auto v = parse_indices(text, "--adjust");
  return NodeSet(v.begin(), v.end());
}

Complex parse_complex(const std::string& text) {
  auto v = parse_numbers(text, "--w-star");
  if (v.size() == 1) return {v[0], 0.0};
  if (v.size() != 2) throw ArgumentError("--w-star takes re or re,im");
  return {v[0], v[1]};
}

void cmd_effect(const Options& o, RunContext& ctx, std::ostream& out) {
  if (o.spec.empty() == o.panel.empty()) throw ArgumentError("pass exactly one of --spec or --panel");
  const int modes = int(!o.edge.empty()) + int(o.backdoor) + int(o.frontdoor);
  if (modes != 1) throw ArgumentError("pass exactly one of --edge, --backdoor, --frontdoor");
  const NodeSet z = parse_set(o.adjust);

  std::optional<SpectralMatrixField> phi;
  std::optional<SpectralEnsemble> ens;
  CausalGraph g;
  if (!o.spec.empty()) {
    ctx.inputs.push_back(o.spec);
    const Json sj = read_json_file(o.spec);
    LdimSpec ldim = is_ldim_json(sj) ? ldim_from_json(sj) : ar_to_ldim(ar_spec_from_json(sj), o.bins);
    g = ldim.graph();
    phi = closed_form_psd(ldim);
  } else {
    require_text(o.graph, "--graph");
    ctx.inputs.push_back(o.graph);
    g = graph_from_json(read_json_file(o.graph));
    ens = load_ensemble(o, ctx);
  }

  if (!o.edge.empty()) {
    auto uy = parse_indices(o.edge, "--edge");
    if (uy.size() != 2) throw ArgumentError("--edge takes u,y");
    DirectEffectEstimate e = phi ? estimate_direct_effect(g, *phi, uy[0], uy[1], z)
                                 : estimate_direct_effect(g, *ens, uy[0], uy[1], z);
    Json j = to_json(e);
    j["criterion"] = "single-door";
    emit_json(o, ctx, j, out);
    return;
  }
  const Node w = required(o.cause, "--cause"), y = required(o.outcome, "--outcome");
  const Complex w_star = parse_complex(o.w_star);
  AdjustedDensity d;
  if (o.backdoor) {
    d = phi ? backdoor_adjust(g, *phi, w, y, z, w_star, o.bin) : backdoor_adjust(g, *ens, w, y, z, w_star, o.bin, o.strata);
  } else {
    d = phi ? frontdoor_adjust(g, *phi, w, y, z, w_star, o.bin)
            : frontdoor_adjust(g, *ens, w, y, z, w_star, o.bin, o.strata);
  }
  Json j = to_json(d);
  j["criterion"] = o.backdoor ? "back-door" : "front-door";
  j["cause"] = w;
  j["outcome"] = y;
  j["adjustment"] = std::vector<Node>(z.begin(), z.end());
  j["bin"] = o.bin;
  j["w_star"] = {w_star.real(), w_star.imag()};
  j["source"] = phi ? "analytic" : "sampled";
  emit_json(o, ctx, j, out);
}

void cmd_intervene(const Options& o, RunContext& ctx, std::ostream& out) {
  require_text(o.spec, "--spec");
  require_text(o.seq, "--seq");
  require_text(o.seq2, "--seq2");
  ctx.inputs.push_back(o.spec);
  const Json sj = read_json_file(o.spec);
  if (is_ldim_json(sj)) throw ArgumentError("intervene needs an AR spec");
  const ArSpec spec = ar_spec_from_json(sj);
  const Node node = required(o.node, "--node");
  if (node >= spec.n()) throw ArgumentError("--node " + std::to_string(node) + " out of range");
  const InterventionSpec iv1 = load_intervention(node, o.seq, ctx);
  const InterventionSpec iv2 = load_intervention(node, o.seq2, ctx);
  InterventionContrast c =
      intervention_contrast(spec, iv1, iv2, required(o.R, "--R"), required(o.N, "--N"), o.seed, o.z_crit);
  c.label_1 = o.seq;
  c.label_2 = o.seq2;
  emit_json(o, ctx, to_json(c), out);
}

void cmd_bound(const Options& o, RunContext& ctx, std::ostream& out) {
  BoundParams p;
  p.n = o.n;
  p.T = o.T_bound;
  p.L = o.L;
  p.C = o.C;
  p.decay_base = o.decay_base;
  p.M = o.M;
  p.epsilon = o.epsilon;
  if (!(o.n >= 1.0) || o.n != std::floor(o.n)) throw ArgumentError("--n must be a positive integer");
  const auto nn = static_cast<std::size_t>(o.n);
  p.c1 = o.c1 ? *o.c1 : default_c1(nn, o.block ? *o.block : nn);
  const std::string kind = o.kind.empty() ? "wiener" : o.kind;
  BoundResult r;
  if (kind == "wiener") {
    r = wiener_bound(p);
  } else if (kind == "psd") {
    r = psd_bound(p);
  } else if (kind == "ipsd") {
    r = ipsd_bound(p);
  } else {
    throw ArgumentError("--kind must be wiener, psd or ipsd");
  }
  MinLag lag = min_lag(p);
  Json j = {{"kind", kind},
            {"bound", r.bound},
            {"log_bound", r.log_bound},
            {"active_term", r.quadratic_active ? "quadratic" : "linear"},
            {"L_star", lag.L},
            {"L_star_vacuous", lag.vacuous},
            {"premise_holds", lag.vacuous || p.L >= static_cast<double>(lag.L)},
            {"params", to_json(p)}};
  if (o.confidence) j["sample_complexity"] = sample_complexity(p, *o.confidence);
  emit_json(o, ctx, j, out);
}

std::string csv_rows(const ScalingReport& r) {
  std::string s;
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    s += r.method + "," + r.axis + "," + format_double(r.values[i]) + ",";
    s += i < r.median_seconds.size() ? format_double(r.median_seconds[i]) : "";
    s += ",";
    s += i < r.tests.size() ? format_double(r.tests[i]) : "";
    s += "\n";
  }
  return s;
}

void cmd_bench(const Options& o, RunContext& ctx) {
  require_text(o.out, "--out");
  const std::string kind = o.kind.empty() ? "wiener" : o.kind;
  std::string csv = "method,axis,value,median_seconds,tests\n";
  Json summary;
  if (kind == "wiener") {
    WienerBenchConfig cfg;
    cfg.axis = o.axis;
    cfg.values = o.values.empty() ? std::vector<std::size_t>{2, 4, 8, 16, 32} : parse_indices(o.values, "--values");
    cfg.n = o.bench_n;
    cfg.N = o.bench_N;
    cfg.T = o.bench_T;
    cfg.reps = o.reps;
    cfg.seed = o.seed;
    WienerBench b = bench_wiener(cfg);
    csv += csv_rows(b.time_domain) + csv_rows(b.frequency_domain);
    summary = {{"time_domain", to_json(b.time_domain)},
               {"frequency_domain", to_json(b.frequency_domain)},
               {"ratio", b.ratio},
               {"ratio_increasing", b.ratio_increasing}};
  } else if (kind == "discovery") {
    DiscoveryBench b = bench_discovery(o.family, parse_indices(o.qs, "--qs"), o.seed);
    csv += csv_rows(b.pc) + csv_rows(b.phase);
    summary = {{"w_pc", to_json(b.pc)},
               {"wiener_phase", to_json(b.phase)},
               {"pc_geometric", b.pc_geometric},
               {"phase_quadratic", b.phase_quadratic},
               {"phase_max_ratio", b.phase_max_ratio}};
  } else {
    throw ArgumentError("--kind must be wiener or discovery");
  }
  write_text_file(o.out + ".csv", csv);
  ctx.outputs.push_back(o.out + ".csv");
  write_json_file(o.out + ".json", summary);
  ctx.outputs.push_back(o.out + ".json");
}

std::string config_hash(const CLI::App* sub) {
  std::map<std::string, std::vector<std::string>> canonical;
  for (const CLI::Option* opt : sub->get_options()) {
    // Output location does not change what is computed.
    if (opt->count() == 0 || opt->get_name() == "--help" || opt->get_name() == "--out") continue;
    canonical[opt->get_name()] = opt->results();
  }
  Json j = canonical;
  return fnv1a_hex(sub->get_name() + "\n" + j.dump());
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Frequency-domain causal discovery and effect estimation for LDIM time series",
               "spectral-causal"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  auto common = [&](CLI::App* s) {
    s->add_option("--seed", o.seed, "Root seed for all randomness");
    s->add_option("--out", o.out, "Output path");
  };

  auto* sim = app.add_subcommand("simulate", "Generate a panel from an AR or LDIM spec");
  common(sim);
  sim->add_option("--spec", o.spec, "Spec JSON")->required();
  sim->add_option("--mode", o.mode, "ar | circular | restart");
  sim->add_option("--T", o.T, "Streaming length");
  sim->add_option("--R", o.R, "Number of segments");
  sim->add_option("--N", o.N, "Segment length / grid size");
  sim->add_option("--burn-in", o.burn_in, "Discarded warm-up steps (ar mode)");
  sim->add_option("--node", o.node, "Intervened node");
  sim->add_option("--seq", o.seq, "Intervention sequence file");

  auto* disc = app.add_subcommand("discover", "Recover a CPDAG from a panel");
  common(disc);
  disc->add_option("--panel", o.panel, "Panel CSV")->required();
  disc->add_option("--algo", o.algo, "phase | pc");
  disc->add_option("--tau", o.tau, "Magnitude threshold");
  disc->add_option("--tau-im", o.tau_im, "Imaginary-part threshold");
  disc->add_option("--sigma-split", o.sigma_split, "Phase-std split (radians)");
  disc->add_option("--freq-policy", o.freq_policy, "all | single[:SEED] | bins:k1,k2");
  disc->add_option("--q-max", o.q_max, "W-PC conditioning-set cap");
  disc->add_option("--segment", o.segment, "Resegment a streaming panel into blocks of N");

  auto* eff = app.add_subcommand("effect", "Direct effect or adjusted interventional density");
  common(eff);
  eff->add_option("--spec", o.spec, "Spec JSON (analytic spectra)");
  eff->add_option("--panel", o.panel, "Panel CSV (sampled spectra)");
  eff->add_option("--graph", o.graph, "Graph JSON for panel input");
  eff->add_option("--segment", o.segment, "Resegment a streaming panel into blocks of N");
  eff->add_option("--edge", o.edge, "u,y for the single-door estimate");
  eff->add_option("--adjust", o.adjust, "Adjustment set, comma separated");
  eff->add_flag("--backdoor", o.backdoor, "Back-door adjustment");
  eff->add_flag("--frontdoor", o.frontdoor, "Front-door adjustment");
  eff->add_option("--cause", o.cause, "Intervened node w");
  eff->add_option("--outcome", o.outcome, "Outcome node y");
  eff->add_option("--w-star", o.w_star, "Intervention value re[,im]");
  eff->add_option("--bin", o.bin, "Frequency bin");
  eff->add_option("--bins", o.bins, "Grid size when discretizing an AR spec");
  eff->add_option("--strata", o.strata, "Strata for sampled adjustment");

  auto* itv = app.add_subcommand("intervene", "Contrast two interventions on one node");
  common(itv);
  itv->add_option("--spec", o.spec, "AR spec JSON")->required();
  itv->add_option("--node", o.node, "Intervened node")->required();
  itv->add_option("--seq", o.seq, "First intervention sequence file")->required();
  itv->add_option("--seq2", o.seq2, "Second intervention sequence file")->required();
  itv->add_option("--R", o.R, "Segments per arm")->required();
  itv->add_option("--N", o.N, "Segment length")->required();
  itv->add_option("--z-crit", o.z_crit, "Classification threshold");

  auto* bnd = app.add_subcommand("bound", "Evaluate a concentration bound");
  common(bnd);
  bnd->add_option("--kind", o.kind, "wiener | psd | ipsd");
  bnd->add_option("--n", o.n, "Nodes")->required();
  bnd->add_option("--T", o.T_bound, "Samples")->required();
  bnd->add_option("--L", o.L, "Lag window")->required();
  bnd->add_option("--C", o.C, "Autocorrelation scale");
  bnd->add_option("--decay-base", o.decay_base, "Autocorrelation decay base in (0,1)");
  bnd->add_option("--M", o.M, "Spectral bound");
  bnd->add_option("--c1", o.c1, "Max-to-spectral norm constant");
  bnd->add_option("--block", o.block, "|C u {i}| for the default c1");
  bnd->add_option("--epsilon", o.epsilon, "Target error");
  bnd->add_option("--confidence", o.confidence, "Also report the sample size reaching this bound");

  auto* bch = app.add_subcommand("bench", "Scaling benchmarks");
  common(bch);
  bch->add_option("--kind", o.kind, "wiener | discovery");
  bch->add_option("--axis", o.axis, "N | n (wiener)");
  bch->add_option("--values", o.values, "Sweep values, comma separated");
  bch->add_option("--n", o.bench_n, "Nodes (N sweep)");
  bch->add_option("--N", o.bench_N, "Lag depth / segment length (n sweep)");
  bch->add_option("--T", o.bench_T, "Samples");
  bch->add_option("--reps", o.reps, "Repetitions per point");
  bch->add_option("--family", o.family, "collider | matching (discovery)");
  bch->add_option("--qs", o.qs, "q sweep, comma separated (discovery)");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  RunContext ctx;
  const auto start = std::chrono::steady_clock::now();
  int code = 0;
  try {
    const std::string name = sub->get_name();
    if (name == "simulate") cmd_simulate(o, ctx);
    else if (name == "discover") cmd_discover(o, ctx, out);
    else if (name == "effect") cmd_effect(o, ctx, out);
    else if (name == "intervene") cmd_intervene(o, ctx, out);
    else if (name == "bound") cmd_bound(o, ctx, out);
    else if (name == "bench") cmd_bench(o, ctx);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    code = e.exit_code();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    code = 1;
  }
  if (!o.out.empty()) {
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    Json manifest = {{"command", sub->get_name()},
                     {"config_hash", config_hash(sub)},
                     {"seed", o.seed},
                     {"inputs", ctx.inputs},
                     {"outputs", ctx.outputs},
                     {"tool_version", kToolVersion},
                     {"wall_seconds", wall},
                     {"exit_code", code},
                     {"partial", code != 0 && !ctx.outputs.empty()}};
    try {
      write_json_file(o.out + ".manifest.json", manifest);
    } catch (const Error& e) {
      err << "error: " << e.what() << "\n";
      if (code == 0) code = e.exit_code();
    }
  }
  return code;
}

}  // namespace spectral_causal
