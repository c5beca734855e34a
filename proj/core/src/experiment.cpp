#include "bgdsa/experiment.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bgdsa/design.hpp"
#include "bgdsa/digraph.hpp"
#include "bgdsa/engine.hpp"
#include "bgdsa/gossip.hpp"
#include "bgdsa/io.hpp"
#include "bgdsa/kvfile.hpp"
#include "bgdsa/models.hpp"
#include "bgdsa/ode.hpp"
#include "bgdsa/random.hpp"
#include "bgdsa/rate.hpp"

namespace bgdsa {

namespace {

namespace fs = std::filesystem;

// Seed streams that must not collide with the per-replication streams
// 0..reps-1 handed to run_simulation.
constexpr std::uint64_t kGStream = (1ULL << 40) + 1;
constexpr std::uint64_t kDecayStream = (1ULL << 40) + 2;

struct Context {
  KvFile kv;
  fs::path config_dir{};
  std::string hash{};
  std::uint64_t master_seed = 1;
  int reps = 1;
  fs::path out_dir{};
  Variant variant = Variant::AUC;
};

Variant parse_variant(const std::string& text, const std::string& origin) {
  if (text == "auc" || text == "AUC") return Variant::AUC;
  if (text == "acu" || text == "ACU") return Variant::ACU;
  throw std::runtime_error(origin + ": unknown variant `" + text + "` (use auc or acu)");
}

Context load_context(const CommandOptions& options) {
  Context ctx{KvFile::parse_file(options.config_path)};

  static const char* const known[] = {"graph",  "gossip", "clock", "reception",
                                      "mixing", "design", "model", "run",
                                      "output", "rate",   "analyze"};
  for (const std::string& s : ctx.kv.sections()) {
    if (std::find(std::begin(known), std::end(known), s) == std::end(known)) {
      throw std::runtime_error(ctx.kv.origin() + ": unknown section [" + s + "]");
    }
  }

  ctx.config_dir = fs::path(options.config_path).parent_path();
  ctx.hash = to_hex(fnv1a(ctx.kv.text()));
  ctx.master_seed = options.seed.value_or(ctx.kv.get_u64_or("run", "seed", 1));
  ctx.reps = options.reps.value_or(static_cast<int>(ctx.kv.get_int_or("run", "reps", 1)));
  if (ctx.reps < 1) throw std::runtime_error("replication count must be positive");
  ctx.out_dir = options.out_dir.value_or(ctx.kv.get_string_or("output", "dir", "out"));
  ctx.variant = parse_variant(ctx.kv.get_string_or("run", "variant", "auc"), ctx.kv.origin());
  return ctx;
}

fs::path resolve_path(const Context& ctx, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : ctx.config_dir / path;
}

// Everything in `strict` sections must have been consumed; other sections
// belong to other commands sharing the config and are skipped wholesale.
void finish(Context& ctx, const std::vector<std::string>& strict) {
  for (const std::string& s : ctx.kv.sections()) {
    if (std::find(strict.begin(), strict.end(), s) == strict.end()) {
      ctx.kv.consume_section(s);
    }
  }
  ctx.kv.check_consumed();
}

Vec vec_from_list(const std::vector<double>& v, int expected, const std::string& what) {
  if (static_cast<int>(v.size()) != expected) {
    throw std::runtime_error(what + " has " + std::to_string(v.size()) + " entries, expected " +
                             std::to_string(expected));
  }
  return Eigen::Map<const Vec>(v.data(), expected);
}

std::string join(const Vec& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_double(v[i]);
  }
  return out;
}

Digraph graph_from_config(Context& ctx) {
  KvFile& kv = ctx.kv;
  if (!kv.has_section("graph")) {
    throw std::runtime_error(kv.origin() + ": missing [graph] section");
  }
  if (kv.has("graph", "file")) {
    return load_graph_file(resolve_path(ctx, kv.get_string("graph", "file")).string());
  }
  const int n = static_cast<int>(kv.get_int("graph", "nodes"));
  if (kv.has("graph", "edges")) {
    std::string text = kv.get_string("graph", "edges");
    std::replace(text.begin(), text.end(), ',', ' ');
    std::istringstream in(text);
    std::vector<Edge> edges;
    std::string token;
    while (in >> token) {
      const std::size_t arrow = token.find("->");
      if (arrow == std::string::npos) {
        throw std::runtime_error(kv.origin() + ": [graph] edges entry `" + token +
                                 "` is not of the form i->j");
      }
      const int from = std::stoi(token.substr(0, arrow));
      const int to = std::stoi(token.substr(arrow + 2));
      if (from < 1 || from > n || to < 1 || to > n) {
        throw std::runtime_error(kv.origin() + ": [graph] edge `" + token + "` out of range");
      }
      edges.push_back(Edge{from - 1, to - 1});
    }
    return Digraph(n, edges);
  }
  const double density = kv.get_double("graph", "density");
  Rng rng = make_rng(kv.get_u64("graph", "seed"), 0);
  return random_strongly_connected(n, density, rng);
}

Vec clock_from_config(Context& ctx, int n) {
  KvFile& kv = ctx.kv;
  if (kv.get_bool_or("clock", "uniform", false)) return Vec::Constant(n, 1.0 / n);
  if (!kv.has("clock", "p")) {
    throw std::runtime_error(kv.origin() + ": [clock] needs `p = ...` or `uniform = true`");
  }
  return vec_from_list(kv.get_doubles("clock", "p"), n, "[clock] p");
}

ModelPtr model_from_config(Context& ctx, int n) {
  KvFile& kv = ctx.kv;
  const std::string kind = kv.get_string("model", "kind");
  if (kind == "gaussian_mean") {
    const Vec means = vec_from_list(kv.get_doubles("model", "means"), n, "[model] means");
    const Vec sigmas = vec_from_list(kv.get_doubles("model", "sigmas"), n, "[model] sigmas");
    return gaussian_mean_model(means, sigmas);
  }
  if (kind == "quadratic") {
    const Vec centers = vec_from_list(kv.get_doubles("model", "centers"), n, "[model] centers");
    const Vec curvatures =
        vec_from_list(kv.get_doubles("model", "curvatures"), n, "[model] curvatures");
    Vec noise = Vec::Zero(n);
    if (kv.has("model", "noise_sigmas")) {
      noise = vec_from_list(kv.get_doubles("model", "noise_sigmas"), n, "[model] noise_sigmas");
    }
    std::vector<Vec> c(n);
    std::vector<Mat> q(n), r(n);
    for (int i = 0; i < n; ++i) {
      c[i] = Vec::Constant(1, centers[i]);
      q[i] = Mat::Constant(1, 1, curvatures[i]);
      r[i] = Mat::Constant(1, 1, noise[i] * noise[i]);
    }
    return quadratic_gradient_model(std::move(c), std::move(q), std::move(r));
  }
  throw std::runtime_error(kv.origin() + ": unknown model kind `" + kind +
                           "` (gaussian_mean or quadratic)");
}

StepSizePolicy policy_from_config(Context& ctx, int n) {
  KvFile& kv = ctx.kv;
  const std::string step = kv.get_string_or("run", "step", "constant");
  if (step == "constant") {
    const double eps = kv.get_double_or("run", "eps", 0.01);
    if (kv.has("run", "gains")) {
      return PerAgentConstantStep{eps, vec_from_list(kv.get_doubles("run", "gains"), n,
                                                     "[run] gains")};
    }
    return ConstantStep{eps};
  }
  if (step == "tapering") return TaperingStep{kv.get_double_or("run", "a", 1.0)};
  if (step == "async_tapering") return AsyncTaperingStep{kv.get_double_or("run", "a", 1.0)};
  throw std::runtime_error(kv.origin() + ": unknown step policy `" + step +
                           "` (constant, tapering, async_tapering)");
}

Vec edge_mixing_from_node_gamma(const Digraph& graph, const Vec& gamma) {
  Vec mixing(graph.n_edges());
  for (int i = 0; i < graph.n_nodes(); ++i) {
    for (int e : graph.out_edge_ids(i)) mixing[e] = gamma[i];
  }
  return mixing;
}

double spectral_norm(const Mat& m) {
  if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
  const Mat sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> eig(sym);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

struct DesignOutcome {
  std::string directive;
  std::string solve_for;  // "clock" or "mixing"
  DesignResult result;
  GossipParams params;  // populated when feasible
  Vec phi_target;
  Vec d_bar;  // populated by the weight and rate directives
};

// Dispatches the [design] directive. Model access is only needed by the
// rate-optimal directive.
DesignOutcome run_design(Context& ctx, const Digraph& graph) {
  KvFile& kv = ctx.kv;
  if (!kv.has_section("design")) {
    throw std::runtime_error(kv.origin() + ": missing [design] section");
  }
  DesignOutcome out;
  out.directive = kv.get_string("design", "directive");
  const double scale_max = kv.get_double_or("design", "scale_max", 0.99);
  const int n = graph.n_nodes();
  const Vec reception = edge_values_from_kv(kv, "reception", graph, 1.0);

  auto finish_mixing_design = [&](const Vec& clock) {
    if (out.result.feasible) {
      out.params.graph = graph;
      out.params.clock_probs = clock;
      out.params.reception_probs = reception;
      out.params.mixing_weights = edge_mixing_from_node_gamma(graph, out.result.values);
      validate(out.params);
    }
  };

  if (out.directive == "target-phi") {
    out.phi_target = vec_from_list(kv.get_doubles("design", "phi"), n, "[design] phi");
    out.solve_for = kv.get_string_or("design", "solve_for", "mixing");
    if (out.solve_for == "clock") {
      const Vec mixing = edge_values_from_kv(kv, "mixing", graph, std::nullopt);
      out.result = algorithm_a(graph, DesignTarget{out.phi_target}, mixing, reception);
      if (out.result.feasible) {
        out.params = GossipParams{graph, out.result.values, reception, mixing};
        validate(out.params);
      }
    } else if (out.solve_for == "mixing") {
      const Vec clock = clock_from_config(ctx, n);
      out.result = algorithm_b(graph, DesignTarget{out.phi_target}, clock, reception, scale_max);
      finish_mixing_design(clock);
    } else {
      throw std::runtime_error(kv.origin() + ": unknown solve_for `" + out.solve_for +
                               "` (clock or mixing)");
    }
    return out;
  }

  if (out.directive == "equal-weights" || out.directive == "target-weights") {
    const Vec weights = out.directive == "equal-weights"
                            ? Vec::Ones(n)
                            : vec_from_list(kv.get_doubles("design", "weights"), n,
                                            "[design] weights");
    const Vec clock = clock_from_config(ctx, n);
    WeightDesign wd =
        design_for_weights(graph, weights, clock, reception, ctx.variant, scale_max);
    out.solve_for = "mixing";
    out.result = wd.design;
    out.phi_target = wd.phi_target;
    out.d_bar = wd.d_bar;
    finish_mixing_design(clock);
    return out;
  }

  if (out.directive == "rate-optimal") {
    const Vec clock = clock_from_config(ctx, n);
    GossipParams probe;
    probe.graph = graph;
    probe.clock_probs = clock;
    probe.reception_probs = reception;
    probe.mixing_weights = Vec::Constant(graph.n_edges(), 0.5);
    validate(probe);
    out.d_bar = expected_update_probs(probe, ctx.variant);

    // Noise covariances are evaluated at a provisional equilibrium; the
    // built-in models have state-independent noise, so the point only
    // matters for user extensions.
    const ModelPtr model = model_from_config(ctx, n);
    const int p = model->dim();
    Vec x_ref = Vec::Zero(p);
    try {
      OdeSpec provisional;
      provisional.weights = Vec::Constant(n, 1.0 / n);
      provisional.model = model;
      provisional.dim = p;
      x_ref = equilibrium(provisional, x_ref);
    } catch (const std::exception&) {
      x_ref = Vec::Zero(p);
    }
    Vec r_norms(n);
    for (int i = 0; i < n; ++i) r_norms[i] = spectral_norm(model->noise_cov(i, x_ref));
    out.phi_target = optimal_phi_for_rate(out.d_bar, r_norms);
    out.solve_for = "mixing";
    out.result = algorithm_b(graph, DesignTarget{out.phi_target}, clock, reception, scale_max);
    finish_mixing_design(clock);
    return out;
  }

  throw std::runtime_error(kv.origin() + ": unknown design directive `" + out.directive +
                           "` (target-phi, equal-weights, target-weights, rate-optimal)");
}

// Gossip parameters from [gossip] file, inline sections, or the design
// directive. When the design path runs, `designed` receives the outcome and
// the returned params are the designed ones.
GossipParams gossip_from_config(Context& ctx, const Digraph& graph, DesignOutcome* designed,
                                std::vector<std::string>* strict) {
  KvFile& kv = ctx.kv;
  std::string source = kv.has("gossip", "file") ? "file" : "inline";
  source = kv.get_string_or("gossip", "source", source);
  if (source == "file") {
    return load_gossip_params_file(resolve_path(ctx, kv.get_string("gossip", "file")).string(),
                                   graph);
  }
  if (source == "design") {
    DesignOutcome out = run_design(ctx, graph);
    if (strict) strict->push_back("design");
    if (!out.result.feasible) {
      std::string nodes;
      for (int k : out.result.offending) nodes += " " + std::to_string(k + 1);
      throw std::runtime_error("design directive `" + out.directive +
                               "` is infeasible (nonpositive parameters at nodes" + nodes + ")");
    }
    GossipParams params = out.params;
    if (designed) *designed = std::move(out);
    return params;
  }
  if (source == "inline") {
    return gossip_params_from_kv(kv, graph);
  }
  throw std::runtime_error(kv.origin() + ": unknown gossip source `" + source +
                           "` (file, inline, design)");
}

Vec initial_point(Context& ctx, int p) {
  return Vec::Constant(p, ctx.kv.get_double_or("run", "initial_value", 0.0));
}

Vec gains_of(const StepSizePolicy& policy) {
  if (const auto* pa = std::get_if<PerAgentConstantStep>(&policy)) return pa->gains;
  return Vec();
}

// MSE reference for summaries: the ODE equilibrium by default, or a value
// pinned in the config.
Vec reference_from_config(Context& ctx, const GossipParams& params, const ModelPtr& model,
                          const StepSizePolicy& policy) {
  KvFile& kv = ctx.kv;
  const std::string ref = kv.get_string_or("output", "reference", "ode");
  if (ref == "value") {
    return vec_from_list(kv.get_doubles("output", "reference_value"), model->dim(),
                         "[output] reference_value");
  }
  if (ref != "ode") {
    throw std::runtime_error(kv.origin() + ": unknown reference `" + ref + "` (ode or value)");
  }
  const OdeSpec spec = make_ode_spec(params, model, ctx.variant, gains_of(policy));
  return equilibrium(spec, initial_point(ctx, model->dim()));
}

std::string describe_params(const GossipParams& params, Variant variant) {
  const Vec phi = stationary_vector(mean_matrix(params));
  const Vec d_bar = expected_update_probs(params, variant);
  std::ostringstream out;
  out << "clock_probs = " << join(params.clock_probs) << "\n";
  out << "stationary_phi = " << join(phi) << "\n";
  out << "update_probs = " << join(d_bar) << "\n";
  out << "ode_weights = " << join(phi.cwiseProduct(d_bar)) << "\n";
  return out.str();
}

}  // namespace

int cmd_design(const CommandOptions& options) {
  Context ctx = load_context(options);
  const Digraph graph = graph_from_config(ctx);
  DesignOutcome out = run_design(ctx, graph);
  std::vector<std::string> strict = {"graph", "design", "clock", "reception", "mixing"};
  if (out.directive == "rate-optimal") strict.push_back("model");
  finish(ctx, strict);

  fs::create_directories(ctx.out_dir);
  const CsvMeta meta{ctx.hash, ctx.master_seed, to_string(ctx.variant), {}};

  std::ostringstream kvout;
  kvout << "# config_hash = " << meta.config_hash << "\n";
  kvout << "# master_seed = " << meta.master_seed << "\n";
  kvout << "# variant = " << meta.variant << "\n";
  kvout << "[design_result]\n";
  kvout << "directive = " << out.directive << "\n";
  kvout << "solve_for = " << out.solve_for << "\n";
  kvout << "feasible = " << (out.result.feasible ? "true" : "false") << "\n";
  if (out.phi_target.size()) kvout << "phi_target = " << join(out.phi_target) << "\n";
  if (out.d_bar.size()) kvout << "d_bar = " << join(out.d_bar) << "\n";

  std::ostringstream txt;
  txt << "design: directive " << out.directive << ", solving for " << out.solve_for << "\n";
  txt << "graph: " << graph.n_nodes() << " nodes, " << graph.n_edges() << " edges\n";

  if (!out.result.feasible) {
    std::string nodes;
    for (int k : out.result.offending) nodes += " " + std::to_string(k + 1);
    kvout << "offending_nodes =" << nodes << "\n";
    txt << "INFEASIBLE: the solved parameters are nonpositive at nodes" << nodes << "\n";
    txt << "No network satisfies the target with these fixed parameters.\n";
    write_text_file((ctx.out_dir / "design_report.kv").string(), kvout.str());
    write_text_file((ctx.out_dir / "design_report.txt").string(), txt.str());
    std::cerr << "design infeasible; certificate nodes:" << nodes << "\n";
    return 1;
  }

  kvout << (out.solve_for == "clock" ? "p = " : "gamma = ") << join(out.result.values) << "\n";
  kvout << "achieved_phi = " << join(out.result.achieved_phi) << "\n";
  kvout << "residual = " << format_double(out.result.residual) << "\n";
  const Vec d_bar = expected_update_probs(out.params, ctx.variant);
  kvout << "ode_weights = " << join(out.result.achieved_phi.cwiseProduct(d_bar)) << "\n";

  txt << "feasible: yes\n";
  txt << (out.solve_for == "clock" ? "clock probabilities p:\n  " : "mixing weights gamma:\n  ")
      << join(out.result.values) << "\n";
  txt << "achieved stationary vector:\n  " << join(out.result.achieved_phi) << "\n";
  txt << "stationarity residual: " << format_double(out.result.residual) << "\n";
  txt << describe_params(out.params, ctx.variant);

  write_text_file((ctx.out_dir / "design_report.kv").string(), kvout.str());
  write_text_file((ctx.out_dir / "design_report.txt").string(), txt.str());
  save_graph_file((ctx.out_dir / "designed.graph").string(), graph);
  save_gossip_params_file((ctx.out_dir / "designed.gossip").string(), out.params);
  return 0;
}

int cmd_simulate(const CommandOptions& options) {
  Context ctx = load_context(options);
  const Digraph graph = graph_from_config(ctx);
  std::vector<std::string> strict = {"graph",  "gossip", "clock", "reception",
                                     "mixing", "model",  "run",   "output"};
  GossipParams params = gossip_from_config(ctx, graph, nullptr, &strict);
  const ModelPtr model = model_from_config(ctx, graph.n_nodes());
  const StepSizePolicy policy = policy_from_config(ctx, graph.n_nodes());

  SimulationConfig sim;
  sim.params = params;
  sim.model = model;
  sim.policy = policy;
  sim.variant = ctx.variant;
  sim.n_iters = ctx.kv.get_int("run", "iters");
  sim.initial_state =
      Mat::Constant(graph.n_nodes(), model->dim(),
                    ctx.kv.get_double_or("run", "initial_value", 0.0));
  sim.trace_stride = ctx.kv.get_int_or("run", "trace_stride", 0);
  sim.divergence_bound = ctx.kv.get_double_or("run", "divergence_bound", 1e9);

  const bool write_traces = ctx.kv.get_bool_or("output", "write_traces", true);
  const Vec reference = reference_from_config(ctx, params, model, policy);
  finish(ctx, strict);

  fs::create_directories(ctx.out_dir);
  CsvMeta meta{ctx.hash, ctx.master_seed, to_string(ctx.variant), {}};

  std::vector<SummaryRow> summary;
  double final_disagreement = 0.0;
  try {
    for (int rep = 0; rep < ctx.reps; ++rep) {
      sim.seed = derive_seed(ctx.master_seed, static_cast<std::uint64_t>(rep));
      const Trace trace = run_simulation(sim);
      if (write_traces) {
        CsvMeta trace_meta = meta;
        trace_meta.extra.emplace_back("replication", std::to_string(rep));
        trace_meta.extra.emplace_back("replication_seed", std::to_string(sim.seed));
        write_trace_csv((ctx.out_dir / ("trace_" + std::to_string(sim.seed) + ".csv")).string(),
                        trace, trace_meta);
      }
      if (rep == 0) {
        summary.resize(trace.samples.size());
        for (std::size_t s = 0; s < trace.samples.size(); ++s) {
          summary[s].iter = trace.samples[s].iter;
        }
      } else if (summary.size() != trace.samples.size()) {
        throw std::logic_error("replications produced different trace grids");
      }
      for (std::size_t s = 0; s < trace.samples.size(); ++s) {
        summary[s].disagreement += Trace::disagreement(trace.samples[s].state);
        summary[s].mse += Trace::mse(trace.samples[s].state, reference);
      }
      final_disagreement += Trace::disagreement(trace.samples.back().state);
    }
  } catch (const DivergenceError& err) {
    std::cerr << err.what() << "\n";
    write_text_file((ctx.out_dir / "report.txt").string(),
                    std::string("DIVERGED\n") + err.what() + "\n");
    return 1;
  }
  for (SummaryRow& row : summary) {
    row.disagreement /= ctx.reps;
    row.mse /= ctx.reps;
  }
  write_summary_csv((ctx.out_dir / "summary.csv").string(), summary, meta);

  std::ostringstream txt;
  txt << "simulate: " << to_string(ctx.variant) << ", " << graph.n_nodes() << " nodes, "
      << sim.n_iters << " iterations, " << ctx.reps << " replications\n";
  txt << "master_seed = " << ctx.master_seed << "\n";
  txt << "reference x* = " << join(reference) << "\n";
  txt << "final mse (replication average) = " << format_double(summary.back().mse) << "\n";
  txt << "final disagreement (replication average) = "
      << format_double(final_disagreement / ctx.reps) << "\n";
  txt << describe_params(params, ctx.variant);
  write_text_file((ctx.out_dir / "report.txt").string(), txt.str());
  return 0;
}

int cmd_rate(const CommandOptions& options) {
  Context ctx = load_context(options);
  const Digraph graph = graph_from_config(ctx);
  // [run] is not strict here: only a few of its keys matter unless the
  // empirical comparison is enabled, and the simulate command checks it.
  std::vector<std::string> strict = {"graph", "gossip", "clock",
                                     "reception", "mixing", "model", "rate"};
  GossipParams params = gossip_from_config(ctx, graph, nullptr, &strict);
  fs::create_directories(ctx.out_dir);
  const ModelPtr model = model_from_config(ctx, graph.n_nodes());
  const StepSizePolicy policy = policy_from_config(ctx, graph.n_nodes());
  const int n = graph.n_nodes();
  const int p = model->dim();

  const OdeSpec spec = make_ode_spec(params, model, ctx.variant, gains_of(policy));
  const Vec x_star = equilibrium(spec, initial_point(ctx, p));

  int tail = static_cast<int>(ctx.kv.get_int_or("rate", "tail", 0));
  const int g_reps = static_cast<int>(ctx.kv.get_int_or("rate", "g_reps", 10000));
  if (tail <= 0) {
    tail = suggest_tail_length(params, 400, 400, derive_seed(ctx.master_seed, kDecayStream));
  }
  const GEstimate g = estimate_g(params, ctx.variant, tail, g_reps,
                                 derive_seed(ctx.master_seed, kGStream));

  const SdeModel sde = build_sde(spec, x_star, g.g, gains_of(policy));
  Mat S;
  if (sde.hurwitz) S = stationary_covariance(sde);

  const Vec phi = stationary_vector(mean_matrix(params));
  const Vec d_bar = expected_update_probs(params, ctx.variant);
  Vec r_norms(n);
  for (int i = 0; i < n; ++i) r_norms[i] = spectral_norm(sde.R[i]);
  const Vec phi_opt = optimal_phi_for_rate(d_bar, r_norms);

  const bool with_sim = ctx.kv.get_bool_or("rate", "simulate", false);
  const double burn_in = ctx.kv.get_double_or("rate", "burn_in", 0.5);
  const int batches = static_cast<int>(ctx.kv.get_int_or("rate", "batches", 20));

  std::ostringstream txt;
  txt << "rate analysis: " << to_string(ctx.variant) << ", " << n << " nodes\n";
  txt << "x* = " << join(x_star) << "\n";
  txt << "g tail length = " << tail << ", g replications = " << g_reps << "\n";
  txt << "g = " << join(g.g) << "\n";
  txt << "g standard errors = " << join(g.se) << "\n";
  txt << "J =\n" << sde.J << "\n";
  txt << "Q =\n" << sde.Q << "\n";
  txt << "J Hurwitz: " << (sde.hurwitz ? "yes" : "no (stationary analysis unavailable)") << "\n";
  if (sde.hurwitz) {
    txt << "predicted stationary covariance S =\n" << S << "\n";
    if (p == 1) {
      txt << "scalar check Q/(2|J|) = "
          << format_double(sde.Q(0, 0) / (2.0 * std::abs(sde.J(0, 0)))) << "\n";
    }
  }
  txt << "criterion sum(phi^2 dbar^2 |R|) at current phi = "
      << format_double(rate_criterion(phi, d_bar, r_norms)) << "\n";
  txt << "criterion at rate-optimal phi* = "
      << format_double(rate_criterion(phi_opt, d_bar, r_norms)) << "\n";
  txt << "rate-optimal phi* = " << join(phi_opt) << "\n";

  std::ostringstream csv;

  if (with_sim) {
    const auto* cs = std::get_if<ConstantStep>(&policy);
    const auto* pa = std::get_if<PerAgentConstantStep>(&policy);
    if (cs == nullptr && pa == nullptr) {
      throw std::runtime_error("rate: empirical comparison needs a constant step size");
    }
    const double eps = cs ? cs->eps : pa->eps;
    if (!(eps > 0.0)) throw std::runtime_error("rate: empirical comparison needs eps > 0");

    SimulationConfig sim;
    sim.params = params;
    sim.model = model;
    sim.policy = policy;
    sim.variant = ctx.variant;
    sim.n_iters = ctx.kv.get_int("run", "iters");
    sim.initial_state = Mat::Constant(n, p, ctx.kv.get_double_or("run", "initial_value", 0.0));
    sim.trace_stride = ctx.kv.get_int_or("run", "trace_stride", 0);
    sim.divergence_bound = ctx.kv.get_double_or("run", "divergence_bound", 1e9);

    Mat pooled = Mat::Zero(p, p);
    Mat pooled_sq = Mat::Zero(p, p);
    try {
      for (int rep = 0; rep < ctx.reps; ++rep) {
        sim.seed = derive_seed(ctx.master_seed, static_cast<std::uint64_t>(rep));
        const Trace trace = run_simulation(sim);
        const NormalizedErrorStats stats =
            empirical_normalized_error(trace, x_star, eps, burn_in, batches);
        pooled += stats.pooled;
        pooled_sq += stats.pooled.cwiseAbs2();
      }
    } catch (const DivergenceError& err) {
      std::cerr << err.what() << "\n";
      write_text_file((ctx.out_dir / "rate_report.txt").string(),
                      std::string("DIVERGED\n") + err.what() + "\n");
      return 1;
    }
    pooled /= ctx.reps;
    Mat se = Mat::Zero(p, p);
    if (ctx.reps > 1) {
      se = ((pooled_sq / ctx.reps - pooled.cwiseAbs2()) / (ctx.reps - 1.0))
               .cwiseMax(0.0)
               .cwiseSqrt();
    }
    txt << "empirical normalized-error covariance (pooled over " << ctx.reps
        << " replications) =\n"
        << pooled << "\n";
    txt << "replication standard error =\n" << se << "\n";
    csv << "empirical_pooled_variance," << format_double(pooled(0, 0)) << "\n";
    csv << "empirical_pooled_se," << format_double(se(0, 0)) << "\n";
  }
  finish(ctx, strict);

  const CsvMeta meta{ctx.hash, ctx.master_seed, to_string(ctx.variant), {}};

  std::ostringstream table;
  table << "node,g,g_se,phi,d_bar,r_norm,phi_opt\n";
  for (int i = 0; i < n; ++i) {
    table << i + 1 << "," << format_double(g.g[i]) << "," << format_double(g.se[i]) << ","
          << format_double(phi[i]) << "," << format_double(d_bar[i]) << ","
          << format_double(r_norms[i]) << "," << format_double(phi_opt[i]) << "\n";
  }
  if (sde.hurwitz) {
    table << "predicted_stationary_variance," << format_double(S(0, 0)) << "\n";
  }
  table << csv.str();

  std::ofstream raw((ctx.out_dir / "rate_report.csv").string());
  if (!raw) throw std::runtime_error("cannot write rate_report.csv");
  raw << "# config_hash = " << meta.config_hash << "\n";
  raw << "# master_seed = " << meta.master_seed << "\n";
  raw << "# variant = " << meta.variant << "\n";
  raw << table.str();
  raw.close();

  write_text_file((ctx.out_dir / "rate_report.txt").string(), txt.str());
  return 0;
}

int cmd_analyze(const CommandOptions& options) {
  Context ctx = load_context(options);
  const Digraph graph = graph_from_config(ctx);
  std::vector<std::string> strict = {"graph", "gossip", "clock", "reception", "mixing",
                                     "analyze"};
  GossipParams params = gossip_from_config(ctx, graph, nullptr, &strict);

  const int max_lag = static_cast<int>(ctx.kv.get_int_or("analyze", "max_lag", 60));
  const int reps = static_cast<int>(ctx.kv.get_int_or("analyze", "reps", 1000));
  finish(ctx, strict);

  const DecaySeries series =
      decay_estimate(params, max_lag, reps, derive_seed(ctx.master_seed, kDecayStream));
  const LogLinearFit fit = fit_log_linear(series.mean);

  fs::create_directories(ctx.out_dir);
  const CsvMeta meta{ctx.hash, ctx.master_seed, to_string(ctx.variant), {}};
  write_decay_csv((ctx.out_dir / "decay.csv").string(), series, meta);

  const Vec phi = stationary_vector(mean_matrix(params));
  const Vec d_auc = expected_update_probs(params, Variant::AUC);
  const Vec d_acu = expected_update_probs(params, Variant::ACU);

  std::ostringstream txt;
  txt << "analyze: " << graph.n_nodes() << " nodes, " << graph.n_edges() << " edges\n";
  txt << "strongly connected: yes\n";
  txt << "stationary_phi = " << join(phi) << "\n";
  txt << "update_probs_auc = " << join(d_auc) << "\n";
  txt << "update_probs_acu = " << join(d_acu) << "\n";
  txt << "decay fit over lags 0.." << max_lag << " (" << reps << " reps): slope "
      << format_double(fit.slope) << ", intercept " << format_double(fit.intercept)
      << ", r_squared " << format_double(fit.r_squared) << "\n";
  int tail = -1;
  for (int m = 0; m <= max_lag; ++m) {
    if (series.mean[m] < 5e-4) {
      tail = m;
      break;
    }
  }
  txt << "suggested g tail length: "
      << (tail >= 0 ? std::to_string(tail) : std::string("beyond max_lag")) << "\n";
  write_text_file((ctx.out_dir / "analysis.txt").string(), txt.str());
  return 0;
}

}  // namespace bgdsa
