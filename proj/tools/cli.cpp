#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "frdim/corrdim.hpp"
#include "frdim/error.hpp"
#include "frdim/io.hpp"
#include "frdim/processes.hpp"
#include "frdim/reduce.hpp"
#include "frdim/theory.hpp"

namespace frdim::cli {

namespace {

using nlohmann::ordered_json;

struct SimulateOpts {
  std::string process;
  std::size_t n = 10000;
  std::uint64_t seed = 1;
  std::size_t m0 = 1;
  std::size_t m = 1;
  double kappa = 0.005;
  std::size_t k = 1000;
  std::optional<double> alpha;
  std::optional<double> alpha_sum;
  std::string transition;
  std::optional<std::size_t> m_groups;
  std::string dtype = "f64";
  std::string output;
};

struct AnalyzeOpts {
  std::string input;
  double eta = 0.5;
  bool no_filter = false;
  std::optional<std::size_t> argmax_word;
  std::optional<double> entropy_min;
  std::optional<double> entropy_max;
  std::size_t m_groups = 1000;
  bool no_reduce = false;
  std::string metric = "fisher-rao";
  std::size_t bins = 64;
  std::optional<double> fit_lo;
  std::optional<double> fit_hi;
  std::string fit_rule = "flattest";
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  bool renormalize = false;
  bool convergence = false;
  std::string output;
  std::string curve_output;
};

struct ValidateOpts {
  std::string input;
  std::optional<double> tolerance;
};

struct ReduceOpts {
  std::string input;
  std::size_t m_groups = 1000;
  std::string dtype = "f64";
  std::string output;
};

io::Dtype parse_dtype(const std::string& s) {
  if (s == "f32") return io::Dtype::kF32;
  if (s == "f64") return io::Dtype::kF64;
  throw InvalidArgument("dtype must be f32 or f64");
}

void print_config(std::ostream& err, const ordered_json& cfg) {
  err << "config: " << cfg.dump() << '\n';
}

MarkovChain load_or_draw_chain(const SimulateOpts& o) {
  if (!o.transition.empty()) {
    std::ifstream in(o.transition);
    if (!in) throw DataError("cannot open " + o.transition);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw DataError(o.transition + ": " + e.what());
    }
    const auto rows = j.at("transition").get<std::vector<std::vector<double>>>();
    const auto init = j.at("initial").get<std::vector<double>>();
    Eigen::MatrixXd a(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.empty() ? 0 : rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != static_cast<std::size_t>(a.cols())) {
        throw DataError("transition matrix rows differ in length");
      }
      for (std::size_t c = 0; c < rows[i].size(); ++c) {
        a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
      }
    }
    return MarkovChain(std::move(a), ProbVector(init));
  }
  // Random chain: Dirichlet(1) rows and initial distribution.
  Rng rng(o.seed ^ 0x9e3779b97f4a7c15ULL);
  const auto k = static_cast<Eigen::Index>(o.k);
  Eigen::MatrixXd a(k, k);
  for (Eigen::Index i = 0; i < k; ++i) a.row(i) = theory::random_distribution(o.k, rng);
  const Eigen::VectorXd init = theory::random_distribution(o.k, rng);
  return MarkovChain(std::move(a), ProbVector(std::vector<double>(init.begin(), init.end())));
}

int cmd_simulate(const SimulateOpts& o, std::ostream& out, std::ostream& err) {
  const io::Dtype dtype = parse_dtype(o.dtype);
  ordered_json cfg{{"command", "simulate"}, {"process", o.process}, {"n", o.n},
                   {"seed", o.seed}};
  double recommended_eta = 0.5;
  StateSequence seq;
  if (o.process == "ba" || o.process == "fapa") {
    GrowthNetConfig g;
    g.n_steps = o.n;
    g.m0 = o.m0;
    g.m = o.m;
    if (o.process == "fapa") g.kappa = o.kappa;
    cfg["m0"] = o.m0;
    cfg["m"] = o.m;
    if (g.kappa) cfg["kappa"] = *g.kappa;
    GrowthNet net(g, o.seed);
    seq = stream_rows(net, o.n, std::nullopt, o.m_groups);
    // Growth rows concentrate on few nodes; any eta below 1 drops most.
    recommended_eta = 1.0;
  } else if (o.process == "dirichlet") {
    if (o.alpha.has_value() == o.alpha_sum.has_value()) {
      throw InvalidArgument("dirichlet needs exactly one of --alpha or --alpha-sum");
    }
    const double each = o.alpha ? *o.alpha : *o.alpha_sum / static_cast<double>(o.k);
    cfg["k"] = o.k;
    cfg["alpha"] = each;
    DirichletSampler sampler(DirichletSpec::symmetric(o.k, each), o.seed);
    seq = stream_rows(sampler, o.n, std::nullopt, o.m_groups);
    if (sampler.resampled() > 0) err << "resampled rows: " << sampler.resampled() << '\n';
  } else if (o.process == "uniform") {
    cfg["k"] = o.k;
    SphereNoiseSampler sampler(o.k, o.seed);
    seq = stream_rows(sampler, o.n, std::nullopt, o.m_groups);
  } else if (o.process == "markov") {
    const MarkovChain chain = load_or_draw_chain(o);
    cfg["k"] = chain.dim();
    if (!o.transition.empty()) cfg["transition"] = o.transition;
    seq = gen_markov(chain, o.n, o.seed).rows;
    if (o.m_groups && *o.m_groups < seq.dim()) {
      seq = project_sequence(seq, ReductionSpec(*o.m_groups, seq.dim()));
    }
  } else {
    throw InvalidArgument("unknown process '" + o.process +
                          "' (expected ba, fapa, dirichlet, uniform or markov)");
  }
  if (o.m_groups) cfg["m_groups"] = *o.m_groups;
  cfg["dtype"] = o.dtype;
  cfg["output"] = o.output;
  print_config(err, cfg);

  io::write_pseq(seq, o.output, dtype);
  ordered_json sidecar = cfg;
  sidecar["rows"] = seq.size();
  sidecar["dim"] = seq.dim();
  sidecar["recommended_eta"] = recommended_eta;
  std::ofstream side(o.output + ".json");
  if (!side) throw DataError("cannot write " + o.output + ".json");
  side << sidecar.dump(2) << '\n';
  out << "wrote " << seq.size() << " x " << seq.dim() << " to " << o.output << '\n';
  return kOk;
}

StateSequence load_for_analysis(const AnalyzeOpts& o) {
  io::ReadOptions ro;
  ro.validate_rows = !o.renormalize;
  StateSequence seq = io::read_sequence(o.input, ro);
  if (o.renormalize) seq = frdim::renormalize(seq);
  return seq;
}

EstimateConfig make_config(const AnalyzeOpts& o, ordered_json& cfg) {
  EstimateConfig ec;
  if (o.no_filter) {
    ec.filter.reset();
  } else {
    FilterSpec f;
    f.eta = o.eta;
    f.entropy_min = o.entropy_min;
    f.entropy_max = o.entropy_max;
    f.argmax_word = o.argmax_word;
    f.check();
    ec.filter = f;
  }
  ec.m_groups = o.no_reduce ? std::nullopt : std::optional<std::size_t>(o.m_groups);
  ec.metric = parse_metric(o.metric);
  ec.grid_edges = o.bins;
  if (o.fit_lo.has_value() != o.fit_hi.has_value()) {
    throw InvalidArgument("--fit-lo and --fit-hi must be given together");
  }
  if (o.fit_lo) ec.region = std::pair{*o.fit_lo, *o.fit_hi};
  ec.fit.rule = parse_fit_rule(o.fit_rule);
  ec.threads = o.threads;
  ec.convergence_check = o.convergence;

  cfg["input"] = o.input;
  cfg["eta"] = o.no_filter ? ordered_json(nullptr) : ordered_json(o.eta);
  if (o.argmax_word) cfg["argmax_word"] = *o.argmax_word;
  if (o.entropy_min) cfg["entropy_min"] = *o.entropy_min;
  if (o.entropy_max) cfg["entropy_max"] = *o.entropy_max;
  cfg["m_groups"] = o.no_reduce ? ordered_json(nullptr) : ordered_json(o.m_groups);
  cfg["metric"] = std::string(to_string(ec.metric));
  cfg["bins"] = o.bins;
  if (ec.region) {
    cfg["fit"] = {ec.region->first, ec.region->second};
  } else {
    cfg["fit_rule"] = std::string(to_string(ec.fit.rule));
  }
  cfg["threads"] = o.threads;
  cfg["renormalize"] = o.renormalize;
  if (o.seed) cfg["seed"] = *o.seed;
  return ec;
}

int cmd_analyze(const AnalyzeOpts& o, bool curve_only, std::ostream& out, std::ostream& err) {
  ordered_json cfg{{"command", curve_only ? "curve" : "analyze"}};
  const EstimateConfig ec = make_config(o, cfg);
  print_config(err, cfg);

  const StateSequence seq = load_for_analysis(o);
  const EstimateResult r = [&] {
    if (!curve_only) return estimate(seq, ec);
    // A fit over the whole curve never rejects a region, so every curve
    // with enough points prints.
    EstimateConfig whole = ec;
    whole.region = std::pair{0.0, std::numeric_limits<double>::infinity()};
    try {
      return estimate(seq, whole);
    } catch (const InvalidArgument&) {
      throw DataError("correlation curve has fewer than 5 points");
    }
  }();

  if (curve_only) {
    if (o.output.empty()) {
      io::write_curve_tsv(r.curve, out);
    } else {
      std::ofstream f(o.output);
      if (!f) throw DataError("cannot write " + o.output);
      io::write_curve_tsv(r.curve, f);
    }
    return kOk;
  }

  io::EstimateRecord rec{r.estimate,
                         r.n_retained,
                         r.histogram.n_pairs_total(),
                         ec.metric,
                         ec.filter ? std::optional<double>(ec.filter->eta) : std::nullopt,
                         r.m_groups ? std::optional<std::size_t>(r.m_groups) : std::nullopt,
                         o.seed};
  const std::string json = io::estimate_json(rec);
  if (o.output.empty()) {
    out << json << '\n';
  } else {
    std::ofstream f(o.output);
    if (!f) throw DataError("cannot write " + o.output);
    f << json << '\n';
  }
  if (!o.curve_output.empty()) {
    std::ofstream f(o.curve_output);
    if (!f) throw DataError("cannot write " + o.curve_output);
    io::write_curve_tsv(r.curve, f);
  }
  err << "retained " << r.n_retained << " of " << r.n_input << " rows";
  if (r.estimate.fallback_region) err << "; no admissible window, best-R^2 window used";
  if (r.half_nu_hat) err << "; nu_hat on first half " << *r.half_nu_hat;
  err << '\n';
  return kOk;
}

int cmd_validate(const ValidateOpts& o, std::ostream& out, std::ostream& err) {
  const auto path = std::filesystem::path(o.input);
  double tol = kSumToleranceF64;
  if (path.extension() != ".jsonl") tol = io::tolerance_for(io::read_pseq_header(path).dtype);
  if (o.tolerance) tol = *o.tolerance;
  print_config(err, {{"command", "validate"}, {"input", o.input}, {"tolerance", tol}});
  io::ReadOptions ro;
  ro.validate_rows = false;
  const StateSequence seq = io::read_sequence(path, ro);
  const auto violations = validate(seq, tol);
  for (const auto& v : violations) out << v.message() << '\n';
  out << seq.size() << " rows, dim " << seq.dim() << ", " << violations.size()
      << " violation(s)\n";
  return violations.empty() ? kOk : kData;
}

int cmd_reduce(const ReduceOpts& o, std::ostream& out, std::ostream& err) {
  const io::Dtype dtype = parse_dtype(o.dtype);
  print_config(err, {{"command", "reduce"},
                     {"input", o.input},
                     {"m_groups", o.m_groups},
                     {"dtype", o.dtype},
                     {"output", o.output}});
  const StateSequence seq = io::read_sequence(o.input);
  const StateSequence reduced = project_sequence(seq, ReductionSpec(o.m_groups, seq.dim()));
  io::write_pseq(reduced, o.output, dtype);
  out << "wrote " << reduced.size() << " x " << reduced.dim() << " to " << o.output << '\n';
  return kOk;
}

int cmd_verify(std::uint64_t seed, std::ostream& out, std::ostream& err) {
  print_config(err, {{"command", "verify"}, {"seed", seed}});
  bool all = true;
  for (const auto& c : theory::run_verification_suite(seed)) {
    all = all && c.pass;
    std::ostringstream line;
    line.precision(6);
    line << (c.pass ? "PASS " : "FAIL ") << c.name << ": measured " << c.measured << ", bound "
         << c.bound << ", tolerance " << c.tolerance << " (" << c.detail << ")";
    out << line.str() << '\n';
  }
  return all ? kOk : kVerifyFailed;
}

void add_pipeline_options(CLI::App* cmd, AnalyzeOpts& o) {
  cmd->add_option("input", o.input, "PSEQ or JSONL sequence")->required();
  cmd->add_option("--eta", o.eta, "max-probability threshold")->capture_default_str();
  cmd->add_flag("--no-filter", o.no_filter, "keep every row");
  cmd->add_option("--argmax-word", o.argmax_word,
                  "keep rows dominated by this word (max > eta) instead");
  cmd->add_option("--entropy-min", o.entropy_min, "minimum row entropy in bits");
  cmd->add_option("--entropy-max", o.entropy_max, "maximum row entropy in bits");
  cmd->add_option("--m-groups", o.m_groups, "modulo reduction size M")->capture_default_str();
  cmd->add_flag("--no-reduce", o.no_reduce, "skip modulo reduction");
  cmd->add_option("--metric", o.metric, "fisher-rao or euclidean")->capture_default_str();
  cmd->add_option("--bins", o.bins, "log-spaced epsilon grid edges")->capture_default_str();
  cmd->add_option("--fit-lo", o.fit_lo, "lower epsilon of a manual fit region");
  cmd->add_option("--fit-hi", o.fit_hi, "upper epsilon of a manual fit region");
  cmd->add_option("--fit-rule", o.fit_rule, "automatic region rule: flattest or widest-r2")
      ->capture_default_str();
  cmd->add_option("--seed", o.seed, "seed recorded in the output");
  cmd->add_option("--threads", o.threads, "worker threads (0 = all cores)")
      ->capture_default_str();
  cmd->add_flag("--renormalize", o.renormalize, "renormalize rows instead of rejecting them");
  cmd->add_option("-o,--output", o.output, "output file (default: standard output)");
}

}  // namespace

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Correlation dimension of probability-vector sequences on the statistical "
               "manifold"};
  app.name(argv.empty() ? "frdim" : std::filesystem::path(argv[0]).filename().string());
  app.require_subcommand(1);

  SimulateOpts sim;
  auto* simulate = app.add_subcommand("simulate", "generate a synthetic sequence as PSEQ");
  simulate->add_option("process", sim.process, "ba, fapa, dirichlet, uniform or markov")
      ->required();
  simulate->add_option("--n", sim.n, "number of steps")->capture_default_str();
  simulate->add_option("--seed", sim.seed, "random seed")->capture_default_str();
  simulate->add_option("--m0", sim.m0, "initial nodes (ba, fapa)")->capture_default_str();
  simulate->add_option("--m", sim.m, "edges per new node (ba, fapa)")->capture_default_str();
  simulate->add_option("--kappa", sim.kappa, "admissible fraction (fapa)")->capture_default_str();
  simulate->add_option("--k", sim.k, "vocabulary size (dirichlet, uniform, random markov)")
      ->capture_default_str();
  simulate->add_option("--alpha", sim.alpha, "symmetric Dirichlet concentration per word");
  simulate->add_option("--alpha-sum", sim.alpha_sum, "total concentration, split over K words");
  simulate->add_option("--transition", sim.transition,
                       "JSON file with \"transition\" and \"initial\" (markov)");
  simulate->add_option("--m-groups", sim.m_groups, "reduce rows to M groups while generating");
  simulate->add_option("--dtype", sim.dtype, "f32 or f64")->capture_default_str();
  simulate->add_option("-o,--output", sim.output, "output PSEQ path")->required();

  AnalyzeOpts an;
  auto* analyze = app.add_subcommand("analyze", "estimate the correlation dimension");
  add_pipeline_options(analyze, an);
  analyze->add_option("--curve", an.curve_output, "also write the curve TSV here");
  analyze->add_flag("--convergence", an.convergence, "also estimate on the first half");

  AnalyzeOpts cu;
  auto* curve = app.add_subcommand("curve", "print the correlation integral as TSV");
  add_pipeline_options(curve, cu);

  ValidateOpts va;
  auto* validate_cmd = app.add_subcommand("validate", "list rows that are not distributions");
  validate_cmd->add_option("input", va.input, "PSEQ or JSONL sequence")->required();
  validate_cmd->add_option("--tolerance", va.tolerance, "sum tolerance (default by dtype)");

  ReduceOpts re;
  auto* reduce = app.add_subcommand("reduce", "write a modulo-reduced copy of a sequence");
  reduce->add_option("input", re.input, "PSEQ or JSONL sequence")->required();
  reduce->add_option("--m-groups", re.m_groups, "number of groups M")->capture_default_str();
  reduce->add_option("--dtype", re.dtype, "f32 or f64")->capture_default_str();
  reduce->add_option("-o,--output", re.output, "output PSEQ path")->required();

  std::uint64_t verify_seed = 1;
  auto* verify = app.add_subcommand("verify", "run the theorem verification suite");
  verify->add_option("--seed", verify_seed, "random seed")->capture_default_str();

  std::vector<const char*> cargs;
  for (const auto& a : argv) cargs.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim, out, err);
    if (analyze->parsed()) return cmd_analyze(an, false, out, err);
    if (curve->parsed()) return cmd_analyze(cu, true, out, err);
    if (validate_cmd->parsed()) return cmd_validate(va, out, err);
    if (reduce->parsed()) return cmd_reduce(re, out, err);
    if (verify->parsed()) return cmd_verify(verify_seed, out, err);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}

}  // namespace frdim::cli
