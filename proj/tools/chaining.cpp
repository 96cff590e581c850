#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "chaining/functionals.hpp"
#include "chaining/gaussian.hpp"
#include "chaining/io.hpp"
#include "chaining/lower_bound.hpp"
#include "chaining/metric_space.hpp"
#include "chaining/optimizer.hpp"
#include "chaining/partition_tree.hpp"
#include "chaining/rng.hpp"
#include "chaining/vlc.hpp"

using namespace chaining;

namespace {

constexpr int kOk = 0;
constexpr int kFail = 1;
constexpr int kInputError = 2;

struct SeedOption {
  std::uint64_t seed = 0;
  bool given = false;
  bool none = false;

  void attach(CLI::App* cmd) {
    auto* s = cmd->add_option("--seed", seed, "Random seed");
    auto* n = cmd->add_flag("--no-seed", none, "Draw a fresh seed (printed to stderr)");
    s->excludes(n);
  }
  std::uint64_t resolve(const CLI::App* cmd) {
    given = cmd->count("--seed") > 0;
    if (given) return seed;
    if (!none) throw ParameterError("stochastic command: pass --seed N or --no-seed");
    std::random_device rd;
    seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    std::cerr << "seed: " << seed << "\n";
    return seed;
  }
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<double> parse_grid(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ParameterError("not a number: " + item);
    }
  }
  if (out.empty()) throw ParameterError("empty grid");
  return out;
}

PointSet lookup_points(const std::vector<std::string>& labels, const std::string& list) {
  PointSet out;
  for (const auto& name : split_list(list)) {
    const auto it = std::find(labels.begin(), labels.end(), name);
    if (it == labels.end()) throw LookupError("unknown label \"" + name + "\"");
    out.push_back(static_cast<std::size_t>(it - labels.begin()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string diagnostics_text(const Diagnostics& d) {
  std::ostringstream os;
  for (const auto& x : d) os << x.kind << ": " << x.message << "\n";
  return os.str();
}

// Turns the members of a JSON object into command-line arguments that were not
// already given explicitly.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      out.push_back(args[i]);
    }
  }
  if (path.empty()) return out;
  const json cfg = read_json(path);
  if (!cfg.is_object()) throw InputError(path + ": config must be a JSON object");
  for (const auto& [key, value] : cfg.items()) {
    const std::string flag = "--" + key;
    bool present = false;
    for (const auto& a : out)
      if (a == flag || a.rfind(flag + "=", 0) == 0) present = true;
    if (present) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) out.push_back(flag);
    } else if (value.is_string()) {
      out.push_back(flag);
      out.push_back(value.get<std::string>());
    } else if (value.is_number()) {
      out.push_back(flag);
      out.push_back(value.is_number_float() ? format_double(value.get<double>()) : value.dump());
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& v : value)
        joined += (joined.empty() ? "" : ",") + (v.is_string() ? v.get<std::string>() : v.dump());
      out.push_back(flag);
      out.push_back(joined);
    } else {
      throw InputError(path + ": unsupported value for \"" + key + "\"");
    }
  }
  return out;
}

struct Sources {
  std::string space, cov, mu, nu, tree, codes, p = "dyadic";
};

std::optional<MetricSpace> load_space(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return metric_from_json(read_json(path));
}

GaussianModel load_model(const std::string& path) {
  if (path.empty()) throw ParameterError("--cov is required");
  return model_from_json(read_json(path));
}

WeightSequence load_weights(const std::string& spec) {
  if (spec == "dyadic") return WeightSequence::dyadic();
  return weights_from_json(read_json(spec));
}

std::vector<std::string> labels_from(const std::optional<MetricSpace>& space, const Sources& src) {
  if (space) return space->labels();
  if (!src.codes.empty()) {
    const json j = read_json(src.codes);
    if (j.contains("tree") && j["tree"].contains("labels"))
      return j["tree"]["labels"].get<std::vector<std::string>>();
  }
  if (!src.tree.empty()) {
    const json j = read_json(src.tree);
    if (j.contains("labels")) return j["labels"].get<std::vector<std::string>>();
  }
  throw ParameterError("need --space, or a tree/codes file carrying labels");
}

ProbabilityMeasure load_measure(const std::string& path, const std::vector<std::string>& labels) {
  if (path.empty() || path == "uniform") return ProbabilityMeasure::uniform(labels.size());
  return measure_from_json(read_json(path), labels);
}

BoundReport evaluate(const std::string& functional, const Sources& src, const std::string& channel) {
  std::optional<MetricSpace> space = load_space(src.space);
  const auto labels = labels_from(space, src);
  std::optional<ProbabilityMeasure> mu, nu;
  mu = load_measure(src.mu, labels);
  if (!src.nu.empty()) nu = load_measure(src.nu, labels);
  std::optional<PartitionTree> tree;
  std::optional<VlcSequence> vlc;
  if (!src.codes.empty()) {
    vlc = vlc_from_json(read_json(src.codes), labels);
    tree = vlc->tree();
  }
  if (!src.tree.empty()) tree = tree_from_json(read_json(src.tree), labels);
  const WeightSequence p = load_weights(src.p);

  ReportInputs in;
  in.space = space ? &*space : nullptr;
  in.mu = &*mu;
  in.nu = nu ? &*nu : nullptr;
  in.tree = tree ? &*tree : nullptr;
  in.vlc = vlc ? &*vlc : nullptr;
  in.p = &p;
  in.channel = channel == "ideal" ? LengthChannel::ideal : LengthChannel::integer;
  BoundReport report = evaluate_report(functional, in);
  if (!space) report.points = functional == "m" || functional == "entropy-chain" ? report.points : labels;
  return report;
}

std::string render(const BoundReport& report, const std::string& format) {
  if (format == "json") return report_to_json(report).dump(2) + "\n";
  if (format == "svg") return report_to_svg(report);
  return report_to_csv(report);
}

void add_sources(CLI::App* cmd, Sources& src) {
  cmd->add_option("--space", src.space, "Metric space JSON");
  cmd->add_option("--mu", src.mu, "Measure JSON (default uniform)");
  cmd->add_option("--nu", src.nu, "Second measure JSON for M(mu,nu)");
  cmd->add_option("--tree", src.tree, "Partition tree JSON");
  cmd->add_option("--codes", src.codes, "Code sequence JSON");
  cmd->add_option("--p", src.p, "Level weights: dyadic or a JSON file");
}

const std::vector<std::string> kFunctionals = {"ft",         "m",       "sigma-bar",    "sigma-code",
                                               "sigma-prime", "refinement", "bednorz", "entropy-chain"};

int run(int argc, char** argv) {
  CLI::App app{"Generic chaining bounds: partitions, codes, functionals and Gaussian checks"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string out = "-";
  app.add_option("--out", out, "Output file ('-' for stdout)");

  int status = kOk;

  // space
  auto* space_cmd = app.add_subcommand("space", "Metric spaces");
  space_cmd->require_subcommand(1);
  auto* space_gen = space_cmd->add_subcommand("gen", "Expand a generator or draw random points");
  std::string gen_in;
  std::size_t gen_random = 0, gen_dim = 2;
  bool gen_normalize = false;
  SeedOption gen_seed;
  space_gen->add_option("--in", gen_in, "Generator or metric JSON");
  space_gen->add_option("--random", gen_random, "Number of uniform points in the unit cube");
  space_gen->add_option("--dim", gen_dim, "Dimension for --random")->check(CLI::PositiveNumber);
  space_gen->add_flag("--normalize", gen_normalize, "Rescale to diameter one");
  gen_seed.attach(space_gen);
  space_gen->callback([&] {
    std::optional<MetricSpace> space;
    if (!gen_in.empty()) {
      space = metric_from_json(read_json(gen_in));
    } else if (gen_random > 0) {
      Engine eng = make_engine(gen_seed.resolve(space_gen), 0);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      std::vector<std::vector<double>> pts(gen_random, std::vector<double>(gen_dim));
      for (auto& p : pts)
        for (double& x : p) x = unit(eng);
      space = MetricSpace::euclidean(pts);
    } else {
      throw ParameterError("space gen needs --in or --random");
    }
    if (gen_normalize) space = normalize_diameter(*space);
    write_text(out, metric_to_json(*space).dump(2) + "\n");
  });

  auto* space_validate = space_cmd->add_subcommand("validate", "Check the metric axioms");
  std::string validate_in;
  space_validate->add_option("--space", validate_in, "Metric JSON")->required();
  space_validate->callback([&] {
    const MetricSpace space = metric_from_json(read_json(validate_in));
    const Diagnostics d = validate_metric(space);
    std::ostringstream os;
    os << (d.empty() ? "PASS" : "FAIL") << " metric " << space.size() << " points\n"
       << diagnostics_text(d);
    write_text(out, os.str());
    if (!d.empty()) status = kFail;
  });

  // partition
  auto* part_cmd = app.add_subcommand("partition", "Partition trees");
  part_cmd->require_subcommand(1);
  auto* part_build = part_cmd->add_subcommand("build", "Build an increasing sequence of partitions");
  std::string part_space, part_cov;
  double part_r = 2.0, part_scale = 1.0;
  std::size_t part_depth = 8, part_mc = 20000;
  bool part_greedy = false;
  SeedOption part_seed;
  part_build->add_option("--space", part_space, "Metric JSON (diameter <= 1)");
  part_build->add_option("--r", part_r, "Scale ratio r >= 2");
  part_build->add_option("--depth", part_depth, "Maximum depth");
  part_build->add_flag("--greedy-gaussian", part_greedy, "Greedy G-driven partitions of a Gaussian model");
  part_build->add_option("--cov", part_cov, "Covariance JSON for --greedy-gaussian");
  part_build->add_option("--scale", part_scale, "Canonical metric multiplier before normalizing");
  part_build->add_option("--mc-n", part_mc, "Monte Carlo draws for G");
  part_seed.attach(part_build);
  part_build->callback([&] {
    if (part_greedy) {
      const NormalizedInstance inst = normalize_instance(load_model(part_cov), part_scale);
      const GreedyPartition g =
          greedy_gaussian_partition(inst.model, inst.metric, part_r, part_depth,
                                    {part_mc, part_seed.resolve(part_build)});
      for (const auto& w : g.warnings) std::cerr << "warning: " << w << "\n";
      json j = tree_to_json(g.tree, inst.metric.labels());
      j["normalization"] = inst.factor;
      write_text(out, j.dump(2) + "\n");
      return;
    }
    const auto space = load_space(part_space);
    if (!space) throw ParameterError("--space is required");
    const PartitionTree tree = build_radial_partitions(*space, part_r, part_depth);
    write_text(out, tree_to_json(tree, space->labels()).dump(2) + "\n");
  });

  // codes
  auto* codes_cmd = app.add_subcommand("codes", "Variable-length code sequences");
  codes_cmd->require_subcommand(1);
  auto* codes_build = codes_cmd->add_subcommand("build", "Assign code lengths to a partition tree");
  Sources codes_src;
  std::string method = "labeled-net", conditionals = "uniform";
  bool emit = false;
  codes_build->add_option("--tree", codes_src.tree, "Partition tree JSON")->required();
  codes_build->add_option("--space", codes_src.space, "Metric JSON (labels and resolution checks)");
  codes_build->add_option("--mu", codes_src.mu, "Measure JSON (default uniform)");
  codes_build->add_option("--method", method, "Construction")
      ->check(CLI::IsMember({"measures", "labeled-net", "single-measure", "lower"}));
  codes_build->add_option("--conditionals", conditionals, "measures: uniform or mu")
      ->check(CLI::IsMember({"uniform", "mu"}));
  codes_build->add_flag("--emit", emit, "Include canonical code words");
  codes_build->callback([&] {
    const auto space = load_space(codes_src.space);
    const auto labels = labels_from(space, codes_src);
    auto tree = std::make_shared<const PartitionTree>(tree_from_json(read_json(codes_src.tree), labels));
    const ProbabilityMeasure mu = load_measure(codes_src.mu, labels);
    std::optional<VlcSequence> vlc;
    if (method == "measures") {
      const ConditionalFamily cond =
          conditionals == "mu" ? conditionals_from_measure(*tree, mu) : uniform_conditionals(*tree);
      vlc = build_from_measures(tree, mu, cond);
    } else if (method == "labeled-net") {
      vlc = build_from_labeled_net(tree);
    } else if (method == "single-measure") {
      vlc = build_from_single_measure(tree, mu);
    } else {
      vlc = assign_lower_codes(tree);
    }
    json j = vlc_to_json(*vlc, labels);
    if (emit) {
      json words = json::array();
      for (std::size_t k = 0; k <= vlc->depth(); ++k) words.push_back(canonical_codewords(vlc->level_lengths(k)));
      j["codewords"] = words;
    }
    const Diagnostics d = space ? validate_admissible(*vlc, *space) : validate_admissible(*vlc);
    for (const auto& x : d) std::cerr << "admissibility " << x.kind << ": " << x.message << "\n";
    if (!d.empty()) status = kFail;
    write_text(out, j.dump(2) + "\n");
  });

  // bound
  auto* bound_cmd = app.add_subcommand("bound", "Chaining functionals");
  bound_cmd->require_subcommand(1);
  auto* bound_eval = bound_cmd->add_subcommand("eval", "Evaluate one functional per point");
  Sources bound_src;
  std::string functional, channel = "integer", bound_format = "csv";
  bound_eval->add_option("--functional", functional, "Functional")->required()->check(CLI::IsMember(kFunctionals));
  bound_eval->add_option("--channel", channel, "Code lengths: integer or ideal")
      ->check(CLI::IsMember({"integer", "ideal"}));
  bound_eval->add_option("--format", bound_format, "csv, json or svg")->check(CLI::IsMember({"csv", "json", "svg"}));
  add_sources(bound_eval, bound_src);
  bound_eval->callback([&] { write_text(out, render(evaluate(functional, bound_src, channel), bound_format)); });

  // report
  auto* report_cmd = app.add_subcommand("report", "Write a functional report as csv, json or svg");
  Sources report_src;
  std::string report_functional, report_channel = "integer", report_format = "csv", report_file = "-";
  report_cmd->add_option("--functional", report_functional, "Functional")
      ->required()
      ->check(CLI::IsMember(kFunctionals));
  report_cmd->add_option("--channel", report_channel, "Code lengths: integer or ideal")
      ->check(CLI::IsMember({"integer", "ideal"}));
  report_cmd->add_option("--file", report_file, "Destination ('-' for stdout)");
  add_sources(report_cmd, report_src);
  report_cmd->callback([&] {
    report_format = out == "-" ? "csv" : out;
    if (report_format != "csv" && report_format != "json" && report_format != "svg")
      throw ParameterError("report --out must be csv, json or svg");
    write_text(report_file, render(evaluate(report_functional, report_src, report_channel), report_format));
  });

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo for Gaussian models");
  sim_cmd->require_subcommand(1);
  auto* sim_sup = sim_cmd->add_subcommand("sup", "Estimate E sup over a subset");
  std::string sim_cov, sim_subset, sim_center;
  std::size_t sim_n = 100000;
  SeedOption sim_seed;
  sim_sup->add_option("--cov", sim_cov, "Covariance JSON")->required();
  sim_sup->add_option("--subset", sim_subset, "Comma-separated labels (default all)");
  sim_sup->add_option("--n", sim_n, "Draws");
  sim_sup->add_option("--center", sim_center, "Estimate E sup |X_t - X_t0| instead");
  sim_seed.attach(sim_sup);
  sim_sup->callback([&] {
    const GaussianModel model = load_model(sim_cov);
    PointSet subset;
    if (sim_subset.empty()) {
      subset.resize(model.size());
      std::iota(subset.begin(), subset.end(), std::size_t{0});
    } else {
      subset = lookup_points(model.labels(), sim_subset);
    }
    std::optional<std::size_t> center;
    if (!sim_center.empty()) center = model.index_of(sim_center);
    const McEstimate e = estimate_sup(model, subset, sim_n, sim_seed.resolve(sim_sup), center);
    std::ostringstream os;
    os << "estimate,half_width,samples,seed\n"
       << format_double(e.value) << ',' << format_double(e.half_width) << ',' << e.samples << ','
       << e.seed << "\n";
    write_text(out, os.str());
  });

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "Empirical checks (exit 1 on FAIL)");
  verify_cmd->require_subcommand(1);
  std::string v_cov, v_u, v_u1, v_t0, v_points, v_method = "labeled-net";
  double v_scale = std::sqrt(2.0), v_r = 2.0;
  std::size_t v_n = 100000, v_depth = 12;
  std::optional<double> v_a, v_max_ratio;
  SeedOption v_seed;
  auto common = [&](CLI::App* c) {
    c->add_option("--cov", v_cov, "Covariance JSON")->required();
    c->add_option("--n", v_n, "Draws");
    v_seed.attach(c);
  };
  auto tree_opts = [&](CLI::App* c) {
    c->add_option("--r", v_r, "Scale ratio");
    c->add_option("--depth", v_depth, "Maximum depth");
  };
  auto* v_inc = verify_cmd->add_subcommand("increment", "P[|X_s - X_t| >= u d(s,t)] per pair");
  common(v_inc);
  v_inc->add_option("--scale", v_scale, "Multiplier of the canonical metric");
  v_inc->add_option("--u", v_u, "Comma-separated u grid")->default_val("0.5,1,1.5,2");
  v_inc->callback([&] {
    const GaussianModel model = load_model(v_cov);
    const MetricSpace metric = canonical_metric(model, v_scale);
    const IncrementReport rep = check_increment_condition(model, metric, parse_grid(v_u), v_n,
                                                          v_seed.resolve(v_inc), v_scale * v_scale / 2.0);
    std::ostringstream os;
    os << "s,t,u,rate,wilson_lower,wilson_upper,bound,result\n";
    for (const auto& r : rep.rows)
      os << model.labels()[r.s] << ',' << model.labels()[r.t] << ',' << format_double(r.u) << ','
         << format_double(r.exceedance.rate) << ',' << format_double(r.exceedance.lower) << ','
         << format_double(r.exceedance.upper) << ',' << format_double(r.bound) << ','
         << (r.pass ? "PASS" : "FAIL") << '\n';
    for (const auto& [s, t] : rep.flagged)
      std::cerr << "flagged: " << model.labels()[s] << "," << model.labels()[t]
                << " at distance zero but not almost surely equal\n";
    write_text(out, os.str());
    if (!rep.pass) status = kFail;
  });

  auto chain_instance = [&](const GaussianModel& model) {
    NormalizedInstance inst = normalize_instance(model, std::sqrt(2.0));
    auto tree = std::make_shared<const PartitionTree>(build_radial_partitions(inst.metric, v_r, v_depth));
    const ProbabilityMeasure uni = ProbabilityMeasure::uniform(model.size());
    VlcSequence vlc = v_method == "measures"         ? build_from_measures(tree, uni, uniform_conditionals(*tree))
                      : v_method == "single-measure" ? build_from_single_measure(tree, uni)
                                                     : build_from_labeled_net(tree);
    return std::make_pair(std::move(inst), std::move(vlc));
  };
  auto method_opt = [&](CLI::App* c) {
    c->add_option("--method", v_method, "Code construction")
        ->check(CLI::IsMember({"measures", "labeled-net", "single-measure"}));
  };

  auto* v_t1 = verify_cmd->add_subcommand("theorem1", "Uniform tail bound with sigma_bar");
  common(v_t1);
  tree_opts(v_t1);
  method_opt(v_t1);
  v_t1->add_option("--t0", v_t0, "Base point label (default first)");
  v_t1->add_option("--u", v_u1, "Comma-separated u grid")->default_val("1,1.5,2");
  v_t1->callback([&] {
    const GaussianModel model = load_model(v_cov);
    const auto [inst, vlc] = chain_instance(model);
    const std::size_t t0 = v_t0.empty() ? 0 : model.index_of(v_t0);
    const TailBoundReport rep = check_tail_bound(inst.model, inst.metric, vlc, WeightSequence::dyadic(), t0,
                                              parse_grid(v_u1), v_n, v_seed.resolve(v_t1));
    std::ostringstream os;
    os << "u,rate,wilson_lower,wilson_upper,bound,result\n";
    for (const auto& r : rep.rows)
      os << format_double(r.u) << ',' << format_double(r.violation.rate) << ','
         << format_double(r.violation.lower) << ',' << format_double(r.violation.upper) << ','
         << format_double(r.bound) << ',' << (r.pass ? "PASS" : "FAIL") << '\n';
    write_text(out, os.str());
    if (!rep.pass) status = kFail;
  });

  auto* v_cor = verify_cmd->add_subcommand("corollary", "E sup X_t against 2 sup_t sigma_bar(t)");
  common(v_cor);
  tree_opts(v_cor);
  method_opt(v_cor);
  v_cor->callback([&] {
    const GaussianModel model = load_model(v_cov);
    const auto [inst, vlc] = chain_instance(model);
    const CorollaryReport rep = check_corollary(inst.model, vlc, WeightSequence::dyadic(), v_n,
                                                v_seed.resolve(v_cor));
    std::ostringstream os;
    os << "estimate,half_width,sup_sigma_bar,bound,normalization,result\n"
       << format_double(rep.expected_sup.value) << ',' << format_double(rep.expected_sup.half_width)
       << ',' << format_double(rep.sup_sigma_bar) << ',' << format_double(rep.bound) << ','
       << format_double(inst.factor) << ',' << (rep.pass ? "PASS" : "FAIL") << '\n';
    write_text(out, os.str());
    if (!rep.pass) status = kFail;
  });

  auto* v_len = verify_cmd->add_subcommand("len-diff", "Code-length increments of the greedy partition");
  common(v_len);
  tree_opts(v_len);
  v_len->add_option("--max-ratio", v_max_ratio, "FAIL when sup_t S(t)/(G(T)+diam) exceeds this");
  v_len->callback([&] {
    const NormalizedInstance inst = normalize_instance(load_model(v_cov), 1.0);
    const McConfig mc{v_n, v_seed.resolve(v_len)};
    const GreedyPartition g = greedy_gaussian_partition(inst.model, inst.metric, v_r, v_depth, mc);
    for (const auto& w : g.warnings) std::cerr << "warning: " << w << "\n";
    const VlcSequence vlc = assign_lower_codes(std::make_shared<const PartitionTree>(g.tree));
    const LenDiffReport rep = verify_len_diff(inst.model, vlc, v_r, mc);
    std::ostringstream os;
    os << "point,S,G_hat,ratio\n";
    for (std::size_t t = 0; t < rep.ratios.size(); ++t)
      os << inst.model.labels()[t] << ',' << format_double(rep.increments_sum[t]) << ','
         << format_double(rep.g_hat.value) << ',' << format_double(rep.ratios[t]) << '\n';
    write_text(out, os.str());
    if (v_max_ratio && rep.sup_ratio > *v_max_ratio) {
      std::cerr << "FAIL sup ratio " << format_double(rep.sup_ratio) << " > " << *v_max_ratio << "\n";
      status = kFail;
    }
  });

  auto* v_sud = verify_cmd->add_subcommand("sudakov", "Separated-points minoration diagnostic");
  common(v_sud);
  v_sud->add_option("--points", v_points, "Comma-separated labels (default all)");
  v_sud->add_option("--a", v_a, "Separation (default smallest pairwise distance)");
  v_sud->callback([&] {
    const GaussianModel model = load_model(v_cov);
    PointSet pts;
    if (v_points.empty()) {
      pts.resize(model.size());
      std::iota(pts.begin(), pts.end(), std::size_t{0});
    } else {
      pts = lookup_points(model.labels(), v_points);
    }
    const SudakovReport rep = sudakov_check(model, pts, v_a, {}, {v_n, v_seed.resolve(v_sud)});
    std::ostringstream os;
    os << "m,a,b,G_union,half_width,min_G_part,separation_term,fitted_constant\n"
       << rep.m << ',' << format_double(rep.a) << ',' << format_double(rep.b) << ','
       << format_double(rep.g_union.value) << ',' << format_double(rep.g_union.half_width) << ','
       << format_double(rep.min_g_part) << ',' << format_double(rep.separation_term) << ','
       << format_double(rep.fitted_constant) << '\n';
    write_text(out, os.str());
  });

  // optimize
  auto* opt_cmd = app.add_subcommand("optimize", "Heuristic search over measures");
  opt_cmd->require_subcommand(1);
  std::string opt_space, opt_trace;
  OptimizerConfig opt_cfg;
  SeedOption opt_seed;
  auto opt_common = [&](CLI::App* c) {
    c->add_option("--space", opt_space, "Metric JSON")->required();
    c->add_option("--iters", opt_cfg.iters, "Rounds");
    c->add_option("--tol", opt_cfg.tol, "Stop when 10 rounds improve less than this");
    c->add_option("--restarts", opt_cfg.restarts, "Restarts");
    opt_seed.attach(c);
  };
  auto* opt_mm = opt_cmd->add_subcommand("mm", "Minimize sup_t I_mu(t)");
  opt_common(opt_mm);
  opt_mm->add_option("--trace", opt_trace, "Trace CSV destination");
  opt_mm->callback([&] {
    const auto space = load_space(opt_space);
    opt_cfg.seed = opt_seed.resolve(opt_mm);
    const MajorizingResult res = optimize_majorizing_measure(*space, opt_cfg);
    json j = measure_to_json(res.measure, space->labels());
    j["value"] = res.value;
    j["uniform_value"] = res.uniform_value;
    j["iterations"] = res.iterations;
    write_text(out, j.dump(2) + "\n");
    if (!opt_trace.empty()) write_text(opt_trace, trace_to_csv(res.trace));
  });
  auto* opt_fe = opt_cmd->add_subcommand("fernique", "Maximize M(mu, mu)");
  opt_common(opt_fe);
  opt_fe->callback([&] {
    const auto space = load_space(opt_space);
    opt_cfg.seed = opt_seed.resolve(opt_fe);
    const SelfBoundResult res = fernique_self_bound(*space, opt_cfg);
    json j = measure_to_json(res.measure, space->labels());
    j["value"] = res.value;
    j["sup_ft"] = res.sup_ft;
    j["uniform_value"] = res.uniform_value;
    j["consistent"] = res.consistent;
    write_text(out, j.dump(2) + "\n");
    if (!res.consistent) status = kFail;
  });

  std::vector<std::string> args;
  for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
  std::reverse(args.begin(), args.end());
  args = expand_config(args);
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return kInputError;
}
