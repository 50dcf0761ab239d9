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

// Command-line front end. Every run takes a "key = value" config file
// (flags override fields), writes a config echo, trace CSVs and a summary
// JSON into the output directory, and is bit-reproducible from (config, seed).
//
// Exit codes: 0 success, 1 config error, 2 verification violation,
// 3 divergence where convergence was expected.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gcomp/cgd.hpp"
#include "gcomp/classes.hpp"
#include "gcomp/compressors.hpp"
#include "gcomp/config.hpp"
#include "gcomp/distributed.hpp"
#include "gcomp/problems.hpp"
#include "gcomp/stats.hpp"
#include "gcomp/trace_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gcomp;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  long seed = -1;  // -1 = take from config (default 1)
  int jobs = 0;    // reserved cap on worker count; execution is sequential
};

void add_common(CLI::App* cmd, CommonArgs& args, const std::string& default_out) {
  cmd->add_option("--config", args.config_path, "config file (key = value lines)");
  cmd->add_option("--seed", args.seed, "override the config seed");
  cmd->add_option("--out", args.out_dir, "output directory")->default_val(default_out);
  cmd->add_option("--jobs", args.jobs, "cap on parallel workers (advisory)");
}

Config load_config(const CommonArgs& args) {
  Config cfg;
  if (!args.config_path.empty()) cfg = Config::parse_file(args.config_path);
  if (args.seed >= 0) cfg.set("seed", std::to_string(args.seed));
  if (!cfg.has("seed")) cfg.set("seed", "1");
  return cfg;
}

Provenance make_provenance(const Config& cfg) {
  Provenance prov;
  prov.config_hash = cfg.hash();
  prov.seed = static_cast<std::uint64_t>(cfg.get_long("seed"));
  return prov;
}

void write_run_files(const std::string& dir, const Config& cfg, json summary) {
  fs::create_directories(dir);
  const Provenance prov = make_provenance(cfg);
  write_text(dir + "/config_echo.txt", prov.header_comment() + cfg.canonical_text());
  summary["seed"] = cfg.get_long("seed");
  char hash[24];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(prov.config_hash));
  summary["config_hash"] = hash;
  summary["config"] = cfg.canonical_text();
  write_text(dir + "/summary.json", summary.dump(2) + "\n");
}

CompressorSpec compressor_from(const Config& cfg, int dim) {
  Config sub = cfg.sub("compressor");
  if (!sub.has("kind")) throw ConfigError("missing compressor.kind");
  const bool auto_scale = sub.get_str("scale", "") == "auto";
  if (auto_scale) sub.set("scale", "1");
  CompressorSpec spec = CompressorSpec::from_config(sub);
  spec = roster_at_dimension(spec, dim);
  if (auto_scale) spec.scale = b3_conversion(spec, dim).lambda;
  spec.validate(dim);
  return spec;
}

// ---- verify -----------------------------------------------------------------

int cmd_verify(const CommonArgs& args) {
  const Config cfg = load_config(args);
  const std::uint64_t seed = cfg.get_long("seed");

  SamplerPlan plan = SamplerPlan::defaults();
  if (cfg.get_str("plan", "default") == "quick") {
    plan = SamplerPlan::quick(static_cast<int>(cfg.get_long("plan.dim", 16)),
                              static_cast<int>(cfg.get_long("plan.vectors", 30)),
                              static_cast<int>(cfg.get_long("plan.mc", 500)));
  }

  std::vector<RosterEntry> roster = verification_roster();
  if (cfg.has("operators") && cfg.get_str("operators") != "all") {
    std::vector<RosterEntry> filtered;
    std::istringstream names(cfg.get_str("operators"));
    std::string name;
    while (std::getline(names, name, ',')) {
      bool found = false;
      for (const auto& e : roster) {
        if (e.label == name) {
          filtered.push_back(e);
          found = true;
        }
      }
      if (!found) throw ConfigError("unknown operator in roster: " + name);
    }
    roster = filtered;
  }

  fs::create_directories(args.out_dir + "/reports");
  json summary;
  summary["kind"] = "verify";
  summary["seed"] = seed;
  int violations_total = 0;
  std::uint64_t stream = 0;

  for (const auto& entry : roster) {
    json op_result;
    op_result["label"] = entry.label;
    json claim_results = json::array();
    // Claims are dimension dependent, so the plan is split per block and the
    // spec instantiated at each block's dimension.
    const Config claim_cfg = cfg.sub("claim." + entry.label);
    for (const auto& block : plan.blocks) {
      const CompressorSpec spec = roster_at_dimension(entry.spec, block.dim);
      SamplerPlan single;
      single.blocks = {block};
      single.adversarial = plan.adversarial;
      for (ClassParams claim : table1_claims(spec, block.dim)) {
        // optional claimed-parameter overrides (tightening/loosening checks)
        if (claim.tag == ClassTag::B3 && claim_cfg.has("delta")) {
          claim.delta = claim_cfg.get_double("delta");
        }
        if (claim.tag == ClassTag::U && claim_cfg.has("zeta")) {
          claim.zeta = claim_cfg.get_double("zeta");
        }
        OperatorUnderTest op = make_operator(spec);
        op.name = entry.label;
        Rng rng(seed + 7919 * stream++);
        MembershipReport rep = verify_membership(op, claim, single, rng);
        violations_total += rep.violations;
        json jr = rep.to_json();
        jr["dim"] = block.dim;
        claim_results.push_back(jr);
      }
    }
    op_result["claims"] = claim_results;
    bool passed = true;
    for (const auto& c : claim_results) {
      if (!c["passed"].get<bool>()) passed = false;
    }
    op_result["passed"] = passed;
    write_text(args.out_dir + "/reports/" + entry.label + ".json",
               op_result.dump(2) + "\n");
    summary["operators"].push_back(op_result);
    std::printf("%-28s %s\n", entry.label.c_str(), passed ? "ok" : "VIOLATION");
  }
  summary["violations"] = violations_total;
  write_run_files(args.out_dir, cfg, summary);
  return violations_total == 0 ? 0 : 2;
}

// ---- problems from config ---------------------------------------------------

Objective problem_from(const Config& cfg, Rng& rng) {
  const Config p = cfg.sub("problem");
  const std::string kind = p.get_str("kind", "quadratic");
  if (kind == "quadratic") {
    return gen_quadratic(static_cast<int>(p.get_long("dim", 100)),
                         p.get_double("eig_lo", 1.0), p.get_double("eig_hi", 10.0),
                         rng);
  }
  if (kind == "csv") {
    const RegKind reg =
        p.get_str("reg", "least_squares") == "logistic" ? RegKind::Logistic
                                                        : RegKind::LeastSquares;
    const auto data =
        load_regression_csv(p.get_str("path"), reg, p.get_bool("normalize", true),
                            p.get_bool("header", false), p.get_double("mu0", 1e-3));
    return make_objective(data);
  }
  throw ConfigError("unknown problem.kind: " + kind);
}

DistributedObjective dist_problem_from(const Config& cfg, Rng& rng) {
  const Config p = cfg.sub("problem");
  const std::string kind = p.get_str("kind", "example1");
  if (kind == "example1") return example1();
  if (kind == "counterexample") {
    return counterexample_general(static_cast<int>(p.get_long("d", 3)),
                                  static_cast<int>(p.get_long("d1", 1)));
  }
  if (kind == "quadratic") {
    const auto obj =
        gen_quadratic(static_cast<int>(p.get_long("dim", 10)),
                      p.get_double("eig_lo", 1.0), p.get_double("eig_hi", 2.0), rng);
    return replicate(obj, static_cast<int>(p.get_long("nodes", 4)));
  }
  if (kind == "csv") {
    const RegKind reg =
        p.get_str("reg", "least_squares") == "logistic" ? RegKind::Logistic
                                                        : RegKind::LeastSquares;
    const auto data =
        load_regression_csv(p.get_str("path"), reg, p.get_bool("normalize", true),
                            p.get_bool("header", false), p.get_double("mu0", 1e-3));
    return partition(data, static_cast<int>(p.get_long("nodes", 4)));
  }
  throw ConfigError("unknown problem.kind: " + kind);
}

Vec start_point(const Objective& obj, double offset) {
  Vec x0(obj.dim, offset);
  if (obj.xstar) {
    x0 = *obj.xstar;
    for (auto& e : x0) e += offset;
  }
  return x0;
}

// ---- cgd ---------------------------------------------------------------------

int cmd_cgd(const CommonArgs& args) {
  const Config cfg = load_config(args);
  const std::uint64_t seed = cfg.get_long("seed");
  Rng prng(seed);
  const Objective obj = problem_from(cfg, prng);
  const CompressorSpec spec = compressor_from(cfg, obj.dim);

  CgdConfig run;
  run.iterations = cfg.get_long("run.iterations", 1000);
  const std::string rule = cfg.get_str("run.rule", "one_over_l");
  if (rule == "one_over_l") {
    run.rule = StepRule::OneOverL;
    run.class_params = ClassParams::b3(cfg.get_double("class.delta",
                                                      b3_conversion(spec, obj.dim).delta));
  } else if (rule == "one_over_beta_l") {
    run.rule = StepRule::OneOverBetaL;
    ClassParams b1 = ClassParams::b1(1.0, 1.0);
    CompressorSpec unscaled = spec;
    unscaled.scale = 1.0;
    for (const auto& c : table1_claims(unscaled, obj.dim)) {
      if (c.tag == ClassTag::B1) b1 = c;
    }
    b1.alpha = cfg.get_double("class.alpha", b1.alpha);
    b1.beta = cfg.get_double("class.beta", b1.beta);
    run.class_params = b1;
  } else if (rule == "manual") {
    run.rule = StepRule::Manual;
    run.eta_manual = cfg.get_double("run.eta");
  } else {
    throw ConfigError("unknown run.rule: " + rule);
  }
  run.x0 = start_point(obj, cfg.get_double("run.x0_offset", 1.0));

  Rng rng(seed + 1);
  const CgdTrace trace = run_cgd(obj, spec, run, rng);

  fs::create_directories(args.out_dir);
  write_cgd_csv(args.out_dir + "/trace.csv", trace, make_provenance(cfg));
  json summary;
  summary["kind"] = "cgd";
  summary["compressor"] = spec.name();
  summary["eta"] = trace.eta;
  summary["iterations"] = run.iterations;
  summary["diverged"] = trace.diverged;
  summary["f_gap_initial"] = trace.rows.front().f_gap;
  summary["f_gap_final"] = trace.rows.back().f_gap;
  summary["bits_total"] = trace.rows.back().bits_cum;
  summary["rate_bound_final"] =
      rate_bound(run.class_params, obj.L, obj.mu, run.iterations);
  write_run_files(args.out_dir, cfg, summary);
  return trace.diverged ? 3 : 0;
}

// ---- distributed -------------------------------------------------------------

int cmd_distributed(const CommonArgs& args) {
  const Config cfg = load_config(args);
  const std::uint64_t seed = cfg.get_long("seed");
  Rng prng(seed);
  const DistributedObjective dobj = dist_problem_from(cfg, prng);
  const CompressorSpec spec = compressor_from(cfg, dobj.dim());

  DistOptions opts;
  opts.record_every = cfg.get_long("run.record_every", 1);
  opts.x0 = start_point(dobj.aggregate, cfg.get_double("run.x0_offset", 1.0));
  const long iters = cfg.get_long("run.iterations", 1000);
  const std::string method = cfg.get_str("method", "ef");

  Rng rng(seed + 1);
  DistTrace trace;
  json summary;
  summary["kind"] = "distributed";
  summary["method"] = method;
  summary["problem"] = cfg.get_str("problem.kind", "example1");
  summary["compressor"] = spec.name();
  summary["nodes"] = dobj.n();
  summary["K"] = iters;

  if (method == "naive") {
    trace = run_dcgd_naive(dobj, spec, cfg.get_double("naive.eta", 0.1), iters, rng,
                           opts);
  } else if (method == "ef") {
    const NoiseModel nm{cfg.get_double("noise.B", 0.0), cfg.get_double("noise.C", 0.0)};
    double delta = cfg.get_double("schedule.delta", 0.0);
    if (delta <= 0.0) delta = b3_conversion(spec, dobj.dim()).delta;
    const int kind = static_cast<int>(cfg.get_long("schedule.kind", 3));
    Schedule sched;
    if (kind == 1) {
      sched = Schedule::kind1(delta, nm.B, dobj.node_L, dobj.node_mu);
    } else if (kind == 2) {
      sched = Schedule::kind2(delta, nm.B, dobj.node_L, dobj.node_mu,
                              cfg.get_double("schedule.eta", 0.0));
    } else if (kind == 3) {
      sched = Schedule::kind3(delta, nm.B, dobj.node_L, dobj.node_mu,
                              cfg.get_double("schedule.eta", 0.0));
    } else {
      throw ConfigError("schedule.kind must be 1, 2 or 3");
    }
    trace = run_ef_sgd(dobj, spec, sched, nm, iters, rng, opts);
    const double r0 = dist_sq(opts.x0, *dobj.aggregate.xstar);
    summary["schedule_kind"] = kind;
    summary["delta"] = delta;
    summary["B"] = nm.B;
    summary["C"] = nm.C;
    summary["theorem_bound"] =
        theorem_bound(static_cast<ScheduleKind>(kind), delta, nm.B, nm.C, dobj.D,
                      dobj.node_L, dobj.node_mu, dobj.n(), r0, iters);
    summary["ef_identity_max_err"] = trace.ef_identity_max_err;
  } else {
    throw ConfigError("method must be 'ef' or 'naive'");
  }

  fs::create_directories(args.out_dir);
  write_dist_csv(args.out_dir + "/trace.csv", trace, make_provenance(cfg));
  summary["diverged"] = trace.diverged;
  summary["f_gap_iterate_final"] = trace.rows.back().f_gap_iterate;
  summary["f_gap_ergodic_final"] = trace.rows.back().f_gap_ergodic;
  summary["bits_total"] = trace.rows.back().bits_cum;
  if (!trace.note.empty()) summary["note"] = trace.note;
  write_run_files(args.out_dir, cfg, summary);
  // Divergence of the naive method is a legitimate observation; the error
  // feedback method diverging means the run is broken.
  if (method == "ef" && trace.diverged) return 3;
  return 0;
}

// ---- counterexample ------------------------------------------------------

int cmd_counterexample(const CommonArgs& args) {
  const Config cfg = load_config(args);
  const std::uint64_t seed = cfg.get_long("seed");
  const std::string family = cfg.get_str("family", "example1");
  const double eta = cfg.get_double("eta", 0.1);
  const long iters = cfg.get_long("iterations", 50);

  DistributedObjective dobj;
  double predicted = 0.0;
  if (family == "example1") {
    dobj = example1();
    predicted = 1.0 + 11.0 * eta / 6.0;
  } else if (family == "general") {
    const int d = static_cast<int>(cfg.get_long("family.d", 4));
    const int d1 = static_cast<int>(cfg.get_long("family.d1", 1));
    dobj = counterexample_general(d, d1);
    predicted = counterexample_growth_factor(d, d1, eta);
  } else {
    throw ConfigError("family must be 'example1' or 'general'");
  }

  CompressorSpec top;
  top.kind = Kind::TopK;
  top.k = family == "example1" ? 1
                               : static_cast<int>(cfg.get_long("family.d1", 1));

  DistOptions opts;
  opts.keep_iterates = true;
  Rng rng(seed);
  const DistTrace trace = run_dcgd_naive(dobj, top, eta, iters, rng, opts);

  // observed per-step factor from the recorded iterates (first coordinate)
  double observed = 0.0;
  if (trace.iterates.size() >= 2) {
    observed = trace.iterates[1][0] / trace.iterates[0][0];
  }
  std::printf("predicted factor per step: %.12g\n", predicted);
  std::printf("observed  factor per step: %.12g\n", observed);

  fs::create_directories(args.out_dir);
  write_dist_csv(args.out_dir + "/trace.csv", trace, make_provenance(cfg));
  json summary;
  summary["kind"] = "counterexample";
  summary["family"] = family;
  summary["eta"] = eta;
  summary["predicted_factor"] = predicted;
  summary["observed_factor"] = observed;
  summary["diverged"] = trace.diverged;
  write_run_files(args.out_dir, cfg, summary);
  return 0;
}

// ---- stats -----------------------------------------------------------------

int cmd_stats(const CommonArgs& args) {
  const Config cfg = load_config(args);
  const std::uint64_t seed = cfg.get_long("seed");
  const std::string mode = cfg.get_str("mode", "table2");
  fs::create_directories(args.out_dir);
  json summary;
  summary["kind"] = "stats";
  summary["mode"] = mode;

  if (mode == "table2") {
    // expected top-k savings of Gaussian coordinate models by quadrature
    std::vector<int> dims;
    {
      std::istringstream ds(cfg.get_str("dims", "100,1000,10000"));
      std::string tok;
      while (std::getline(ds, tok, ',')) dims.push_back(std::stoi(tok));
    }
    std::vector<int> ks;
    {
      std::istringstream kss(cfg.get_str("ks", "3,5"));
      std::string tok;
      while (std::getline(kss, tok, ',')) ks.push_back(std::stoi(tok));
    }
    const OrderMode order = cfg.get_str("ordering", "absolute") == "signed"
                                ? OrderMode::Signed
                                : OrderMode::Absolute;
    std::string csv = make_provenance(cfg).header_comment();
    csv += "dist,k";
    for (int d : dims) csv += ",d=" + std::to_string(d);
    csv += "\n";
    for (const auto& [mu, sigma, label] :
         std::vector<std::tuple<double, double, std::string>>{{0.0, 1.0, "N(0;1)"},
                                                              {2.0, 1.0, "N(2;1)"}}) {
      for (int k : ks) {
        csv += label + "," + std::to_string(k);
        for (int d : dims) {
          const double s = gaussian_topk_saving(d, k, mu, sigma, order);
          csv += "," + format_double(s);
          summary["values"][label]["k=" + std::to_string(k)]
                 ["d=" + std::to_string(d)] = s;
        }
        csv += "\n";
      }
    }
    write_text(args.out_dir + "/table2.csv", csv);
  } else if (mode == "lemma") {
    const int d = static_cast<int>(cfg.get_long("d", 100));
    const int k = static_cast<int>(cfg.get_long("k", 10));
    const long mc = cfg.get_long("mc", 1000000);
    Rng rng(seed);
    const auto cf = uniform_ratio_closed_form(d, k);
    const auto mc_uni = empirical_savings(CoordDist::Uniform01, 0, 1, d, k, mc, rng);
    const int d_exp = static_cast<int>(cfg.get_long("d_exp", 50));
    const auto mc_exp =
        empirical_savings(CoordDist::StdExponential, 0, 1, d_exp, 1, mc, rng);
    summary["uniform"]["closed_form_ratio"] = cf.variance_ratio;
    summary["uniform"]["mc_ratio"] = mc_uni.omega_top / mc_uni.omega_rnd;
    summary["uniform"]["saving_ratio_top1"] = cf.saving_ratio_top1;
    summary["exponential"]["closed_form_ratio"] = exponential_saving_ratio(d_exp);
    summary["exponential"]["mc_ratio"] = mc_exp.s_top / (mc_exp.e_norm_sq / d_exp);
    std::string csv = make_provenance(cfg).header_comment();
    csv += "case,closed_form,monte_carlo\n";
    csv += "uniform_variance_ratio," + format_double(cf.variance_ratio) + "," +
           format_double(mc_uni.omega_top / mc_uni.omega_rnd) + "\n";
    csv += "exponential_saving_ratio," + format_double(exponential_saving_ratio(d_exp)) +
           "," + format_double(mc_exp.s_top / (mc_exp.e_norm_sq / d_exp)) + "\n";
    write_text(args.out_dir + "/lemma.csv", csv);
  } else {
    throw ConfigError("stats mode must be 'table2' or 'lemma'");
  }
  write_run_files(args.out_dir, cfg, summary);
  return 0;
}

// ---- bench-bits ----------------------------------------------------------

int cmd_bench_bits(const CommonArgs& args) {
  const Config cfg = load_config(args);
  const std::uint64_t seed = cfg.get_long("seed");
  const int d = static_cast<int>(cfg.get_long("d", 1000));
  const int vectors = static_cast<int>(cfg.get_long("vectors", 20));
  const int inner = static_cast<int>(cfg.get_long("inner", 4));

  std::vector<CompressorSpec> specs;
  std::vector<std::string> labels;
  auto push = [&](const std::string& label, const CompressorSpec& s) {
    specs.push_back(s);
    labels.push_back(label);
  };
  for (int k : {d / 100, d / 20, d / 10, d / 4}) {
    if (k < 1) continue;
    CompressorSpec rk;
    rk.kind = Kind::RandK;
    rk.k = k;
    push("rand_" + std::to_string(k), rk);
    CompressorSpec tk;
    tk.kind = Kind::TopK;
    tk.k = k;
    push("top_" + std::to_string(k), tk);
    CompressorSpec mix;
    mix.kind = Kind::TopKPlusDithering;
    mix.k = k;
    mix.base = 2.0;
    mix.levels = 8;
    mix.norm_order = std::numeric_limits<double>::infinity();
    push("top_" + std::to_string(k) + "_dither", mix);
  }
  CompressorSpec nat;
  nat.kind = Kind::NaturalCompression;
  push("natural_compression", nat);
  CompressorSpec dith;
  dith.kind = Kind::NaturalDithering;
  dith.levels = 8;
  dith.norm_order = std::numeric_limits<double>::infinity();
  push("natural_dithering", dith);

  Rng rng(seed);
  const auto rows = variance_bits_curve(specs, d, vectors, inner, rng);

  // plot-ready long format
  std::string csv = make_provenance(cfg).header_comment();
  csv += "operator,bits_per_coord,value,metric\n";
  json jrows = json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    csv += labels[i] + "," + format_double(rows[i].bits_per_coord) + "," +
           format_double(rows[i].normalized_variance) + ",normalized_variance\n";
    csv += labels[i] + "," + format_double(rows[i].bits_per_coord) + "," +
           format_double(rows[i].implied_delta) + ",delta\n";
    json r;
    r["operator"] = labels[i];
    r["bits_per_coord"] = rows[i].bits_per_coord;
    r["normalized_variance"] = rows[i].normalized_variance;
    r["delta"] = rows[i].implied_delta;
    jrows.push_back(r);
  }
  fs::create_directories(args.out_dir);
  write_text(args.out_dir + "/curve.csv", csv);
  json summary;
  summary["kind"] = "bench-bits";
  summary["d"] = d;
  summary["rows"] = jrows;
  write_run_files(args.out_dir, cfg, summary);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gradient compression operators, compressed GD and error-feedback "
               "distributed SGD"};
  app.require_subcommand(1);

  CommonArgs verify_args, cgd_args, dist_args, counter_args, stats_args, bits_args;
  auto* verify = app.add_subcommand("verify", "check operator class memberships");
  add_common(verify, verify_args, "runs/verify");
  auto* cgd = app.add_subcommand("cgd", "single-node compressed gradient descent");
  add_common(cgd, cgd_args, "runs/cgd");
  auto* dist = app.add_subcommand("distributed", "n-node methods (naive / error feedback)");
  add_common(dist, dist_args, "runs/distributed");
  auto* counter = app.add_subcommand("counterexample", "divergence demonstrations");
  add_common(counter, counter_args, "runs/counterexample");
  auto* stats = app.add_subcommand("stats", "savings tables and closed forms");
  add_common(stats, stats_args, "runs/stats");
  auto* bits = app.add_subcommand("bench-bits", "variance against bits per coordinate");
  add_common(bits, bits_args, "runs/bench-bits");

  CLI11_PARSE(app, argc, argv);

  try {
    if (verify->parsed()) return cmd_verify(verify_args);
    if (cgd->parsed()) return cmd_cgd(cgd_args);
    if (dist->parsed()) return cmd_distributed(dist_args);
    if (counter->parsed()) return cmd_counterexample(counter_args);
    if (stats->parsed()) return cmd_stats(stats_args);
    if (bits->parsed()) return cmd_bench_bits(bits_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
