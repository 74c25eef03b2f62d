#include "mvclt_cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>

#include "mvclt/corpus.hpp"
#include "mvclt/errors.hpp"
#include "mvclt/joint_table.hpp"
#include "mvclt/rademacher.hpp"
#include "mvclt/verify.hpp"
#include "mvclt_cli/output.hpp"

namespace mvclt::cli {

namespace {

constexpr double kPassTol = 1e-9;
constexpr double kCenterTol = 1e-12;

struct Sink {
  std::ostream* out = nullptr;
  std::ofstream file;
};

void open_sink(Sink& sink, const RunConfig& cfg, const CliOptions& opts, std::ostream& fallback) {
  const auto path = opts.out ? opts.out : cfg.csv_path;
  if (!path) {
    sink.out = &fallback;
    return;
  }
  sink.file.open(*path, std::ios::binary);
  if (!sink.file) throw ConfigError("cannot open output file " + *path);
  sink.out = &sink.file;
}

void write_header(std::ostream& out, const CliOptions& opts, const std::string& command) {
  if (!opts.reproducible) out << timestamp_line(command) << '\n';
}

InstanceConfig from_corpus(CorpusInstance c) {
  return InstanceConfig{std::move(c.id), std::move(c.model), std::move(c.statistic), std::nullopt, std::nullopt, {}, {}};
}

InstanceConfig from_bound(BoundCheckInstance b) {
  InstanceConfig inst{std::move(b.id),   std::move(b.model),    std::move(b.statistic),
                      std::move(b.runs), std::move(b.quadform), {},
                      {}};
  if (b.target) {
    inst.target.kind = TargetKind::explicit_matrix;
    inst.target.c = *b.target;
  }
  return inst;
}

std::vector<InstanceConfig> gather_instances(RunConfig& cfg, CorpusKind default_kind, std::size_t default_count) {
  std::vector<InstanceConfig> out = std::move(cfg.instances);
  std::optional<CorpusConfig> corpus = cfg.corpus;
  if (!corpus && !cfg.instances_given) corpus = CorpusConfig{default_kind, default_count, std::nullopt};
  if (!corpus) return out;
  const std::uint64_t seed = corpus->seed.value_or(cfg.seed);
  switch (corpus->kind) {
    case CorpusKind::identity:
      for (auto& c : identity_corpus(corpus->count, seed)) out.push_back(from_corpus(std::move(c)));
      break;
    case CorpusKind::rademacher:
      for (auto& c : rademacher_corpus(corpus->count, seed)) out.push_back(from_corpus(std::move(c)));
      break;
    case CorpusKind::bound:
      for (auto& b : default_bound_instances()) out.push_back(from_bound(std::move(b)));
      break;
  }
  return out;
}

std::optional<JointTable> try_table(const InstanceConfig& inst) {
  if (!inst.model.all_finite()) return std::nullopt;
  const auto count = inst.model.assignment_count();
  if (!count || *count > kDefaultEnumerationCap) return std::nullopt;
  return build_joint_table(inst.model, inst.statistic);
}

std::string join_path(const std::string& a, const std::string& b) { return a.empty() ? b : a + ": " + b; }

// --------------------------------------------------------------------------
// check-identities

int cmd_check_identities(RunConfig& cfg, const CliOptions& opts, std::ostream& out, std::ostream& err,
                         const CommandHooks& hooks) {
  if (cfg.mode != EstimationMode::exact)
    throw ConfigError("check-identities needs exact mode: the identities are checked on enumerated tables");
  auto instances = gather_instances(cfg, CorpusKind::identity, 200);
  IdentitySuiteOptions so;
  if (cfg.alphas) so.alphas = *cfg.alphas;
  so.overrides = hooks.identity_overrides;

  write_header(out, opts, "check-identities");
  CsvWriter csv(out, {"check_name", "instance_id", "max_violation", "tolerance", "pass"});
  if (instances.empty()) err << "warning: empty corpus, no identities checked\n";
  bool all_pass = true;
  for (const auto& inst : instances) {
    std::optional<JointTable> table;
    try {
      table = try_table(inst);
    } catch (const std::exception& e) {
      throw ConfigError(join_path("instance " + inst.id, e.what()));
    }
    if (!table) throw ConfigError("instance " + inst.id + ": model is not enumerable in exact mode");
    for (const auto& r : run_identity_suite(*table, inst.id, so)) {
      csv.row({r.check, r.instance_id, format_double(r.max_violation), format_double(r.tolerance),
               r.pass ? "true" : "false"});
      all_pass = all_pass && r.pass;
    }
  }
  for (const auto& w : cfg.warnings) err << "warning: " << w << '\n';
  return all_pass ? kOk : kCheckFailure;
}

// --------------------------------------------------------------------------
// bound

struct BoundContext {
  const RunConfig& cfg;
  CsvWriter& csv;
  std::ostream& err;
  bool any_fail = false;
  bool hypothesis = false;
};

struct Lhs {
  std::optional<DiscrepancyResult> disc;
};

StatisticVector shifted(const StatisticVector& f, std::vector<double> mean) {
  StatisticVector g = f;
  g.eval = [inner = f.eval, mean](std::span<const double> x) {
    auto v = inner(x);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= mean[i];
    return v;
  };
  return g;
}

void emit_report(BoundContext& ctx, const InstanceConfig& inst, const SmoothTestFunction& g, const BoundReport& r,
                 const Lhs& lhs, const std::string& status = "ok") {
  std::string lhs_s, slack_s, pass_s;
  if (lhs.disc) {
    const double tol = lhs.disc->lhs_error + kPassTol + r.std_error.value_or(0.0);
    const bool pass = lhs.disc->lhs <= r.total + tol;
    lhs_s = format_double(lhs.disc->lhs);
    slack_s = format_double(r.total - lhs.disc->lhs);
    pass_s = pass ? "true" : "false";
    ctx.any_fail = ctx.any_fail || !pass;
  }
  const std::size_t rows = std::max<std::size_t>({1, r.terms.size(), r.constants.size()});
  for (std::size_t k = 0; k < rows; ++k) {
    const NamedValue* t = k < r.terms.size() ? &r.terms[k] : nullptr;
    const NamedValue* c = k < r.constants.size() ? &r.constants[k] : nullptr;
    ctx.csv.row({inst.id, g.name, to_string(r.method), to_string(r.form), format_double(r.alpha),
                 t ? t->name : "", t ? format_double(t->value) : "", c ? c->name : "",
                 c ? format_double(c->value) : "", format_double(r.total), format_optional(r.std_error), lhs_s,
                 slack_s, pass_s, status});
  }
}

void emit_status(BoundContext& ctx, const InstanceConfig& inst, const SmoothTestFunction& g, BoundMethod method,
                 BoundForm form, double alpha, const std::string& status, bool hypothesis, bool failure = false) {
  ctx.csv.row({inst.id, g.name, to_string(method), to_string(form), format_double(alpha), "", "", "", "", "", "",
               "", "", failure ? "false" : "", status});
  ctx.hypothesis = ctx.hypothesis || hypothesis;
  ctx.any_fail = ctx.any_fail || failure;
}

Matrix runs_or_qf_covariance(const InstanceConfig& inst) {
  if (inst.runs) return runs_exact_covariance(*inst.runs);
  const std::size_t d = inst.quadform->dim();
  return qf_conditions(*inst.quadform, Matrix(d, d)).pairwise_covariance;
}

void bound_instance(BoundContext& ctx, const InstanceConfig& inst) {
  const RunConfig& cfg = ctx.cfg;
  const bool mc = cfg.mode == EstimationMode::monte_carlo;
  const std::size_t d = inst.statistic.dim;
  const bool specialized = inst.runs || inst.quadform;

  std::optional<JointTable> table;
  try {
    table = try_table(inst);
  } catch (const NonFiniteValueError& e) {
    throw ConfigError(join_path("instance " + inst.id, e.what()));
  }

  // The bounds are stated for centered F; anything else is shifted.
  std::optional<std::vector<double>> mean;
  if (table) {
    mean = moments(*table).mean;
    table = centered(*table);
  } else if (specialized) {
    mean = std::vector<double>(d, 0.0);
  }

  McConfig mcc = cfg.mc;
  mcc.seed = cfg.seed;
  std::map<double, McEstimates> estimates;
  auto estimate = [&](double alpha) -> const McEstimates& {
    auto it = estimates.find(alpha);
    if (it == estimates.end()) it = estimates.emplace(alpha, mc_estimates(inst.model, inst.statistic, alpha, mcc)).first;
    return it->second;
  };
  if (mc && !mean) {
    const auto& e = estimate(0.5);
    bool significant = false;
    for (std::size_t i = 0; i < d; ++i) significant = significant || std::abs(e.mean[i]) > 4.0 * e.mean_se[i];
    if (significant) {
      mean = e.mean;
      ctx.err << "warning: instance " << inst.id << ": mean estimated by Monte Carlo for centering\n";
    }
  }
  if (mean) {
    double worst = 0.0;
    for (double m : *mean) worst = std::max(worst, std::abs(m));
    if (worst > kCenterTol) {
      ctx.err << "warning: instance " << inst.id << ": E[F] is not zero (max |E F_i| = " << format_double(worst)
              << "); bounds are computed for F - E[F]\n";
      ctx.hypothesis = true;
    }
  }

  Matrix c;
  bool exact_target = inst.target.kind == TargetKind::exact_covariance;
  switch (inst.target.kind) {
    case TargetKind::identity: c = Matrix::identity(d); break;
    case TargetKind::explicit_matrix: c = inst.target.c; break;
    case TargetKind::exact_covariance:
      if (specialized) c = runs_or_qf_covariance(inst);
      else if (table) c = moments(*table).covariance;
      else if (mc) {
        const Matrix& s = estimate(0.5).sigma;
        c = 0.5 * (s + transpose(s));
      }
      break;
  }
  const auto functions = !inst.functions.empty() ? inst.functions
                         : !cfg.functions.empty() ? cfg.functions
                                                  : default_cosine_functions(d);
  for (const auto& g : functions)
    if (g.dim != d) throw ConfigError("instance " + inst.id + ": test function " + g.name + " has the wrong dimension");
  const std::vector<double> alphas = cfg.alphas ? *cfg.alphas : std::vector<double>{0.5};

  if (c.empty()) {
    for (const auto& g : functions)
      emit_status(ctx, inst, g, BoundMethod::slepian, BoundForm::split, 0.5, "not-enumerable", false, true);
    ctx.err << "error: instance " << inst.id << ": exact mode cannot enumerate this model; use --mode mc\n";
    return;
  }
  const GaussianTarget target(c);
  const bool generic = table || mc;
  if (!generic)
    ctx.err << "note: instance " << inst.id << ": too large to enumerate; only the specialized bound is reported\n";

  GaussianParams gp;
  gp.mc = mcc;
  const StatisticVector centered_stat = mean ? shifted(inst.statistic, *mean) : inst.statistic;

  for (const auto& g : functions) {
    Lhs lhs;
    if (table) lhs.disc = discrepancy_exact(*table, g, target, gp);
    else if (mc) lhs.disc = discrepancy(inst.model, centered_stat, g, target, EstimationMode::monte_carlo, gp);

    if (generic) {
      for (double alpha : alphas) {
        const BoundStats stats = table ? exact_stats(*table, alpha) : mc_stats(estimate(alpha));
        for (BoundForm form : cfg.forms) {
          emit_report(ctx, inst, g, slepian_bound(stats, target, g.constants, form), lhs);
          if (form == BoundForm::l1) continue;
          try {
            emit_report(ctx, inst, g, stein_bound(stats, target, g.constants, form), lhs);
          } catch (const HypothesisError& e) {
            emit_status(ctx, inst, g, BoundMethod::stein, form, alpha, e.code(), true);
          }
        }
        if (table && inst.model.is_rademacher()) {
          const auto rb = rademacher_bounds(*table, target, g.constants, alpha);
          emit_report(ctx, inst, g, rb.d3, lhs);
          if (rb.d2)
            emit_report(ctx, inst, g, *rb.d2, lhs);
          else
            emit_status(ctx, inst, g, BoundMethod::rademacher_d2, BoundForm::l2, alpha, rb.d2_reason,
                        rb.d2_reason == "C-not-PD");
        }
      }
    }
    if (inst.runs) {
      if (exact_target)
        emit_report(ctx, inst, g, runs_bound(*inst.runs, g.constants), lhs);
      else
        emit_status(ctx, inst, g, BoundMethod::runs, BoundForm::split, 1.0, "target-not-covariance-of-F", true);
    }
    if (inst.quadform) emit_report(ctx, inst, g, qf_bound(*inst.quadform, target, g.constants), lhs);
  }
}

int cmd_bound(RunConfig& cfg, const CliOptions& opts, std::ostream& out, std::ostream& err, bool& hypothesis) {
  auto instances = gather_instances(cfg, CorpusKind::bound, 0);
  write_header(out, opts, "bound");
  CsvWriter csv(out, {"instance_id", "function", "method", "form", "alpha", "term_name", "term_value",
                      "constant_name", "constant_value", "total", "total_std_error", "lhs", "slack", "pass",
                      "status"});
  if (instances.empty()) err << "warning: no instances, no bounds computed\n";
  BoundContext ctx{cfg, csv, err};
  for (const auto& inst : instances) bound_instance(ctx, inst);
  for (const auto& w : cfg.warnings) err << "warning: " << w << '\n';
  hypothesis = ctx.hypothesis;
  return ctx.any_fail ? kCheckFailure : kOk;
}

// --------------------------------------------------------------------------
// sweep

struct SweepPoint {
  std::size_t n = 0;
  BoundReport report;
  std::optional<double> lhs;
};

std::optional<double> exact_lhs(const ProductModel& model, const StatisticVector& f, const SmoothTestFunction& g,
                                const Matrix& c) {
  const JointTable table = centered(build_joint_table(model, f));
  return discrepancy_exact(table, g, GaussianTarget(c)).lhs;
}

int cmd_sweep(RunConfig& cfg, const CliOptions& opts, std::ostream& out, std::ostream& err) {
  if (!cfg.sweep) throw ConfigError("config error at /sweep: sweep needs a 'sweep' section");
  const SweepConfig& sw = *cfg.sweep;
  const bool runs = sw.family == "bernoulli-runs";
  const std::size_t d = runs ? sw.d : 1;
  SmoothTestFunction g;
  if (!cfg.functions.empty()) {
    g = cfg.functions.front();
    if (g.dim != d) throw ConfigError("config error at /g: test function dimension does not match the family");
  } else {
    std::vector<double> t(d, 0.0);
    t[0] = 1.0;
    g = make_cosine_family(t, 0.0);
  }
  McConfig mcc = cfg.mc;
  mcc.seed = cfg.seed;
  GaussianParams gp;
  gp.mc = mcc;

  auto lhs_for = [&](const ProductModel& model, const StatisticVector& f, const Matrix& c,
                     std::size_t coords) -> std::optional<double> {
    if (coords <= sw.lhs_max_coordinates) return exact_lhs(model, f, g, c);
    if (cfg.mode == EstimationMode::monte_carlo)
      return discrepancy(model, f, g, GaussianTarget(c), EstimationMode::monte_carlo, gp).lhs;
    return std::nullopt;
  };

  std::vector<SweepPoint> points;
  std::vector<std::string> failures;
  if (runs) {
    for (std::size_t n : sw.n_grid) {
      try {
        const RunsSpec spec = bernoulli_runs_spec(n, sw.d, sw.p);
        SweepPoint pt{n, runs_bound(spec, g.constants), std::nullopt};
        pt.lhs = lhs_for(runs_model(spec), build_runs_statistic(spec), runs_exact_covariance(spec),
                         spec.coordinates());
        points.push_back(std::move(pt));
      } catch (const std::exception& e) {
        failures.push_back("n=" + std::to_string(n) + ": " + e.what());
      }
    }
  } else {
    const QfFamily family = sw.family == "qf-tridiagonal" ? QfFamily(tridiagonal_family) : QfFamily(single_row_family);
    const Matrix c = Matrix::identity(1);
    const QfSweep result = qf_clt_sweep(family, c, g.constants, sw.n_grid);
    failures = result.failures;
    for (const auto& row : result.rows) {
      SweepPoint pt{row.n, row.report, std::nullopt};
      try {
        const QuadFormSpec spec = family(row.n);
        pt.lhs = lhs_for(quadform_model(spec), build_quadratic_form(spec), c, spec.n);
      } catch (const std::exception& e) {
        failures.push_back("n=" + std::to_string(row.n) + " lhs: " + e.what());
      }
      points.push_back(std::move(pt));
    }
    err << "note: trace and row conditions " << (result.converging ? "decay" : "do not decay")
        << " along the grid\n";
  }
  for (const auto& f : failures) err << "warning: skipped " << f << '\n';

  std::vector<std::string> term_names;
  if (!points.empty())
    for (const auto& t : points.front().report.terms) term_names.push_back(t.name);
  std::vector<std::string> header{"n"};
  header.insert(header.end(), term_names.begin(), term_names.end());
  for (const char* h : {"total", "lhs", "slope_running"}) header.push_back(h);

  write_header(out, opts, "sweep");
  CsvWriter csv(out, header);
  std::vector<double> xs, ys;
  for (const auto& pt : points) {
    xs.push_back(static_cast<double>(pt.n));
    ys.push_back(pt.report.total);
    const auto slope = xs.size() > 1 ? log_log_slope(xs, ys) : std::nullopt;
    std::vector<std::string> row{std::to_string(pt.n)};
    for (const auto& name : term_names) row.push_back(format_double(pt.report.term(name)));
    row.push_back(format_double(pt.report.total));
    row.push_back(format_optional(pt.lhs));
    row.push_back(format_optional(slope));
    csv.row(row);
  }

  const auto svg = opts.svg ? opts.svg : cfg.svg_path;
  if (svg) {
    const auto slope = xs.size() > 1 ? log_log_slope(xs, ys) : std::nullopt;
    std::ofstream f(*svg, std::ios::binary);
    if (!f) throw ConfigError("cannot open svg output " + *svg);
    f << render_loglog_svg({xs, ys}, sw.family + " bound total", "n", "total", slope);
  }
  return points.empty() && !sw.n_grid.empty() ? kCheckFailure : kOk;
}

// --------------------------------------------------------------------------
// compare-runs

int cmd_compare_runs(RunConfig& cfg, const CliOptions& opts, std::ostream& out, std::ostream&) {
  const CompareRunsConfig cr = cfg.compare_runs.value_or(CompareRunsConfig{});
  SmoothnessConstants g;
  g.g2_inf = cr.g2;
  g.g3_inf = cr.g3;
  write_header(out, opts, "compare-runs");
  CsvWriter csv(out, {"n", "d", "p", "runs_total", "improved_bound", "reinert_rollin_bound", "sigma_formula_gap",
                      "runs_within_improved", "improved_within_reinert_rollin"});
  bool ok = true;
  for (std::size_t n : cr.n)
    for (std::size_t d : cr.d)
      for (double p : cr.p) {
        BernoulliRunsSuite s;
        try {
          s = bernoulli_runs_suite(n, d, p, g);
        } catch (const std::invalid_argument& e) {
          throw ConfigError("config error at /compare_runs: n=" + std::to_string(n) + " d=" + std::to_string(d) +
                            " p=" + format_double(p) + ": " + e.what());
        }
        csv.row({std::to_string(n), std::to_string(d), format_double(p), format_double(s.specialized.total),
                 format_double(s.improved_bound), format_double(s.reinert_rollin), format_double(s.formula_gap),
                 s.specialized_within_improved ? "true" : "false",
                 s.improved_within_reinert_rollin ? "true" : "false"});
        ok = ok && s.specialized_within_improved;
      }
  return ok ? kOk : kCheckFailure;
}

}  // namespace

int run_with_config(RunConfig cfg, const CliOptions& opts, std::ostream& out, std::ostream& err,
                    const CommandHooks& hooks) {
  try {
    if (cfg.command && *cfg.command != opts.command)
      throw ConfigError("config error at /command: config is for '" + *cfg.command + "', not '" + opts.command + "'");
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.mode) cfg.mode = parse_mode(*opts.mode);

    Sink sink;
    open_sink(sink, cfg, opts, out);
    int code = kOk;
    bool hypothesis = false;
    if (opts.command == "check-identities") code = cmd_check_identities(cfg, opts, *sink.out, err, hooks);
    else if (opts.command == "bound") code = cmd_bound(cfg, opts, *sink.out, err, hypothesis);
    else if (opts.command == "sweep") code = cmd_sweep(cfg, opts, *sink.out, err);
    else if (opts.command == "compare-runs") code = cmd_compare_runs(cfg, opts, *sink.out, err);
    else throw ConfigError("unknown command '" + opts.command + "'");
    sink.out->flush();
    if (opts.strict && hypothesis) return kHypothesisViolation;
    return code;
  } catch (const ConfigError& e) {
    err << e.what() << '\n';
    return kConfigError;
  }
}

int run(const CliOptions& opts, std::ostream& out, std::ostream& err, const CommandHooks& hooks) {
  RunConfig cfg;
  try {
    if (opts.config_path) cfg = load_config(*opts.config_path);
  } catch (const ConfigError& e) {
    err << e.what() << '\n';
    return kConfigError;
  }
  return run_with_config(std::move(cfg), opts, out, err, hooks);
}

}  // namespace mvclt::cli
