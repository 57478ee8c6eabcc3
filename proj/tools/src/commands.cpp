#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <thread>

#include <CLI11.hpp>

#include "rep/dynamics.hpp"
#include "rep/oracle.hpp"
#include "report_io.hpp"
#include "svg.hpp"

namespace rep::cli {

namespace fs = std::filesystem;

namespace {

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::NonPositiveParameter:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::NonFiniteInput:
      return kExitConfig;
    case ErrorCode::NotABlowupTrajectory:
      return kExitNoEvent;
    default:
      return kExitNumeric;
  }
}

fs::path out_path(const RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.outputs.dir);
  return fs::path(cfg.outputs.dir) / name;
}

double effective_t_max(const RunConfig& cfg, const REPParams& params) {
  return cfg.t_max > 0.0 ? cfg.t_max : 100.0 / params.omega;
}

void write_lambda_rho_svgs(const RunConfig& cfg, const LambdaSystem& lsys,
                           const ode::Trajectory& traj) {
  const auto& groups = lsys.groups();
  std::vector<SvgSeries> lambda_series;
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  for (int a = 0; a < groups.groups(); ++a) {
    SvgSeries s;
    s.label = "lambda[" + std::to_string(a) + "] (x" + std::to_string(groups.mult[a]) + ")";
    s.color = colors[a % 8];
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
      s.x.push_back(traj.times[i]);
      s.y.push_back(traj.states[i][a]);
    }
    lambda_series.push_back(std::move(s));
  }
  write_text_file(out_path(cfg, "lambda.svg").string(),
                  svg_plot("eigenvalues", "lin", "symlog", lambda_series));
  SvgSeries rho;
  rho.label = "rho";
  rho.color = "#d62728";
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    rho.x.push_back(traj.times[i]);
    rho.y.push_back(lsys.rho(traj.states[i]));
  }
  write_text_file(out_path(cfg, "rho.svg").string(), svg_plot("density", "lin", "log", {rho}));
}

void write_ladder_svg(const RunConfig& cfg, const analysis::BlowupReport& report,
                      const LambdaSystem& lsys, const ode::Trajectory& traj) {
  auto ladder_series = [&](const analysis::QuantitySelector& sel, double exponent,
                           const std::string& label, const char* color) {
    SvgSeries s;
    s.label = label;
    s.color = color;
    for (int m = 0; m <= 12; ++m) {
      const double tau = 1e-2 * std::pow(2.0, -m);
      const double t = report.tB - tau;
      if (!traj.contains(t)) continue;
      const auto y = traj.eval(t);
      const double q = sel.kind == analysis::QuantitySelector::Kind::Rho
                           ? lsys.rho(y)
                           : lsys.mu(y, sel.group);
      s.x.push_back(tau);
      s.y.push_back(std::abs(std::pow(tau, exponent) * q));
    }
    return s;
  };
  const int G = lsys.groups().groups();
  std::vector<SvgSeries> series;
  series.push_back(ladder_series(analysis::QuantitySelector::lambda_group(0),
                                 report.xi1.exponent, "tau^e1 |lambda_1|", "#1f77b4"));
  series.push_back(ladder_series(analysis::QuantitySelector::lambda_group(G - 1),
                                 report.xin.exponent, "tau^en |lambda_n|", "#2ca02c"));
  series.push_back(ladder_series(analysis::QuantitySelector::rho(), report.rho_rate.exponent,
                                 "tau^er rho", "#d62728"));
  write_text_file(out_path(cfg, "rates.svg").string(),
                  svg_plot("scaled rate ladders", "log", "lin", series));
}

}  // namespace

int cmd_simulate(const RunConfig& cfg) {
  auto [params, init] = config_data(cfg);
  const double t_max = effective_t_max(cfg, params);
  const int n = params.n;
  const auto groups = EigenGroups::from_sorted(init.lambda0);

  ode::Trajectory traj;
  LambdaSystem lsys(params, init);
  USystem usys(params, init, USystem::Variant::Full);

  if (cfg.coordinate == "u") {
    ode::IntegrateOptions opts;
    opts.control = cfg.control;
    opts.t_max = t_max;
    opts.coord = ode::Coord::U;
    const double eps = cfg.control.u_zero_eps;
    opts.events.push_back(ode::Event{
        "u1-zero",
        [&usys, eps](double, std::span<const double> y) { return usys.u_first(y) - eps; },
        ode::TerminalKind::BlowupEvent, false});
    opts.events.push_back(ode::Event{
        "u-magnitude-cap",
        [&usys](double, std::span<const double> y) { return 1e12 - usys.max_u(y); },
        ode::TerminalKind::DensityOverflow, true});
    opts.step_cap = [&usys](double t, std::span<const double> y) { return usys.step_cap(t, y); };
    opts.conservation = [&usys](std::span<const double> y) { return usys.abel_diagnostic(y); };
    traj = ode::integrate(
        [&usys](double t, std::span<const double> y, std::span<double> dy) {
          return usys.rhs(t, y, dy);
        },
        0.0, usys.initial_state(), opts);
  } else {
    ode::IntegrateOptions opts;
    opts.control = cfg.control;
    opts.t_max = t_max;
    opts.coord = ode::Coord::Lambda;
    const double escape = cfg.control.lambda_escape;
    opts.events.push_back(ode::Event{
        "lambda-escape",
        [&lsys, escape](double, std::span<const double> y) {
          return escape - lsys.max_abs_mu(y);
        },
        ode::TerminalKind::BlowupEvent, true});
    opts.events.push_back(ode::Event{
        "rho-overflow",
        [&lsys](double, std::span<const double> y) { return 1e250 - lsys.rho(y); },
        ode::TerminalKind::DensityOverflow, true});
    opts.conservation = [&lsys](std::span<const double> y) { return lsys.abel_diagnostic(y); };
    traj = ode::integrate(
        [&lsys](double t, std::span<const double> y, std::span<double> dy) {
          return lsys.rhs(t, y, dy);
        },
        0.0, lsys.initial_state(), opts);
  }

  // Trajectory CSV: t, lambda_1..n, rho, u_1..n, abel_residual_max.
  std::vector<std::string> header{"t"};
  for (int i = 1; i <= n; ++i) header.push_back("lambda_" + std::to_string(i));
  header.push_back("rho");
  for (int i = 1; i <= n; ++i) header.push_back("u_" + std::to_string(i));
  header.push_back("abel_residual_max");
  CsvWriter csv(std::move(header));

  double sup_lambda = 0.0, sup_rho = 0.0, min_u1 = std::numeric_limits<double>::infinity();
  const std::size_t count = traj.states.size();
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<double> lambda, u;
    double rho = 0.0, abel = 0.0;
    if (cfg.coordinate == "u") {
      const auto& y = traj.states[i];
      lambda = usys.lambda(y);
      u = usys.expand_u(y);
      rho = usys.rho(y);
      UState state{traj.times[i], u, usys.expand_v(y)};
      abel = abel_residual(state, init).max_abs;
    } else {
      const auto& y = traj.states[i];
      lambda = lsys.expand_lambda(y);
      u = lsys.expand_u(y);
      rho = lsys.rho(y);
      abel = std::abs(lsys.abel_diagnostic(y));
    }
    for (double l : lambda) sup_lambda = std::max(sup_lambda, std::abs(l));
    sup_rho = std::max(sup_rho, rho);
    min_u1 = std::min(min_u1, u.front());
    if (i % static_cast<std::size_t>(cfg.outputs.stride) != 0 && i + 1 != count) continue;
    std::vector<std::string> row{format_double(traj.times[i])};
    for (double l : lambda) row.push_back(format_double(l));
    row.push_back(format_double(rho));
    for (double ui : u) row.push_back(format_double(ui));
    row.push_back(format_double(abel));
    csv.add_row(row);
  }
  const std::string csv_name = cfg.outputs.csv.empty() ? "trajectory.csv" : cfg.outputs.csv;
  write_text_file(out_path(cfg, csv_name).string(), csv.str());

  json result;
  result["terminal"] = terminal_json(traj.terminal);
  result["steps"] = traj.diag.n_steps;
  result["rejected_steps"] = traj.diag.n_rejected;
  result["rhs_evaluations"] = traj.diag.n_rhs;
  result["abel_residual_max"] = traj.diag.abel_max;
  result["sup_abs_lambda"] = sup_lambda;
  result["sup_rho"] = sup_rho;
  result["min_u1"] = min_u1;

  // For blow-up terminals, refine tB through the analysis pipeline so the
  // summary carries the actual blow-up time rather than the stop time.
  if (traj.terminal.kind == ode::TerminalKind::BlowupEvent ||
      traj.terminal.kind == ode::TerminalKind::DensityOverflow) {
    try {
      auto opts = analysis_options(cfg);
      auto art = analysis::run_blowup_integrations(params, init, opts);
      const auto bt = analysis::find_blowup_time(art.usys, art.u_traj, &art.lsys,
                                                 &art.lambda_traj, opts.control);
      result["tB"] = bt.tB;
      result["tB_bracket_width"] = bt.bracket_hi - bt.bracket_lo;
      result["tangential"] = bt.tangential;
    } catch (const Error&) {
      result["tB"] = nullptr;
    }
  }

  const std::string json_name = cfg.outputs.json_file.empty() ? "summary.json" : cfg.outputs.json_file;
  write_json_file(out_path(cfg, json_name).string(),
                  report_envelope(params, init, cfg.control, t_max, std::move(result)));

  if (cfg.outputs.svg && cfg.coordinate == "lambda") write_lambda_rho_svgs(cfg, lsys, traj);
  if (cfg.outputs.svg && cfg.coordinate == "u") {
    // Reuse the lambda plot through reconstructed eigenvalues.
    SvgSeries rho_series;
    rho_series.label = "rho";
    rho_series.color = "#d62728";
    std::vector<SvgSeries> lambda_series(groups.groups());
    for (int a = 0; a < groups.groups(); ++a) {
      lambda_series[a].label = "lambda[" + std::to_string(a) + "]";
      lambda_series[a].color = a % 2 ? "#d62728" : "#1f77b4";
    }
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
      const auto& y = traj.states[i];
      for (int a = 0; a < groups.groups(); ++a) {
        lambda_series[a].x.push_back(traj.times[i]);
        lambda_series[a].y.push_back(usys.v_group(y, a) / usys.u_group(y, a));
      }
      rho_series.x.push_back(traj.times[i]);
      rho_series.y.push_back(usys.rho(y));
    }
    write_text_file(out_path(cfg, "lambda.svg").string(),
                    svg_plot("eigenvalues", "lin", "symlog", lambda_series));
    write_text_file(out_path(cfg, "rho.svg").string(),
                    svg_plot("density", "lin", "log", {rho_series}));
  }

  if (traj.terminal.kind == ode::TerminalKind::StepSizeUnderflow ||
      traj.terminal.kind == ode::TerminalKind::NonFiniteState) {
    std::fprintf(stderr, "integration failed: terminal %s\n",
                 terminal_json(traj.terminal)["kind"].get<std::string>().c_str());
    return kExitNumeric;
  }
  return kExitOk;
}

namespace {

int run_blowup_like(const RunConfig& cfg, bool rates_only) {
  auto [params, init] = config_data(cfg);
  auto opts = analysis_options(cfg);
  analysis::RunArtifacts* artifacts_ptr = nullptr;
  analysis::RunArtifacts artifacts{USystem(params, init,
                                           init.lambda_min() != init.lambda_max()
                                               ? USystem::Variant::Reduced
                                               : USystem::Variant::Full),
                                   {}, LambdaSystem(params, init), {}};
  artifacts_ptr = &artifacts;
  const auto report = analysis::analyze(params, init, opts, artifacts_ptr);

  json result;
  if (rates_only) {
    const bool with_C =
        report.caseObserved == CaseLabel::IIc || report.caseObserved == CaseLabel::III;
    result["tB"] = report.tB;
    result["caseObserved"] = case_label_name(report.caseObserved);
    result["xi1"] = rate_fit_json(report.xi1, with_C);
    result["xin"] = rate_fit_json(report.xin, with_C);
    result["rho_rate"] = rate_fit_json(report.rho_rate, false);
  } else {
    result = blowup_report_json(report);
  }
  const std::string json_name =
      cfg.outputs.json_file.empty() ? "report.json" : cfg.outputs.json_file;
  write_json_file(out_path(cfg, json_name).string(),
                  report_envelope(params, init, cfg.control,
                                  effective_t_max(cfg, params), std::move(result)));

  if (cfg.outputs.svg) {
    write_lambda_rho_svgs(cfg, artifacts.lsys, artifacts.lambda_traj);
    write_ladder_svg(cfg, report, artifacts.lsys, artifacts.lambda_traj);
  }

  std::printf("tB=%s case=%s p=%s q=%s\n", format_double(report.tB).c_str(),
              case_label_name(report.caseObserved), format_double(report.p).c_str(),
              format_double(report.q).c_str());

  if (!rates_only && !analysis::hard_invariants_pass(report)) {
    std::fprintf(stderr, "theory invariant violated (q<=p, tB bound, or J range)\n");
    return kExitTheory;
  }
  return kExitOk;
}

}  // namespace

int cmd_blowup(const RunConfig& cfg) { return run_blowup_like(cfg, false); }

int cmd_rates(const RunConfig& cfg) { return run_blowup_like(cfg, true); }

int cmd_classify(const RunConfig& cfg) {
  auto [params, init] = config_data(cfg);
  const Classification cls = classify(params, init);
  const std::string json_name =
      cfg.outputs.json_file.empty() ? "report.json" : cfg.outputs.json_file;
  write_json_file(out_path(cfg, json_name).string(),
                  report_envelope(params, init, cfg.control, effective_t_max(cfg, params),
                                  classification_json(cls)));
  std::printf("verdict=%s reason=%s", verdict_name(cls.verdict), rule_tag_name(cls.reason));
  if (cls.caseLabel) std::printf(" case=%s", case_label_name(*cls.caseLabel));
  std::printf("\n");
  return kExitOk;
}

// ---------------------------------------------------------------------------
// sweep

namespace {

struct SweepRow {
  std::vector<double> axis_values;
  std::string status = "ok";
  std::string verdict, reason, caseLabel;
  std::optional<analysis::BlowupReport> report;
};

void apply_param(RunConfig& cfg, const std::string& path, double value) {
  if (path == "k") {
    cfg.k = value;
  } else if (path == "c_b") {
    cfg.c_b = value;
  } else if (path == "rho0") {
    cfg.rho0 = value;
  } else if (path.rfind("lambda0[", 0) == 0 && path.back() == ']') {
    const int idx = std::stoi(path.substr(8, path.size() - 9));
    if (idx < 0 || idx >= static_cast<int>(cfg.lambda0.size()))
      throw ConfigError("sweep param index out of range: " + path);
    cfg.lambda0[idx] = value;
  } else {
    throw ConfigError("unknown sweep param \"" + path +
                      "\" (expected k, c_b, rho0 or lambda0[i])");
  }
}

SweepRow run_sweep_row(const RunConfig& row_cfg) {
  SweepRow row;
  try {
    auto [params, init] = config_data(row_cfg);
    const Classification cls = classify(params, init);
    row.verdict = verdict_name(cls.verdict);
    row.reason = rule_tag_name(cls.reason);
    if (cls.caseLabel) row.caseLabel = case_label_name(*cls.caseLabel);
    if (cls.verdict == Verdict::BlowupPossible) {
      try {
        row.report = analysis::analyze(params, init, analysis_options(row_cfg));
        row.caseLabel = case_label_name(row.report->caseObserved);
      } catch (const Error& e) {
        row.status = e.code() == ErrorCode::NotABlowupTrajectory ? "no-blowup"
                                                                 : error_code_name(e.code());
      }
    }
  } catch (const Error& e) {
    row.status = error_code_name(e.code());
  } catch (const std::exception&) {
    row.status = "error";
  }
  return row;
}

}  // namespace

int cmd_sweep(const RunConfig& cfg) {
  const SweepConfig& sw = *cfg.sweep;
  std::vector<std::string> axis_params;
  for (const auto& ax : sw.axes)
    axis_params.insert(axis_params.end(), ax.params.begin(), ax.params.end());

  std::size_t total = 1;
  for (const auto& ax : sw.axes) total *= ax.values.size();
  if (total == 0) throw ConfigError("empty sweep grid");

  // Row-major over axes; the last axis varies fastest.
  std::vector<RunConfig> row_cfgs;
  std::vector<std::vector<double>> row_values;
  row_cfgs.reserve(total);
  for (std::size_t row = 0; row < total; ++row) {
    RunConfig rc = cfg;
    std::vector<double> vals;
    std::size_t rem = row;
    for (std::size_t a = sw.axes.size(); a-- > 0;) {
      const auto& ax = sw.axes[a];
      const std::size_t idx = rem % ax.values.size();
      rem /= ax.values.size();
      for (std::size_t p = 0; p < ax.params.size(); ++p)
        apply_param(rc, ax.params[p], ax.values[idx][p]);
    }
    for (const auto& ax : sw.axes) {
      std::size_t stride = 1;
      for (const auto& later : sw.axes)
        if (&later > &ax) stride *= later.values.size();
      const std::size_t idx = (row / stride) % ax.values.size();
      vals.insert(vals.end(), ax.values[idx].begin(), ax.values[idx].end());
    }
    row_cfgs.push_back(std::move(rc));
    row_values.push_back(std::move(vals));
  }

  // Rows run independently on a bounded pool; output order is the grid order
  // regardless of completion order.
  std::vector<SweepRow> rows(total);
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers =
      std::min<unsigned>(sw.workers > 0 ? sw.workers : hw, static_cast<unsigned>(total));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= total) return;
      rows[i] = run_sweep_row(row_cfgs[i]);
      rows[i].axis_values = row_values[i];
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();

  std::vector<std::string> header{"row"};
  header.insert(header.end(), axis_params.begin(), axis_params.end());
  for (const char* c : {"status", "verdict", "reason", "case", "tB", "p", "q", "xi1_exponent",
                        "xi1_coefficient", "xin_exponent", "xin_coefficient", "rho_exponent",
                        "rho_coefficient"})
    header.push_back(c);
  CsvWriter csv(std::move(header));
  for (std::size_t i = 0; i < total; ++i) {
    const SweepRow& row = rows[i];
    std::vector<std::string> cells{std::to_string(i)};
    for (double v : row.axis_values) cells.push_back(format_double(v));
    cells.push_back(row.status);
    cells.push_back(row.verdict);
    cells.push_back(row.reason);
    cells.push_back(row.caseLabel);
    if (row.report) {
      const auto& r = *row.report;
      cells.push_back(format_double(r.tB));
      cells.push_back(format_double(r.p));
      cells.push_back(format_double(r.q));
      cells.push_back(format_double(r.xi1.exponent));
      cells.push_back(format_double(r.xi1.coefficient));
      cells.push_back(format_double(r.xin.exponent));
      cells.push_back(format_double(r.xin.coefficient));
      cells.push_back(format_double(r.rho_rate.exponent));
      cells.push_back(format_double(r.rho_rate.coefficient));
    } else {
      for (int c = 0; c < 9; ++c) cells.push_back("");
    }
    csv.add_row(cells);
  }
  const std::string csv_name = cfg.outputs.csv.empty() ? "sweep.csv" : cfg.outputs.csv;
  write_text_file(out_path(cfg, csv_name).string(), csv.str());
  std::printf("sweep: %zu rows -> %s\n", total, out_path(cfg, csv_name).string().c_str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// verify-example

int cmd_verify_example(const RunConfig& cfg) {
  const FamilyConfig& f = *cfg.family;
  oracle::ExampleFamily fam(f.k, f.c_b, f.lambda10, f.lambda40);
  const REPParams params = fam.params();
  const SpectralInitialData init = fam.initial_data();

  auto opts = analysis_options(cfg);
  if (opts.t_max <= 0.0) opts.t_max = fam.tB() + 1.0;
  analysis::RunArtifacts artifacts{USystem(params, init, USystem::Variant::Reduced),
                                   {},
                                   LambdaSystem(params, init),
                                   {}};
  struct Check {
    std::string name;
    double value;
    double tol;
    bool pass;
  };
  std::vector<Check> checks;
  auto add = [&](const std::string& name, double value, double tol) {
    checks.push_back({name, value, tol, std::abs(value) <= tol});
  };

  try {
    const auto report = analysis::analyze(params, init, opts, &artifacts);

    double max_l1 = 0.0, max_l4 = 0.0, max_rho = 0.0;
    const double t_hi = fam.tB() - 1e-3;
    for (int i = 0; i <= 1000; ++i) {
      const double t = t_hi * i / 1000.0;
      const auto exact = fam.eval(t);
      const auto y = artifacts.lambda_traj.eval(t);
      const double l1 = artifacts.lsys.mu(y, 0);
      const double l4 = artifacts.lsys.mu(y, 1);
      const double rho = artifacts.lsys.rho(y);
      max_l1 = std::max(max_l1, std::abs((l1 - exact.lambda1) / exact.lambda1));
      max_l4 = std::max(max_l4, std::abs((l4 - exact.lambda4) / exact.lambda4));
      max_rho = std::max(max_rho, std::abs((rho - exact.rho) / exact.rho));
    }
    add("max_rel_err_lambda1", max_l1, 1e-6);
    add("max_rel_err_lambda4", max_l4, 1e-6);
    add("max_rel_err_rho", max_rho, 1e-6);
    add("tB_error", report.tB - fam.tB(), 1e-6);

    const double C = fam.pole_coefficient();
    add("xi1_coefficient_error", (report.xi1.coefficient + C) / C, 1e-2);
    add("xin_coefficient_error", (report.xin.coefficient - C) / C, 1e-2);
    const double rho_lim = 4.0 / params.k * C * C;
    add("rho_coefficient_error", (report.rho_rate.coefficient - rho_lim) / rho_lim, 1e-2);
    add("p_error", report.p - fam.p(), 1e-3);
    add("q_error", report.q - fam.p(), 1e-3);
    add("lambda1_exponent", report.xi1.exponent - 2.0, 0.0);
    add("rho_exponent", report.rho_rate.exponent - 4.0, 0.0);
  } catch (const Error& e) {
    checks.push_back({std::string("pipeline: ") + e.what(), 1.0, 0.0, false});
  }

  bool all_pass = true;
  std::printf("%-28s %14s %10s  %s\n", "check", "value", "tolerance", "status");
  json jchecks = json::array();
  for (const auto& c : checks) {
    all_pass = all_pass && c.pass;
    std::printf("%-28s %14.6e %10.1e  %s\n", c.name.c_str(), c.value, c.tol,
                c.pass ? "pass" : "FAIL");
    jchecks.push_back(json{
        {"name", c.name}, {"value", c.value}, {"tolerance", c.tol}, {"pass", c.pass}});
  }
  json result{{"family",
               json{{"k", f.k},
                    {"c_b", f.c_b},
                    {"lambda10", f.lambda10},
                    {"lambda40", f.lambda40},
                    {"rho0", fam.rho0()},
                    {"tB", fam.tB()},
                    {"pole_coefficient", fam.pole_coefficient()}}},
              {"checks", jchecks},
              {"pass", all_pass}};
  const std::string json_name =
      cfg.outputs.json_file.empty() ? "report.json" : cfg.outputs.json_file;
  write_json_file(out_path(cfg, json_name).string(),
                  report_envelope(params, init, cfg.control, opts.t_max, std::move(result)));
  if (cfg.outputs.svg && !artifacts.lambda_traj.states.empty())
    write_lambda_rho_svgs(cfg, artifacts.lsys, artifacts.lambda_traj);
  return all_pass ? kExitOk : kExitTheory;
}

int run_command(const RunConfig& cfg) {
  try {
    switch (cfg.mode) {
      case Mode::Simulate: return cmd_simulate(cfg);
      case Mode::Blowup: return cmd_blowup(cfg);
      case Mode::Classify: return cmd_classify(cfg);
      case Mode::Sweep: return cmd_sweep(cfg);
      case Mode::VerifyExample: return cmd_verify_example(cfg);
      case Mode::Rates: return cmd_rates(cfg);
    }
    return kExitConfig;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const Error& e) {
    std::fprintf(stderr, "error [%s]: %s\n", error_code_name(e.code()), e.what());
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumeric;
  }
}

int main_cli(int argc, const char* const* argv) {
  CLI::App app{"restricted Euler-Poisson spectral dynamics laboratory"};
  app.require_subcommand(1);

  struct SubOpts {
    std::string config;
    std::string out;
    bool svg = false;
  };
  std::map<std::string, SubOpts> opts;
  const std::tuple<const char*, Mode, const char*> subs[] = {
      {"simulate", Mode::Simulate, "integrate one dataset and write the trajectory CSV"},
      {"blowup", Mode::Blowup, "detect and analyze finite-time breakdown"},
      {"classify", Mode::Classify, "initial-data classification only"},
      {"sweep", Mode::Sweep, "grid of runs, one CSV row per point"},
      {"verify-example", Mode::VerifyExample, "check the pipeline against the explicit family"},
      {"rates", Mode::Rates, "blow-up run reporting only the rate table"}};
  std::map<std::string, Mode> modes;
  for (const auto& [name, mode, help] : subs) {
    auto* sub = app.add_subcommand(name, help);
    auto& so = opts[name];
    sub->add_option("--config", so.config, "JSON run configuration")->required();
    sub->add_option("--out", so.out, "output directory (overrides outputs.dir)");
    sub->add_flag("--svg", so.svg, "emit SVG plots");
    modes[name] = mode;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  const std::string sub_name = app.get_subcommands().front()->get_name();
  const SubOpts& so = opts[sub_name];
  try {
    RunConfig cfg = load_config(so.config, modes[sub_name]);
    if (!so.out.empty()) cfg.outputs.dir = so.out;
    if (so.svg) cfg.outputs.svg = true;
    return run_command(cfg);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  }
}

}  // namespace rep::cli
