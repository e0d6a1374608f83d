#include "runner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>
#include <variant>

#include <json.hpp>

#include "ggflow/errors.hpp"
#include "ggflow/flow.hpp"
#include "ggflow/lemmas.hpp"
#include "ggflow/measures.hpp"
#include "ggflow/weak_kam.hpp"
#include "svg.hpp"

namespace ggflow::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

Json number_or_inf(double x) { return std::isinf(x) ? Json("inf") : Json(x); }

Json point_json(const TorusPoint& x) {
  Json a = Json::array();
  for (int i = 0; i < x.dim(); ++i) a.push_back(x[i]);
  return a;
}

std::string point_text(const TorusPoint& x) {
  std::ostringstream s;
  s.precision(12);
  s << x[0];
  if (x.dim() == 2) s << ' ' << x[1];
  return s.str();
}

/// Everything derived from the configuration before any flow is run.
struct Setup {
  Potential v;
  double alpha0 = 0.0;
  double osc = 0.0;
  std::optional<ValueFunction> u;
  std::optional<LaxOleinikStats> lo_stats;
  Tolerances tols;
  double tol_v = 0.0;
};

class Run {
 public:
  Run(Command cmd, const ExperimentConfig& cfg, std::ostream& log) : cmd_(cmd), cfg_(cfg), log_(log) {}

  int go() {
    int status = 0;
    std::string error;
    try {
      fs::create_directories(cfg_.output_dir);
      status = dispatch();
    } catch (const UsageError& e) {
      status = 2;
      error = e.what();
    } catch (const InvalidInput& e) {
      status = 2;
      error = e.what();
    } catch (const std::exception& e) {
      status = 1;
      error = e.what();
    }
    if (!error.empty()) log_ << "error: " << error << '\n';
    try {
      write_manifest(status, error);
    } catch (const std::exception& e) {
      log_ << "error: cannot write manifest: " << e.what() << '\n';
      if (status == 0) status = 1;
    }
    return status;
  }

 private:
  int dispatch() {
    if (cmd_ == Command::Lemmas) return lemmas();
    prepare();
    switch (cmd_) {
      case Command::Solve:
        return solve();
      case Command::Flow:
        return flow();
      case Command::Classify:
        return classify(resolve_points(cfg_.flow_x0, "flow.x0"));
      case Command::Sweep:
        return classify(sweep_points());
      case Command::Lemmas:
        break;
    }
    return 0;
  }

  // ---- setup ------------------------------------------------------------

  void prepare() {
    Potential v = cfg_.potential_name ? Potential::registered(*cfg_.potential_name)
                                      : Potential::load_csv(*cfg_.potential_file);
    setup_.emplace(Setup{std::move(v)});
    Setup& s = *setup_;
    const int n = cfg_.grid_n;
    s.alpha0 = critical_constant(s.v, n);
    s.osc = oscillation(s.v, n);
    log_ << "potential " << s.v.name() << " (d=" << s.v.dim() << "), alpha0 = " << s.alpha0 << '\n';

    switch (cfg_.solver) {
      case SolverKind::Builtin:
        if (!cfg_.potential_name) throw UsageError("solver builtin needs a registered potential.name");
        s.u = builtin_solution(*cfg_.potential_name, n);
        break;
      case SolverKind::Distance:
        s.u = solve_distance_like(s.v, s.alpha0, n);
        break;
      case SolverKind::LaxOleinik: {
        LaxOleinikOptions o;
        o.dt = cfg_.solver_dt;
        o.max_iter = cfg_.solver_max_iter;
        o.tol = cfg_.solver_tol;
        LaxOleinikStats st;
        s.u = solve_lax_oleinik(s.v, s.alpha0, n, o, &st);
        s.lo_stats = st;
        log_ << "lax-oleinik: " << st.iterations << " iterations, residual " << st.residual << '\n';
        break;
      }
    }
    s.tols = Tolerances::defaults(n, s.osc);
    if (cfg_.tol_crit) s.tols.crit = *cfg_.tol_crit;
    if (cfg_.tol_sing) s.tols.sing = *cfg_.tol_sing;
    if (cfg_.tol_gap) s.tols.gap = *cfg_.tol_gap;
    s.tol_v = cfg_.tol_v.value_or(0.02 * s.osc);
  }

  FlowOptions flow_options(double horizon) const {
    FlowOptions o;
    o.dt = cfg_.flow_dt;
    o.horizon = horizon;
    o.record_every = cfg_.flow_record_every;
    o.tol_crit = setup_->tols.crit;
    if (cfg_.flow_metric) {
      const auto& m = *cfg_.flow_metric;
      const int dim = setup_->v.dim();
      SymMatrix a = m.size() == 1 ? (dim == 1 ? SymMatrix::diagonal(m[0]) : SymMatrix::diagonal(m[0], m[0]))
                                  : SymMatrix{m[0], m[1], m[2], dim};
      if (!a.positive_definite()) throw UsageError("flow.metric must be positive definite");
      o.metric = [a](const TorusPoint&) { return a; };
    }
    return o;
  }

  std::vector<TorusPoint> resolve_points(const std::vector<std::vector<double>>& given, const std::string& key) {
    const int dim = setup_->v.dim();
    std::vector<std::vector<double>> raw = given;
    if (raw.empty()) {
      const auto it = cfg_.raw.find(key);
      if (it == cfg_.raw.end()) throw UsageError(key + " is required for " + std::string(to_string(cmd_)));
      raw = parse_points(it->second, dim);
    }
    std::vector<TorusPoint> pts;
    for (const auto& p : raw) {
      if (static_cast<int>(p.size()) != dim) throw UsageError(key + ": point dimension does not match the potential");
      pts.push_back(wrap(p));
    }
    if (pts.empty()) throw UsageError(key + " lists no points");
    return pts;
  }

  std::vector<TorusPoint> sweep_points() {
    std::vector<TorusPoint> pts;
    if (cfg_.raw.count("sweep.x0_list")) pts = resolve_points(cfg_.sweep_x0, "sweep.x0_list");
    std::mt19937_64 rng(cfg_.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < cfg_.sweep_count; ++i) {
      if (setup_->v.dim() == 1) {
        pts.push_back(TorusPoint::wrap(unit(rng)));
      } else {
        const double a = unit(rng);
        pts.push_back(TorusPoint::wrap(a, unit(rng)));
      }
    }
    if (pts.empty()) throw UsageError("sweep needs sweep.x0_list or sweep.count > 0");
    return pts;
  }

  // ---- artifacts --------------------------------------------------------

  fs::path artifact(const std::string& name) {
    files_.push_back(name);
    return cfg_.output_dir / name;
  }

  void write_json(const std::string& name, const Json& j) {
    std::ofstream out(artifact(name));
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("cannot write " + name);
  }

  // ---- subcommands ------------------------------------------------------

  int solve() {
    const Setup& s = *setup_;
    const ValueFunction& u = *s.u;
    {
      std::ofstream out(artifact("value_function.csv"));
      u.write_csv(out);
    }
    const ViscosityReport r = verify_viscosity(u, s.v, s.alpha0);
    Json j;
    j["provenance"] = std::string(to_string(u.provenance()));
    j["grid_n"] = u.n();
    j["alpha0"] = s.alpha0;
    j["equation_residual"] = r.equation_residual;
    j["subsolution_violation"] = r.subsolution_violation;
    j["semiconcavity_constant"] = r.semiconcavity_constant;
    j["lipschitz_constant"] = u.lipschitz_constant();
    j["differentiable_nodes"] = r.differentiable_nodes;
    j["kink_nodes"] = r.kink_nodes;
    j["convex_kinks"] = r.convex_kinks;
    j["passed"] = r.passed;
    write_json("viscosity_report.json", j);

    std::ofstream svg(artifact("value_function.svg"));
    const auto& vals = u.grid().values();
    if (u.dim() == 1) {
      std::vector<double> xs(vals.size());
      for (std::size_t k = 0; k < xs.size(); ++k) xs[k] = static_cast<double>(k) / u.n();
      SvgPlot plot("u on the torus (" + std::string(to_string(u.provenance())) + ")", "x", "u");
      plot.add_series(xs, vals, kColors[0]);
      plot.write(svg);
    } else {
      write_heatmap(svg, vals, u.n(), "u (" + std::string(to_string(u.provenance())) + ")");
    }
    log_ << "viscosity check: residual " << r.equation_residual << ", violation " << r.subsolution_violation
         << (r.passed ? " (passed)" : " (failed)") << '\n';
    return 0;
  }

  int flow() {
    const Setup& s = *setup_;
    const ValueFunction& u = *s.u;
    const auto pts = resolve_points(cfg_.flow_x0, "flow.x0");
    const CriticalSets sets = critical_sets(u, s.v, s.alpha0, s.tols);
    const FlowOptions opts = flow_options(cfg_.flow_t_max);
    Json summary = Json::array();
    SvgPlot plot("generalized gradient flow", "t", "u(x(t))");
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Trajectory tr = integrate(u, pts[i], opts);
      const std::string stem = "trajectory_" + std::to_string(i);
      {
        std::ofstream out(artifact(stem + ".csv"));
        write_trajectory_csv(out, tr, sets);
      }
      Json e;
      e["index"] = i;
      e["x0"] = point_json(pts[i]);
      e["endpoint"] = point_json(tr.endpoint());
      e["absorbed"] = tr.absorbed;
      e["absorption_time"] = number_or_inf(tr.absorption_time);
      e["tau"] = number_or_inf(critical_time(tr, u, s.v, s.alpha0, s.tols));
      e["energy_residual"] = tr.size() >= 2 ? energy_residual(tr) : 0.0;
      e["steps"] = tr.steps;
      e["endpoint_class"] = std::string(to_string(classify_point(u, s.v, s.alpha0, tr.endpoint(), s.tols).kind));
      summary.push_back(e);
      plot.add_series(tr.times, tr.u_values, kColors[i % std::size(kColors)]);
      log_ << "x0 = " << point_text(pts[i]) << " -> " << point_text(tr.endpoint()) << '\n';
    }
    write_json("flow_summary.json", summary);
    std::ofstream svg(artifact("trajectories.svg"));
    plot.write(svg);
    return 0;
  }

  struct Outcome {
    std::optional<ClassificationReport> report;
    std::vector<double> inconclusive_trace;
    std::string error;
    bool numerical = false;
  };

  int classify(const std::vector<TorusPoint>& pts) {
    const Setup& s = *setup_;
    ClassifyConfig cc;
    cc.schedule = cfg_.schedule;
    cc.epsilon = cfg_.epsilon;
    cc.tols = s.tols;
    cc.tol_v = s.tol_v;
    cc.flow = flow_options(cfg_.schedule.back());

    std::vector<Outcome> results(pts.size());
    auto work = [&](std::size_t i) {
      Outcome& o = results[i];
      try {
        o.report = dichotomy_classify(*s.u, s.v, s.alpha0, pts[i], cc);
      } catch (const InconclusiveError& e) {
        o.inconclusive_trace = e.trace();
        o.error = e.what();
      } catch (const InvalidInput& e) {
        o.error = e.what();
      } catch (const std::exception& e) {
        o.error = e.what();
        o.numerical = true;
      }
    };
    if (cmd_ == Command::Sweep && pts.size() > 1) {
      unsigned threads = cfg_.sweep_threads > 0 ? static_cast<unsigned>(cfg_.sweep_threads)
                                                : std::max(1u, std::thread::hardware_concurrency());
      threads = std::min<unsigned>(threads, static_cast<unsigned>(pts.size()));
      std::mutex m;
      std::size_t next = 0;
      std::vector<std::thread> pool;
      for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
          for (;;) {
            std::size_t i;
            {
              std::lock_guard lock(m);
              if (next >= pts.size()) return;
              i = next++;
            }
            work(i);
          }
        });
      }
      for (auto& t : pool) t.join();
    } else {
      for (std::size_t i = 0; i < pts.size(); ++i) work(i);
    }

    // Single collector: artifacts are written in index order.
    int status = 0;
    std::ofstream table(artifact("classification_table.csv"));
    table << "index," << (s.v.dim() == 1 ? "x0" : "x0_1,x0_2") << ",verdict,tau,t0,vbar_final\n";
    table.precision(12);
    SvgPlot plot("vbar trace", "T", "integral of V against mu_x^T");
    plot.set_log_x(true);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Outcome& o = results[i];
      Json j = report_json(pts[i], o, cc);
      write_json("classification_" + std::to_string(i) + ".json", j);
      table << i << ',' << pts[i][0];
      if (s.v.dim() == 2) table << ',' << pts[i][1];
      if (o.report) {
        const auto& r = *o.report;
        table << ',' << to_string(r.verdict) << ',';
        if (std::isinf(r.tau)) {
          table << "inf";
        } else {
          table << r.tau;
        }
        table << ',';
        if (r.t0) table << *r.t0;
        table << ',' << r.vbar_trace.back() << '\n';
        plot.add_series(cc.schedule, r.vbar_trace, kColors[i % std::size(kColors)]);
        log_ << "x0 = " << point_text(pts[i]) << ": " << to_string(r.verdict) << '\n';
      } else {
        table << ',' << (o.inconclusive_trace.empty() ? "Error" : "Inconclusive") << ",,,\n";
        log_ << "x0 = " << point_text(pts[i]) << ": " << o.error << '\n';
        status = o.numerical || !o.inconclusive_trace.empty() ? std::max(status, 1) : 2;
      }
    }
    std::ofstream svg(artifact("vbar_trace.svg"));
    plot.write(svg);
    return status;
  }

  Json report_json(const TorusPoint& x0, const Outcome& o, const ClassifyConfig& cc) const {
    const Setup& s = *setup_;
    Json j;
    if (o.report) {
      const auto& r = *o.report;
      j["verdict"] = std::string(to_string(r.verdict));
      j["tau"] = number_or_inf(r.tau);
      j["t0"] = r.t0 ? Json(*r.t0) : Json(nullptr);
      j["alpha0"] = r.alpha0;
      j["vbar_trace"] = r.vbar_trace;
      j["attractor_trace"] = r.attractor_trace;
      j["argmax_trace"] = r.argmax_trace;
      j["eta"] = r.eta ? Json(*r.eta) : Json(nullptr);
      j["eta_density_trace"] = r.eta_density_trace;
    } else {
      j["verdict"] = o.inconclusive_trace.empty() ? "Error" : "Inconclusive";
      j["tau"] = nullptr;
      j["t0"] = nullptr;
      j["alpha0"] = s.alpha0;
      j["vbar_trace"] = o.inconclusive_trace;
      j["error"] = o.error;
    }
    j["schedule"] = cc.schedule;
    j["x0"] = point_json(x0);
    j["potential"] = s.v.name();
    j["solver"] = to_string(cfg_.solver);
    j["grid_n"] = cfg_.grid_n;
    j["flow_dt"] = cc.flow.dt;
    j["epsilon"] = cc.epsilon;
    j["tol_crit"] = cc.tols.crit;
    j["tol_sing"] = cc.tols.sing;
    j["tol_gap"] = cc.tols.gap;
    j["tol_v"] = cc.tol_v;
    return j;
  }

  int lemmas() {
    const LemmaSuiteResult a1 = lemma_a1_suite(cfg_.lemma_cases, cfg_.seed);
    const LemmaSuiteResult a2 = lemma_a2_suite(cfg_.lemma_cases, cfg_.seed ^ 0x9e3779b97f4a7c15ULL);
    auto to_json = [](const LemmaSuiteResult& r) {
      Json j;
      j["cases"] = r.cases;
      j["hypothesis_held"] = r.hypothesis_held;
      j["violations"] = r.violations;
      j["passed"] = r.cases - r.violations;
      j["min_slack"] = r.min_slack;
      return j;
    };
    Json j;
    j["lemma_a1"] = to_json(a1);
    j["lemma_a2"] = to_json(a2);
    j["all_passed"] = a1.violations == 0 && a2.violations == 0;
    write_json("lemmas.json", j);
    log_ << "lemma A.1: " << a1.cases - a1.violations << "/" << a1.cases << " passed; lemma A.2: "
         << a2.cases - a2.violations << "/" << a2.cases << " passed\n";
    return a1.violations == 0 && a2.violations == 0 ? 0 : 1;
  }

  // ---- manifest ---------------------------------------------------------

  void write_manifest(int status, const std::string& error) {
    Json m;
    m["command"] = std::string(to_string(cmd_));
    m["status"] = status == 0 ? "ok" : "failed";
    m["exit_code"] = status;
    if (!error.empty()) m["error"] = error;
    m["seed"] = cfg_.seed;
    Json raw = Json::object();
    for (const auto& [k, v] : cfg_.raw) raw[k] = v;
    m["config_file"] = raw;

    Json r;
    if (cfg_.potential_name) r["potential.name"] = *cfg_.potential_name;
    if (cfg_.potential_file) r["potential.file"] = cfg_.potential_file->string();
    r["solver"] = to_string(cfg_.solver);
    r["solver.dt"] = cfg_.solver_dt;
    r["solver.max_iter"] = cfg_.solver_max_iter;
    r["solver.tol"] = cfg_.solver_tol;
    r["grid.n"] = cfg_.grid_n;
    r["flow.dt"] = cfg_.flow_dt;
    r["flow.t_max"] = cfg_.flow_t_max;
    r["flow.record_every"] = cfg_.flow_record_every;
    r["flow.max_halvings"] = FlowOptions{}.max_halvings;
    r["flow.stagnation_window"] = FlowOptions{}.stagnation_window;
    r["flow.metric"] = cfg_.flow_metric ? Json(*cfg_.flow_metric) : Json(nullptr);
    r["schedule"] = cfg_.schedule;
    r["classify.epsilon"] = cfg_.epsilon;
    r["tol.weak"] = cfg_.tol_weak;
    r["moments.K"] = cfg_.moments_k;
    r["moments.normalization"] = std::string(to_string(cfg_.moments_norm));
    r["sweep.count"] = cfg_.sweep_count;
    r["lemma.cases"] = cfg_.lemma_cases;
    r["output.dir"] = cfg_.output_dir.string();
    if (setup_) {
      const Setup& s = *setup_;
      r["tol.crit"] = s.tols.crit;
      r["tol.sing"] = s.tols.sing;
      r["tol.gap"] = s.tols.gap;
      r["tol.v"] = s.tol_v;
      r["superdifferential.radius"] = 3.0 / cfg_.grid_n;
      r["differentiability.threshold"] = 5.0 / cfg_.grid_n;
      Json d;
      d["potential"] = s.v.name();
      d["dim"] = s.v.dim();
      d["alpha0"] = s.alpha0;
      d["oscillation"] = s.osc;
      if (s.u) {
        d["lipschitz_constant"] = s.u->lipschitz_constant();
        d["semiconcavity_constant"] = s.u->semiconcavity_constant();
      }
      if (s.lo_stats) {
        d["laxoleinik_iterations"] = s.lo_stats->iterations;
        d["laxoleinik_residual"] = s.lo_stats->residual;
      }
      m["derived"] = d;
    }
    m["resolved"] = r;
    m["files"] = files_;
    std::ofstream out(cfg_.output_dir / "manifest.json");
    out << m.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed");
  }

  Command cmd_;
  const ExperimentConfig& cfg_;
  std::ostream& log_;
  std::optional<Setup> setup_;
  std::vector<std::string> files_;
};

}  // namespace

std::optional<Command> parse_command(std::string_view s) {
  if (s == "solve") return Command::Solve;
  if (s == "flow") return Command::Flow;
  if (s == "classify") return Command::Classify;
  if (s == "sweep") return Command::Sweep;
  if (s == "lemmas") return Command::Lemmas;
  return std::nullopt;
}

std::string_view to_string(Command c) {
  switch (c) {
    case Command::Solve:
      return "solve";
    case Command::Flow:
      return "flow";
    case Command::Classify:
      return "classify";
    case Command::Sweep:
      return "sweep";
    case Command::Lemmas:
      return "lemmas";
  }
  return "?";
}

int execute(Command cmd, const ExperimentConfig& cfg, std::ostream& log) { return Run(cmd, cfg, log).go(); }

}  // namespace ggflow::cli
