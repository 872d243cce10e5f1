#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "polysr/certificate.hpp"
#include "polysr/cli.hpp"
#include "polysr/spike_solver.hpp"
#include "polysr/spline_recovery.hpp"

namespace polysr::cli {

using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

struct GlobalFlags {
  std::string input;
  std::string output;
  std::uint64_t seed = 1;
  std::string method = "pencil";
  int grid_size = 0;
  double tol = -1.0;
  bool nonnegative = false;
  bool force = false;
  int parallelism = 1;
  bool no_timing = false;
};

json complex_json(cdouble v) { return json::array({v.real(), v.imag()}); }

json warnings_json(const std::vector<std::string>& w) { return json(w); }

void emit(const GlobalFlags& g, const std::string& text, std::ostream& out) {
  if (g.output.empty()) {
    out << text;
  } else {
    write_text_file(g.output, text);
  }
}

std::string json_text(const json& j) { return j.dump(2) + "\n"; }

json separation_json(const SeparationReport& s) {
  json pv = json::array();
  for (const auto& [i, j] : s.pair_violations) pv.push_back({i, j});
  return {{"satisfied", s.satisfied},
          {"threshold", s.threshold},
          {"threshold_factor", s.threshold_factor},
          {"min_pair_distance", std::isfinite(s.min_pair_distance) ? json(s.min_pair_distance)
                                                                   : json(nullptr)},
          {"domain_violations", s.domain_violations},
          {"pair_violations", pv},
          {"below_guaranteed_regime", s.below_guaranteed_regime}};
}

json separation_json(const SeparationReport2D& s) {
  json pv = json::array();
  for (const auto& [i, j] : s.pair_violations) pv.push_back({i, j});
  json out = {{"satisfied", s.satisfied},
              {"threshold", s.threshold},
              {"threshold_factor", s.threshold_factor},
              {"min_pair_distance", std::isfinite(s.min_pair_distance)
                                        ? json(s.min_pair_distance)
                                        : json(nullptr)},
              {"domain_violations", s.domain_violations},
              {"pair_violations", pv},
              {"below_guaranteed_regime", s.below_guaranteed_regime}};
  if (!s.note.empty()) out["note"] = s.note;
  return out;
}

SolverOptions solver_options(const GlobalFlags& g) {
  SolverOptions o;
  o.method = parse_solver_method(g.method);
  o.lp_grid_size = g.grid_size;
  o.lp_nonnegative = g.nonnegative;
  if (g.tol > 0.0) o.pencil_rank_tol = g.tol;
  o.validate();
  return o;
}

json options_json(const SolverOptions& o) {
  return {{"method", std::string(to_string(o.method))},
          {"pencil_rank_tol", o.pencil_rank_tol},
          {"lp_grid_size", o.lp_grid_size},
          {"lp_nonnegative", o.lp_nonnegative},
          {"coefficient_tol", o.coefficient_tol},
          {"residual_tol", o.residual_tol}};
}

std::string need_input(const GlobalFlags& g) {
  if (g.input.empty()) throw Error(ErrorCode::validation, "--input is required");
  return read_text_file(g.input);
}

// gen -------------------------------------------------------------------

struct GenFlags {
  std::string kind = "spikes";
  int M = 10;
  int N = 128;
  int degree = 0;
  double factor = -1.0;
  std::string basis = "chebyshev";
  std::string truth;
  std::string weights = "complex";
};

int cmd_gen(const GlobalFlags& g, const GenFlags& f, std::ostream& out) {
  GenOptions o;
  o.kind = parse_problem_kind(f.kind);
  o.M = f.M;
  o.N = f.N;
  o.degree = f.degree;
  o.factor = f.factor > 0.0 ? f.factor
                            : (o.kind == ProblemKind::spikes2d ? kSafeSeparationFactor2D : 4.0);
  o.basis = parse_basis_kind(f.basis);
  o.seed = g.seed;
  o.weights = f.weights;
  const GeneratedInstance inst = generate(o);
  if (g.output.empty()) {
    if (!f.truth.empty()) write_text_file(f.truth, dump_truth(inst.truth));
    out << dump_problem(inst.problem);
    return kExitOk;
  }
  std::string truth_path = f.truth;
  if (truth_path.empty()) {
    const std::string& p = g.output;
    truth_path = p.size() > 5 && p.ends_with(".json") ? p.substr(0, p.size() - 5) + ".truth.json"
                                                      : p + ".truth.json";
  }
  write_text_file(g.output, dump_problem(inst.problem));
  write_text_file(truth_path, dump_truth(inst.truth));
  return kExitOk;
}

// project ----------------------------------------------------------------

int cmd_project(const GlobalFlags& g, int N, const std::string& basis, std::ostream& out) {
  const Truth t = parse_truth(need_input(g));
  emit(g, dump_problem(project(t, BasisSpec{parse_basis_kind(basis), N})), out);
  return kExitOk;
}

// recover ----------------------------------------------------------------

json atoms_json(const DiracMeasure& m) {
  json a = json::array();
  for (const auto& at : m.atoms())
    a.push_back({{"location", at.location}, {"weight", complex_json(at.weight)}});
  return a;
}

int cmd_recover(const GlobalFlags& g, std::ostream& out) {
  const ProblemFile p = parse_problem(need_input(g));
  SolverOptions opts = solver_options(g);
  json j;
  j["status"] = "ok";
  j["kind"] = std::string(to_string(p.kind));
  j["basis"] = std::string(to_string(p.basis.kind));
  j["N"] = p.basis.N;
  const auto start = std::chrono::steady_clock::now();
  switch (p.kind) {
    case ProblemKind::spikes: {
      const SpikeSolution s = recover_spikes(moment_vector(p), opts);
      j["atoms"] = atoms_json(s.measure);
      j["residual"] = s.residual;
      if (opts.method == SolverMethod::pencil) {
        j["model_order"] = s.model_order;
      } else {
        j["lp_objective"] = s.lp_objective;
        j["lp_grid_size"] = s.lp_grid_size;
        j["lp_iterations"] = s.lp_iterations;
      }
      j["warnings"] = warnings_json(s.warnings);
      break;
    }
    case ProblemKind::spline: {
      SplineProblem sp{moment_vector(p), p.spline->degree, p.spline->boundary_left,
                       p.spline->boundary_right};
      const SplineSolution s = recover_spline(sp, opts);
      j["degree_r"] = s.spline.degree();
      j["knots"] = s.spline.knots();
      json pieces = json::array();
      for (const auto& pc : s.spline.pieces()) {
        json c = json::array();
        for (const auto& v : pc) c.push_back(complex_json(v));
        pieces.push_back(c);
      }
      j["pieces"] = pieces;
      j["jumps"] = atoms_json(s.jumps);
      j["residual"] = s.report.moment_residual;
      j["consistency"] = {{"moment_residual", s.report.moment_residual},
                          {"boundary_left_residual", s.report.boundary_left_residual},
                          {"boundary_right_residual", s.report.boundary_right_residual},
                          {"continuity_residual", s.report.continuity_residual}};
      j["warnings"] = warnings_json(s.warnings);
      break;
    }
    case ProblemKind::spikes2d: {
      opts.method = SolverMethod::lp;
      const SpikeSolution2D s = recover_spikes_2d(moment_matrix(p), opts);
      json a = json::array();
      for (const auto& at : s.measure.atoms())
        a.push_back({{"location", {at.location[0], at.location[1]}}, {"weight", at.weight}});
      j["atoms"] = a;
      j["residual"] = s.residual;
      j["lp_objective"] = s.lp_objective;
      j["lp_grid_size"] = s.lp_grid_size;
      j["lp_iterations"] = s.lp_iterations;
      j["warnings"] = warnings_json(s.warnings);
      break;
    }
  }
  j["options"] = options_json(opts);
  if (!g.no_timing)
    j["timing_ms"] = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - start)
                         .count();
  emit(g, json_text(j), out);
  return kExitOk;
}

// certify ----------------------------------------------------------------

struct CertifyFlags {
  int N = 0;
  std::string knots;
  std::string values;
  std::string samples;
  int grid_points_per_degree = 0;
  double exclusion_radius = -1.0;
  double factor = kSafeSeparationFactor2D;
};

std::vector<double> parse_number_list(const std::string& s, const char* what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw Error(ErrorCode::validation, std::string("bad number '") + item + "' in " + what);
    }
  }
  return out;
}

json report_json(const CertificateReport& r) {
  return {{"interpolation_residual", r.interpolation_residual},
          {"off_support_max", r.off_support_max},
          {"off_support_argmax", r.off_support_argmax},
          {"near_knot_max", r.near_knot_max},
          {"near_knot_ok", r.near_knot_ok},
          {"grid_size", r.grid_size},
          {"exclusion_radius", r.exclusion_radius},
          {"interp_tol", r.interp_tol},
          {"eval_tol", r.eval_tol},
          {"passed", r.passed}};
}

json report_json(const CertificateReport2D& r) {
  return {{"interpolation_residual", r.interpolation_residual},
          {"off_support_max", r.off_support_max},
          {"off_support_argmax", {r.off_support_argmax[0], r.off_support_argmax[1]}},
          {"near_knot_max", r.near_knot_max},
          {"near_knot_ok", r.near_knot_ok},
          {"grid_size", r.grid_size},
          {"refined_maxima", r.refined_maxima},
          {"exclusion_radius", r.exclusion_radius},
          {"interp_tol", r.interp_tol},
          {"eval_tol", r.eval_tol},
          {"passed", r.passed}};
}

int certify_1d(const GlobalFlags& g, const CertifyFlags& f, int N, std::vector<double> knots,
               std::vector<cdouble> u, std::ostream& out) {
  if (knots.size() != u.size())
    throw Error(ErrorCode::shape, "knots and values differ in length");
  for (const auto& v : u)
    if (std::abs(std::abs(v) - 1.0) > 1e-9)
      throw Error(ErrorCode::validation, "certificate values must have unit modulus");
  json j;
  j["kind"] = "certificate";
  j["N"] = N;
  const SeparationReport sep = check_separation(knots, N);
  j["separation"] = separation_json(sep);
  if (!sep.satisfied && !g.force) {
    j["constructed"] = false;
    j["warnings"] = json::array({"separation violated; pass --force to construct anyway"});
    emit(g, json_text(j), out);
    return kExitValidation;
  }
  const CertificateBuild b = build_certificate(knots, u, N, false);
  VerifyOptions vo;
  if (f.grid_points_per_degree > 0) vo.grid_points_per_degree = f.grid_points_per_degree;
  vo.exclusion_radius = f.exclusion_radius;
  if (g.tol > 0.0) vo.interp_tol = g.tol;
  const CertificateReport r = verify_certificate(b.poly, knots, u, vo);
  j["constructed"] = true;
  j["kernel_degree"] = b.kernel_degree;
  j["condition_estimate"] = b.condition_estimate;
  j["report"] = report_json(r);
  j["warnings"] = warnings_json(b.warnings);
  if (!f.samples.empty()) {
    const int s = vo.grid_points_per_degree * std::max(N, 1);
    std::string csv = "x,t,re_p,im_p,abs_p\n";
    char buf[160];
    for (int i = 0; i < s; ++i) {
      const double t = kPi * i / (s - 1);
      const double x = std::cos(t);
      const cdouble v = b.poly(x);
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", x, t, v.real(),
                    v.imag(), std::abs(v));
      csv += buf;
    }
    write_text_file(f.samples, csv);
  }
  emit(g, json_text(j), out);
  return kExitOk;
}

int certify_2d(const GlobalFlags& g, const CertifyFlags& f, int N, std::vector<Point2> locs,
               std::vector<double> signs, std::ostream& out) {
  json j;
  j["kind"] = "certificate2d";
  j["N"] = N;
  const SeparationReport2D sep = check_separation_2d(locs, N, f.factor);
  j["separation"] = separation_json(sep);
  if (!sep.satisfied && !g.force) {
    j["constructed"] = false;
    j["warnings"] = json::array({"separation violated; pass --force to construct anyway"});
    emit(g, json_text(j), out);
    return kExitValidation;
  }
  const CertificateBuild2D b = build_certificate_2d(locs, signs, N, f.factor, false);
  VerifyOptions2D vo;
  if (f.grid_points_per_degree > 0) vo.grid_points_per_degree = f.grid_points_per_degree;
  vo.exclusion_radius = f.exclusion_radius;
  if (g.tol > 0.0) vo.interp_tol = g.tol;
  const CertificateReport2D r = verify_certificate_2d(b.poly, locs, signs, vo);
  j["constructed"] = true;
  j["kernel_degree"] = b.kernel_degree;
  j["condition_estimate"] = b.condition_estimate;
  j["report"] = report_json(r);
  j["warnings"] = warnings_json(b.warnings);
  emit(g, json_text(j), out);
  return kExitOk;
}

int cmd_certify(const GlobalFlags& g, const CertifyFlags& f, std::ostream& out) {
  if (!g.input.empty()) {
    // {"N", "knots", "values"} or {"kind": "spikes2d", "N", "locations", "signs"}
    const std::string text = read_text_file(g.input);
    check_json_syntax(text);
    const json j = json::parse(text);
    const int N = f.N > 0 ? f.N : j.at("N").get<int>();
    if (j.value("kind", std::string("spikes")) == "spikes2d") {
      std::vector<Point2> locs;
      for (const auto& p : j.at("locations")) locs.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      return certify_2d(g, f, N, std::move(locs), j.at("signs").get<std::vector<double>>(), out);
    }
    std::vector<cdouble> u;
    for (const auto& v : j.at("values")) {
      if (v.is_number()) {
        u.emplace_back(v.get<double>(), 0.0);
      } else {
        u.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
      }
    }
    return certify_1d(g, f, N, j.at("knots").get<std::vector<double>>(), std::move(u), out);
  }
  if (f.N <= 0) throw Error(ErrorCode::validation, "--N is required without --input");
  if (f.knots.empty()) throw Error(ErrorCode::validation, "--knots or --input is required");
  const auto knots = parse_number_list(f.knots, "--knots");
  std::vector<cdouble> u;
  if (f.values.empty()) {
    u.assign(knots.size(), 1.0);
  } else {
    for (double v : parse_number_list(f.values, "--values")) u.emplace_back(v, 0.0);
  }
  return certify_1d(g, f, f.N, knots, std::move(u), out);
}

// phase ------------------------------------------------------------------

int cmd_phase(const GlobalFlags& g, PhaseOptions o, std::ostream& out) {
  o.seed = g.seed;
  o.parallelism = g.parallelism;
  o.nonnegative = g.nonnegative;
  o.timing = !g.no_timing;
  emit(g, phase_csv(run_phase(o), o.timing), out);
  return kExitOk;
}

void report_error(const GlobalFlags& g, const std::string& code, const std::string& message,
                  std::ostream& err) {
  err << "polysr: " << code << ": " << message << "\n";
  if (g.output.empty()) return;
  const json j = {{"status", "error"}, {"error", {{"code", code}, {"message", message}}}};
  try {
    write_text_file(g.output, json_text(j));
  } catch (const Error&) {
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Super-resolution of Dirac trains and splines from polynomial moments"};
  app.require_subcommand(1);
  GlobalFlags g;
  app.add_option("--input", g.input, "Input file");
  app.add_option("--output", g.output, "Output file (stdout when omitted)");
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--method", g.method, "Spike solver: pencil or lp")
      ->check(CLI::IsMember({"pencil", "lp"}));
  app.add_option("--grid-size", g.grid_size, "LP grid size (0 selects the default)");
  app.add_option("--tol", g.tol,
                 "Pencil rank tolerance (recover) or interpolation tolerance (certify)");
  app.add_flag("--nonnegative", g.nonnegative, "Nonnegative LP");
  app.add_flag("--force", g.force, "Construct certificates even when separation fails");
  app.add_option("--parallelism", g.parallelism, "Worker threads for phase");
  app.add_flag("--no-timing", g.no_timing, "Omit wall-clock fields");

  GenFlags gf;
  auto* gen = app.add_subcommand("gen", "Synthesize a problem and its ground truth");
  gen->add_option("--kind", gf.kind, "spikes, spline or spikes2d");
  gen->add_option("--M", gf.M, "Number of atoms or knots");
  gen->add_option("--N", gf.N, "Moment degree");
  gen->add_option("--degree", gf.degree, "Spline degree r");
  gen->add_option("--factor", gf.factor, "Minimum separation in units of pi/N");
  gen->add_option("--basis", gf.basis, "monomial, chebyshev or legendre");
  gen->add_option("--truth", gf.truth, "Ground-truth output file");
  gen->add_option("--weights", gf.weights, "complex, signed or positive (spikes)");

  int project_n = 128;
  std::string project_basis = "chebyshev";
  auto* proj = app.add_subcommand("project", "Moments of a ground-truth file");
  proj->add_option("--N", project_n, "Moment degree");
  proj->add_option("--basis", project_basis, "monomial, chebyshev or legendre");

  auto* rec = app.add_subcommand("recover", "Recover spikes, a spline or 2D spikes");

  CertifyFlags cf;
  auto* cert = app.add_subcommand("certify", "Build and verify a dual certificate");
  cert->add_option("--N", cf.N, "Degree");
  cert->add_option("--knots", cf.knots, "Comma-separated knots in [-1,1]");
  cert->add_option("--values", cf.values, "Comma-separated real values (default all 1)");
  cert->add_option("--samples", cf.samples, "Write P samples as CSV");
  cert->add_option("--grid-points-per-degree", cf.grid_points_per_degree, "Verification grid");
  cert->add_option("--exclusion-radius", cf.exclusion_radius, "rho radius around knots");
  cert->add_option("--factor", cf.factor, "2D separation factor");

  PhaseOptions po;
  auto* phase = app.add_subcommand("phase", "Separation sweep, CSV output");
  phase->add_option("--trials", po.trials, "Trials per separation factor");
  phase->add_option("--sep-min", po.sep_min, "Smallest factor");
  phase->add_option("--sep-max", po.sep_max, "Largest factor");
  phase->add_option("--steps", po.steps, "Number of factors");
  phase->add_option("--N", po.N, "Moment degree");
  phase->add_option("--M", po.M, "Atoms per trial");

  for (auto* sub : {gen, proj, rec, cert, phase}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (gen->parsed()) return cmd_gen(g, gf, out);
    if (proj->parsed()) return cmd_project(g, project_n, project_basis, out);
    if (rec->parsed()) return cmd_recover(g, out);
    if (cert->parsed()) return cmd_certify(g, cf, out);
    if (phase->parsed()) return cmd_phase(g, po, out);
  } catch (const Error& e) {
    report_error(g, std::string(to_string(e.code())), e.what(), err);
    return exit_code_for(e.code());
  } catch (const json::exception& e) {
    report_error(g, "validation", e.what(), err);
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace polysr::cli
