#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "polysr/cli.hpp"

namespace polysr::cli {

using nlohmann::json;

namespace {

json complex_json(cdouble v) { return json::array({v.real(), v.imag()}); }

cdouble complex_from(const json& j, const char* what) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw Error(ErrorCode::validation,
              std::string(what) + ": expected a number or a [re, im] pair");
}

std::vector<cdouble> complex_list(const json& j, const char* what) {
  if (!j.is_array()) throw Error(ErrorCode::validation, std::string(what) + " must be an array");
  std::vector<cdouble> out;
  out.reserve(j.size());
  for (const auto& e : j) out.push_back(complex_from(e, what));
  return out;
}

json complex_list_json(std::span<const cdouble> v) {
  json a = json::array();
  for (const auto& c : v) a.push_back(complex_json(c));
  return a;
}

const json& field(const json& j, const char* name) {
  if (!j.is_object()) throw Error(ErrorCode::validation, "expected a JSON object");
  const auto it = j.find(name);
  if (it == j.end()) throw Error(ErrorCode::validation, std::string("missing field '") + name + "'");
  return *it;
}

int int_field(const json& j, const char* name) {
  const json& v = field(j, name);
  if (!v.is_number_integer())
    throw Error(ErrorCode::validation, std::string("field '") + name + "' must be an integer");
  return v.get<int>();
}

double number(const json& j, const char* what) {
  if (!j.is_number()) throw Error(ErrorCode::validation, std::string(what) + " must be a number");
  return j.get<double>();
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // e.byte is the 1-based offset where parsing stopped.
    const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream msg;
    msg << "malformed JSON at line " << line << ", column " << col << ": " << e.what();
    throw Error(ErrorCode::parse, msg.str());
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

void check_json_syntax(const std::string& text) { (void)parse_json(text); }

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::construction:
    case ErrorCode::order_estimation:
    case ErrorCode::ill_posed:
    case ErrorCode::degenerate_locations:
    case ErrorCode::inconsistent:
    case ErrorCode::infeasible:
    case ErrorCode::nonconvergence:
      return kExitSolver;
    case ErrorCode::io:
      return kExitIo;
    default:
      return kExitValidation;
  }
}

std::string_view to_string(ProblemKind k) noexcept {
  switch (k) {
    case ProblemKind::spikes: return "spikes";
    case ProblemKind::spline: return "spline";
    case ProblemKind::spikes2d: return "spikes2d";
  }
  return "spikes";
}

ProblemKind parse_problem_kind(std::string_view name) {
  if (name == "spikes") return ProblemKind::spikes;
  if (name == "spline") return ProblemKind::spline;
  if (name == "spikes2d") return ProblemKind::spikes2d;
  throw Error(ErrorCode::validation, "unknown kind '" + std::string(name) + "'");
}

void ProblemFile::validate() const {
  if (basis.N < 0) throw Error(ErrorCode::validation, "N must be nonnegative");
  const std::size_t n1 = static_cast<std::size_t>(basis.N) + 1;
  const std::size_t want = kind == ProblemKind::spikes2d ? n1 * n1 : n1;
  if (moments.size() != want) {
    std::ostringstream msg;
    msg << "expected " << want << " moments for kind " << to_string(kind) << " and N = "
        << basis.N << ", got " << moments.size();
    throw Error(ErrorCode::validation, msg.str());
  }
  if ((kind == ProblemKind::spline) != spline.has_value())
    throw Error(ErrorCode::validation, "a spline record is required exactly for kind spline");
  if (spline) {
    if (spline->degree < 0) throw Error(ErrorCode::validation, "degree_r must be nonnegative");
    const std::size_t need = static_cast<std::size_t>(spline->degree) + 1;
    if (spline->boundary_left.size() != need || spline->boundary_right.size() != need)
      throw Error(ErrorCode::validation, "boundary arrays must hold degree_r + 1 values");
  }
}

MomentVector moment_vector(const ProblemFile& p) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(p.moments.size()));
  for (std::size_t i = 0; i < p.moments.size(); ++i) v[static_cast<Eigen::Index>(i)] = p.moments[i];
  return MomentVector(p.basis, std::move(v));
}

Eigen::MatrixXd moment_matrix(const ProblemFile& p) {
  const int n1 = p.basis.N + 1;
  if (p.moments.size() != static_cast<std::size_t>(n1) * n1)
    throw Error(ErrorCode::shape, "2D moments must hold (N+1)^2 entries");
  Eigen::MatrixXd y(n1, n1);
  double scale = 0.0, imag = 0.0;
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n1; ++j) {
      const cdouble v = p.moments[static_cast<std::size_t>(i) * n1 + j];
      y(i, j) = v.real();
      scale = std::max(scale, std::abs(v));
      imag = std::max(imag, std::abs(v.imag()));
    }
  if (imag > 1e-12 * std::max(scale, 1e-300))
    throw Error(ErrorCode::validation, "2D moments must be real");
  if (p.basis.kind == BasisKind::chebyshev) return y;
  const Eigen::MatrixXd& c =
      conversion_matrix(p.basis, BasisSpec{BasisKind::chebyshev, p.basis.N});
  return c * y * c.transpose();
}

ProblemFile parse_problem(const std::string& text) {
  const json j = parse_json(text);
  ProblemFile p;
  p.kind = parse_problem_kind(field(j, "kind").get<std::string>());
  p.basis.kind = parse_basis_kind(field(j, "basis").get<std::string>());
  p.basis.N = int_field(j, "N");
  p.moments = complex_list(field(j, "moments"), "moments");
  if (const auto it = j.find("spline"); it != j.end() && !it->is_null()) {
    SplineRecord s;
    s.degree = int_field(*it, "degree_r");
    s.boundary_left = complex_list(field(*it, "boundary_left"), "boundary_left");
    s.boundary_right = complex_list(field(*it, "boundary_right"), "boundary_right");
    p.spline = std::move(s);
  }
  p.validate();
  return p;
}

std::string dump_problem(const ProblemFile& p) {
  json j;
  j["kind"] = std::string(to_string(p.kind));
  j["basis"] = std::string(to_string(p.basis.kind));
  j["N"] = p.basis.N;
  j["moments"] = complex_list_json(p.moments);
  if (p.spline) {
    j["spline"] = {{"degree_r", p.spline->degree},
                   {"boundary_left", complex_list_json(p.spline->boundary_left)},
                   {"boundary_right", complex_list_json(p.spline->boundary_right)}};
  }
  return dump(j);
}

Truth parse_truth(const std::string& text) {
  const json j = parse_json(text);
  const ProblemKind kind = parse_problem_kind(field(j, "kind").get<std::string>());
  switch (kind) {
    case ProblemKind::spikes: {
      std::vector<Atom> atoms;
      for (const auto& a : field(j, "atoms"))
        atoms.push_back({number(field(a, "location"), "location"),
                         complex_from(field(a, "weight"), "weight")});
      return DiracMeasure(std::move(atoms));
    }
    case ProblemKind::spline: {
      const int r = int_field(j, "degree_r");
      std::vector<double> knots;
      for (const auto& k : field(j, "knots")) knots.push_back(number(k, "knot"));
      std::vector<MonomialPoly> pieces;
      for (const auto& pc : field(j, "pieces")) pieces.push_back(complex_list(pc, "piece"));
      return Spline(r, std::move(knots), std::move(pieces));
    }
    case ProblemKind::spikes2d: {
      std::vector<Atom2D> atoms;
      for (const auto& a : field(j, "atoms")) {
        const json& loc = field(a, "location");
        if (!loc.is_array() || loc.size() != 2)
          throw Error(ErrorCode::validation, "2D location must be a pair");
        atoms.push_back({{number(loc[0], "location"), number(loc[1], "location")},
                         number(field(a, "weight"), "2D weight")});
      }
      return DiracMeasure2D(std::move(atoms));
    }
  }
  throw Error(ErrorCode::validation, "unknown truth kind");
}

std::string dump_truth(const Truth& t) {
  json j;
  if (const auto* m = std::get_if<DiracMeasure>(&t)) {
    j["kind"] = "spikes";
    j["atoms"] = json::array();
    for (const auto& a : m->atoms())
      j["atoms"].push_back({{"location", a.location}, {"weight", complex_json(a.weight)}});
  } else if (const auto* s = std::get_if<Spline>(&t)) {
    j["kind"] = "spline";
    j["degree_r"] = s->degree();
    j["knots"] = s->knots();
    j["pieces"] = json::array();
    for (const auto& pc : s->pieces()) j["pieces"].push_back(complex_list_json(pc));
  } else {
    const auto& m2 = std::get<DiracMeasure2D>(t);
    j["kind"] = "spikes2d";
    j["atoms"] = json::array();
    for (const auto& a : m2.atoms())
      j["atoms"].push_back(
          {{"location", {a.location[0], a.location[1]}}, {"weight", a.weight}});
  }
  return dump(j);
}

ProblemFile project(const Truth& t, const BasisSpec& basis) {
  if (basis.N < 0) throw Error(ErrorCode::validation, "N must be nonnegative");
  ProblemFile p;
  p.basis = basis;
  if (const auto* m = std::get_if<DiracMeasure>(&t)) {
    p.kind = ProblemKind::spikes;
    const MomentVector y = moments_of_dirac(*m, basis);
    p.moments.assign(y.values.data(), y.values.data() + y.values.size());
  } else if (const auto* s = std::get_if<Spline>(&t)) {
    p.kind = ProblemKind::spline;
    const MomentVector y = moments_of_spline(*s, basis);
    p.moments.assign(y.values.data(), y.values.data() + y.values.size());
    p.spline = SplineRecord{s->degree(), s->boundary_left(), s->boundary_right()};
  } else {
    p.kind = ProblemKind::spikes2d;
    const Eigen::MatrixXd y = moments_2d(std::get<DiracMeasure2D>(t), basis);
    for (Eigen::Index i = 0; i < y.rows(); ++i)
      for (Eigen::Index k = 0; k < y.cols(); ++k) p.moments.emplace_back(y(i, k), 0.0);
  }
  return p;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::io, "failed reading '" + path + "'");
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw Error(ErrorCode::io, "failed writing '" + path + "'");
}

}  // namespace polysr::cli
