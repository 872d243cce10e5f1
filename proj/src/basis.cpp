#include "polysr/basis.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <shared_mutex>
#include <sstream>
#include <tuple>

#include "polysr/error.hpp"

namespace polysr {

std::string_view to_string(BasisKind kind) noexcept {
  switch (kind) {
    case BasisKind::monomial: return "monomial";
    case BasisKind::chebyshev: return "chebyshev";
    case BasisKind::legendre: return "legendre";
  }
  return "unknown";
}

BasisKind parse_basis_kind(std::string_view name) {
  if (name == "monomial") return BasisKind::monomial;
  if (name == "chebyshev") return BasisKind::chebyshev;
  if (name == "legendre") return BasisKind::legendre;
  throw Error(ErrorCode::validation, "unknown basis '" + std::string(name) + "'");
}

MomentVector::MomentVector(BasisSpec b, Eigen::VectorXcd v)
    : basis(b), values(std::move(v)) {
  if (basis.N < 0) throw Error(ErrorCode::validation, "basis degree must be >= 0");
  if (values.size() != basis.N + 1) {
    std::ostringstream msg;
    msg << "moment vector has " << values.size() << " entries, expected " << basis.N + 1;
    throw Error(ErrorCode::shape, msg.str());
  }
}

namespace {

void check_x(double x) {
  if (!(std::abs(x) <= 1.0 + kDomainClamp)) {
    std::ostringstream msg;
    msg << "basis evaluated at " << x << " outside [-1,1]";
    throw Error(ErrorCode::domain, msg.str());
  }
}

// Multiplication by x acting on coefficient vectors in `kind`'s basis.
Eigen::VectorXd multiply_by_x(BasisKind kind, const Eigen::VectorXd& v) {
  const Eigen::Index n = v.size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    if (v[k] == 0.0) continue;
    switch (kind) {
      case BasisKind::monomial:
        if (k + 1 < n) out[k + 1] += v[k];
        break;
      case BasisKind::chebyshev:
        if (k == 0) {
          if (n > 1) out[1] += v[0];
        } else {
          if (k + 1 < n) out[k + 1] += 0.5 * v[k];
          out[k - 1] += 0.5 * v[k];
        }
        break;
      case BasisKind::legendre: {
        const double d = 2.0 * k + 1.0;
        if (k + 1 < n) out[k + 1] += v[k] * (k + 1.0) / d;
        if (k > 0) out[k - 1] += v[k] * static_cast<double>(k) / d;
        break;
      }
    }
  }
  return out;
}

Eigen::MatrixXd build_conversion(const BasisSpec& source, const BasisSpec& target) {
  const int n = source.N + 1;
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
  if (source.kind == target.kind) return Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd prev = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd cur = Eigen::VectorXd::Zero(n);
  cur[0] = 1.0;  // P_0 = 1 in every family
  c.row(0) = cur.transpose();
  for (int j = 0; j + 1 < n; ++j) {
    Eigen::VectorXd xcur = multiply_by_x(source.kind, cur);
    Eigen::VectorXd next;
    switch (target.kind) {
      case BasisKind::monomial:
        next = xcur;
        break;
      case BasisKind::chebyshev:
        next = j == 0 ? xcur : Eigen::VectorXd(2.0 * xcur - prev);
        break;
      case BasisKind::legendre:
        next = ((2.0 * j + 1.0) * xcur - static_cast<double>(j) * prev) / (j + 1.0);
        break;
    }
    prev = std::move(cur);
    cur = std::move(next);
    c.row(j + 1) = cur.transpose();
  }
  return c;
}

Eigen::MatrixXd build_derivative(const BasisSpec& basis) {
  const int n = basis.N + 1;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    switch (basis.kind) {
      case BasisKind::monomial:
        a(k, k - 1) = k;
        break;
      case BasisKind::chebyshev:
        // T'_k = 2k sum_{n<k, k-n odd} T_n / c_n with c_0 = 2.
        for (int m = k - 1; m >= 0; m -= 2) a(k, m) = (m == 0 ? 1.0 : 2.0) * k;
        break;
      case BasisKind::legendre:
        // P'_k = sum_{n<k, k-n odd} (2n+1) P_n.
        for (int m = k - 1; m >= 0; m -= 2) a(k, m) = 2.0 * m + 1.0;
        break;
    }
  }
  return a;
}

struct Caches {
  std::shared_mutex mutex;
  std::map<std::pair<int, int>, std::unique_ptr<DerivativeMatrix>> derivative;
  std::map<std::tuple<int, int, int>, std::unique_ptr<Eigen::MatrixXd>> conversion;
};

Caches& caches() {
  static Caches c;
  return c;
}

}  // namespace

double eval_basis(const BasisSpec& basis, int k, double x) {
  if (k < 0 || k > basis.N) {
    std::ostringstream msg;
    msg << "basis index " << k << " outside 0.." << basis.N;
    throw Error(ErrorCode::index, msg.str());
  }
  check_x(x);
  switch (basis.kind) {
    case BasisKind::monomial:
      return std::pow(x, k);
    case BasisKind::chebyshev: {
      double prev = 1.0, cur = x;
      if (k == 0) return 1.0;
      for (int j = 1; j < k; ++j) {
        const double next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
      }
      return cur;
    }
    case BasisKind::legendre: {
      double prev = 1.0, cur = x;
      if (k == 0) return 1.0;
      for (int j = 1; j < k; ++j) {
        const double next = ((2.0 * j + 1.0) * x * cur - j * prev) / (j + 1.0);
        prev = cur;
        cur = next;
      }
      return cur;
    }
  }
  return 0.0;
}

Eigen::VectorXd eval_basis_all(const BasisSpec& basis, double x) {
  check_x(x);
  const int n = basis.N + 1;
  Eigen::VectorXd p(n);
  p[0] = 1.0;
  if (n == 1) return p;
  p[1] = x;
  for (int j = 1; j + 1 < n; ++j) {
    switch (basis.kind) {
      case BasisKind::monomial: p[j + 1] = x * p[j]; break;
      case BasisKind::chebyshev: p[j + 1] = 2.0 * x * p[j] - p[j - 1]; break;
      case BasisKind::legendre:
        p[j + 1] = ((2.0 * j + 1.0) * x * p[j] - j * p[j - 1]) / (j + 1.0);
        break;
    }
  }
  return p;
}

Eigen::MatrixXd collocation_matrix(const BasisSpec& basis, std::span<const double> xs) {
  Eigen::MatrixXd a(basis.N + 1, static_cast<Eigen::Index>(xs.size()));
  for (std::size_t j = 0; j < xs.size(); ++j) a.col(j) = eval_basis_all(basis, xs[j]);
  return a;
}

const DerivativeMatrix& derivative_matrix(const BasisSpec& basis) {
  if (basis.N < 0) throw Error(ErrorCode::validation, "basis degree must be >= 0");
  auto& c = caches();
  const auto key = std::make_pair(static_cast<int>(basis.kind), basis.N);
  {
    std::shared_lock lock(c.mutex);
    if (auto it = c.derivative.find(key); it != c.derivative.end()) return *it->second;
  }
  auto built = std::make_unique<DerivativeMatrix>(DerivativeMatrix{basis, build_derivative(basis)});
  std::unique_lock lock(c.mutex);
  auto [it, inserted] = c.derivative.try_emplace(key, std::move(built));
  return *it->second;
}

const Eigen::MatrixXd& conversion_matrix(const BasisSpec& source, const BasisSpec& target) {
  if (source.N != target.N) {
    std::ostringstream msg;
    msg << "basis degrees differ: " << source.N << " vs " << target.N;
    throw Error(ErrorCode::shape, msg.str());
  }
  if (source.N < 0) throw Error(ErrorCode::validation, "basis degree must be >= 0");
  auto& c = caches();
  const auto key = std::make_tuple(static_cast<int>(source.kind),
                                   static_cast<int>(target.kind), source.N);
  {
    std::shared_lock lock(c.mutex);
    if (auto it = c.conversion.find(key); it != c.conversion.end()) return *it->second;
  }
  auto built = std::make_unique<Eigen::MatrixXd>(build_conversion(source, target));
  std::unique_lock lock(c.mutex);
  auto [it, inserted] = c.conversion.try_emplace(key, std::move(built));
  return *it->second;
}

MomentVector change_of_basis(const MomentVector& y, const BasisSpec& target) {
  const auto& c = conversion_matrix(y.basis, target);
  if (y.basis.kind == target.kind) return y;
  return MomentVector(target, c.cast<cdouble>() * y.values);
}

MomentVector moments_of_dirac(const DiracMeasure& m, const BasisSpec& basis) {
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(basis.N + 1);
  for (const auto& a : m.atoms()) y += a.weight * eval_basis_all(basis, a.location).cast<cdouble>();
  return MomentVector(basis, std::move(y));
}

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw Error(ErrorCode::validation, "quadrature needs at least one node");
  // Returns (P_n(x), P'_n(x)).
  auto legendre_n = [n](double x) {
    double p0 = 1.0, p1 = x;
    for (int j = 1; j < n; ++j) {
      const double p2 = ((2.0 * j + 1.0) * x * p1 - j * p0) / (j + 1.0);
      p0 = p1;
      p1 = p2;
    }
    return std::make_pair(p1, n * (x * p1 - p0) / (x * x - 1.0));
  };
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      const auto [p, dp] = legendre_n(x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre_n(x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

MomentVector moments_of_spline(const Spline& s, const BasisSpec& basis) {
  const int q = (basis.N + s.degree() + 2) / 2 + 1;  // ceil((N + r + 1) / 2) + 1
  const QuadratureRule rule = gauss_legendre(q);
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(basis.N + 1);
  std::vector<double> edges;
  edges.reserve(s.knots().size() + 2);
  edges.push_back(-1.0);
  edges.insert(edges.end(), s.knots().begin(), s.knots().end());
  edges.push_back(1.0);
  for (std::size_t m = 0; m + 1 < edges.size(); ++m) {
    const double mid = 0.5 * (edges[m] + edges[m + 1]);
    const double half = 0.5 * (edges[m + 1] - edges[m]);
    const auto& piece = s.pieces()[m];
    for (int i = 0; i < q; ++i) {
      const double x = mid + half * rule.nodes[i];
      const cdouble fx = horner(piece, x) * (half * rule.weights[i]);
      y += fx * eval_basis_all(basis, x).cast<cdouble>();
    }
  }
  return MomentVector(basis, std::move(y));
}

}  // namespace polysr
