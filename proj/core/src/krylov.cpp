#include "krylov.hpp"

#include <cmath>
#include <stdexcept>

namespace demailly::detail {

namespace {

double dot(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const Vector& a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, const Vector& x, Vector& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace

KrylovResult gmres(const LinearOperator& apply, const LinearOperator& precondition,
                   const Vector& rhs, double abs_tol, int restart, int max_iters) {
  const std::size_t n = rhs.size();
  KrylovResult result;
  result.x.assign(n, 0.0);
  Vector r = rhs;
  double beta = norm(r);
  result.residual_norm = beta;
  if (beta <= abs_tol) {
    result.converged = true;
    return result;
  }

  while (result.iterations < max_iters) {
    std::vector<Vector> basis;
    std::vector<Vector> hessenberg;  // column j holds h(0..j+1, j)
    std::vector<double> cs, sn;
    std::vector<double> g{beta};
    basis.push_back(r);
    for (double& v : basis.back()) v /= beta;

    int j = 0;
    for (; j < restart && result.iterations < max_iters; ++j, ++result.iterations) {
      Vector w = apply(precondition(basis[j]));
      Vector h(j + 2, 0.0);
      // Modified Gram-Schmidt.
      for (int i = 0; i <= j; ++i) {
        h[i] = dot(w, basis[i]);
        axpy(-h[i], basis[i], w);
      }
      h[j + 1] = norm(w);

      for (int i = 0; i < j; ++i) {
        const double tmp = cs[i] * h[i] + sn[i] * h[i + 1];
        h[i + 1] = -sn[i] * h[i] + cs[i] * h[i + 1];
        h[i] = tmp;
      }
      const double denom = std::hypot(h[j], h[j + 1]);
      const double c = denom == 0.0 ? 1.0 : h[j] / denom;
      const double s = denom == 0.0 ? 0.0 : h[j + 1] / denom;
      cs.push_back(c);
      sn.push_back(s);
      const double hj1 = h[j + 1];
      h[j] = c * h[j] + s * hj1;
      h[j + 1] = 0.0;
      g.push_back(-s * g[j]);
      g[j] = c * g[j];
      hessenberg.push_back(h);

      if (hj1 != 0.0) {
        basis.push_back(std::move(w));
        for (double& v : basis.back()) v /= hj1;
      } else {
        basis.emplace_back(n, 0.0);
      }

      if (std::abs(g[j + 1]) <= abs_tol || hj1 == 0.0) {
        ++result.iterations;
        ++j;
        break;
      }
    }

    // Back substitution for the least-squares coefficients.
    const int m = j;
    std::vector<double> y(m, 0.0);
    for (int i = m - 1; i >= 0; --i) {
      double acc = g[i];
      for (int k = i + 1; k < m; ++k) acc -= hessenberg[k][i] * y[k];
      y[i] = acc / hessenberg[i][i];
    }
    Vector update(n, 0.0);
    for (int i = 0; i < m; ++i) axpy(y[i], basis[i], update);
    axpy(1.0, precondition(update), result.x);

    // Recompute the true residual rather than trusting the recurrence.
    r = rhs;
    axpy(-1.0, apply(result.x), r);
    beta = norm(r);
    result.residual_norm = beta;
    if (beta <= abs_tol) {
      result.converged = true;
      return result;
    }
  }
  return result;
}

KrylovResult pcg(const LinearOperator& apply, const LinearOperator& precondition,
                 const Vector& rhs, const std::function<bool(const Vector&, const Vector&)>& stop,
                 int max_iters) {
  KrylovResult result;
  result.x.assign(rhs.size(), 0.0);
  Vector r = rhs;
  if (stop(result.x, r)) {
    result.converged = true;
    result.residual_norm = norm(r);
    return result;
  }
  Vector z = precondition(r);
  Vector p = z;
  double rz = dot(r, z);
  for (int k = 0; k < max_iters; ++k) {
    const Vector ap = apply(p);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) break;
    const double alpha = rz / pap;
    axpy(alpha, p, result.x);
    axpy(-alpha, ap, r);
    result.iterations = k + 1;
    if (stop(result.x, r)) {
      result.converged = true;
      break;
    }
    z = precondition(r);
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = z[i] + beta * p[i];
  }
  result.residual_norm = norm(r);
  return result;
}

}  // namespace demailly::detail
