#include "driftbv/stencil.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace driftbv {

void StencilMatrix::matvec(const std::vector<double>& x, std::vector<double>& y) const {
  const int nc = grid->cell_count();
  const int ndir = grid->dim == 1 ? 2 : 4;
  y.assign(nc, 0.0);
  for (int c = 0; c < nc; ++c) {
    double s = diag[c] * x[c];
    for (int d = 0; d < ndir; ++d) {
      const int nb = neighbor(c, d);
      if (nb >= 0) s += off[d][c] * x[nb];
    }
    y[c] = s;
  }
}

bool StencilMatrix::empty() const {
  for (double v : diag)
    if (v != 0.0) return false;
  for (const auto& o : off)
    for (double v : o)
      if (v != 0.0) return false;
  return true;
}

LinearSolveResult solve_tridiagonal(const StencilMatrix& m, const std::vector<double>& rhs,
                                    std::vector<double>& x) {
  const int n = (int)rhs.size();
  std::vector<double> c(n, 0.0), d(n, 0.0);
  // forward sweep of the Thomas algorithm
  double denom = m.diag[0];
  if (denom == 0.0) return {0, std::numeric_limits<double>::infinity(), false};
  c[0] = (n > 1 ? m.off[1][0] : 0.0) / denom;
  d[0] = rhs[0] / denom;
  for (int i = 1; i < n; ++i) {
    const double a = m.off[0][i];
    denom = m.diag[i] - a * c[i - 1];
    if (denom == 0.0) return {0, std::numeric_limits<double>::infinity(), false};
    c[i] = (i < n - 1 ? m.off[1][i] : 0.0) / denom;
    d[i] = (rhs[i] - a * d[i - 1]) / denom;
  }
  x.assign(n, 0.0);
  x[n - 1] = d[n - 1];
  for (int i = n - 2; i >= 0; --i) x[i] = d[i] - c[i] * x[i + 1];
  return {1, 0.0, true};
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

}  // namespace

LinearSolveResult solve_cg(const StencilMatrix& m, const std::vector<double>& rhs,
                           std::vector<double>& x, double rel_tol, int max_iter) {
  const int n = (int)rhs.size();
  if (x.size() != rhs.size()) x.assign(n, 0.0);
  std::vector<double> r(n), z(n), p(n), ap(n);
  m.matvec(x, ap);
  for (int i = 0; i < n; ++i) r[i] = rhs[i] - ap[i];
  const double bnorm = std::max(norm2(rhs), 1e-300);
  std::vector<double> inv_diag(n);
  for (int i = 0; i < n; ++i) inv_diag[i] = m.diag[i] != 0.0 ? 1.0 / m.diag[i] : 1.0;

  for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = dot(r, z);
  for (int it = 1; it <= max_iter; ++it) {
    m.matvec(p, ap);
    const double pap = dot(p, ap);
    if (pap == 0.0) return {it, norm2(r) / bnorm, false};
    const double alpha = rz / pap;
    for (int i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    const double rn = norm2(r);
    if (rn <= rel_tol * bnorm) return {it, rn / bnorm, true};
    for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  return {max_iter, norm2(r) / bnorm, false};
}

LinearSolveResult solve_bicgstab(const StencilMatrix& m, const std::vector<double>& rhs,
                                 std::vector<double>& x, double rel_tol, int max_iter) {
  const int n = (int)rhs.size();
  if (x.size() != rhs.size()) x.assign(n, 0.0);
  std::vector<double> r(n), r0(n), p(n, 0.0), v(n, 0.0), s(n), t(n), ph(n), sh(n);
  std::vector<double> inv_diag(n);
  for (int i = 0; i < n; ++i) inv_diag[i] = m.diag[i] != 0.0 ? 1.0 / m.diag[i] : 1.0;
  m.matvec(x, v);
  for (int i = 0; i < n; ++i) r[i] = rhs[i] - v[i];
  r0 = r;
  const double bnorm = std::max(norm2(rhs), 1e-300);
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  std::fill(v.begin(), v.end(), 0.0);
  for (int it = 1; it <= max_iter; ++it) {
    const double rho_new = dot(r0, r);
    if (rho_new == 0.0) return {it, norm2(r) / bnorm, false};
    if (it == 1) {
      p = r;
    } else {
      const double beta = (rho_new / rho) * (alpha / omega);
      for (int i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    }
    rho = rho_new;
    for (int i = 0; i < n; ++i) ph[i] = inv_diag[i] * p[i];
    m.matvec(ph, v);
    const double r0v = dot(r0, v);
    if (r0v == 0.0) return {it, norm2(r) / bnorm, false};
    alpha = rho / r0v;
    for (int i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
    if (norm2(s) <= rel_tol * bnorm) {
      for (int i = 0; i < n; ++i) x[i] += alpha * ph[i];
      return {it, norm2(s) / bnorm, true};
    }
    for (int i = 0; i < n; ++i) sh[i] = inv_diag[i] * s[i];
    m.matvec(sh, t);
    const double tt = dot(t, t);
    if (tt == 0.0) return {it, norm2(s) / bnorm, false};
    omega = dot(t, s) / tt;
    for (int i = 0; i < n; ++i) {
      x[i] += alpha * ph[i] + omega * sh[i];
      r[i] = s[i] - omega * t[i];
    }
    const double rn = norm2(r);
    if (rn <= rel_tol * bnorm) return {it, rn / bnorm, true};
    if (omega == 0.0) return {it, rn / bnorm, false};
  }
  return {max_iter, norm2(r) / bnorm, false};
}

LinearSolveResult solve_linear(const StencilMatrix& m, const std::vector<double>& rhs,
                               std::vector<double>& x, double rel_tol, int max_iter,
                               bool symmetric) {
  if (m.grid->dim == 1) return solve_tridiagonal(m, rhs, x);
  if (symmetric) return solve_cg(m, rhs, x, rel_tol, max_iter);
  return solve_bicgstab(m, rhs, x, rel_tol, max_iter);
}

}  // namespace driftbv
