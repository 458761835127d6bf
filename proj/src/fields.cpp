#include "driftbv/fields.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace driftbv {

namespace {

constexpr double kPi = 3.14159265358979323846;

// 5-point Gauss-Legendre on [-1, 1]
constexpr std::array<double, 5> kGaussX = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                           0.5384693101056831, 0.9061798459386640};
constexpr std::array<double, 5> kGaussW = {0.2369268850561891, 0.4786286704993665,
                                           0.5688888888888889, 0.4786286704993665,
                                           0.2369268850561891};

// C^2 quintic smoothstep; keeps centered differences second-order across the
// seams of the cutoff bands
double smoothstep01(double q) {
  if (q <= 0) return 0.0;
  if (q >= 1) return 1.0;
  return q * q * q * (10.0 + q * (-15.0 + 6.0 * q));
}

double poly_eval(const std::vector<PolyTerm>& terms, double t, double x, double y) {
  double s = 0.0;
  for (const auto& tm : terms) {
    double v = tm.coef;
    for (int k = 0; k < tm.px; ++k) v *= x;
    for (int k = 0; k < tm.py; ++k) v *= y;
    for (int k = 0; k < tm.pt; ++k) v *= t;
    s += v;
  }
  return s;
}

double reflect_coord(double x, double a, double b) {
  const double w = b - a;
  if (x < a) {
    const double d = a - x;
    return d <= w ? a + d : b;
  }
  if (x > b) {
    const double d = x - b;
    return d <= w ? b - d : a;
  }
  return x;
}

}  // namespace

DriftField DriftField::zero(int dim) {
  DriftField f;
  f.kind = FieldKind::Zero;
  f.dim = dim;
  return f;
}

DriftField DriftField::constant(int dim, std::array<double, 2> v) {
  DriftField f;
  f.kind = FieldKind::Constant;
  f.dim = dim;
  f.value = v;
  return f;
}

DriftField DriftField::rotation(std::array<double, 2> center, double amplitude, double r0,
                                double r1) {
  DriftField f;
  f.kind = FieldKind::Rotation;
  f.dim = 2;
  f.center = center;
  f.amplitude = amplitude;
  f.r0 = r0;
  f.r1 = r1;
  if (r1 > 0 && !(r1 > r0 && r0 >= 0)) throw InvalidInput("rotation: need 0 <= r0 < r1");
  return f;
}

DriftField DriftField::radial(int dim, std::array<double, 2> center, double amplitude) {
  DriftField f;
  f.kind = FieldKind::Radial;
  f.dim = dim;
  f.center = center;
  f.amplitude = amplitude;
  return f;
}

DriftField DriftField::shear(std::array<double, 2> center, double amplitude) {
  DriftField f;
  f.kind = FieldKind::Shear;
  f.dim = 2;
  f.center = center;
  f.amplitude = amplitude;
  return f;
}

DriftField DriftField::polynomial(int dim, std::array<std::vector<PolyTerm>, 2> terms) {
  DriftField f;
  f.kind = FieldKind::Polynomial;
  f.dim = dim;
  f.poly = std::move(terms);
  return f;
}

double DriftField::eval(int comp, double t, const std::array<double, 2>& x) const {
  switch (kind) {
    case FieldKind::Zero:
      return 0.0;
    case FieldKind::Constant:
      return value[comp];
    case FieldKind::Rotation: {
      const double dx = x[0] - center[0], dy = x[1] - center[1];
      double s = amplitude;
      if (r1 > 0) {
        const double r = std::sqrt(dx * dx + dy * dy);
        s *= 1.0 - smoothstep01((r - r0) / (r1 - r0));
      }
      return comp == 0 ? -s * dy : s * dx;
    }
    case FieldKind::Radial:
      return amplitude * (x[comp] - center[comp]);
    case FieldKind::Shear:
      return comp == 0 ? amplitude * (x[1] - center[1]) : 0.0;
    case FieldKind::Polynomial:
      return poly_eval(poly[comp], t, x[0], x[1]);
    case FieldKind::Extended: {
      // phi(x) * inner(reflected x)
      double dist = std::numeric_limits<double>::infinity();
      for (int a = 0; a < dim; ++a)
        dist = std::min({dist, x[a] - outer_lo[a], outer_hi[a] - x[a]});
      if (dist <= phi_d0) return 0.0;
      const double phi = smoothstep01((dist - phi_d0) / (phi_d1 - phi_d0));
      std::array<double, 2> xr = x;
      for (int a = 0; a < dim; ++a) xr[a] = reflect_coord(x[a], inner_lo[a], inner_hi[a]);
      return phi * inner->eval(comp, t, xr);
    }
  }
  return 0.0;
}

bool DriftField::has_analytic_divergence() const { return kind != FieldKind::Extended; }

bool DriftField::time_dependent() const {
  if (kind == FieldKind::Polynomial) {
    for (int c = 0; c < 2; ++c)
      for (const auto& tm : poly[c])
        if (tm.pt > 0) return true;
    return false;
  }
  if (kind == FieldKind::Extended) return inner->time_dependent();
  return false;
}

double DriftField::analytic_divergence(double t, const std::array<double, 2>& x) const {
  switch (kind) {
    case FieldKind::Zero:
    case FieldKind::Constant:
    case FieldKind::Shear:
      return 0.0;
    case FieldKind::Rotation:
      // the cutoff gradient is radial, the rotation is tangential
      return 0.0;
    case FieldKind::Radial:
      return dim * amplitude;
    case FieldKind::Polynomial: {
      double s = 0.0;
      for (const auto& tm : poly[0])
        if (tm.px > 0)
          s += tm.coef * tm.px * std::pow(x[0], tm.px - 1) * std::pow(x[1], tm.py) *
               std::pow(t, tm.pt);
      if (dim == 2)
        for (const auto& tm : poly[1])
          if (tm.py > 0)
            s += tm.coef * tm.py * std::pow(x[0], tm.px) * std::pow(x[1], tm.py - 1) *
                 std::pow(t, tm.pt);
      return s;
    }
    case FieldKind::Extended:
      throw InvalidInput("extended field has no analytic divergence");
  }
  return 0.0;
}

ScalarField ScalarField::zero(int dim) {
  ScalarField f;
  f.kind = ScalarKind::Zero;
  f.dim = dim;
  return f;
}

ScalarField ScalarField::constant(int dim, double v) {
  ScalarField f;
  f.kind = ScalarKind::Constant;
  f.dim = dim;
  f.value = v;
  return f;
}

ScalarField ScalarField::bump(int dim, std::array<double, 2> center, double radius,
                              double height) {
  ScalarField f;
  f.kind = ScalarKind::Bump;
  f.dim = dim;
  f.center = center;
  f.radius = radius;
  f.height = height;
  return f;
}

ScalarField ScalarField::indicator(int dim, std::array<double, 2> lo, std::array<double, 2> hi,
                                   double height) {
  ScalarField f;
  f.kind = ScalarKind::Indicator;
  f.dim = dim;
  f.box_lo = lo;
  f.box_hi = hi;
  f.height = height;
  return f;
}

bool ScalarField::time_dependent() const {
  for (const auto& tm : time_poly)
    if (tm.pt > 0) return true;
  if (kind == ScalarKind::Polynomial)
    for (const auto& tm : poly)
      if (tm.pt > 0) return true;
  return false;
}

double ScalarField::eval(double t, const std::array<double, 2>& x) const {
  double base = 0.0;
  switch (kind) {
    case ScalarKind::Zero:
      base = 0.0;
      break;
    case ScalarKind::Constant:
      base = value;
      break;
    case ScalarKind::Bump: {
      double r2 = (x[0] - center[0]) * (x[0] - center[0]);
      if (dim == 2) r2 += (x[1] - center[1]) * (x[1] - center[1]);
      const double r = std::sqrt(r2);
      if (r >= radius) {
        base = 0.0;
      } else {
        const double c = std::cos(0.5 * kPi * r / radius);
        base = height * c * c;
      }
      break;
    }
    case ScalarKind::Indicator: {
      bool in = x[0] >= box_lo[0] && x[0] <= box_hi[0];
      if (dim == 2) in = in && x[1] >= box_lo[1] && x[1] <= box_hi[1];
      base = in ? height : 0.0;
      break;
    }
    case ScalarKind::Sine: {
      base = height * std::sin(kPi * freq[0] * (x[0] - offset[0]));
      if (dim == 2) base *= std::sin(kPi * freq[1] * (x[1] - offset[1]));
      break;
    }
    case ScalarKind::Polynomial:
      base = poly_eval(poly, t, x[0], x[1]);
      break;
  }
  if (!time_poly.empty()) base *= poly_eval(time_poly, t, x[0], x[1]);
  return base;
}

double AveragedSample::lambda0() const {
  return div_neg_sup > 0 ? 1.0 / div_neg_sup : std::numeric_limits<double>::infinity();
}

double AveragedSample::lambda1() const {
  return lambda_v > 0 ? 1.0 / lambda_v : std::numeric_limits<double>::infinity();
}

AveragedSample time_average(const DriftField& field, double t0, double t1, const Grid& grid) {
  if (!(t1 > t0)) throw InvalidInput("time_average: need t1 > t0");
  AveragedSample s;
  s.t0 = t0;
  s.t1 = t1;
  const int nc = grid.cell_count();
  const double tm = 0.5 * (t0 + t1), th = 0.5 * (t1 - t0);

  for (int comp = 0; comp < grid.dim; ++comp) {
    s.cell_vec[comp].assign(nc, 0.0);
    for (int c = 0; c < nc; ++c) {
      const auto x = grid.center(c);
      double acc = 0.0;
      for (int q = 0; q < 5; ++q) acc += kGaussW[q] * field.eval(comp, tm + th * kGaussX[q], x);
      s.cell_vec[comp][c] = 0.5 * acc;
    }
  }
  if (grid.dim == 1) s.cell_vec[1].assign(nc, 0.0);

  const int nx = grid.n[0], ny = grid.n[1];
  s.face_normal[0].assign((nx + 1) * ny, 0.0);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      const std::array<double, 2> x{grid.lo[0] + i * grid.h[0],
                                    grid.dim == 2 ? grid.coord(1, j) : 0.0};
      double acc = 0.0;
      for (int q = 0; q < 5; ++q) acc += kGaussW[q] * field.eval(0, tm + th * kGaussX[q], x);
      s.face_normal[0][i + (nx + 1) * j] = 0.5 * acc;
    }
  if (grid.dim == 2) {
    s.face_normal[1].assign(nx * (ny + 1), 0.0);
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const std::array<double, 2> x{grid.coord(0, i), grid.lo[1] + j * grid.h[1]};
        double acc = 0.0;
        for (int q = 0; q < 5; ++q) acc += kGaussW[q] * field.eval(1, tm + th * kGaussX[q], x);
        s.face_normal[1][i + nx * j] = 0.5 * acc;
      }
  }
  divergence_ops(s, grid);
  return s;
}

std::vector<double> time_average_scalar(const ScalarField& f, double t0, double t1,
                                        const Grid& grid) {
  if (!(t1 > t0)) throw InvalidInput("time_average_scalar: need t1 > t0");
  const int nc = grid.cell_count();
  std::vector<double> out(nc, 0.0);
  const double tm = 0.5 * (t0 + t1), th = 0.5 * (t1 - t0);
  for (int c = 0; c < nc; ++c) {
    const auto x = grid.center(c);
    double acc = 0.0;
    for (int q = 0; q < 5; ++q) acc += kGaussW[q] * f.eval(tm + th * kGaussX[q], x);
    out[c] = 0.5 * acc;
  }
  return out;
}

std::vector<double> sample_scalar(const ScalarField& f, double t, const Grid& grid) {
  const int nc = grid.cell_count();
  std::vector<double> out(nc, 0.0);
  for (int c = 0; c < nc; ++c) out[c] = f.eval(t, grid.center(c));
  return out;
}

namespace {

// centered difference in the interior, one-sided on the boundary ring
double directional_diff(const std::vector<double>& v, const Grid& g, int axis, int i, int j) {
  const int nx = g.n[0], ny = g.n[1];
  const double h = g.h[axis];
  auto at = [&](int ii, int jj) { return v[g.index(ii, jj)]; };
  if (axis == 0) {
    if (i > 0 && i < nx - 1) return (at(i + 1, j) - at(i - 1, j)) / (2 * h);
    if (i == 0) return (at(1, j) - at(0, j)) / h;
    return (at(nx - 1, j) - at(nx - 2, j)) / h;
  }
  if (j > 0 && j < ny - 1) return (at(i, j + 1) - at(i, j - 1)) / (2 * h);
  if (j == 0) return (at(i, 1) - at(i, 0)) / h;
  return (at(i, ny - 1) - at(i, ny - 2)) / h;
}

}  // namespace

void divergence_ops(AveragedSample& s, const Grid& grid) {
  const int nc = grid.cell_count();
  const int nx = grid.n[0], ny = grid.n[1];

  s.div_centered.assign(nc, 0.0);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      double d = directional_diff(s.cell_vec[0], grid, 0, i, j);
      if (grid.dim == 2) d += directional_diff(s.cell_vec[1], grid, 1, i, j);
      s.div_centered[grid.index(i, j)] = d;
    }

  // face-flux divergence with the boundary treatment the scheme applies:
  // Neumann faces carry no normal velocity
  s.div_face.assign(nc, 0.0);
  auto fx = [&](int i, int j) -> double {
    if ((i == 0 && grid.bc.label[0][0] == BcKind::Neumann) ||
        (i == nx && grid.bc.label[0][1] == BcKind::Neumann))
      return 0.0;
    return s.face_normal[0][i + (nx + 1) * j];
  };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      double d = (fx(i + 1, j) - fx(i, j)) / grid.h[0];
      if (grid.dim == 2) {
        auto fy = [&](int jj) -> double {
          if ((jj == 0 && grid.bc.label[1][0] == BcKind::Neumann) ||
              (jj == ny && grid.bc.label[1][1] == BcKind::Neumann))
            return 0.0;
          return s.face_normal[1][i + nx * jj];
        };
        d += (fy(j + 1) - fy(j)) / grid.h[1];
      }
      s.div_face[grid.index(i, j)] = d;
    }
  s.div_neg_cell.assign(nc, 0.0);
  s.div_neg_sup = 0.0;
  for (int c = 0; c < nc; ++c) {
    const double neg =
        std::max(std::max(-s.div_centered[c], 0.0), std::max(-s.div_face[c], 0.0));
    s.div_neg_cell[c] = neg;
    s.div_neg_sup = std::max(s.div_neg_sup, neg);
  }

  for (int a = 0; a < grid.dim; ++a) {
    s.grad_div[a].assign(nc, 0.0);
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        s.grad_div[a][grid.index(i, j)] = directional_diff(s.div_centered, grid, a, i, j);
  }
  if (grid.dim == 1) s.grad_div[1].assign(nc, 0.0);

  s.lambda_v = 0.0;
  for (int comp = 0; comp < grid.dim; ++comp)
    for (int a = 0; a < grid.dim; ++a) {
      double sup = 0.0;
      for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
          sup = std::max(sup, std::fabs(directional_diff(s.cell_vec[comp], grid, a, i, j)));
      s.lambda_v += sup;
    }
}

AssumptionReport check_assumptions(const DriftField& field, const Grid& grid,
                                   AssumptionLevel level, double shell_h,
                                   const std::vector<double>& times) {
  const double tol = 1e-10;
  AssumptionReport rep;
  rep.tprime_checked = level == AssumptionLevel::Tprime;
  if (shell_h <= 0) shell_h = 4.0 * std::max(grid.h[0], grid.dim == 2 ? grid.h[1] : 0.0);

  const auto dist = distance_to_boundary(grid);
  const auto proj = boundary_projection(grid);
  const int nx = grid.n[0], ny = grid.n[1];

  for (double t : times) {
    // boundary traces at face centers
    for (int axis = 0; axis < grid.dim; ++axis) {
      const int nk = grid.dim == 2 ? grid.n[1 - axis] : 1;
      for (int side = 0; side < 2; ++side) {
        const double nu = side == 0 ? -1.0 : 1.0;
        for (int k = 0; k < nk; ++k) {
          std::array<double, 2> x{};
          x[axis] = side == 0 ? grid.lo[axis] : grid.hi[axis];
          if (grid.dim == 2) x[1 - axis] = grid.coord(1 - axis, k);
          const double vn = nu * field.eval(axis, t, x);
          const bool dirichlet = grid.bc.label[axis][side] == BcKind::Dirichlet;
          double viol = 0.0;
          if (dirichlet)
            viol = std::max(0.0, -vn);  // V.nu >= 0 on Gamma_D
          else
            viol = std::fabs(vn);  // V.nu == 0 on Gamma_N
          if (viol > rep.t3_worst) {
            rep.t3_worst = viol;
            rep.t3_where = std::string(dirichlet ? "Dirichlet" : "Neumann") + " wall axis " +
                           std::to_string(axis) + (side == 0 ? " low" : " high");
          }
        }
      }
    }

    AveragedSample snap = time_average(field, t - 1e-9, t + 1e-9, grid);
    rep.div_neg_sup = std::max(rep.div_neg_sup, snap.div_neg_sup);
    rep.lambda_v = std::max(rep.lambda_v, snap.lambda_v);
    for (int c = 0; c < grid.cell_count(); ++c) {
      for (int comp = 0; comp < grid.dim; ++comp)
        rep.sup_field = std::max(rep.sup_field, std::fabs(snap.cell_vec[comp][c]));
      for (int a = 0; a < grid.dim; ++a)
        rep.grad_div_sup = std::max(rep.grad_div_sup, std::fabs(snap.grad_div[a][c]));
    }

    if (level == AssumptionLevel::Tprime) {
      // (HypBV): V(x).nu(pi(x)) >= 0 over the shell d <= h
      for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
          const int c = grid.index(i, j);
          if (dist[c] > shell_h) continue;
          const double nu = proj[c].side == 0 ? -1.0 : 1.0;
          const double vn = nu * snap.cell_vec[proj[c].axis][c];
          rep.hypbv_worst = std::max(rep.hypbv_worst, -vn);
        }
    }
  }
  rep.t3_ok = rep.t3_worst <= tol;
  rep.hypbv_ok = rep.hypbv_worst <= tol;
  rep.lambda0 =
      rep.div_neg_sup > 0 ? 1.0 / rep.div_neg_sup : std::numeric_limits<double>::infinity();
  rep.lambda1 = rep.lambda_v > 0 ? 1.0 / rep.lambda_v : std::numeric_limits<double>::infinity();
  return rep;
}

DriftField extend_field(const DriftField& field, const Grid& inner, const Grid& outer,
                        double margin) {
  if (inner.dim != outer.dim) throw ExtensionMarginTooSmall("extension: dim mismatch");
  double h_out = outer.h[0];
  if (outer.dim == 2) h_out = std::max(h_out, outer.h[1]);
  double gap = std::numeric_limits<double>::infinity();
  for (int a = 0; a < inner.dim; ++a) {
    gap = std::min(gap, inner.lo[a] - outer.lo[a]);
    gap = std::min(gap, outer.hi[a] - inner.hi[a]);
  }
  if (margin <= 0) margin = gap;
  if (gap < 4.0 * h_out || margin > gap + 1e-14)
    throw ExtensionMarginTooSmall("extension: inner box needs >= 4 outer cells of clearance");
  const double d0 = h_out;
  const double d1 = std::max(margin, 2.5 * h_out);
  if (!(d1 > d0)) throw ExtensionMarginTooSmall("extension: margin leaves no ramp room");

  DriftField ext;
  ext.kind = FieldKind::Extended;
  ext.dim = inner.dim;
  ext.inner = std::make_shared<DriftField>(field);
  ext.inner_lo = inner.lo;
  ext.inner_hi = inner.hi;
  ext.outer_lo = outer.lo;
  ext.outer_hi = outer.hi;
  ext.phi_d0 = d0;
  ext.phi_d1 = d1;
  return ext;
}

std::vector<BoundaryFace> inflow_set(const DriftField& field, const Grid& grid, double t) {
  std::vector<BoundaryFace> faces;
  for (int axis = 0; axis < grid.dim; ++axis) {
    const int nk = grid.dim == 2 ? grid.n[1 - axis] : 1;
    for (int side = 0; side < 2; ++side) {
      const double nu = side == 0 ? -1.0 : 1.0;
      for (int k = 0; k < nk; ++k) {
        std::array<double, 2> x{};
        x[axis] = side == 0 ? grid.lo[axis] : grid.hi[axis];
        if (grid.dim == 2) x[1 - axis] = grid.coord(1 - axis, k);
        const double vn = nu * field.eval(axis, t, x);
        if (vn < 0.0) faces.push_back({axis, side, k, x, vn});
      }
    }
  }
  return faces;
}

}  // namespace driftbv
