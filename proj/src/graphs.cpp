#include "driftbv/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace driftbv {

namespace {

void require_finite(double r, const char* who) {
  if (!std::isfinite(r)) throw InvalidInput(std::string(who) + ": non-finite input");
}

void require_usable(const MonotoneGraph& g, double delta, const char* who) {
  if (g.kind == GraphKind::TransportZero)
    throw GraphHasNoResolvent(std::string(who) +
                              ": TransportZero graph has no resolvent/Yosida regularization");
  if (!(delta > 0) || !std::isfinite(delta))
    throw InvalidInput(std::string(who) + ": delta must be positive");
}

double sgn(double r) { return (r > 0) - (r < 0); }

// Solve s + delta*|s|^{m-1} s = r for the PowerLaw graph. The equation is
// strictly monotone with slope >= 1, reduced to a >= 0 by oddness.
double powerlaw_resolvent(double m, double r, double delta) {
  const double a = std::fabs(r);
  if (a == 0.0) return 0.0;
  double lo = 0.0, hi = a;  // s + delta s^m is >= s, so the root is in [0, a]
  double s = std::min(a, std::pow(a / delta, 1.0 / m));  // crude start
  if (!(s > lo && s < hi)) s = 0.5 * (lo + hi);
  const double tol = 1e-14;
  for (int it = 0; it < 200; ++it) {
    const double sm1 = std::pow(s, m - 1.0);
    const double g = s + delta * sm1 * s - a;
    if (g > 0)
      hi = s;
    else
      lo = s;
    if (std::fabs(g) <= tol * (1.0 + a)) break;
    const double gp = 1.0 + delta * m * sm1;
    double next = s - g / gp;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);  // bisection safeguard
    if (std::fabs(next - s) <= tol && std::fabs(g) <= 1e-12 * (1.0 + a)) {
      s = next;
      break;
    }
    s = next;
  }
  return sgn(r) * s;
}

}  // namespace

MonotoneGraph MonotoneGraph::power_law(double m) {
  if (!(m > 0) || !std::isfinite(m)) throw InvalidInput("PowerLaw exponent must be positive");
  return {GraphKind::PowerLaw, m, 0};
}

MonotoneGraph MonotoneGraph::stefan(double latent) {
  if (!(latent > 0) || !std::isfinite(latent))
    throw InvalidInput("Stefan latent heat must be positive");
  return {GraphKind::Stefan, 0, latent};
}

std::string graph_kind_name(GraphKind k) {
  switch (k) {
    case GraphKind::Identity: return "identity";
    case GraphKind::PowerLaw: return "powerlaw";
    case GraphKind::Sign: return "sign";
    case GraphKind::Stefan: return "stefan";
    case GraphKind::TransportZero: return "transport_zero";
  }
  return "?";
}

GraphKind graph_kind_from_name(const std::string& name) {
  if (name == "identity") return GraphKind::Identity;
  if (name == "powerlaw") return GraphKind::PowerLaw;
  if (name == "sign") return GraphKind::Sign;
  if (name == "stefan") return GraphKind::Stefan;
  if (name == "transport_zero") return GraphKind::TransportZero;
  throw InvalidInput("unknown graph kind '" + name + "'");
}

double resolvent(const MonotoneGraph& g, double r, double delta) {
  require_usable(g, delta, "resolvent");
  require_finite(r, "resolvent");
  switch (g.kind) {
    case GraphKind::Identity:
      return r / (1.0 + delta);
    case GraphKind::PowerLaw:
      return powerlaw_resolvent(g.m, r, delta);
    case GraphKind::Sign:
      if (r > delta) return r - delta;
      if (r < -delta) return r + delta;
      return 0.0;
    case GraphKind::Stefan: {
      const double dl = delta * g.latent;
      if (r < 0) return r / (1.0 + delta);
      if (r <= dl) return 0.0;
      return (r - dl) / (1.0 + delta);
    }
    case GraphKind::TransportZero:
      break;  // unreachable, guarded above
  }
  throw GraphHasNoResolvent("resolvent: unsupported graph");
}

RegularizedGraph::RegularizedGraph(MonotoneGraph g, double d) : base(g), delta(d) {
  if (g.kind != GraphKind::TransportZero && (!(d > 0) || !std::isfinite(d)))
    throw InvalidInput("RegularizedGraph: delta must be positive");
}

double yosida_eval(const RegularizedGraph& rg, double r) {
  require_usable(rg.base, rg.delta, "yosida_eval");
  require_finite(r, "yosida_eval");
  const double d = rg.delta;
  switch (rg.base.kind) {
    case GraphKind::Identity:
      return r / (1.0 + d);
    case GraphKind::Sign:
      return std::clamp(r / d, -1.0, 1.0);
    case GraphKind::Stefan: {
      const double L = rg.base.latent;
      if (r < 0) return r / (1.0 + d);
      if (r <= d * L) return r / d;
      return (r + L) / (1.0 + d);
    }
    case GraphKind::PowerLaw:
      return (r - powerlaw_resolvent(rg.base.m, r, d)) / d;
    case GraphKind::TransportZero:
      break;
  }
  throw GraphHasNoResolvent("yosida_eval: unsupported graph");
}

double yosida_slope(const RegularizedGraph& rg, double r) {
  require_usable(rg.base, rg.delta, "yosida_slope");
  require_finite(r, "yosida_slope");
  const double d = rg.delta;
  switch (rg.base.kind) {
    case GraphKind::Identity:
      return 1.0 / (1.0 + d);
    case GraphKind::Sign:
      return (std::fabs(r) <= d) ? 1.0 / d : 0.0;
    case GraphKind::Stefan: {
      const double L = rg.base.latent;
      if (r >= 0 && r <= d * L) return 1.0 / d;
      return 1.0 / (1.0 + d);
    }
    case GraphKind::PowerLaw: {
      const double s = std::fabs(powerlaw_resolvent(rg.base.m, r, d));
      const double bprime = rg.base.m * std::pow(s, rg.base.m - 1.0);
      if (!std::isfinite(bprime)) return 1.0 / d;  // m < 1 at s = 0
      return bprime / (1.0 + d * bprime);
    }
    case GraphKind::TransportZero:
      break;
  }
  throw GraphHasNoResolvent("yosida_slope: unsupported graph");
}

double yosida_inverse(const RegularizedGraph& rg, double u) {
  require_finite(u, "yosida_inverse");
  const double d = rg.delta;
  switch (rg.base.kind) {
    case GraphKind::TransportZero:
      return 0.0;  // beta^{-1} == 0
    case GraphKind::Identity:
      return (1.0 + d) * u;
    case GraphKind::Sign: {
      if (std::fabs(u) > 1.0 + 1e-14)
        throw OutsideDomainOfJ("yosida_inverse: |u| > 1 outside Sign-graph range");
      return d * std::clamp(u, -1.0, 1.0);
    }
    case GraphKind::Stefan: {
      const double L = rg.base.latent;
      if (u < 0) return (1.0 + d) * u;
      if (u <= L) return d * u;
      return (u - L) + d * u;
    }
    case GraphKind::PowerLaw:
      // beta_delta^{-1}(u) = beta^{-1}(u) + delta*u with beta^{-1}(u) = sign(u)|u|^{1/m}
      return sgn(u) * std::pow(std::fabs(u), 1.0 / rg.base.m) + d * u;
  }
  throw InvalidInput("yosida_inverse: unsupported graph");
}

double primitive_B(const RegularizedGraph& rg, double p) {
  require_usable(rg.base, rg.delta, "primitive_B");
  require_finite(p, "primitive_B");
  const double d = rg.delta;
  switch (rg.base.kind) {
    case GraphKind::Identity:
      return p * p / (2.0 * (1.0 + d));
    case GraphKind::Sign: {
      const double a = std::fabs(p);
      if (a <= d) return a * a / (2.0 * d);
      return d / 2.0 + (a - d);
    }
    case GraphKind::Stefan: {
      const double L = rg.base.latent;
      if (p < 0) return p * p / (2.0 * (1.0 + d));
      const double dl = d * L;
      if (p <= dl) return p * p / (2.0 * d);
      return d * L * L / 2.0 + (0.5 * (p * p - dl * dl) + L * (p - dl)) / (1.0 + d);
    }
    case GraphKind::PowerLaw: {
      // adaptive Simpson on the smooth monotone integrand
      struct Simp {
        const RegularizedGraph& g;
        double eval(double a, double b, double fa, double fm, double fb, double whole,
                    int depth) const {
          const double m1 = 0.5 * (a + 0.5 * (a + b));
          const double m2 = 0.5 * (0.5 * (a + b) + b);
          const double f1 = yosida_eval(g, m1), f2 = yosida_eval(g, m2);
          const double h2 = 0.5 * (b - a);
          const double sl = h2 / 6.0 * (fa + 4.0 * f1 + fm);
          const double sr = h2 / 6.0 * (fm + 4.0 * f2 + fb);
          if (depth <= 0 || std::fabs(sl + sr - whole) < 1e-13 * (1.0 + std::fabs(sl + sr)))
            return sl + sr + (sl + sr - whole) / 15.0;
          return eval(a, 0.5 * (a + b), fa, f1, fm, sl, depth - 1) +
                 eval(0.5 * (a + b), b, fm, f2, fb, sr, depth - 1);
        }
      } simp{rg};
      const double a = 0.0, b = p;
      if (a == b) return 0.0;
      const double fa = 0.0, fb = yosida_eval(rg, b), fm = yosida_eval(rg, 0.5 * (a + b));
      const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
      return simp.eval(a, b, fa, fm, fb, whole, 40);
    }
    case GraphKind::TransportZero:
      break;
  }
  throw GraphHasNoResolvent("primitive_B: unsupported graph");
}

double primitive_j(const RegularizedGraph& rg, double u) {
  require_finite(u, "primitive_j");
  const double d = rg.delta;
  switch (rg.base.kind) {
    case GraphKind::TransportZero:
      return 0.0;
    case GraphKind::Identity:
      return (1.0 + d) * u * u / 2.0;
    case GraphKind::Sign: {
      if (std::fabs(u) > 1.0 + 1e-14)
        throw OutsideDomainOfJ("primitive_j: |u| > 1 outside Sign-graph range");
      const double uc = std::clamp(u, -1.0, 1.0);
      return d * uc * uc / 2.0;
    }
    case GraphKind::Stefan: {
      const double L = rg.base.latent;
      double jb = 0.0;
      if (u < 0)
        jb = u * u / 2.0;
      else if (u > L)
        jb = (u - L) * (u - L) / 2.0;
      return jb + d * u * u / 2.0;
    }
    case GraphKind::PowerLaw: {
      const double m = rg.base.m;
      return m / (m + 1.0) * std::pow(std::fabs(u), (m + 1.0) / m) + d * u * u / 2.0;
    }
  }
  throw InvalidInput("primitive_j: unsupported graph");
}

double h_sigma(double r, double sigma) {
  require_finite(r, "h_sigma");
  if (!(sigma > 0)) throw InvalidInput("h_sigma: sigma must be positive");
  if (r >= sigma) return 1.0;
  if (r <= -sigma) return -1.0;
  return r / sigma;
}

double h_sigma_plus(double r, double sigma) {
  require_finite(r, "h_sigma_plus");
  if (!(sigma > 0)) throw InvalidInput("h_sigma_plus: sigma must be positive");
  if (r >= sigma) return 1.0;
  if (r <= 0) return 0.0;
  return r / sigma;
}

}  // namespace driftbv
