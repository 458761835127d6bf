#pragma once

#include <string>

#include "driftbv/errors.hpp"

namespace driftbv {

// The nonlinearity u in beta(p) as a parametric family of maximal monotone
// graphs on R with 0 in beta(0). TransportZero encodes beta^{-1} == 0 (the
// pure-transport specialization): p is forced to 0 and the regularization
// machinery is deliberately unavailable for it.
enum class GraphKind { Identity, PowerLaw, Sign, Stefan, TransportZero };

struct MonotoneGraph {
  GraphKind kind = GraphKind::Identity;
  double m = 2.0;       // PowerLaw exponent (odd extension |r|^{m-1} r)
  double latent = 1.0;  // Stefan latent heat

  static MonotoneGraph identity() { return {GraphKind::Identity, 0, 0}; }
  static MonotoneGraph power_law(double m);
  static MonotoneGraph sign() { return {GraphKind::Sign, 0, 0}; }
  static MonotoneGraph stefan(double latent);
  static MonotoneGraph transport_zero() { return {GraphKind::TransportZero, 0, 0}; }
};

std::string graph_kind_name(GraphKind k);
GraphKind graph_kind_from_name(const std::string& name);

// Resolvent J_delta(r): the unique s with s + delta*beta(s) containing r.
// Closed form for Identity/Sign/Stefan, safeguarded Newton for PowerLaw.
double resolvent(const MonotoneGraph& g, double r, double delta);

// Yosida regularization beta_delta = (I - J_delta)/delta together with its
// primitives. Single-valued, nondecreasing, 1/delta-Lipschitz, beta_delta(0)=0.
struct RegularizedGraph {
  MonotoneGraph base;
  double delta = 1e-2;

  RegularizedGraph() = default;
  RegularizedGraph(MonotoneGraph g, double d);
};

double yosida_eval(const RegularizedGraph& rg, double r);

// One-sided slope of beta_delta, used as the Newton Jacobian entry. At kinks
// the steeper branch is returned.
double yosida_slope(const RegularizedGraph& rg, double r);

// Inverse of beta_delta. Throws OutsideDomainOfJ when u is outside the closure
// of the range (Sign-graph range is [-1,1]); on the boundary the finite limit
// is returned.
double yosida_inverse(const RegularizedGraph& rg, double u);

// B_delta(p) = int_0^p beta_delta(r) dr. Closed form except PowerLaw, which
// integrates beta_delta adaptively. Always in [0, p*beta_delta(p)], convex.
double primitive_B(const RegularizedGraph& rg, double p);

// j(u) = int_0^u beta_delta^{-1}(s) ds, the convex primitive of the inverse:
// with p = beta_delta^{-1}(u) this makes (u - w) p >= j(u) - j(w) the
// subgradient inequality used by the per-step energy ledger. j(u) = 0 for the
// TransportZero graph.
double primitive_j(const RegularizedGraph& rg, double u);

// Piecewise-linear smoothed sign functions: H_sigma odd with H_sigma(r) = r/sigma
// on |r| <= sigma, H_sigma_plus its positive-part counterpart.
double h_sigma(double r, double sigma);
double h_sigma_plus(double r, double sigma);

}  // namespace driftbv
