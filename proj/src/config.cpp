#include "driftbv/config.hpp"

#include <cmath>
#include <fstream>

namespace driftbv {

using nlohmann::json;

namespace {

std::array<double, 2> read_vec(const json& j, int dim, const char* what) {
  if (!j.is_array() || (int)j.size() != dim)
    throw ConfigError(std::string(what) + ": expected array of length " + std::to_string(dim));
  std::array<double, 2> out{0.0, 0.0};
  for (int a = 0; a < dim; ++a) out[a] = j[a].get<double>();
  return out;
}

json vec_to_json(const std::array<double, 2>& v, int dim) {
  json out = json::array();
  for (int a = 0; a < dim; ++a) out.push_back(v[a]);
  return out;
}

std::vector<PolyTerm> read_terms(const json& j) {
  std::vector<PolyTerm> out;
  for (const auto& t : j) {
    PolyTerm tm;
    tm.coef = t.value("coef", 0.0);
    tm.px = t.value("px", 0);
    tm.py = t.value("py", 0);
    tm.pt = t.value("pt", 0);
    out.push_back(tm);
  }
  return out;
}

json terms_to_json(const std::vector<PolyTerm>& terms) {
  json out = json::array();
  for (const auto& t : terms)
    out.push_back({{"coef", t.coef}, {"px", t.px}, {"py", t.py}, {"pt", t.pt}});
  return out;
}

}  // namespace

DriftField parse_field(const json& spec, int dim) {
  const std::string kind = spec.value("kind", "zero");
  const json params = spec.value("params", json::object());
  if (kind == "zero") return DriftField::zero(dim);
  if (kind == "constant")
    return DriftField::constant(dim, read_vec(params.at("value"), dim, "field.value"));
  if (kind == "rotation") {
    if (dim != 2) throw ConfigError("rotation field needs a 2D grid");
    return DriftField::rotation(read_vec(params.at("center"), 2, "field.center"),
                                params.value("amplitude", 1.0), params.value("r0", 0.0),
                                params.value("r1", 0.0));
  }
  if (kind == "radial")
    return DriftField::radial(dim, read_vec(params.at("center"), dim, "field.center"),
                              params.value("amplitude", 1.0));
  if (kind == "shear") {
    if (dim != 2) throw ConfigError("shear field needs a 2D grid");
    return DriftField::shear(read_vec(params.at("center"), 2, "field.center"),
                             params.value("amplitude", 1.0));
  }
  if (kind == "polynomial") {
    std::array<std::vector<PolyTerm>, 2> comps;
    const auto& arr = params.at("components");
    if (!arr.is_array() || (int)arr.size() != dim)
      throw ConfigError("polynomial field needs one term list per component");
    for (int c = 0; c < dim; ++c) comps[c] = read_terms(arr[c]);
    return DriftField::polynomial(dim, comps);
  }
  throw ConfigError("unknown field kind '" + kind + "'");
}

ScalarField parse_scalar(const json& spec, int dim) {
  const std::string kind = spec.value("kind", "zero");
  const json params = spec.value("params", json::object());
  ScalarField f;
  if (kind == "zero") {
    f = ScalarField::zero(dim);
  } else if (kind == "constant") {
    f = ScalarField::constant(dim, params.value("value", 0.0));
  } else if (kind == "bump") {
    f = ScalarField::bump(dim, read_vec(params.at("center"), dim, "scalar.center"),
                          params.value("radius", 0.25), params.value("height", 1.0));
  } else if (kind == "indicator") {
    f = ScalarField::indicator(dim, read_vec(params.at("lo"), dim, "scalar.lo"),
                               read_vec(params.at("hi"), dim, "scalar.hi"),
                               params.value("height", 1.0));
  } else if (kind == "sine") {
    f.kind = ScalarKind::Sine;
    f.dim = dim;
    f.height = params.value("height", 1.0);
    if (params.contains("freq")) f.freq = read_vec(params.at("freq"), dim, "scalar.freq");
    if (params.contains("offset")) f.offset = read_vec(params.at("offset"), dim, "scalar.offset");
  } else if (kind == "polynomial") {
    f.kind = ScalarKind::Polynomial;
    f.dim = dim;
    f.poly = read_terms(params.value("terms", json::array()));
  } else {
    throw ConfigError("unknown scalar kind '" + kind + "'");
  }
  if (params.contains("time_terms")) f.time_poly = read_terms(params.at("time_terms"));
  return f;
}

json field_to_json(const DriftField& f) {
  json params = json::object();
  std::string kind;
  switch (f.kind) {
    case FieldKind::Zero: kind = "zero"; break;
    case FieldKind::Constant:
      kind = "constant";
      params["value"] = vec_to_json(f.value, f.dim);
      break;
    case FieldKind::Rotation:
      kind = "rotation";
      params["center"] = vec_to_json(f.center, 2);
      params["amplitude"] = f.amplitude;
      params["r0"] = f.r0;
      params["r1"] = f.r1;
      break;
    case FieldKind::Radial:
      kind = "radial";
      params["center"] = vec_to_json(f.center, f.dim);
      params["amplitude"] = f.amplitude;
      break;
    case FieldKind::Shear:
      kind = "shear";
      params["center"] = vec_to_json(f.center, 2);
      params["amplitude"] = f.amplitude;
      break;
    case FieldKind::Polynomial: {
      kind = "polynomial";
      json comps = json::array();
      for (int c = 0; c < f.dim; ++c) comps.push_back(terms_to_json(f.poly[c]));
      params["components"] = comps;
      break;
    }
    case FieldKind::Extended:
      kind = "extended";  // reconstructed through the extension block, not parsed back
      break;
  }
  return {{"kind", kind}, {"params", params}};
}

json scalar_to_json(const ScalarField& f) {
  json params = json::object();
  std::string kind;
  switch (f.kind) {
    case ScalarKind::Zero: kind = "zero"; break;
    case ScalarKind::Constant:
      kind = "constant";
      params["value"] = f.value;
      break;
    case ScalarKind::Bump:
      kind = "bump";
      params["center"] = vec_to_json(f.center, f.dim);
      params["radius"] = f.radius;
      params["height"] = f.height;
      break;
    case ScalarKind::Indicator:
      kind = "indicator";
      params["lo"] = vec_to_json(f.box_lo, f.dim);
      params["hi"] = vec_to_json(f.box_hi, f.dim);
      params["height"] = f.height;
      break;
    case ScalarKind::Sine:
      kind = "sine";
      params["height"] = f.height;
      params["freq"] = vec_to_json(f.freq, f.dim);
      params["offset"] = vec_to_json(f.offset, f.dim);
      break;
    case ScalarKind::Polynomial:
      kind = "polynomial";
      params["terms"] = terms_to_json(f.poly);
      break;
  }
  if (!f.time_poly.empty()) params["time_terms"] = terms_to_json(f.time_poly);
  return {{"kind", kind}, {"params", params}};
}

RunConfig RunConfig::from_json(const json& doc) {
  RunConfig rc;
  try {
    const json& jgrid = doc.at("grid");
    const auto& extents = jgrid.at("extents");
    const int dim = (int)extents.size();
    if (dim != 1 && dim != 2) throw ConfigError("grid.extents must list 1 or 2 axes");
    std::array<double, 2> lo{0, 0}, hi{1, 1};
    std::array<int, 2> cells{4, 1};
    for (int a = 0; a < dim; ++a) {
      lo[a] = extents[a].at(0).get<double>();
      hi[a] = extents[a].at(1).get<double>();
      cells[a] = jgrid.at("cells").at(a).get<int>();
    }
    const json jbc = doc.value("bc", json({{"dirichlet", {"all"}}, {"neumann", json::array()}}));
    std::vector<std::string> dirichlet = jbc.value("dirichlet", std::vector<std::string>{});
    std::vector<std::string> neumann = jbc.value("neumann", std::vector<std::string>{});
    Grid grid = build_grid(dim, lo, hi, cells, dirichlet, neumann);

    EvolutionConfig& ev = rc.evolution;
    ev.grid = grid;

    const json jgraph = doc.value("graph", json({{"kind", "identity"}}));
    const std::string gkind = jgraph.value("kind", "identity");
    if (gkind == "powerlaw")
      ev.graph = MonotoneGraph::power_law(jgraph.value("m", 2.0));
    else if (gkind == "stefan")
      ev.graph = MonotoneGraph::stefan(jgraph.value("latent", 1.0));
    else if (gkind == "identity")
      ev.graph = MonotoneGraph::identity();
    else if (gkind == "sign")
      ev.graph = MonotoneGraph::sign();
    else if (gkind == "transport_zero")
      ev.graph = MonotoneGraph::transport_zero();
    else
      throw ConfigError("unknown graph kind '" + gkind + "'");
    ev.delta = jgraph.value("delta", 0.0);

    ev.drift = parse_field(doc.value("field", json({{"kind", "zero"}})), dim);
    ev.source = parse_scalar(doc.value("source", json({{"kind", "zero"}})), dim);
    ev.initial = parse_scalar(doc.value("initial", json({{"kind", "zero"}})), dim);

    if (doc.contains("extension")) {
      const json& jext = doc.at("extension");
      const auto& inner_extents = jext.at("inner_extents");
      std::array<double, 2> ilo{0, 0}, ihi{1, 1};
      std::array<int, 2> icells{4, 1};
      for (int a = 0; a < dim; ++a) {
        ilo[a] = inner_extents[a].at(0).get<double>();
        ihi[a] = inner_extents[a].at(1).get<double>();
        icells[a] = std::max(4, (int)std::lround((ihi[a] - ilo[a]) / grid.h[a]));
      }
      Grid inner = build_grid(dim, ilo, ihi, icells, {"all"}, {});
      ev.drift = extend_field(ev.drift, inner, grid, jext.value("margin", 0.0));
    }

    const json jtime = doc.at("time");
    ev.T = jtime.at("T").get<double>();
    ev.eps_requested = jtime.at("eps").get<double>();

    const json jsolver = doc.value("solver", json::object());
    ev.solver.newton_tol = jsolver.value("newton_tol", ev.solver.newton_tol);
    ev.solver.max_newton = jsolver.value("max_newton", ev.solver.max_newton);
    ev.solver.linear_tol = jsolver.value("linear_tol", ev.solver.linear_tol);
    ev.solver.damping_min = jsolver.value("damping_min", ev.solver.damping_min);

    const json jsnap = doc.value("snapshots", json::object());
    ev.snapshot_stride = jsnap.value("stride", 0);  // 0 = auto

    const json jaudit = doc.value("audit", json::object());
    ev.audit_per_step = jaudit.value("per_step", true);
    ev.bv_guard = jaudit.value("bv", false);
    rc.audit_slack = jaudit.value("slack", 0.05);
    rc.stationary_battery = jaudit.value("stationary_battery", 12);

    if (doc.contains("cutoff")) {
      const json& jcut = doc.at("cutoff");
      double h = jcut.value("h", 0.0);
      if (h <= 0) {
        // default shell width: several cells, so the discrete Laplacian of
        // omega resolves the profile
        h = 8.0 * std::max(grid.h[0], dim == 2 ? grid.h[1] : 0.0);
      }
      rc.cutoff_profile = build_eta(h, jcut.value("c1", 0.5),
                                    jcut.value("c2", 0.7905694150420949));
      ev.bv_guard = true;
    }

    rc.output_dir = doc.value("output", json::object()).value("dir", "out");
    rc.seed = doc.value("seed", (uint64_t)1234);

    ev.finalize();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  // normalized echo
  json echo;
  {
    const EvolutionConfig& ev = rc.evolution;
    const Grid& g = ev.grid;
    json extents = json::array(), cells = json::array();
    for (int a = 0; a < g.dim; ++a) {
      extents.push_back({g.lo[a], g.hi[a]});
      cells.push_back(g.n[a]);
    }
    json dirichlet = json::array(), neumann = json::array();
    const char* names1[2] = {"left", "right"};
    const char* names2[2] = {"bottom", "top"};
    for (int a = 0; a < g.dim; ++a)
      for (int s = 0; s < 2; ++s) {
        const char* nm = a == 0 ? names1[s] : names2[s];
        if (g.bc.label[a][s] == BcKind::Dirichlet)
          dirichlet.push_back(nm);
        else
          neumann.push_back(nm);
      }
    echo["grid"] = {{"extents", extents}, {"cells", cells}};
    echo["bc"] = {{"dirichlet", dirichlet}, {"neumann", neumann}};
    json jg = {{"kind", graph_kind_name(ev.graph.kind)}, {"delta", ev.delta}};
    if (ev.graph.kind == GraphKind::PowerLaw) jg["m"] = ev.graph.m;
    if (ev.graph.kind == GraphKind::Stefan) jg["latent"] = ev.graph.latent;
    echo["graph"] = jg;
    if (ev.drift.kind == FieldKind::Extended) {
      echo["field"] = field_to_json(*ev.drift.inner);
      json inner_extents = json::array();
      for (int a = 0; a < g.dim; ++a)
        inner_extents.push_back({ev.drift.inner_lo[a], ev.drift.inner_hi[a]});
      echo["extension"] = {{"inner_extents", inner_extents},
                           {"margin", ev.drift.phi_d1}};
    } else {
      echo["field"] = field_to_json(ev.drift);
    }
    echo["source"] = scalar_to_json(ev.source);
    echo["initial"] = scalar_to_json(ev.initial);
    echo["time"] = {{"T", ev.T}, {"eps", ev.eps_requested}};
    echo["solver"] = {{"newton_tol", ev.solver.newton_tol},
                      {"max_newton", ev.solver.max_newton},
                      {"linear_tol", ev.solver.linear_tol},
                      {"damping_min", ev.solver.damping_min}};
    echo["snapshots"] = {{"stride", ev.snapshot_stride}};
    echo["audit"] = {{"per_step", ev.audit_per_step},
                     {"bv", ev.bv_guard},
                     {"slack", rc.audit_slack},
                     {"stationary_battery", rc.stationary_battery}};
    if (rc.cutoff_profile)
      echo["cutoff"] = {{"h", rc.cutoff_profile->h},
                        {"c1", rc.cutoff_profile->c1},
                        {"c2", rc.cutoff_profile->c2}};
    echo["output"] = {{"dir", rc.output_dir}};
    echo["seed"] = rc.seed;
  }
  rc.echo = echo;
  return rc;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in '" + path + "': " + e.what());
  }
  return from_json(doc);
}

std::vector<std::string> preset_names() {
  return {"heat_dirichlet", "pme_neumann",       "heleshaw_mixed",
          "transport_rotation", "transport_outflow", "bv_shrinkfield"};
}

bool is_preset(const std::string& name) {
  for (const auto& n : preset_names())
    if (n == name) return true;
  return false;
}

json preset_config(const std::string& name) {
  const double pi = 3.14159265358979323846;
  if (name == "heat_dirichlet") {
    return json{
        {"grid", {{"extents", {{0.0, 1.0}}}, {"cells", {100}}}},
        {"bc", {{"dirichlet", {"all"}}, {"neumann", json::array()}}},
        {"graph", {{"kind", "identity"}}},
        {"field", {{"kind", "zero"}}},
        {"source", {{"kind", "zero"}}},
        {"initial",
         {{"kind", "bump"},
          {"params", {{"center", {0.5}}, {"radius", 0.35}, {"height", 1.0}}}}},
        {"time", {{"T", 0.2}, {"eps", 0.01}}},
        {"output", {{"dir", "heat_dirichlet"}}}};
  }
  if (name == "pme_neumann") {
    return json{
        {"grid", {{"extents", {{0.0, 1.0}, {0.0, 1.0}}}, {"cells", {48, 48}}}},
        {"bc", {{"dirichlet", json::array()}, {"neumann", {"all"}}}},
        {"graph", {{"kind", "powerlaw"}, {"m", 2.0}}},
        {"field",
         {{"kind", "rotation"},
          {"params",
           {{"center", {0.5, 0.5}}, {"amplitude", 1.0}, {"r0", 0.30}, {"r1", 0.45}}}}},
        {"source", {{"kind", "zero"}}},
        {"initial",
         {{"kind", "bump"},
          {"params", {{"center", {0.62, 0.5}}, {"radius", 0.12}, {"height", 1.0}}}}},
        {"time", {{"T", 0.5}, {"eps", 0.015625}}},
        {"output", {{"dir", "pme_neumann"}}}};
  }
  if (name == "heleshaw_mixed") {
    return json{
        {"grid", {{"extents", {{0.0, 1.0}}}, {"cells", {200}}}},
        {"bc", {{"dirichlet", {"right"}}, {"neumann", {"left"}}}},
        {"graph", {{"kind", "sign"}}},
        {"field",
         {{"kind", "polynomial"},
          {"params", {{"components", {{{{"coef", 1.0}, {"px", 2}}}}}}}}},
        {"source",
         {{"kind", "bump"},
          {"params", {{"center", {0.3}}, {"radius", 0.1}, {"height", 0.4}}}}},
        {"initial",
         {{"kind", "bump"},
          {"params", {{"center", {0.4}}, {"radius", 0.25}, {"height", 0.9}}}}},
        {"time", {{"T", 0.5}, {"eps", 0.015625}}},
        {"output", {{"dir", "heleshaw_mixed"}}}};
  }
  if (name == "transport_rotation") {
    return json{
        {"grid", {{"extents", {{0.0, 1.0}, {0.0, 1.0}}}, {"cells", {128, 128}}}},
        {"bc", {{"dirichlet", {"all"}}, {"neumann", json::array()}}},
        {"graph", {{"kind", "transport_zero"}}},
        {"field",
         {{"kind", "rotation"},
          {"params",
           {{"center", {0.5, 0.5}}, {"amplitude", 1.0}, {"r0", 0.32}, {"r1", 0.43}}}}},
        {"source", {{"kind", "zero"}}},
        {"initial",
         {{"kind", "bump"},
          {"params", {{"center", {0.6, 0.5}}, {"radius", 0.22}, {"height", 1.0}}}}},
        {"time", {{"T", pi / 2}, {"eps", pi / 512}}},
        {"cutoff", {{"h", 0.0625}}},
        {"output", {{"dir", "transport_rotation"}}}};
  }
  if (name == "transport_outflow") {
    return json{
        {"grid", {{"extents", {{-0.5, 1.5}}}, {"cells", {400}}}},
        {"bc", {{"dirichlet", {"all"}}, {"neumann", json::array()}}},
        {"graph", {{"kind", "transport_zero"}}},
        {"field",
         {{"kind", "radial"}, {"params", {{"center", {0.5}}, {"amplitude", 1.0}}}}},
        {"extension", {{"inner_extents", {{0.0, 1.0}}}, {"margin", 0.4}}},
        {"source", {{"kind", "zero"}}},
        {"initial",
         {{"kind", "bump"},
          {"params", {{"center", {0.5}}, {"radius", 0.2}, {"height", 1.0}}}}},
        {"time", {{"T", 0.4}, {"eps", 0.0078125}}},
        {"cutoff", {{"h", 0.04}}},
        {"output", {{"dir", "transport_outflow"}}}};
  }
  if (name == "bv_shrinkfield") {
    return json{
        {"grid", {{"extents", {{0.0, 1.0}}}, {"cells", {256}}}},
        {"bc", {{"dirichlet", {"all"}}, {"neumann", json::array()}}},
        {"graph", {{"kind", "identity"}}},
        {"field",
         {{"kind", "radial"}, {"params", {{"center", {0.5}}, {"amplitude", 1.0}}}}},
        {"source", {{"kind", "zero"}}},
        {"initial",
         {{"kind", "indicator"},
          {"params", {{"lo", {0.3}}, {"hi", {0.7}}, {"height", 1.0}}}}},
        {"time", {{"T", 0.5}, {"eps", 0.015625}}},
        {"cutoff", {{"h", 0.03125}}},
        {"output", {{"dir", "bv_shrinkfield"}}}};
  }
  throw ConfigError("unknown preset '" + name + "'");
}

}  // namespace driftbv
