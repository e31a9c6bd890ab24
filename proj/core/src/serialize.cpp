#include "eigenflow/serialize.hpp"

#include "eigenflow/errors.hpp"

namespace eigenflow::serialize {

json complex_to_json(Complex z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

namespace {

json multi_index_to_json(const MultiIndex& m) { return json(m); }

json matrix_to_json(const Mat& a) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json witness_to_json(const spectral::ResonanceWitness& w) {
  return json{{"i", w.i},
              {"m", multi_index_to_json(w.m)},
              {"mu", complex_to_json(w.mu)},
              {"lambda_m", complex_to_json(w.lambda_m)},
              {"gap", w.gap}};
}

}  // namespace

json system_to_json(const dynamics::SystemSpec& sys) {
  json j;
  if (sys.name != "custom") {
    j["catalog"] = sys.name;
    j["params"] = json(sys.params);
  }
  j["dimension"] = sys.dimension;
  j["kind"] = dynamics::to_string(sys.kind);
  if (const auto* poly = dynamic_cast<const dynamics::PolynomialField*>(sys.field.get())) {
    json comps = json::array();
    for (const auto& comp : poly->components()) {
      json terms = json::array();
      for (const auto& term : comp)
        terms.push_back(json::array({term.coeff, multi_index_to_json(term.exponents)}));
      comps.push_back(std::move(terms));
    }
    j["components"] = std::move(comps);
  }
  if (sys.domain) {
    json lo = json::array(), hi = json::array();
    for (Eigen::Index i = 0; i < sys.domain->lo.size(); ++i) {
      lo.push_back(sys.domain->lo[i]);
      hi.push_back(sys.domain->hi[i]);
    }
    j["domain"] = json{{"lo", lo}, {"hi", hi}};
  }
  return j;
}

dynamics::SystemSpec system_from_json(const json& j) {
  if (j.contains("catalog")) {
    std::map<std::string, double> params;
    if (j.contains("params"))
      for (auto it = j["params"].begin(); it != j["params"].end(); ++it)
        params[it.key()] = it.value().get<double>();
    return dynamics::catalog_system(j["catalog"].get<std::string>(), params);
  }
  if (!j.contains("dimension") || !j.contains("kind") || !j.contains("components"))
    throw UsageError("system file needs dimension, kind, components (or a catalog reference)");
  const int n = j["dimension"].get<int>();
  dynamics::PolynomialComponents comps;
  for (const auto& comp : j["components"]) {
    std::vector<dynamics::PolynomialTerm> terms;
    for (const auto& term : comp) {
      if (!term.is_array() || term.size() != 2)
        throw UsageError("system term must be [coeff, [e1..en]]");
      dynamics::PolynomialTerm t;
      t.coeff = term[0].get<double>();
      t.exponents = term[1].get<MultiIndex>();
      if (static_cast<int>(t.exponents.size()) != n)
        throw UsageError("system term exponent length must equal dimension");
      terms.push_back(std::move(t));
    }
    comps.push_back(std::move(terms));
  }
  if (static_cast<int>(comps.size()) != n)
    throw UsageError("system must declare one component list per dimension");

  std::optional<dynamics::Box> domain;
  if (j.contains("domain")) {
    dynamics::Box box;
    auto lo = j["domain"]["lo"].get<std::vector<double>>();
    auto hi = j["domain"]["hi"].get<std::vector<double>>();
    box.lo = Eigen::Map<const Vec>(lo.data(), static_cast<Eigen::Index>(lo.size()));
    box.hi = Eigen::Map<const Vec>(hi.data(), static_cast<Eigen::Index>(hi.size()));
    domain = std::move(box);
  }
  auto sys = dynamics::make_polynomial_system(
      dynamics::attractor_kind_from_string(j["kind"].get<std::string>()), std::move(comps),
      std::move(domain));
  if (j.contains("initial_guess")) {
    auto g = j["initial_guess"].get<std::vector<double>>();
    sys.initial_guess = Eigen::Map<const Vec>(g.data(), static_cast<Eigen::Index>(g.size()));
  }
  if (j.contains("period_guess")) sys.period_guess = j["period_guess"].get<double>();
  return sys;
}

json jet_to_json(const jets::Jet& jet) {
  json terms = json::array();
  const auto& space = *jet.space();
  for (int r = 0; r < space.size(); ++r) {
    const Complex c = jet.coefficients()[r];
    if (c == Complex(0.0)) continue;
    terms.push_back(json::array({multi_index_to_json(space.index_at(r)), c.real(), c.imag()}));
  }
  return json{{"n", space.num_vars()}, {"K", space.degree_cap()}, {"terms", std::move(terms)}};
}

jets::Jet jet_from_json(const json& j) {
  auto space = jets::JetSpace::get(j["n"].get<int>(), j["K"].get<int>());
  jets::Jet jet(space);
  for (const auto& term : j["terms"]) {
    MultiIndex m = term[0].get<MultiIndex>();
    jet.set_coefficient(m, Complex(term[1].get<double>(), term[2].get<double>()));
  }
  return jet;
}

json report_to_json(const spectral::NonresonanceReport& report) {
  json witnesses = json::array(), near = json::array();
  for (const auto& w : report.witnesses) witnesses.push_back(witness_to_json(w));
  for (const auto& w : report.near_misses) near.push_back(witness_to_json(w));
  json j{{"k", report.k},
         {"infinite", report.infinite},
         {"nonresonant", report.nonresonant},
         {"witnesses", std::move(witnesses)},
         {"near_misses", std::move(near)},
         {"reduction_bound", report.reduction_bound},
         {"tolerance", report.tolerance}};
  if (std::isfinite(report.spread)) j["spread"] = report.spread;
  return j;
}

json certificate_to_json(const respoly::GenericityCertificate& cert) {
  json gs = json::array();
  for (const auto& [m, g] : cert.G_values)
    gs.push_back(json{{"m", multi_index_to_json(m)},
                      {"value", complex_to_json(g.value)},
                      {"imag_error", g.imag_error},
                      {"min_factor", g.min_factor}});
  json j{{"verdict", respoly::to_string(cert.verdict)},
         {"exact", cert.exact},
         {"F_value", cert.F_value},
         {"min_eigen_gap", cert.min_eigen_gap},
         {"K", cert.K},
         {"spread", cert.spread},
         {"tolerance", cert.tolerance},
         {"G_values", std::move(gs)}};
  if (cert.exact) j["F_exact"] = cert.F_exact.str();
  if (!cert.witness.empty()) j["witness"] = multi_index_to_json(cert.witness);
  return j;
}

json experiment_to_json(const respoly::ExperimentResult& result) {
  json failures = json::array();
  for (const auto& f : result.failures) {
    json entry{{"sample_index", f.sample_index},
               {"matrix", matrix_to_json(f.matrix)},
               {"verdict", respoly::to_string(f.verdict)}};
    if (!f.witness.empty()) entry["witness"] = multi_index_to_json(f.witness);
    failures.push_back(std::move(entry));
  }
  return json{{"n", result.n},
              {"samples", result.samples},
              {"seed", result.seed},
              {"fraction", result.fraction},
              {"failures", std::move(failures)}};
}

json perturbation_to_json(const dynamics::PerturbationTestResult& result) {
  return json{{"magnitude", result.magnitude}, {"trials", result.trials},
              {"survived", result.survived},  {"failed", result.failed},
              {"solver_errors", result.solver_errors}, {"fraction", result.fraction}};
}

json lattice_to_json(const classify::EigenvalueLattice& lattice) {
  json base = json::array();
  for (Eigen::Index i = 0; i < lattice.base_exponents.size(); ++i)
    base.push_back(complex_to_json(lattice.base_exponents[i]));
  json entries = json::array();
  for (const auto& entry : lattice.entries) {
    json witnesses = json::array();
    for (const auto& w : entry.witnesses) {
      json wj{{"i", multi_index_to_json(w.i)}, {"ell", multi_index_to_json(w.ell)}};
      if (lattice.tau) wj["j"] = w.j;
      witnesses.push_back(std::move(wj));
    }
    entries.push_back(json{{"value", complex_to_json(entry.value)},
                           {"witnesses", std::move(witnesses)}});
  }
  json j{{"base_exponents", std::move(base)},
         {"degree", lattice.degree},
         {"entries", std::move(entries)}};
  if (lattice.tau) {
    j["tau"] = *lattice.tau;
    j["j_max"] = lattice.j_max;
  }
  return j;
}

json fit_to_json(const classify::ExpansionFit& fit) {
  json terms = json::array();
  for (const auto& term : fit.terms)
    terms.push_back(json{{"i", multi_index_to_json(term.index.i)},
                         {"ell", multi_index_to_json(term.index.ell)},
                         {"j", term.index.j},
                         {"re", term.coefficient.real()},
                         {"im", term.coefficient.imag()}});
  return json{{"k", fit.degree},
              {"terms", std::move(terms)},
              {"residual", fit.residual},
              {"samples", fit.sample_count},
              {"basis_size", fit.basis_size}};
}

}  // namespace eigenflow::serialize
