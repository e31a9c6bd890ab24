#pragma once

#include <nlohmann/json.hpp>

#include "eigenflow/dynamics.hpp"
#include "eigenflow/jet.hpp"
#include "eigenflow/lattice.hpp"
#include "eigenflow/respoly.hpp"
#include "eigenflow/spectral.hpp"
#include "eigenflow/system.hpp"

namespace eigenflow::serialize {

using json = nlohmann::ordered_json;

// System files: either
//   {"dimension": n, "kind": "...", "components": [[[coeff, [e1..en]], ...], ...]}
// or a catalog reference {"catalog": "name", "params": {...}}.
json system_to_json(const dynamics::SystemSpec& sys);
dynamics::SystemSpec system_from_json(const json& j);

// Jets as {"n":., "K":., "terms": [[[m1..mn], re, im], ...]}.
json jet_to_json(const jets::Jet& jet);
jets::Jet jet_from_json(const json& j);

json complex_to_json(Complex z);

json report_to_json(const spectral::NonresonanceReport& report);
json certificate_to_json(const respoly::GenericityCertificate& cert);
json experiment_to_json(const respoly::ExperimentResult& result);
json perturbation_to_json(const dynamics::PerturbationTestResult& result);
json lattice_to_json(const classify::EigenvalueLattice& lattice);
json fit_to_json(const classify::ExpansionFit& fit);

}  // namespace eigenflow::serialize
