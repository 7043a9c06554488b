#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "cbc/synthesis.hpp"
#include "cbc/system.hpp"
#include "cbc/verification.hpp"

namespace cbc {

// Schema violation with a JSON-pointer path to the offending element.
struct SchemaError : std::runtime_error {
  SchemaError(std::string pointer_path, const std::string& message)
      : std::runtime_error(pointer_path + ": " + message), pointer(std::move(pointer_path)) {}
  std::string pointer;
};

// A fully resolved problem file: dynamics, input polytope, unsafe union,
// boxes, equilibrium, and every tunable with defaults applied.
struct Problem {
  std::string name;
  std::vector<std::string> variables;
  std::vector<std::string> inputs;
  ControlAffineSystem system;
  SemialgebraicUnion unsafe;
  Eigen::VectorXd equilibrium;
  SynthesisConfig config;
  VerifyOptions verify;
  int boundary_points = 500;
  double eta = 10.0;    // runtime filter
  double dt = 0.01;     // s
  double horizon = 10.0;  // s
};

Problem load_problem(const std::string& path);
Problem parse_problem(const nlohmann::json& doc);
nlohmann::json problem_to_json(const Problem& problem);

// Certificate files carry at least b; synthesized bundles add the
// controller, multipliers, and run history.
struct CertificateFile {
  Polynomial b;
  std::optional<PolyVector> u;
  std::vector<Polynomial> lambda1;
  std::optional<Polynomial> lambda2;
  std::vector<Polynomial> b_iterates;
  std::vector<double> gamma_history;
  std::string status;
  std::optional<Eigen::MatrixXd> K;
  double delta = 0.0;
};

CertificateFile load_certificate(const std::string& path, int nx);
nlohmann::json certificate_to_json(const CbcCertificate& cert);

nlohmann::json polynomial_to_json(const Polynomial& p);
Polynomial polynomial_from_json(const nlohmann::json& terms, int nvars,
                                const std::string& pointer);

}  // namespace cbc
