#include "cbc/problem_io.hpp"

#include <fstream>

namespace cbc {

using nlohmann::json;

namespace {

const json& require(const json& doc, const std::string& key, const std::string& pointer) {
  if (!doc.contains(key)) throw SchemaError(pointer + "/" + key, "missing required field");
  return doc.at(key);
}

double as_number(const json& v, const std::string& pointer) {
  if (!v.is_number()) throw SchemaError(pointer, "expected a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& pointer) {
  if (!v.is_number_integer()) throw SchemaError(pointer, "expected an integer");
  return v.get<int>();
}

Eigen::MatrixXd as_matrix(const json& v, const std::string& pointer) {
  if (!v.is_array() || v.empty()) throw SchemaError(pointer, "expected a nonempty array of rows");
  const std::size_t cols = v.at(0).is_array() ? v.at(0).size() : 0;
  if (cols == 0) throw SchemaError(pointer + "/0", "expected a nonempty row");
  Eigen::MatrixXd M(v.size(), cols);
  for (std::size_t r = 0; r < v.size(); ++r) {
    const json& row = v.at(r);
    const std::string rp = pointer + "/" + std::to_string(r);
    if (!row.is_array() || row.size() != cols) {
      throw SchemaError(rp, "expected a row of " + std::to_string(cols) + " numbers");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      M(r, c) = as_number(row.at(c), rp + "/" + std::to_string(c));
    }
  }
  return M;
}

Eigen::VectorXd as_vector(const json& v, const std::string& pointer) {
  if (!v.is_array()) throw SchemaError(pointer, "expected an array of numbers");
  Eigen::VectorXd out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = as_number(v.at(i), pointer + "/" + std::to_string(i));
  }
  return out;
}

Box as_box(const json& v, int dim, const std::string& pointer) {
  const Eigen::MatrixXd bounds = as_matrix(v, pointer);
  if (bounds.rows() != dim || bounds.cols() != 2) {
    throw SchemaError(pointer, "expected " + std::to_string(dim) + " [lo, hi] rows");
  }
  Box box;
  box.bounds = bounds;
  box.validate();
  return box;
}

}  // namespace

Polynomial polynomial_from_json(const json& terms, int nvars, const std::string& pointer) {
  if (!terms.is_array()) throw SchemaError(pointer, "expected an array of terms");
  Polynomial p(nvars);
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const json& term = terms.at(t);
    const std::string tp = pointer + "/" + std::to_string(t);
    const double coeff = as_number(require(term, "coeff", tp), tp + "/coeff");
    const json& exps = require(term, "exponents", tp);
    if (!exps.is_array() || static_cast<int>(exps.size()) != nvars) {
      throw SchemaError(tp + "/exponents",
                        "expected " + std::to_string(nvars) + " exponents");
    }
    std::vector<int> e(nvars);
    for (int i = 0; i < nvars; ++i) {
      e[i] = as_int(exps.at(i), tp + "/exponents/" + std::to_string(i));
      if (e[i] < 0) {
        throw SchemaError(tp + "/exponents/" + std::to_string(i), "exponent must be >= 0");
      }
    }
    p.add_term(Monomial(std::move(e)), coeff);
  }
  return p;
}

json polynomial_to_json(const Polynomial& p) {
  json terms = json::array();
  for (const auto& [m, c] : p.terms()) {
    terms.push_back({{"coeff", c}, {"exponents", m.exponents}});
  }
  return terms;
}

Problem parse_problem(const json& doc) {
  Problem problem;
  problem.name = doc.value("name", "problem");

  const json& convention = require(doc, "convention", "");
  if (!convention.is_string() || convention.get<std::string>() != "s<0") {
    throw SchemaError("/convention", "unsafe components use the fixed convention \"s<0\"");
  }

  const json& vars = require(doc, "variables", "");
  if (!vars.is_array() || vars.empty()) throw SchemaError("/variables", "expected variable names");
  for (const auto& v : vars) problem.variables.push_back(v.get<std::string>());
  const int nx = static_cast<int>(problem.variables.size());

  const json& inputs = require(doc, "inputs", "");
  if (!inputs.is_array() || inputs.empty()) throw SchemaError("/inputs", "expected input names");
  for (const auto& v : inputs) problem.inputs.push_back(v.get<std::string>());
  const int nu = static_cast<int>(problem.inputs.size());

  problem.system.nx = nx;
  problem.system.nu = nu;

  const json& f = require(doc, "f", "");
  if (!f.is_array() || static_cast<int>(f.size()) != nx) {
    throw SchemaError("/f", "expected " + std::to_string(nx) + " polynomials");
  }
  std::vector<Polynomial> f_entries;
  for (int i = 0; i < nx; ++i) {
    f_entries.push_back(polynomial_from_json(f.at(i), nx, "/f/" + std::to_string(i)));
  }
  problem.system.f = PolyVector(std::move(f_entries));

  const json& g = require(doc, "g", "");
  if (!g.is_array() || static_cast<int>(g.size()) != nx) {
    throw SchemaError("/g", "expected " + std::to_string(nx) + " rows");
  }
  problem.system.g = PolyMatrix(nx, nu, nx);
  for (int i = 0; i < nx; ++i) {
    const json& row = g.at(i);
    const std::string rp = "/g/" + std::to_string(i);
    if (!row.is_array() || static_cast<int>(row.size()) != nu) {
      throw SchemaError(rp, "expected " + std::to_string(nu) + " entries");
    }
    for (int j = 0; j < nu; ++j) {
      problem.system.g(i, j) =
          polynomial_from_json(row.at(j), nx, rp + "/" + std::to_string(j));
    }
  }

  if (doc.contains("input_polytope")) {
    const json& poly = doc.at("input_polytope");
    problem.system.Au = as_matrix(require(poly, "A_u", "/input_polytope"), "/input_polytope/A_u");
    problem.system.cu = as_vector(require(poly, "c_u", "/input_polytope"), "/input_polytope/c_u");
    if (problem.system.Au.cols() != nu) {
      throw SchemaError("/input_polytope/A_u", "column count != number of inputs");
    }
    if (problem.system.cu.size() != problem.system.Au.rows()) {
      throw SchemaError("/input_polytope/c_u", "length != number of rows of A_u");
    }
  } else if (doc.contains("input_box")) {
    const Eigen::MatrixXd bounds = as_matrix(doc.at("input_box"), "/input_box");
    if (bounds.rows() != nu || bounds.cols() != 2) {
      throw SchemaError("/input_box", "expected " + std::to_string(nu) + " [lo, hi] rows");
    }
    problem.system.Au = Eigen::MatrixXd::Zero(2 * nu, nu);
    problem.system.cu = Eigen::VectorXd::Zero(2 * nu);
    for (int j = 0; j < nu; ++j) {
      problem.system.Au(2 * j, j) = 1.0;   // u_j - lo >= 0
      problem.system.cu[2 * j] = -bounds(j, 0);
      problem.system.Au(2 * j + 1, j) = -1.0;  // hi - u_j >= 0
      problem.system.cu[2 * j + 1] = bounds(j, 1);
    }
  } else {
    throw SchemaError("/input_polytope", "missing (or provide input_box)");
  }

  const json& unsafe = require(doc, "unsafe", "");
  if (!unsafe.is_array() || unsafe.empty()) {
    throw SchemaError("/unsafe", "expected at least one component");
  }
  for (std::size_t i = 0; i < unsafe.size(); ++i) {
    const json& component = unsafe.at(i);
    const std::string cp = "/unsafe/" + std::to_string(i);
    if (!component.is_array() || component.empty()) {
      throw SchemaError(cp, "expected a nonempty list of polynomials");
    }
    std::vector<Polynomial> polys;
    for (std::size_t j = 0; j < component.size(); ++j) {
      polys.push_back(
          polynomial_from_json(component.at(j), nx, cp + "/" + std::to_string(j)));
    }
    problem.unsafe.components.push_back(std::move(polys));
  }

  problem.config.domain = as_box(require(doc, "domain", ""), nx, "/domain");
  if (doc.contains("sampling_box")) {
    problem.config.sampling_box = as_box(doc.at("sampling_box"), nx, "/sampling_box");
  }

  problem.equilibrium = Eigen::VectorXd::Zero(nx);
  if (doc.contains("equilibrium")) {
    problem.equilibrium = as_vector(doc.at("equilibrium"), "/equilibrium");
    if (problem.equilibrium.size() != nx) {
      throw SchemaError("/equilibrium", "length != number of variables");
    }
  }

  if (doc.contains("config")) {
    const json& cfg = doc.at("config");
    SynthesisConfig& c = problem.config;
    c.deg_b = cfg.value("deg_b", c.deg_b);
    c.deg_u = cfg.value("deg_u", c.deg_u);
    c.degrees.sigma = cfg.value("deg_sigma", c.degrees.sigma);
    c.degrees.sigma2 = cfg.value("deg_sigma2", c.degrees.sigma2);
    c.degrees.lambda1 = cfg.value("deg_lambda1", c.degrees.lambda1);
    c.degrees.lambda2 = cfg.value("deg_lambda2", c.degrees.lambda2);
    c.degrees.lambda3 = cfg.value("deg_lambda3", c.degrees.lambda3);
    c.degrees.mu = cfg.value("deg_mu", c.degrees.mu);
    c.epsilon = cfg.value("epsilon", c.epsilon);
    c.gamma_threshold = cfg.value("gamma_threshold", c.gamma_threshold);
    c.max_iterations = cfg.value("max_iterations", c.max_iterations);
    if (cfg.contains("delta")) {
      const json& d = cfg.at("delta");
      if (d.is_string()) {
        if (d.get<std::string>() != "auto") {
          throw SchemaError("/config/delta", "expected a number or \"auto\"");
        }
        c.delta = 0.0;
      } else {
        c.delta = as_number(d, "/config/delta");
      }
    }
    c.delta_min = cfg.value("delta_min", c.delta_min);
    if (cfg.contains("lqr_q")) c.lqr_q = as_matrix(cfg.at("lqr_q"), "/config/lqr_q");
    if (cfg.contains("lqr_r")) c.lqr_r = as_matrix(cfg.at("lqr_r"), "/config/lqr_r");
    c.normalize = cfg.value("normalize", c.normalize);
    c.seed = cfg.value("seed", c.seed);
    c.unsafe_samples = cfg.value("unsafe_samples", c.unsafe_samples);
    problem.eta = cfg.value("eta", problem.eta);
    problem.dt = cfg.value("dt", problem.dt);
    problem.horizon = cfg.value("horizon", problem.horizon);
    problem.boundary_points = cfg.value("boundary_points", problem.boundary_points);
    problem.verify.grid_resolution = cfg.value("grid_resolution", problem.verify.grid_resolution);
    problem.verify.samples_per_component = c.unsafe_samples;
    problem.verify.seed = c.seed;
    problem.verify.lp_tol = cfg.value("lp_tol", problem.verify.lp_tol);
    problem.verify.boundary_tol = cfg.value("boundary_tol", problem.verify.boundary_tol);
  } else {
    problem.verify.samples_per_component = problem.config.unsafe_samples;
    problem.verify.seed = problem.config.seed;
  }

  problem.system.validate();
  problem.unsafe.validate(nx);
  problem.config.validate(problem.system);
  return problem;
}

Problem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open problem file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("problem file is not valid JSON: " + std::string(e.what()));
  }
  return parse_problem(doc);
}

json problem_to_json(const Problem& problem) {
  json doc;
  doc["name"] = problem.name;
  doc["convention"] = "s<0";
  doc["variables"] = problem.variables;
  doc["inputs"] = problem.inputs;
  json f = json::array();
  for (int i = 0; i < problem.system.nx; ++i) f.push_back(polynomial_to_json(problem.system.f[i]));
  doc["f"] = f;
  json g = json::array();
  for (int i = 0; i < problem.system.nx; ++i) {
    json row = json::array();
    for (int j = 0; j < problem.system.nu; ++j) {
      row.push_back(polynomial_to_json(problem.system.g(i, j)));
    }
    g.push_back(row);
  }
  doc["g"] = g;
  json au = json::array();
  for (int r = 0; r < problem.system.Au.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < problem.system.Au.cols(); ++c) row.push_back(problem.system.Au(r, c));
    au.push_back(row);
  }
  doc["input_polytope"] = {{"A_u", au},
                           {"c_u", std::vector<double>(problem.system.cu.data(),
                                                       problem.system.cu.data() +
                                                           problem.system.cu.size())}};
  json unsafe = json::array();
  for (const auto& component : problem.unsafe.components) {
    json comp = json::array();
    for (const auto& s : component) comp.push_back(polynomial_to_json(s));
    unsafe.push_back(comp);
  }
  doc["unsafe"] = unsafe;
  auto box_json = [](const Box& box) {
    json rows = json::array();
    for (int i = 0; i < box.dim(); ++i) rows.push_back({box.lo(i), box.hi(i)});
    return rows;
  };
  doc["domain"] = box_json(problem.config.domain);
  if (problem.config.sampling_box) doc["sampling_box"] = box_json(*problem.config.sampling_box);
  doc["equilibrium"] = std::vector<double>(problem.equilibrium.data(),
                                           problem.equilibrium.data() + problem.equilibrium.size());
  const SynthesisConfig& c = problem.config;
  json cfg;
  cfg["deg_b"] = c.deg_b;
  cfg["deg_u"] = c.deg_u;
  cfg["deg_sigma"] = c.degrees.sigma;
  cfg["deg_sigma2"] = c.degrees.sigma2;
  cfg["deg_lambda1"] = c.degrees.lambda1;
  cfg["deg_lambda2"] = c.degrees.lambda2;
  cfg["deg_lambda3"] = c.degrees.lambda3;
  cfg["deg_mu"] = c.degrees.mu;
  cfg["epsilon"] = c.epsilon;
  cfg["gamma_threshold"] = c.gamma_threshold;
  cfg["max_iterations"] = c.max_iterations;
  if (c.delta > 0) {
    cfg["delta"] = c.delta;
  } else {
    cfg["delta"] = "auto";
  }
  cfg["delta_min"] = c.delta_min;
  if (c.lqr_q.size() > 0) {
    json q = json::array();
    for (int r = 0; r < c.lqr_q.rows(); ++r) {
      json row = json::array();
      for (int cc = 0; cc < c.lqr_q.cols(); ++cc) row.push_back(c.lqr_q(r, cc));
      q.push_back(row);
    }
    cfg["lqr_q"] = q;
  }
  if (c.lqr_r.size() > 0) {
    json rj = json::array();
    for (int r = 0; r < c.lqr_r.rows(); ++r) {
      json row = json::array();
      for (int cc = 0; cc < c.lqr_r.cols(); ++cc) row.push_back(c.lqr_r(r, cc));
      rj.push_back(row);
    }
    cfg["lqr_r"] = rj;
  }
  cfg["normalize"] = c.normalize;
  cfg["seed"] = c.seed;
  cfg["unsafe_samples"] = c.unsafe_samples;
  cfg["eta"] = problem.eta;
  cfg["dt"] = problem.dt;
  cfg["horizon"] = problem.horizon;
  cfg["boundary_points"] = problem.boundary_points;
  cfg["grid_resolution"] = problem.verify.grid_resolution;
  cfg["lp_tol"] = problem.verify.lp_tol;
  cfg["boundary_tol"] = problem.verify.boundary_tol;
  doc["config"] = cfg;
  return doc;
}

CertificateFile load_certificate(const std::string& path, int nx) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open certificate file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("certificate file is not valid JSON: " + std::string(e.what()));
  }
  CertificateFile cert;
  cert.b = polynomial_from_json(require(doc, "b", ""), nx, "/b");
  if (doc.contains("u")) {
    std::vector<Polynomial> u;
    const json& uj = doc.at("u");
    for (std::size_t j = 0; j < uj.size(); ++j) {
      u.push_back(polynomial_from_json(uj.at(j), nx, "/u/" + std::to_string(j)));
    }
    cert.u = PolyVector(std::move(u));
  }
  if (doc.contains("lambda1")) {
    const json& l1 = doc.at("lambda1");
    for (std::size_t r = 0; r < l1.size(); ++r) {
      cert.lambda1.push_back(
          polynomial_from_json(l1.at(r), nx, "/lambda1/" + std::to_string(r)));
    }
  }
  if (doc.contains("lambda2")) {
    cert.lambda2 = polynomial_from_json(doc.at("lambda2"), nx, "/lambda2");
  }
  if (doc.contains("b_iterates")) {
    const json& iterates = doc.at("b_iterates");
    for (std::size_t k = 0; k < iterates.size(); ++k) {
      cert.b_iterates.push_back(
          polynomial_from_json(iterates.at(k), nx, "/b_iterates/" + std::to_string(k)));
    }
  }
  if (doc.contains("gamma_history")) {
    for (const auto& g : doc.at("gamma_history")) cert.gamma_history.push_back(g.get<double>());
  }
  cert.status = doc.value("status", "");
  cert.delta = doc.value("delta", 0.0);
  if (doc.contains("K")) cert.K = as_matrix(doc.at("K"), "/K");
  return cert;
}

json certificate_to_json(const CbcCertificate& cert) {
  json doc;
  doc["b"] = polynomial_to_json(cert.b);
  json u = json::array();
  for (int j = 0; j < cert.u.size(); ++j) u.push_back(polynomial_to_json(cert.u[j]));
  doc["u"] = u;
  json l1 = json::array();
  for (const auto& l : cert.lambda1) l1.push_back(polynomial_to_json(l));
  doc["lambda1"] = l1;
  doc["lambda2"] = polynomial_to_json(cert.lambda2);
  doc["mu"] = polynomial_to_json(cert.mu);
  doc["lambda3"] = polynomial_to_json(cert.lambda3);
  json sigma = json::array();
  for (const auto& component : cert.sigma) {
    json comp = json::array();
    for (const auto& s : component) comp.push_back(polynomial_to_json(s));
    sigma.push_back(comp);
  }
  doc["sigma"] = sigma;
  json iterates = json::array();
  for (const auto& bi : cert.b_iterates) iterates.push_back(polynomial_to_json(bi));
  doc["b_iterates"] = iterates;
  doc["gamma_history"] = cert.gamma_history;
  doc["status"] = to_string(cert.status);
  doc["iterations"] = cert.gamma_history.size();
  doc["delta"] = cert.delta;
  if (cert.K.size() > 0) {
    json k = json::array();
    for (int r = 0; r < cert.K.rows(); ++r) {
      json row = json::array();
      for (int c = 0; c < cert.K.cols(); ++c) row.push_back(cert.K(r, c));
      k.push_back(row);
    }
    doc["K"] = k;
  }
  if (!cert.detail.empty()) doc["detail"] = cert.detail;
  if (cert.fail_iteration >= 0) doc["fail_iteration"] = cert.fail_iteration;
  return doc;
}

}  // namespace cbc
