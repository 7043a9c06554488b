#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "cbc/care.hpp"
#include "cbc/problem_io.hpp"
#include "cbc/safety_filter.hpp"
#include "cbc/synthesis.hpp"
#include "cbc/verification.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void apply_solver_tol_env(cbc::SynthesisConfig& config) {
  const char* env = std::getenv("CBC_SOLVER_TOL");
  if (env == nullptr) return;
  const double tol = std::atof(env);
  if (tol <= 0) return;
  config.sos.solver.feas_tol = tol;
  config.sos.solver.gap_tol = 0.1 * tol;
  config.sos.solver.dual_feas_tol = std::max(config.sos.solver.dual_feas_tol, tol);
}

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << contents;
}

void write_grid(const fs::path& stem, const cbc::GridField& field) {
  write_file(fs::path(stem.string() + ".csv"), field.to_csv());
  write_file(fs::path(stem.string() + ".json"), field.metadata_json());
}

Eigen::MatrixXd nominal_gain(const cbc::Problem& problem,
                             const cbc::CertificateFile& cert) {
  if (cert.K) return *cert.K;
  const Eigen::MatrixXd A = cbc::jacobian_at(problem.system.f, problem.equilibrium);
  const Eigen::MatrixXd B = problem.system.g.evaluate(problem.equilibrium);
  const Eigen::MatrixXd Q = problem.config.lqr_q.size() > 0
                                ? problem.config.lqr_q
                                : Eigen::MatrixXd::Identity(problem.system.nx, problem.system.nx);
  const Eigen::MatrixXd R = problem.config.lqr_r.size() > 0
                                ? problem.config.lqr_r
                                : Eigen::MatrixXd::Identity(problem.system.nu, problem.system.nu);
  return cbc::lqr_gain(B, R, cbc::care_solve(A, B, Q, R));
}

json report_to_json(const cbc::CertificateReport& report) {
  json unsafe = json::array();
  for (const auto& c : report.unsafe.components) {
    unsafe.push_back({{"samples", c.samples},
                      {"max_b", c.max_b},
                      {"unsampleable", c.unsampleable}});
  }
  return json{{"unsafe", unsafe},
              {"boundary",
               {{"points", report.boundary.points},
                {"feasible", report.boundary.feasible},
                {"fraction", report.boundary.fraction()},
                {"worst_margin", report.boundary.worst_margin},
                {"requested", report.boundary_points_requested},
                {"found", report.boundary_points_found},
                {"vacuous", report.boundary_vacuous}}},
              {"area", report.area},
              {"pass", report.pass}};
}

int cmd_synthesize(const std::string& problem_path, const std::string& out_dir,
                   std::optional<std::uint64_t> seed, std::optional<int> max_iter,
                   std::optional<double> threshold, bool dump_sdpa,
                   std::optional<int> grid_res) {
  cbc::Problem problem = cbc::load_problem(problem_path);
  if (seed) {
    problem.config.seed = *seed;
    problem.verify.seed = *seed;
  }
  if (max_iter) problem.config.max_iterations = *max_iter;
  if (threshold) problem.config.gamma_threshold = *threshold;
  if (grid_res) problem.verify.grid_resolution = *grid_res;
  apply_solver_tol_env(problem.config);

  fs::create_directories(out_dir);
  if (dump_sdpa) {
    fs::create_directories(fs::path(out_dir) / "sdpa");
    problem.config.sdpa_dump_dir = (fs::path(out_dir) / "sdpa").string();
  }

  const cbc::CbcCertificate cert =
      cbc::synthesize(problem.system, problem.unsafe, problem.equilibrium, problem.config);

  write_file(fs::path(out_dir) / "certificate.json", cbc::certificate_to_json(cert).dump(2));
  write_file(fs::path(out_dir) / "config_echo.json", cbc::problem_to_json(problem).dump(2));
  {
    std::ostringstream log;
    for (const auto& rec : cert.log) {
      log << json{{"k", rec.k},
                  {"step", rec.step},
                  {"status", rec.status},
                  {"gamma", rec.gamma},
                  {"solver_iterations", rec.solver_iterations},
                  {"primal_residual", rec.primal_residual},
                  {"dual_residual", rec.dual_residual},
                  {"duality_gap", rec.duality_gap},
                  {"wall_time_s", rec.wall_time_s}}
                 .dump()
          << "\n";
    }
    write_file(fs::path(out_dir) / "iterations.jsonl", log.str());
  }
  for (std::size_t k = 0; k < cert.b_iterates.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof(name), "grid_iter_%03zu", k);
    write_grid(fs::path(out_dir) / name,
               cbc::grid_eval(cert.b_iterates[k], problem.config.domain,
                              problem.verify.grid_resolution));
  }

  std::cout << "status: " << cbc::to_string(cert.status) << "\n";
  std::cout << "iterations: " << cert.gamma_history.size() << "\n";
  if (!cert.gamma_history.empty()) {
    std::cout << "final gamma: " << cert.gamma_history.back() << "\n";
  }
  if (!cert.detail.empty()) std::cout << cert.detail << "\n";
  std::cout << "bundle written to " << out_dir << "\n";
  return cert.status == cbc::SynthesisStatus::kConverged ? 0 : 2;
}

int cmd_verify(const std::string& problem_path, const std::string& certificate_path,
               const std::string& out_dir, std::optional<std::uint64_t> seed,
               std::optional<int> grid_res) {
  cbc::Problem problem = cbc::load_problem(problem_path);
  if (seed) problem.verify.seed = *seed;
  if (grid_res) problem.verify.grid_resolution = *grid_res;
  const cbc::CertificateFile cert =
      cbc::load_certificate(certificate_path, problem.system.nx);

  cbc::CertificateReport report = cbc::verify_certificate(
      cert.b, problem.system, problem.unsafe, problem.config.domain,
      problem.config.sample_box(), problem.verify);

  fs::create_directories(out_dir);
  json report_json = report_to_json(report);
  if (cert.b_iterates.size() >= 2) {
    json areas = json::array();
    json containments = json::array();
    std::vector<cbc::GridField> grids;
    for (const auto& bi : cert.b_iterates) {
      grids.push_back(
          cbc::grid_eval(bi, problem.config.domain, problem.verify.grid_resolution));
      areas.push_back(cbc::set_area(grids.back()));
    }
    bool all_contained = true;
    for (std::size_t k = 0; k + 1 < grids.size(); ++k) {
      const bool ok = cbc::contains(grids[k], grids[k + 1]);
      containments.push_back(ok);
      all_contained = all_contained && ok;
    }
    report_json["area_per_iterate"] = areas;
    report_json["containment_per_pair"] = containments;
    if (!all_contained) {
      report_json["pass"] = false;
      report.pass = false;
    }
  }
  write_file(fs::path(out_dir) / "report.json", report_json.dump(2));
  write_grid(fs::path(out_dir) / "grid",
             cbc::grid_eval(cert.b, problem.config.domain, problem.verify.grid_resolution));
  std::cout << report.summary() << "\n";
  return report.pass ? 0 : 2;
}

int cmd_simulate(const std::string& problem_path, const std::string& certificate_path,
                 const std::string& starts, const std::string& out_dir,
                 std::optional<double> eta, std::optional<double> dt,
                 std::optional<double> horizon, std::optional<std::uint64_t> seed) {
  cbc::Problem problem = cbc::load_problem(problem_path);
  if (eta) problem.eta = *eta;
  if (dt) problem.dt = *dt;
  if (horizon) problem.horizon = *horizon;
  if (seed) problem.verify.seed = *seed;
  const cbc::CertificateFile cert =
      cbc::load_certificate(certificate_path, problem.system.nx);

  std::vector<Eigen::VectorXd> x0s;
  if (starts.rfind("boundary:", 0) == 0) {
    const int n = std::atoi(starts.c_str() + 9);
    if (n < 1) {
      std::cerr << "invalid start count in '" << starts << "'\n";
      return 1;
    }
    x0s = cbc::boundary_points(cert.b, problem.config.domain, n, problem.verify);
  } else {
    // Inline "x1,x2;x1,x2;..." starts.
    std::istringstream ss(starts);
    std::string point;
    while (std::getline(ss, point, ';')) {
      std::istringstream ps(point);
      std::vector<double> coords;
      std::string coord;
      while (std::getline(ps, coord, ',')) coords.push_back(std::atof(coord.c_str()));
      if (static_cast<int>(coords.size()) != problem.system.nx) {
        std::cerr << "start '" << point << "' has wrong dimension\n";
        return 1;
      }
      x0s.push_back(Eigen::Map<Eigen::VectorXd>(coords.data(), coords.size()));
    }
  }
  if (x0s.empty()) {
    std::cerr << "no start points\n";
    return 1;
  }

  const cbc::SafetyFilter filter(cert.b, problem.system, problem.eta);
  const Eigen::MatrixXd K = nominal_gain(problem, cert);
  fs::create_directories(out_dir);

  json summary = json::array();
  for (std::size_t k = 0; k < x0s.size(); ++k) {
    bool fallback = false;
    auto controller = [&](const Eigen::VectorXd& x) {
      const auto r = filter.filter(x, cbc::nominal_pd(K, problem.equilibrium, x));
      fallback = fallback || r.qp_infeasible;
      return r.u;
    };
    cbc::Trajectory traj = cbc::simulate(problem.system, controller, cert.b, x0s[k],
                                         problem.horizon, problem.dt);
    traj.filter_fallback = fallback;
    char name[32];
    std::snprintf(name, sizeof(name), "traj_%03zu.csv", k);
    write_file(fs::path(out_dir) / name, traj.to_csv());
    const double b0 = cert.b.evaluate(x0s[k]);
    summary.push_back({{"trajectory", k},
                       {"start_b", b0},
                       {"out_of_contract", b0 < -1e-8},
                       {"min_b", traj.min_b()},
                       {"worst_input_margin", traj.worst_input_margin(problem.system)},
                       {"blew_up", traj.blew_up},
                       {"filter_fallback", traj.filter_fallback},
                       {"steps", traj.steps()}});
    std::cout << "traj " << k << ": min b " << traj.min_b() << ", worst input margin "
              << traj.worst_input_margin(problem.system)
              << (traj.blew_up ? " [blow-up]" : "")
              << (b0 < -1e-8 ? " [start outside safe set]" : "") << "\n";
  }
  write_file(fs::path(out_dir) / "summary.json", summary.dump(2));
  return 0;
}

int cmd_export(const std::string& problem_path, const std::string& what,
               const std::string& certificate_path, const std::string& out_dir,
               std::optional<int> grid_res) {
  cbc::Problem problem = cbc::load_problem(problem_path);
  if (grid_res) problem.verify.grid_resolution = *grid_res;
  apply_solver_tol_env(problem.config);
  fs::create_directories(out_dir);
  if (what == "grid") {
    if (certificate_path.empty()) {
      std::cerr << "export grid needs --certificate\n";
      return 1;
    }
    const cbc::CertificateFile cert =
        cbc::load_certificate(certificate_path, problem.system.nx);
    write_grid(fs::path(out_dir) / "grid",
               cbc::grid_eval(cert.b, problem.config.domain, problem.verify.grid_resolution));
    std::cout << "grid written to " << out_dir << "\n";
    return 0;
  }
  if (what == "sdpa") {
    fs::create_directories(fs::path(out_dir) / "sdpa");
    problem.config.sdpa_dump_dir = (fs::path(out_dir) / "sdpa").string();
    problem.config.max_iterations = 1;
    cbc::synthesize(problem.system, problem.unsafe, problem.equilibrium, problem.config);
    std::cout << "first-iteration SDPs written to " << problem.config.sdpa_dump_dir << "\n";
    return 0;
  }
  std::cerr << "unknown export kind '" << what << "' (expected sdpa or grid)\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Control barrier certificate synthesis, verification, and simulation"};
  app.require_subcommand(1);

  std::string problem_path, certificate_path, out_dir = "out", what,
              starts = "boundary:8";
  std::optional<std::uint64_t> seed;
  std::optional<int> max_iter, grid_res;
  std::optional<double> threshold, eta, dt, horizon;
  bool dump_sdpa = false;

  CLI::App* synth = app.add_subcommand("synthesize", "Run the full synthesis loop");
  synth->add_option("problem", problem_path, "problem JSON file")->required();
  synth->add_option("--out", out_dir, "output directory");
  synth->add_option("--seed", seed, "sampling seed override");
  synth->add_option("--max-iter", max_iter, "iteration cap override");
  synth->add_option("--threshold", threshold, "gamma termination threshold");
  synth->add_flag("--dump-sdpa", dump_sdpa, "write every compiled SDP as .dat-s");
  synth->add_option("--grid-res", grid_res, "grid resolution for bundle CSVs");

  CLI::App* verify = app.add_subcommand("verify", "Check a certificate against a problem");
  verify->add_option("problem", problem_path, "problem JSON file")->required();
  verify->add_option("certificate", certificate_path, "certificate JSON file")->required();
  verify->add_option("--out", out_dir, "output directory");
  verify->add_option("--seed", seed, "sampling seed override");
  verify->add_option("--grid-res", grid_res, "grid resolution");

  CLI::App* sim = app.add_subcommand("simulate", "Closed-loop trajectories with the QP filter");
  sim->add_option("problem", problem_path, "problem JSON file")->required();
  sim->add_option("certificate", certificate_path, "certificate JSON file")->required();
  sim->add_option("--starts", starts, "boundary:N or inline x1,x2;x1,x2;...");
  sim->add_option("--out", out_dir, "output directory");
  sim->add_option("--eta", eta, "certificate constraint relaxation rate");
  sim->add_option("--dt", dt, "integration step (s)");
  sim->add_option("--horizon", horizon, "simulation horizon (s)");
  sim->add_option("--seed", seed, "boundary sampling seed");

  CLI::App* exp = app.add_subcommand("export", "Write SDPA dumps or grid CSVs");
  exp->add_option("problem", problem_path, "problem JSON file")->required();
  exp->add_option("--what", what, "sdpa or grid")->required();
  exp->add_option("--certificate", certificate_path, "certificate for grid export");
  exp->add_option("--out", out_dir, "output directory");
  exp->add_option("--grid-res", grid_res, "grid resolution");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (synth->parsed()) {
      return cmd_synthesize(problem_path, out_dir, seed, max_iter, threshold, dump_sdpa,
                            grid_res);
    }
    if (verify->parsed()) {
      return cmd_verify(problem_path, certificate_path, out_dir, seed, grid_res);
    }
    if (sim->parsed()) {
      return cmd_simulate(problem_path, certificate_path, starts, out_dir, eta, dt, horizon,
                          seed);
    }
    if (exp->parsed()) {
      return cmd_export(problem_path, what, certificate_path, out_dir, grid_res);
    }
  } catch (const cbc::SchemaError& e) {
    std::cerr << "schema error at " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
