#include "cbc/verification.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "cbc/linprog.hpp"

namespace cbc {

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + u * (hi - lo);
}

Eigen::VectorXd sample_box(std::mt19937_64& rng, const Box& box) {
  Eigen::VectorXd x(box.dim());
  for (int i = 0; i < box.dim(); ++i) x[i] = uniform(rng, box.lo(i), box.hi(i));
  return x;
}

}  // namespace

bool UnsafeSampleReport::all_negative(double margin) const {
  for (const auto& c : components) {
    if (c.unsampleable) return false;
    if (c.max_b >= margin) return false;
  }
  return !components.empty();
}

UnsafeSampleReport sample_unsafe_max(const Polynomial& b, const SemialgebraicUnion& unsafe,
                                     const Box& box, const VerifyOptions& opts) {
  box.validate();
  unsafe.validate(box.dim());
  if (opts.samples_per_component < 1) {
    throw std::invalid_argument("sample_unsafe_max: need at least one sample");
  }
  std::mt19937_64 rng(opts.seed);
  UnsafeSampleReport report;
  for (const auto& component : unsafe.components) {
    UnsafeSampleReport::Component out;
    out.max_b = -std::numeric_limits<double>::infinity();
    std::int64_t draws = 0;
    while (out.samples < opts.samples_per_component) {
      // Unsampleable when the acceptance rate over a million draws is below
      // the floor (possibly an empty set).
      if (draws >= 1000000 &&
          static_cast<double>(out.samples) < opts.min_acceptance_rate * draws) {
        out.unsampleable = true;
        break;
      }
      ++draws;
      const Eigen::VectorXd x = sample_box(rng, box);
      bool inside = true;
      for (const Polynomial& s : component) {
        if (s.evaluate(x) >= 0.0) {
          inside = false;
          break;
        }
      }
      if (!inside) continue;
      ++out.samples;
      out.max_b = std::max(out.max_b, b.evaluate(x));
    }
    report.components.push_back(out);
  }
  return report;
}

std::vector<Eigen::VectorXd> boundary_points(const Polynomial& b, const Box& box, int n,
                                             const VerifyOptions& opts) {
  box.validate();
  if (n < 1) throw std::invalid_argument("boundary_points: n must be >= 1");
  std::mt19937_64 rng(opts.seed);

  // Interior point with b > 0.
  Eigen::VectorXd interior;
  bool found = false;
  for (int k = 0; k < 100000 && !found; ++k) {
    const Eigen::VectorXd x = sample_box(rng, box);
    if (b.evaluate(x) > 0.0) {
      interior = x;
      found = true;
    }
  }
  if (!found) {
    throw std::runtime_error("boundary_points: no interior point with b > 0 found");
  }

  std::vector<Eigen::VectorXd> points;
  points.reserve(n);
  const long max_rays = 100L * n;
  for (long ray = 0; ray < max_rays && static_cast<int>(points.size()) < n; ++ray) {
    const Eigen::VectorXd target = sample_box(rng, box);
    if (b.evaluate(target) >= 0.0) continue;  // no sign change along this ray
    double lo = 0.0, hi = 1.0;                // b(interior) > 0, b(target) < 0
    for (int iter = 0; iter < 200; ++iter) {
      const double mid = 0.5 * (lo + hi);
      const Eigen::VectorXd x = interior + mid * (target - interior);
      const double val = b.evaluate(x);
      if (std::abs(val) <= opts.boundary_tol) {
        points.push_back(x);
        break;
      }
      (val > 0.0 ? lo : hi) = mid;
    }
  }
  return points;
}

BoundaryFeasibilityReport boundary_feasibility(const Polynomial& b,
                                               const ControlAffineSystem& system,
                                               const std::vector<Eigen::VectorXd>& points,
                                               const VerifyOptions& opts) {
  system.validate();
  BoundaryFeasibilityReport report;
  report.worst_margin = std::numeric_limits<double>::infinity();
  const PolyVector grad = gradient(b);
  for (const Eigen::VectorXd& x : points) {
    const Eigen::VectorXd g = grad.evaluate(x);
    const double drift = g.dot(system.f.evaluate(x));
    const Eigen::VectorXd cvec = (g.transpose() * system.g.evaluate(x)).transpose();
    const LpResult lp = lp_maximize_over_polytope(cvec, system.Au, system.cu);
    if (lp.status != LpStatus::kOptimal) {
      throw std::runtime_error("boundary_feasibility: polytope LP failed");
    }
    const double optimum = drift + lp.value;
    ++report.points;
    if (optimum >= -opts.lp_tol) ++report.feasible;
    report.worst_margin = std::min(report.worst_margin, optimum);
  }
  if (report.points == 0) report.worst_margin = 0.0;
  return report;
}

Eigen::VectorXd GridField::point_at(const std::vector<int>& idx) const {
  Eigen::VectorXd x(box.dim());
  for (int i = 0; i < box.dim(); ++i) {
    x[i] = box.lo(i) + (box.hi(i) - box.lo(i)) * idx[i] / (resolution[i] - 1);
  }
  return x;
}

std::string GridField::to_csv() const {
  std::ostringstream os;
  os.precision(12);
  for (int i = 0; i < box.dim(); ++i) os << "x" << (i + 1) << ",";
  os << "b\n";
  std::vector<int> idx(box.dim(), 0);
  for (std::size_t flat = 0; flat < values.size(); ++flat) {
    const Eigen::VectorXd x = point_at(idx);
    for (int i = 0; i < box.dim(); ++i) os << x[i] << ",";
    os << values[flat] << "\n";
    for (int axis = box.dim() - 1; axis >= 0; --axis) {
      if (++idx[axis] < resolution[axis]) break;
      idx[axis] = 0;
    }
  }
  return os.str();
}

std::string GridField::metadata_json() const {
  std::ostringstream os;
  os.precision(17);
  os << "{\"box\": [";
  for (int i = 0; i < box.dim(); ++i) {
    os << (i ? ", " : "") << "[" << box.lo(i) << ", " << box.hi(i) << "]";
  }
  os << "], \"resolution\": [";
  for (std::size_t i = 0; i < resolution.size(); ++i) {
    os << (i ? ", " : "") << resolution[i];
  }
  os << "]}";
  return os.str();
}

GridField grid_eval(const Polynomial& b, const Box& box, int resolution) {
  box.validate();
  if (resolution < 2) throw std::invalid_argument("grid_eval: resolution must be >= 2");
  if (b.nvars() != box.dim()) throw std::invalid_argument("grid_eval: dimension mismatch");
  GridField field;
  field.box = box;
  field.resolution.assign(box.dim(), resolution);
  std::size_t total = 1;
  for (int i = 0; i < box.dim(); ++i) total *= resolution;
  field.values.resize(total);
  std::vector<int> idx(box.dim(), 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    field.values[flat] = b.evaluate(field.point_at(idx));
    for (int axis = box.dim() - 1; axis >= 0; --axis) {
      if (++idx[axis] < field.resolution[axis]) break;
      idx[axis] = 0;
    }
  }
  return field;
}

double set_area(const GridField& field) {
  double cell = 1.0;
  for (int i = 0; i < field.box.dim(); ++i) {
    cell *= (field.box.hi(i) - field.box.lo(i)) / (field.resolution[i] - 1);
  }
  std::size_t count = 0;
  for (double v : field.values) {
    if (v >= 0.0) ++count;
  }
  return cell * static_cast<double>(count);
}

bool contains(const GridField& prev, const GridField& next) {
  if (prev.resolution != next.resolution ||
      prev.box.bounds.rows() != next.box.bounds.rows() ||
      (prev.box.bounds - next.box.bounds).norm() > 0.0) {
    throw std::invalid_argument("contains: grids must share box and resolution");
  }
  for (std::size_t i = 0; i < prev.values.size(); ++i) {
    if (prev.values[i] >= 0.0 && !(next.values[i] > 0.0)) return false;
  }
  return true;
}

std::string CertificateReport::summary() const {
  std::ostringstream os;
  os << (pass ? "PASS" : "FAIL") << ": unsafe components ";
  for (std::size_t i = 0; i < unsafe.components.size(); ++i) {
    const auto& c = unsafe.components[i];
    os << (i ? ", " : "");
    if (c.unsampleable) {
      os << "unsampleable";
    } else {
      os << "max b = " << c.max_b << " (" << c.samples << " samples)";
    }
  }
  os << "; boundary feasible " << boundary.feasible << "/" << boundary.points
     << " (worst margin " << boundary.worst_margin << ")";
  if (boundary_vacuous) os << " [vacuous: empty zero level set]";
  os << "; area " << area;
  return os.str();
}

CertificateReport verify_certificate(const Polynomial& b, const ControlAffineSystem& system,
                                     const SemialgebraicUnion& unsafe, const Box& domain,
                                     const Box& sampling_box, const VerifyOptions& opts) {
  CertificateReport report;
  report.unsafe = sample_unsafe_max(b, unsafe, sampling_box, opts);

  report.boundary_points_requested = 500;
  std::vector<Eigen::VectorXd> pts;
  try {
    pts = boundary_points(b, domain, report.boundary_points_requested, opts);
  } catch (const std::runtime_error&) {
    report.boundary_vacuous = true;  // no interior point: empty zero-superlevel set
  }
  report.boundary_points_found = static_cast<int>(pts.size());
  report.boundary = boundary_feasibility(b, system, pts, opts);

  report.area = set_area(grid_eval(b, domain, opts.grid_resolution));

  const bool unsafe_ok = report.unsafe.all_negative();
  const bool boundary_ok =
      report.boundary_vacuous || (report.boundary.points > 0 && report.boundary.fraction() == 1.0);
  report.pass = unsafe_ok && boundary_ok;
  return report;
}

}  // namespace cbc
