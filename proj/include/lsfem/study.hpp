#pragma once

#include "lsfem/assembly.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

namespace lsfem {

/// Error norms of a discrete solution against the exact one, over Omega_0 and Omega_1.
struct ErrorNorms {
  double u_l2 = 0.0;
  double sigma_l2 = 0.0;
  double div_l2 = 0.0;
  double grad_l2 = 0.0;

  /// (||sigma||^2_H(div) + ||u||^2_H1)^(1/2)
  double energy() const {
    return std::sqrt(sigma_l2 * sigma_l2 + div_l2 * div_l2 + u_l2 * u_l2 + grad_l2 * grad_l2);
  }
};

/// full holds the coefficients of every block including Dirichlet values (SystemLayout::expand).
inline ErrorNorms compute_errors(const Discretization& d, const SystemLayout& L, const ManufacturedCase& cs,
                                 const Vector& full, int degree = -1) {
  if (full.size() != L.full_size()) throw ConfigError("compute_errors: coefficient vector has the wrong size");
  if (degree < 0) degree = 2 * d.m + 2;
  const DiscreteSolution sol = split_solution(L, full);
  struct Local {
    std::array<double, 4> s{};
  };
  std::vector<std::pair<int, int>> work;
  for (int i = 0; i < 2; ++i) {
    for (int k : d.cls.covered(i)) work.emplace_back(i, k);
  }
  std::vector<Local> parts(work.size());
  parallel_chunks(static_cast<int>(work.size()), [&](int begin, int end, int) {
    for (int w = begin; w < end; ++w) {
      const auto [i, k] = work[w];
      const auto rule = bulk_cut_quadrature(*d.mesh, d.cls, k, i, degree);
      if (rule.size() == 0) continue;
      const BasisValues bs = eval_basis(d.stress[i], k, rule.points);
      const BasisValues bu = eval_basis(d.disp[i], k, rule.points);
      const auto sd = d.stress[i].element_dofs(k);
      const auto ud = d.disp[i].element_dofs(k);
      std::array<Vector, 2> ls, lu;
      for (int c = 0; c < 2; ++c) {
        ls[c].resize(sd.size());
        lu[c].resize(ud.size());
        for (std::size_t j = 0; j < sd.size(); ++j) ls[c][j] = sol.sigma[i][c][sd[j]];
        for (std::size_t j = 0; j < ud.size(); ++j) lu[c][j] = sol.u[i][c][ud[j]];
      }
      auto& acc = parts[w].s;
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const PointState ex = cs.state(i, rule.points[q]);
        const double wq = rule.weights[q];
        for (int c = 0; c < 2; ++c) {
          const Vec2 sh = bs.value[q].transpose() * ls[c];
          const double dh = bs.div[q].dot(ls[c]);
          const double uh = bu.value[q].col(0).dot(lu[c]);
          const Vec2 gh = bu.grad[q].transpose() * lu[c];
          acc[0] += wq * std::pow(ex.u[c] - uh, 2);
          acc[1] += wq * (Vec2(ex.sigma.col(c)) - sh).squaredNorm();
          acc[2] += wq * std::pow(ex.div_sigma[c] - dh, 2);
          acc[3] += wq * (Vec2(ex.grad_u.row(c).transpose()) - gh).squaredNorm();
        }
      }
    }
  });
  std::array<double, 4> total{};
  for (const auto& p : parts) {
    for (int j = 0; j < 4; ++j) total[j] += p.s[j];
  }
  ErrorNorms e;
  e.u_l2 = std::sqrt(total[0]);
  e.sigma_l2 = std::sqrt(total[1]);
  e.div_l2 = std::sqrt(total[2]);
  e.grad_l2 = std::sqrt(total[3]);
  return e;
}

/// Observed orders; an entry is empty when one of the errors is zero (saturated).
struct ConvergenceOrders {
  std::vector<std::optional<double>> pairwise;
  std::optional<double> least_squares;
};

inline ConvergenceOrders convergence_orders(const std::vector<double>& h, const std::vector<double>& err) {
  if (h.size() != err.size()) throw ConfigError("convergence_orders: size mismatch");
  if (h.size() < 2) throw ConfigError("convergence_orders: need at least two rows");
  for (std::size_t k = 0; k + 1 < h.size(); ++k) {
    if (!(h[k + 1] < h[k])) throw ConfigError("convergence_orders: mesh sizes must decrease strictly");
  }
  ConvergenceOrders o;
  bool saturated = false;
  for (double e : err) {
    if (!(e > 0.0) || !std::isfinite(e)) saturated = true;
  }
  for (std::size_t k = 0; k + 1 < h.size(); ++k) {
    if (err[k] > 0.0 && err[k + 1] > 0.0 && std::isfinite(err[k]) && std::isfinite(err[k + 1])) {
      o.pairwise.push_back(std::log(err[k] / err[k + 1]) / std::log(h[k] / h[k + 1]));
    } else {
      o.pairwise.push_back(std::nullopt);
    }
  }
  if (!saturated) {
    const int n = static_cast<int>(h.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int k = 0; k < n; ++k) {
      const double x = std::log(h[k]), y = std::log(err[k]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    o.least_squares = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  return o;
}

enum class Method { l2, minus };

inline std::string to_string(Method m) { return m == Method::l2 ? "l2" : "minus"; }

inline Method parse_method(const std::string& s) {
  if (s == "l2") return Method::l2;
  if (s == "minus") return Method::minus;
  throw ConfigError("unknown method '" + s + "' (expected l2 or minus)");
}

struct ExperimentConfig {
  std::string case_name = "ex1";
  std::vector<Method> methods{Method::l2};
  std::vector<int> degrees{1};
  std::vector<double> h{0.2};
  std::optional<Material> material;
  Vec2 shift = Vec2::Zero();    // absolute interface shift
  Vec2 shift_h = Vec2::Zero();  // interface shift in units of h
  GeometryOptions geometry;
  int quad_extra = 2;
  int error_degree = -1;  // default 2m + 2
  double tol = 1e-10;
  int maxit = -1;
  bool condition = false;
  int eig_iters = 2000;
  double eig_tol = 1e-6;
  std::string output;
  int threads = 0;

  void validate() const {
    manufactured_case(case_name);
    if (methods.empty()) throw ConfigError("config: no method given");
    if (degrees.empty()) throw ConfigError("config: no polynomial degree given");
    for (int m : degrees) {
      if (m < 1 || m > 3) throw ConfigError("config: degree m must be 1, 2 or 3");
    }
    if (h.empty()) throw ConfigError("config: no mesh size given");
    for (std::size_t k = 0; k < h.size(); ++k) {
      mesh_cells(h[k]);
      if (k > 0 && !(h[k] < h[k - 1])) throw ConfigError("config: mesh sizes must decrease strictly");
    }
    if (material) material->validate();
    if (geometry.n_sub < 1) throw ConfigError("config: n_sub must be positive");
    if (quad_extra < 0) throw ConfigError("config: quad_extra must be non-negative");
    if (!(tol > 0.0)) throw ConfigError("config: tolerance must be positive");
    if (threads < 0) throw ConfigError("config: threads must be non-negative");
  }

  /// Cells per side of the (-1,1)^2 mesh for nominal cell width h.
  static int mesh_cells(double h) {
    if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("config: mesh size must be positive");
    const double n = 2.0 / h;
    const long r = std::lround(n);
    if (r < 1 || std::abs(n - r) > 1e-9 * n) {
      throw ConfigError("config: mesh size " + std::to_string(h) + " does not divide the domain width 2");
    }
    return static_cast<int>(r);
  }
};

namespace detail {

inline double parse_h(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    const auto slash = s.find('/');
    try {
      if (slash == std::string::npos) return std::stod(s);
      return std::stod(s.substr(0, slash)) / std::stod(s.substr(slash + 1));
    } catch (const std::exception&) {
      throw ConfigError("config: cannot parse mesh size '" + s + "'");
    }
  }
  throw ConfigError("config: mesh sizes must be numbers or strings like \"1/10\"");
}

inline Vec2 parse_vec2(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(std::string("config: ") + what + " must be a pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace detail

/// Reads a JSON document; unknown keys are rejected.
inline ExperimentConfig parse_config(const nlohmann::json& j) {
  ExperimentConfig c;
  try {
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    static const std::vector<std::string> known{"case",   "method",   "m",        "h",        "material",
                                                "shift",  "shift_h",  "geometry", "solver",   "output",
                                                "threads", "error_degree"};
    for (const auto& [key, _] : j.items()) {
      if (std::find(known.begin(), known.end(), key) == known.end()) {
        throw ConfigError("config: unknown key '" + key + "'");
      }
    }
    c.case_name = j.value("case", c.case_name);
    if (j.contains("method")) {
      c.methods.clear();
      const auto& mj = j["method"];
      if (mj.is_string() && mj.get<std::string>() == "both") {
        c.methods = {Method::l2, Method::minus};
      } else if (mj.is_string()) {
        c.methods.push_back(parse_method(mj.get<std::string>()));
      } else {
        for (const auto& s : mj) c.methods.push_back(parse_method(s.get<std::string>()));
      }
    }
    if (j.contains("m")) {
      c.degrees.clear();
      if (j["m"].is_number()) {
        c.degrees.push_back(j["m"].get<int>());
      } else {
        for (const auto& v : j["m"]) c.degrees.push_back(v.get<int>());
      }
    }
    if (j.contains("h")) {
      c.h.clear();
      if (j["h"].is_array()) {
        for (const auto& v : j["h"]) c.h.push_back(detail::parse_h(v));
      } else {
        c.h.push_back(detail::parse_h(j["h"]));
      }
    }
    if (j.contains("material")) {
      const auto& mj = j["material"];
      const Vec2 lam = detail::parse_vec2(mj.at("lambda"), "material.lambda");
      const Vec2 mu = detail::parse_vec2(mj.at("mu"), "material.mu");
      c.material = Material{lam[0], lam[1], mu[0], mu[1]};
    }
    if (j.contains("shift")) c.shift = detail::parse_vec2(j["shift"], "shift");
    if (j.contains("shift_h")) c.shift_h = detail::parse_vec2(j["shift_h"], "shift_h");
    if (j.contains("geometry")) {
      const auto& g = j["geometry"];
      c.geometry.n_sub = g.value("n_sub", c.geometry.n_sub);
      c.geometry.sliver_tol = g.value("sliver_tol", c.geometry.sliver_tol);
      c.geometry.strict = g.value("strict", c.geometry.strict);
      c.quad_extra = g.value("quad_extra", c.quad_extra);
    }
    c.error_degree = j.value("error_degree", c.error_degree);
    if (j.contains("solver")) {
      const auto& s = j["solver"];
      c.tol = s.value("tol", c.tol);
      c.maxit = s.value("maxit", c.maxit);
      c.condition = s.value("condition", c.condition);
      c.eig_iters = s.value("eig_iters", c.eig_iters);
      c.eig_tol = s.value("eig_tol", c.eig_tol);
    }
    c.output = j.value("output", c.output);
    c.threads = j.value("threads", c.threads);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: " + path + ": " + e.what());
  }
  return parse_config(j);
}

/// One (method, m, h) run.
struct ErrorReport {
  std::string case_name;
  Method method = Method::l2;
  int m = 1;
  double h = 0.0;
  ErrorNorms errors;
  int iterations = 0;  // CG iterations; 0 for a direct solve
  double kappa = std::numeric_limits<double>::quiet_NaN();
  int dofs = 0;
  std::vector<AssumptionRecord> violations;
};

/// Wraps a stage failure; the original exception is nested.
class StageError : public Error {
 public:
  explicit StageError(const std::string& stage) : Error(stage), stage_(stage) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

namespace detail {

template <class F>
auto stage(const std::string& name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (...) {
    std::throw_with_nested(StageError(name));
  }
}

}  // namespace detail

using Logger = std::function<void(const std::string&)>;

/// Builds the case of a config at nominal mesh size h (interface shift applied).
inline ManufacturedCase configured_case(const ExperimentConfig& cfg, double h) {
  ManufacturedCase cs = cfg.material ? manufactured_case(cfg.case_name, *cfg.material) : manufactured_case(cfg.case_name);
  const Vec2 shift = cfg.shift + h * cfg.shift_h;
  if (!shift.isZero(0.0)) cs.set_interface(cs.interface().shifted(shift));
  return cs;
}

/// Everything needed to solve one configuration on one mesh.
struct Problem {
  Mesh mesh;
  Discretization d;
  SystemLayout L;
  Problem(const ManufacturedCase& cs, double h, int m, const ExperimentConfig& cfg)
      : mesh(build_uniform({-1, 1, -1, 1}, ExperimentConfig::mesh_cells(h))),
        d(discretize(mesh, cs.interface(), m, cfg.geometry, cfg.quad_extra)),
        L(d) {}
  Problem(const Problem&) = delete;
};

inline ErrorReport solve_one(const ExperimentConfig& cfg, Method method, int m, double h, const Logger& log = {}) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  auto note = [&](const std::string& s) {
    if (log) {
      const double t = std::chrono::duration<double>(clock::now() - t0).count();
      char buf[32];
      std::snprintf(buf, sizeof buf, "[%8.2fs] ", t);
      log(buf + s);
    }
  };
  const ManufacturedCase cs = configured_case(cfg, h);
  const auto p = detail::stage("geometry", [&] { return std::make_unique<Problem>(cs, h, m, cfg); });
  const Discretization& d = p->d;
  const SystemLayout& L = p->L;
  ErrorReport r;
  r.case_name = cfg.case_name;
  r.method = method;
  r.m = m;
  r.h = h;
  r.dofs = L.size();
  r.violations = d.cls.violations;
  note("h=" + std::to_string(h) + " m=" + std::to_string(m) + " " + to_string(method) + ": " +
       std::to_string(L.size()) + " unknowns, " + std::to_string(d.cls.cut.size()) + " cut elements");
  const Vector g = L.dirichlet_values(d, cs);
  Vector x;
  if (method == Method::l2) {
    const L2System sys = detail::stage("assembly", [&] { return assemble_l2_system(d, L, cs.material(), L2Mode::method); });
    const Vector rhs = detail::stage("assembly", [&] { return assemble_l2_rhs(d, L, cs, L2Mode::method, sys); });
    note("assembled");
    const auto fac = detail::stage("solve", [&] { return std::make_unique<Factorization>(sys.A); });
    x = detail::stage("solve", [&] { return fac->solve(rhs); });
    note("solved (direct)");
    if (cfg.condition) {
      const EigenEstimate e = detail::stage("condition", [&] {
        return extreme_eigs(matrix_operator(sys.A), fac->as_operator(), L.size(), cfg.eig_iters, cfg.eig_tol);
      });
      r.kappa = e.kappa();
      note("kappa " + std::to_string(r.kappa));
    }
  } else {
    const L2System part = detail::stage("assembly", [&] { return assemble_l2_system(d, L, cs.material(), L2Mode::part); });
    const auto mno = detail::stage("assembly", [&] { return std::make_unique<MinusNormOperator>(assemble_minus_norm(d, L)); });
    const Vector rhs = detail::stage("assembly", [&] { return assemble_tilde_rhs(d, L, cs, *mno, part); });
    note("assembled");
    const auto fac = detail::stage("solve", [&] { return std::make_unique<Factorization>(part.A); });
    const LinearOperator op = [&](const Vector& v) { return apply_tilde(part.A, *mno, v); };
    const SolveResult s = detail::stage("solve", [&] {
      SolveResult res = pcg_solve(op, fac->as_operator(), rhs, cfg.tol, cfg.maxit);
      if (!res.converged) {
        throw SolverError("pcg did not converge in " + std::to_string(res.iterations) + " iterations (residual " +
                          std::to_string(res.residual) + ")");
      }
      return res;
    });
    x = s.x;
    r.iterations = s.iterations;
    note("solved (" + std::to_string(s.iterations) + " pcg iterations)");
    if (cfg.condition) {
      const EigenEstimate e = detail::stage("condition", [&] {
        return extreme_eigs(op, fac->as_operator(), L.size(), cfg.eig_iters, cfg.eig_tol, 1e-12);
      });
      r.kappa = e.kappa();
      note("kappa " + std::to_string(r.kappa));
    }
  }
  r.errors = detail::stage("errors", [&] { return compute_errors(d, L, cs, L.expand(x, g), cfg.error_degree); });
  note("errors computed");
  return r;
}

/// Runs every (method, m, h) of the config in order.
inline std::vector<ErrorReport> run_experiment(const ExperimentConfig& cfg, const Logger& log = {}) {
  cfg.validate();
  std::vector<ErrorReport> out;
  for (Method method : cfg.methods) {
    for (int m : cfg.degrees) {
      for (double h : cfg.h) out.push_back(solve_one(cfg, method, m, h, log));
    }
  }
  return out;
}

namespace detail {

inline std::string fmt_double(double v) {
  if (!std::isfinite(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::string fmt_order(const std::optional<double>& v) {
  if (!v) return "saturated";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4f", *v);
  return buf;
}

}  // namespace detail

inline const char* csv_header() { return "case,method,m,h,u_l2,sigma_l2,energy,iters,kappa"; }

/// Data rows, then per (case, method, m) group the observed orders: one row with h = "order" (least
/// squares over the group) and one row with h = "order:<h_k>-><h_k+1>" per consecutive pair.
inline std::string format_csv(const std::vector<ErrorReport>& rows) {
  std::ostringstream os;
  os << csv_header() << '\n';
  for (const auto& r : rows) {
    os << r.case_name << ',' << to_string(r.method) << ',' << r.m << ',' << detail::fmt_double(r.h) << ','
       << detail::fmt_double(r.errors.u_l2) << ',' << detail::fmt_double(r.errors.sigma_l2) << ','
       << detail::fmt_double(r.errors.energy()) << ',' << r.iterations << ',' << detail::fmt_double(r.kappa) << '\n';
  }
  std::size_t b = 0;
  while (b < rows.size()) {
    std::size_t e = b + 1;
    while (e < rows.size() && rows[e].case_name == rows[b].case_name && rows[e].method == rows[b].method &&
           rows[e].m == rows[b].m) {
      ++e;
    }
    if (e - b >= 2) {
      std::vector<double> h, eu, es, ee, ek;
      bool has_kappa = true;
      for (std::size_t k = b; k < e; ++k) {
        h.push_back(rows[k].h);
        eu.push_back(rows[k].errors.u_l2);
        es.push_back(rows[k].errors.sigma_l2);
        ee.push_back(rows[k].errors.energy());
        ek.push_back(rows[k].kappa);
        if (!std::isfinite(rows[k].kappa)) has_kappa = false;
      }
      const auto ou = convergence_orders(h, eu), os_ = convergence_orders(h, es), oe = convergence_orders(h, ee);
      std::optional<ConvergenceOrders> ok;
      if (has_kappa) ok = convergence_orders(h, ek);
      const std::string prefix = rows[b].case_name + ',' + to_string(rows[b].method) + ',' + std::to_string(rows[b].m);
      os << prefix << ",order," << detail::fmt_order(ou.least_squares) << ',' << detail::fmt_order(os_.least_squares)
         << ',' << detail::fmt_order(oe.least_squares) << ",," << (ok ? detail::fmt_order(ok->least_squares) : "")
         << '\n';
      for (std::size_t k = 0; k + 1 < h.size(); ++k) {
        os << prefix << ",order:" << detail::fmt_double(h[k]) << "->" << detail::fmt_double(h[k + 1]) << ','
           << detail::fmt_order(ou.pairwise[k]) << ',' << detail::fmt_order(os_.pairwise[k]) << ','
           << detail::fmt_order(oe.pairwise[k]) << ",," << (ok ? detail::fmt_order(ok->pairwise[k]) : "") << '\n';
      }
    }
    b = e;
  }
  return os.str();
}

/// Reads the data rows of a CSV written by format_csv (order rows are skipped).
inline std::vector<ErrorReport> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != csv_header()) throw ConfigError("csv: missing or unexpected header");
  std::vector<ErrorReport> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 9) throw ConfigError("csv: line " + std::to_string(lineno) + " has " + std::to_string(f.size()) + " fields");
    if (f[3].rfind("order", 0) == 0) continue;
    try {
      ErrorReport r;
      r.case_name = f[0];
      r.method = parse_method(f[1]);
      r.m = std::stoi(f[2]);
      r.h = std::stod(f[3]);
      r.errors.u_l2 = std::stod(f[4]);
      r.errors.sigma_l2 = std::stod(f[5]);
      const double energy = std::stod(f[6]);
      // Only the energy total is stored; keep it exact through the div component.
      r.errors.div_l2 = std::sqrt(std::max(0.0, energy * energy - r.errors.u_l2 * r.errors.u_l2 -
                                                    r.errors.sigma_l2 * r.errors.sigma_l2));
      r.iterations = std::stoi(f[7]);
      r.kappa = f[8].empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(f[8]);
      rows.push_back(r);
    } catch (const std::invalid_argument&) {
      throw ConfigError("csv: cannot parse line " + std::to_string(lineno));
    } catch (const std::out_of_range&) {
      throw ConfigError("csv: value out of range on line " + std::to_string(lineno));
    }
  }
  return rows;
}

}  // namespace lsfem
