// Acceptance report: one line per criterion. Exit status is 1 when any criterion is not met;
// with --report the status only says whether the report could be produced.

#include "lsfem/lsfem.hpp"

#include <Eigen/Eigenvalues>

#include <cstring>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

using namespace lsfem;

namespace {

enum class Status { pass, fail, blocked };

struct Verdict {
  Status status = Status::pass;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (status == Status::pass) status = Status::fail;
      detail << " [" << what << "]";
    }
  }
};

int failures = 0;

void emit(int id, const std::string& name, Verdict& v) {
  const char* s = v.status == Status::pass ? "PASS" : v.status == Status::fail ? "FAIL" : "BLOCKED";
  if (v.status != Status::pass) ++failures;
  std::cout << "criterion " << id << ": " << std::left << std::setw(8) << s << name << " |" << v.detail.str()
            << std::endl;
}

std::string fmt(double x, int prec = 3) {
  std::ostringstream os;
  os << std::setprecision(prec) << x;
  return os.str();
}

ExperimentConfig config(const std::string& name, std::vector<Method> methods, std::vector<int> m,
                        std::vector<double> h) {
  ExperimentConfig c;
  c.case_name = name;
  c.methods = std::move(methods);
  c.degrees = std::move(m);
  c.h = std::move(h);
  return c;
}

const std::vector<double> coarse{1.0 / 5, 1.0 / 10, 1.0 / 20, 1.0 / 40};

std::vector<ErrorReport> select(const std::vector<ErrorReport>& rows, Method method, int m) {
  std::vector<ErrorReport> out;
  for (const auto& r : rows) {
    if (r.method == method && r.m == m) out.push_back(r);
  }
  return out;
}

struct Orders {
  double u, sigma, energy;
};

Orders orders(const std::vector<ErrorReport>& rows) {
  std::vector<double> h, u, s, e;
  for (const auto& r : rows) {
    h.push_back(r.h);
    u.push_back(r.errors.u_l2);
    s.push_back(r.errors.sigma_l2);
    e.push_back(r.errors.energy());
  }
  auto ls = [&](const std::vector<double>& err) {
    const auto o = convergence_orders(h, err).least_squares;
    return o ? *o : std::numeric_limits<double>::quiet_NaN();
  };
  return {ls(u), ls(s), ls(e)};
}

bool within(double x, double lo, double hi) { return x >= lo && x <= hi; }

void check_band(Verdict& v, const std::string& tag, double x, double lo, double hi) {
  v.detail << ' ' << tag << '=' << fmt(x);
  v.require(within(x, lo, hi), tag + " outside [" + fmt(lo) + "," + fmt(hi) + "]");
}

void criterion_1_2() {
  const auto rows = run_experiment(config("ex1", {Method::l2, Method::minus}, {1, 2}, coarse));
  Verdict v1;
  for (Method method : {Method::l2, Method::minus}) {
    for (int m : {1, 2}) {
      const Orders o = orders(select(rows, method, m));
      const std::string tag = to_string(method) + "/m" + std::to_string(m) + ":";
      if (m == 1) {
        check_band(v1, tag + "u", o.u, 1.8, 2.2);
        check_band(v1, tag + "sigma", o.sigma, 0.85, 1.15);
        check_band(v1, tag + "energy", o.energy, 0.85, 1.15);
      } else {
        check_band(v1, tag + "u", o.u, 2.8, 3.2);
        check_band(v1, tag + "sigma", o.sigma, 1.8, 2.2);
        check_band(v1, tag + "energy", o.energy, 1.8, 2.2);
      }
    }
  }
  emit(1, "Example 1 convergence orders, both methods, h=1/5..1/40", v1);

  Verdict v2;
  double worst = 0.0;
  for (int m : {1, 2}) {
    const auto a = select(rows, Method::l2, m), b = select(rows, Method::minus, m);
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double pairs[3][2] = {{a[k].errors.u_l2, b[k].errors.u_l2},
                                  {a[k].errors.sigma_l2, b[k].errors.sigma_l2},
                                  {a[k].errors.energy(), b[k].errors.energy()}};
      for (const auto& p : pairs) worst = std::max(worst, std::abs(p[1] - p[0]) / p[0]);
    }
  }
  v2.detail << " max relative difference " << fmt(100 * worst) << "%";
  v2.require(worst < 0.15, "difference above 15%");
  emit(2, "method agreement on Example 1", v2);
}

void criterion_3() {
  ExperimentConfig c = config("ex2", {Method::l2, Method::minus}, {1}, {0.1});
  const auto soft = run_experiment(c);
  c.material = Material{10000, 1, 1, 1};
  const auto stiff = run_experiment(c);
  Verdict v;
  double worst = 0.0;
  for (std::size_t k = 0; k < soft.size(); ++k) {
    const double pairs[3][2] = {{soft[k].errors.u_l2, stiff[k].errors.u_l2},
                                {soft[k].errors.sigma_l2, stiff[k].errors.sigma_l2},
                                {soft[k].errors.energy(), stiff[k].errors.energy()}};
    for (const auto& p : pairs) worst = std::max(worst, std::abs(p[1] - p[0]) / p[0]);
  }
  v.detail << " lambda0 100 vs 10000: max relative difference " << fmt(100 * worst) << "%";
  v.require(worst < 0.05, "difference above 5%");
  emit(3, "lambda robustness (Example 2, m=1, h=1/10)", v);
}

void criterion_4() {
  Verdict v;
  ExperimentConfig star = config("ex3", {Method::l2, Method::minus}, {1}, {1.0 / 10, 1.0 / 20, 1.0 / 40});
  star.geometry.strict = false;
  const auto srows = run_experiment(star);
  const auto lrows = run_experiment(config("ex4", {Method::l2, Method::minus}, {1}, coarse));
  for (Method method : {Method::l2, Method::minus}) {
    const Orders s = orders(select(srows, method, 1)), l = orders(select(lrows, method, 1));
    const std::string ms = to_string(method);
    check_band(v, "star/" + ms + ":u", s.u, 1.8, 2.2);
    check_band(v, "star/" + ms + ":sigma", s.sigma, 0.85, 1.15);
    check_band(v, "star/" + ms + ":energy", s.energy, 0.85, 1.15);
    check_band(v, "lshape/" + ms + ":u", l.u, 1.8, 2.2);
    check_band(v, "lshape/" + ms + ":sigma", l.sigma, 0.85, 1.15);
    check_band(v, "lshape/" + ms + ":energy", l.energy, 0.85, 1.15);
  }
  bool lshape_ok = true;
  for (double h : coarse) {
    if (h > 0.1) continue;
    const Mesh mesh = build_uniform({-1, 1, -1, 1}, ExperimentConfig::mesh_cells(h));
    try {
      classify(mesh, Interface::lshape());
    } catch (const AssumptionViolation&) {
      lshape_ok = false;
    }
  }
  v.require(lshape_ok, "L-shape assumption check failed");
  int star_violations = 0;
  for (const auto& r : srows) star_violations += static_cast<int>(r.violations.size());
  v.detail << " | L-shape assumptions h<=1/10: " << (lshape_ok ? "ok" : "violated")
           << " | star assumptions h<=1/10: " << star_violations / 2 << " violations (see notes)";
  if (star_violations > 0 && v.status == Status::pass) v.status = Status::blocked;
  emit(4, "star and L-shape geometries (Examples 3-4, m=1)", v);
}

void criterion_5() {
  const auto rows = run_experiment(config("ex5", {Method::minus}, {1}, {1.0 / 20, 1.0 / 40, 1.0 / 80, 1.0 / 160}));
  const Orders o = orders(rows);
  Verdict v;
  check_band(v, "energy", o.energy, 0.40, 0.62);
  check_band(v, "sigma", o.sigma, 0.40, 0.60);
  check_band(v, "u", o.u, 1.15, 1.50);
  emit(5, "singular solution (Example 5, minus-norm, h=1/20..1/160)", v);
}

double kappa_slope(const Vec2& shift_h) {
  ExperimentConfig c = config("ex1", {Method::l2}, {1}, {1.0 / 5, 1.0 / 10, 1.0 / 20});
  c.geometry.strict = false;
  c.shift_h = shift_h;
  std::vector<double> h, k;
  for (double hh : c.h) {
    const ManufacturedCase cs = configured_case(c, hh);
    const Problem p(cs, hh, 1, c);
    const L2System s = assemble_l2_system(p.d, p.L, cs.material(), L2Mode::method);
    h.push_back(hh);
    k.push_back(extreme_eigs(s.A, c.eig_iters, c.eig_tol).kappa());
  }
  return *convergence_orders(h, k).least_squares;
}

void criterion_6() {
  const double s0 = kappa_slope(Vec2::Zero());
  const double s1 = kappa_slope(Vec2(1.0 / 7, 1.0 / 13));
  Verdict v;
  check_band(v, "slope", s0, -2.4, -1.6);
  check_band(v, "shifted slope", s1, -2.4, -1.6);
  const double change = std::abs(s1 - s0) / std::abs(s0);
  v.detail << " change=" << fmt(100 * change) << "%";
  v.require(change < 0.10, "slope change above 10%");
  emit(6, "condition number scaling and sliver stability", v);
}

void criterion_7() {
  const auto rows = run_experiment(config("patch", {Method::l2, Method::minus}, {1, 2}, {1.0 / 5, 1.0 / 10}));
  double worst = 0.0;
  for (const auto& r : rows) worst = std::max({worst, r.errors.u_l2, r.errors.sigma_l2, r.errors.energy()});
  Verdict v;
  v.detail << " max error " << fmt(worst);
  v.require(worst <= 1e-9, "error above 1e-9");
  emit(7, "patch test, both methods", v);
}

void criterion_8() {
  const ManufacturedCase cs = manufactured_case("ex1");
  const ExperimentConfig c = config("ex1", {Method::minus}, {1}, {0.2});
  const Problem p(cs, 0.2, 1, c);
  const L2System part = assemble_l2_system(p.d, p.L, cs.material(), L2Mode::part);
  const MinusNormOperator mno = assemble_minus_norm(p.d, p.L);
  const DenseMatrix C(mno.C);
  const DenseMatrix T = DenseMatrix(part.A) + C.transpose() * DenseMatrix(mno.B).ldlt().solve(C);
  double op_err = 0.0;
  for (int j = 0; j < p.L.size(); ++j) {
    const Vector e = Vector::Unit(p.L.size(), j);
    op_err = std::max(op_err, (apply_tilde(part.A, mno, e) - T.col(j)).norm() / T.col(j).norm());
  }
  // ||v||^2 against the H1 norm plus penalty of the field T_h v, evaluated by quadrature.
  std::mt19937 rng(2024);
  std::normal_distribution<double> nd;
  const int n1 = mno.space.num_dofs();
  double id_err = 0.0;
  for (int t = 0; t < 10; ++t) {
    const Vector x = Vector::NullaryExpr(p.L.size(), [&] { return nd(rng); });
    const Vector g = mno.C * x;
    const Vector w = mno.solve(g);
    double h1 = 0.0;
    for (int k : p.d.cls.covered0) {
      const auto rule = bulk_cut_quadrature(p.mesh, p.d.cls, k, 0, 6);
      if (rule.size() == 0) continue;
      const BasisValues bv = eval_basis(mno.space, k, rule.points);
      const auto dofs = mno.space.element_dofs(k);
      for (int comp = 0; comp < 2; ++comp) {
        Vector loc(dofs.size());
        for (std::size_t i = 0; i < dofs.size(); ++i) loc[i] = w[comp * n1 + dofs[i]];
        for (std::size_t q = 0; q < rule.size(); ++q) {
          const double val = bv.value[q].col(0).dot(loc);
          const Vec2 gr = bv.grad[q].transpose() * loc;
          h1 += rule.weights[q] * (val * val + gr.squaredNorm());
        }
      }
    }
    for (int comp = 0; comp < 2; ++comp) {
      h1 += penalty_energy(mno.space, p.d.cls, 1, 0, Vector(w.segment(comp * n1, n1)));
    }
    const double lhs = mno.norm2(g);
    id_err = std::max(id_err, std::abs(lhs - h1) / lhs);
  }
  Verdict v;
  v.detail << " operator rel. error " << fmt(op_err) << ", norm identity rel. error " << fmt(id_err);
  v.require(op_err <= 1e-10, "tilde operator mismatch");
  v.require(id_err <= 1e-10, "minus-norm identity mismatch");
  emit(8, "matrix-free operator and minus-norm identity (h=1/5, m=1)", v);
}

double star_length_oracle() {
  const Interface star = Interface::star5();
  const int n = 100000;
  double len = 0.0;
  auto point = [&](int i) {
    const double t = 2.0 * std::numbers::pi * i / n;
    const double r = 0.5 + std::sin(5.0 * t) / 7.0;
    return Vec2(r * std::cos(t), r * std::sin(t));
  };
  for (int i = 0; i < n; ++i) len += (point(i + 1) - point(i)).norm();
  return len;
}

double gamma_length(const Interface& g, const CutClassification& c) {
  double s = 0.0;
  for (int k : c.cut) {
    for (double w : interface_quadrature(g, c, k, 2).weights) s += w;
  }
  return s;
}

void criterion_9() {
  Verdict v;
  const Mesh mesh = build_uniform({-1, 1, -1, 1}, 10);
  const Interface circle = Interface::circle(Vec2::Zero(), 0.7);
  const CutClassification cls = classify(mesh, circle);
  std::mt19937 rng(99);
  std::normal_distribution<double> nd;
  double worst_poly = 0.0, worst_asym = 0.0, worst_eig = 0.0;
  for (int r = 1; r <= 2; ++r) {
    for (int side = 0; side < 2; ++side) {
      for (Family fam : {Family::lagrange, Family::bdm}) {
        const FESpace s = build_space(mesh, cls.covered(side), fam, r);
        for (int t = 0; t < 20; ++t) {
          std::array<double, 12> a;
          for (auto& x : a) x = nd(rng);
          auto poly = [&](const Vec2& x, int off) {
            double val = a[off] + a[off + 1] * x.x() + a[off + 2] * x.y();
            if (r == 2) val += a[off + 3] * x.x() * x.x() + a[off + 4] * x.x() * x.y() + a[off + 5] * x.y() * x.y();
            return val;
          };
          const Vector c = fam == Family::lagrange
                               ? interpolate(s, std::function<double(const Vec2&)>([&](const Vec2& x) { return poly(x, 0); }))
                               : interpolate(s, std::function<Vec2(const Vec2&)>(
                                                    [&](const Vec2& x) { return Vec2(poly(x, 0), poly(x, 6)); }));
          worst_poly = std::max(worst_poly, penalty_energy(s, cls, r, side, c));
        }
        const DenseMatrix S(assemble_penalty(s, cls, r, side));
        worst_asym = std::max(worst_asym, (S - S.transpose()).cwiseAbs().maxCoeff());
        Eigen::SelfAdjointEigenSolver<DenseMatrix> es(S, Eigen::EigenvaluesOnly);
        worst_eig = std::min(worst_eig, es.eigenvalues().minCoeff() / std::max(1e-300, S.cwiseAbs().maxCoeff()));
      }
    }
  }
  v.detail << " poly energy " << fmt(worst_poly) << ", asymmetry " << fmt(worst_asym) << ", min eig/|S| "
           << fmt(worst_eig);
  v.require(worst_poly <= 1e-18, "penalty does not vanish on polynomials");
  v.require(worst_asym == 0.0, "penalty not symmetric");
  v.require(worst_eig >= -1e-12, "penalty not positive semidefinite");

  double area = 0.0, partition = 0.0;
  for (int k = 0; k < mesh.num_elements(); ++k) {
    double a[2] = {0.0, 0.0};
    for (int side = 0; side < 2; ++side) {
      if (!cls.covers(side, k)) continue;
      for (double w : bulk_cut_quadrature(mesh, cls, k, side, 2).weights) a[side] += w;
    }
    area += a[0];
    partition = std::max(partition, std::abs(a[0] + a[1] - mesh.element_area(k)));
  }
  const double len = gamma_length(circle, cls);
  v.detail << " | circle area err " << fmt(std::abs(area - std::numbers::pi * 0.49)) << ", length err "
           << fmt(std::abs(len - 2 * std::numbers::pi * 0.7)) << ", partition err " << fmt(partition);
  v.require(std::abs(area - std::numbers::pi * 0.49) <= 2e-3, "circle area");
  v.require(std::abs(len - 2 * std::numbers::pi * 0.7) <= 2e-3, "circle length");
  v.require(partition <= 1e-12, "area partition");

  const Interface lshape = Interface::lshape();
  double sides = 0.0;
  for (const auto& s : lshape.polygon_sides()) sides += s.length();
  const Mesh fine = build_uniform({-1, 1, -1, 1}, 20);
  const double lerr = std::abs(gamma_length(lshape, classify(fine, lshape)) - sides);
  GeometryOptions loose;
  loose.strict = false;
  const Interface star = Interface::star5();
  const double serr = std::abs(gamma_length(star, classify(fine, star, loose)) / star_length_oracle() - 1.0);
  v.detail << ", L-shape length err " << fmt(lerr) << ", star length rel. err " << fmt(serr);
  v.require(lerr <= 1e-12, "L-shape length");
  v.require(serr <= 1e-3, "star length");
  emit(9, "ghost penalty and cut geometry properties", v);
}

}  // namespace

int main(int argc, char** argv) {
  const bool report_only = argc > 1 && std::strcmp(argv[1], "--report") == 0;
  set_num_threads(1);
  using Check = void (*)();
  const Check checks[] = {criterion_1_2, criterion_3, criterion_4, criterion_5,
                          criterion_6,   criterion_7, criterion_8, criterion_9};
  int crashed = 0;
  for (Check c : checks) {
    try {
      c();
    } catch (const std::exception& e) {
      ++crashed;
      std::cout << "criterion run aborted: " << e.what() << std::endl;
    }
  }
  std::cout << "summary: " << failures << " criteria not met, " << crashed << " checks aborted" << std::endl;
  if (report_only) return crashed == 0 ? 0 : 1;
  return failures == 0 && crashed == 0 ? 0 : 1;
}
