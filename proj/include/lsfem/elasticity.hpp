#pragma once

#include "lsfem/interface.hpp"
#include "lsfem/jet.hpp"

#include <array>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

namespace lsfem {

struct Material {
  double lambda0 = 1.0, lambda1 = 1.0, mu0 = 1.0, mu1 = 1.0;

  double lambda(int side) const { return side == 0 ? lambda0 : lambda1; }
  double mu(int side) const { return side == 0 ? mu0 : mu1; }

  void validate() const {
    if (!(lambda0 > 0.0 && lambda1 > 0.0 && mu0 > 0.0 && mu1 > 0.0)) {
      throw ConfigError("Lame parameters must be positive");
    }
  }
};

/// A tau = (tau - lambda / (2 lambda + 2 mu) tr(tau) I) / (2 mu).
inline Mat2 compliance_apply(const Material& m, int side, const Mat2& tau) {
  const double l = m.lambda(side), mu = m.mu(side);
  return (tau - l / (2.0 * l + 2.0 * mu) * tau.trace() * Mat2::Identity()) / (2.0 * mu);
}

inline Mat2 strain(const Mat2& grad_u) { return 0.5 * (grad_u + grad_u.transpose()); }

inline Mat2 stress_from_strain(const Material& m, int side, const Mat2& eps) {
  return 2.0 * m.mu(side) * eps + m.lambda(side) * eps.trace() * Mat2::Identity();
}

/// Exact fields at a point; grad_u(i, j) = d u_i / d x_j, div_sigma_j = d_i sigma_ij.
struct PointState {
  Vec2 u;
  Mat2 grad_u;
  Mat2 sigma;
  Vec2 div_sigma;
};

using DisplacementJet = std::function<std::array<Jet2, 2>(const Jet2& x, const Jet2& y)>;

class ManufacturedCase {
 public:
  ManufacturedCase(std::string name, Interface iface, Material material, std::array<DisplacementJet, 2> u)
      : name_(std::move(name)), iface_(std::move(iface)), material_(material), u_(std::move(u)) {
    material_.validate();
  }

  const std::string& name() const { return name_; }
  const Interface& interface() const { return iface_; }
  const Material& material() const { return material_; }

  void set_interface(Interface iface) { iface_ = std::move(iface); }

  PointState state(int side, const Vec2& x) const {
    const auto c = u_[side](Jet2::variable(x.x(), 0), Jet2::variable(x.y(), 1));
    PointState s;
    s.u = {c[0].v, c[1].v};
    s.grad_u.row(0) = c[0].g.transpose();
    s.grad_u.row(1) = c[1].g.transpose();
    s.sigma = stress_from_strain(material_, side, strain(s.grad_u));
    const double l = material_.lambda(side), mu = material_.mu(side);
    const Vec2 grad_div = c[0].H.row(0).transpose() + c[1].H.row(1).transpose();
    for (int j = 0; j < 2; ++j) s.div_sigma[j] = (l + mu) * grad_div[j] + mu * c[j].H.trace();
    return s;
  }

  Vec2 u(int side, const Vec2& x) const { return state(side, x).u; }
  Mat2 grad_u(int side, const Vec2& x) const { return state(side, x).grad_u; }
  Mat2 sigma(int side, const Vec2& x) const { return state(side, x).sigma; }
  Vec2 div_sigma(int side, const Vec2& x) const { return state(side, x).div_sigma; }

  Vec2 f(int side, const Vec2& x) const { return -div_sigma(side, x); }

  /// n . (sigma^0 - sigma^1) on the interface, with n pointing into Omega_1.
  Vec2 a(const Vec2& x, const Vec2& n) const { return (sigma(0, x) - sigma(1, x)).transpose() * n; }

  /// u^0 - u^1 on the interface.
  Vec2 b(const Vec2& x) const { return u(0, x) - u(1, x); }

  /// Row i is the tangential gradient of b_i.
  Mat2 grad_gamma_b(const Vec2& x, const Vec2& n) const {
    return (grad_u(0, x) - grad_u(1, x)) * (Mat2::Identity() - n * n.transpose());
  }

 private:
  std::string name_;
  Interface iface_;
  Material material_;
  std::array<DisplacementJet, 2> u_;
};

/// Root of alpha sin(2 omega) + sin(2 omega alpha) = 0 near 0.5444837 for omega = 3 pi / 4.
inline double singular_exponent() {
  static const double alpha = [] {
    const double w = 0.75 * std::numbers::pi;
    auto g = [w](double a) { return a * std::sin(2.0 * w) + std::sin(2.0 * w * a); };
    double lo = 0.5, hi = 0.6;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
      const double mid = 0.5 * (lo + hi);
      (g(lo) > 0.0) == (g(mid) > 0.0) ? lo = mid : hi = mid;
    }
    return 0.5 * (lo + hi);
  }();
  return alpha;
}

inline std::vector<std::string> case_names() { return {"ex1", "ex2", "ex3", "ex4", "ex5", "patch"}; }

inline Material default_material(const std::string& name) {
  if (name == "ex1" || name == "ex4") return {5.0, 1.0, 2.0, 1.0};
  if (name == "ex2") return {100.0, 1.0, 1.0, 1.0};
  if (name == "ex3" || name == "ex5") return {1.0, 1.0, 1.0, 1.0};
  if (name == "patch") return {2.0, 2.0, 1.5, 1.5};
  throw ConfigError("unknown case '" + name + "'");
}

namespace detail {

inline DisplacementJet smooth_displacement(double lambda) {
  return [lambda](const Jet2& x, const Jet2& y) -> std::array<Jet2, 2> {
    const double pi = std::numbers::pi;
    const Jet2 s = sin(pi * x) * sin(pi * y) * (1.0 / (1.0 + lambda));
    return {sin(2.0 * pi * y) * (cos(2.0 * pi * x) - 1.0) + s, sin(2.0 * pi * x) * (1.0 - cos(2.0 * pi * y)) + s};
  };
}

inline DisplacementJet corner_displacement(double lambda, double mu) {
  return [lambda, mu](const Jet2& x, const Jet2& y) -> std::array<Jet2, 2> {
    const double w = 0.75 * std::numbers::pi;
    const double al = singular_exponent();
    const double c1 = -std::cos((al + 1.0) * w) / std::cos((al - 1.0) * w);
    const double c2 = 2.0 * (lambda + 2.0 * mu) / (lambda + mu);
    const Jet2 r = sqrt(x * x + y * y);
    const Jet2 t = atan2(y, x);
    const Jet2 ra = pow(r, al) * (1.0 / (2.0 * mu));
    const Jet2 ur = ra * (-(al + 1.0) * cos((al + 1.0) * t) + (c2 - (al + 1.0)) * c1 * cos((al - 1.0) * t));
    const Jet2 ut = ra * ((al + 1.0) * sin((al + 1.0) * t) + (c2 + al - 1.0) * c1 * sin((al - 1.0) * t));
    const Jet2 ct = cos(t), st = sin(t);
    return {ur * ct - ut * st, ur * st + ut * ct};
  };
}

}  // namespace detail

/// The manufactured solution catalog: ex1 ... ex5 and a linear patch case.
inline ManufacturedCase manufactured_case(const std::string& name, const Material& m) {
  const double pi = std::numbers::pi;
  if (name == "ex1" || name == "ex2" || name == "ex4") {
    return {name, name == "ex4" ? Interface::lshape() : Interface::circle(Vec2::Zero(), 0.7), m,
            {detail::smooth_displacement(m.lambda0), detail::smooth_displacement(m.lambda1)}};
  }
  if (name == "ex3") {
    return {name, Interface::star5(), m,
            {[pi](const Jet2& x, const Jet2& y) -> std::array<Jet2, 2> {
               return {cos(pi * x) * cos(pi * y), cos(pi * y)};
             },
             [pi](const Jet2& x, const Jet2& y) -> std::array<Jet2, 2> {
               return {sin(pi * x) * sin(pi * y), x * (1.0 - x) * sin(pi * y)};
             }}};
  }
  if (name == "ex5") {
    return {name, Interface::lshape(), m,
            {detail::corner_displacement(m.lambda0, m.mu0),
             [](const Jet2&, const Jet2&) -> std::array<Jet2, 2> { return {Jet2(1.0), Jet2(1.0)}; }}};
  }
  if (name == "patch") {
    auto lin = [](const Jet2& x, const Jet2& y) -> std::array<Jet2, 2> { return {x + 2.0 * y, 3.0 * x - y}; };
    return {name, Interface::circle(Vec2::Zero(), 0.7), m, {lin, lin}};
  }
  throw ConfigError("unknown case '" + name + "'");
}

inline ManufacturedCase manufactured_case(const std::string& name) {
  return manufactured_case(name, default_material(name));
}

}  // namespace lsfem
