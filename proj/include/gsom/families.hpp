#pragma once

#include <cmath>
#include <concepts>
#include <functional>
#include <string>
#include <utility>

namespace gsom {

struct RoadState {
  double rho = 0.0;
  double w = 0.0;

  friend bool operator==(const RoadState &, const RoadState &) = default;
};

enum class Branch { free_flow, congested };

/// Minimal evaluation hooks a velocity family must expose. Q is always rho*V.
template <typename M>
concept FluxFamily = requires(const M &m, double rho, double w) {
  { m.velocity(rho, w) } -> std::convertible_to<double>;
  { m.d_rho_velocity(rho, w) } -> std::convertible_to<double>;
  { m.d_w_velocity(rho, w) } -> std::convertible_to<double>;
  { m.rho_max(w) } -> std::convertible_to<double>;
  { m.w_min() } -> std::convertible_to<double>;
  { m.w_max() } -> std::convertible_to<double>;
  { m.name() } -> std::convertible_to<std::string>;
};

// Optional closed forms. Algorithms fall back to root finding without them.
template <typename M>
concept HasCriticalDensity = requires(const M &m, double w) {
  { m.critical_density(w) } -> std::convertible_to<double>;
};

template <typename M>
concept HasFluxInverse = requires(const M &m, double q, double w, Branch b) {
  { m.invert_flux(q, w, b) } -> std::convertible_to<double>;
};

template <typename M>
concept HasVelocityInverse = requires(const M &m, double v, double w) {
  { m.density_at_velocity(v, w) } -> std::convertible_to<double>;
};

template <typename M>
concept HasCStar = requires(const M &m) {
  { m.c_star() } -> std::convertible_to<double>;
};

/// V(rho, w) = w (1 - rho / rho_m). Q(rho, w) = w rho (1 - rho / rho_m).
class Greenshields {
public:
  Greenshields(double rho_m, double w_lo, double w_hi)
      : rho_m_(rho_m), w_lo_(w_lo), w_hi_(w_hi) {}
  Greenshields() : Greenshields(1.0, 0.5, 2.0) {}

  std::string name() const { return "greenshields"; }
  double rho_max(double) const { return rho_m_; }
  double w_min() const { return w_lo_; }
  double w_max() const { return w_hi_; }

  double velocity(double rho, double w) const { return w * (1.0 - rho / rho_m_); }
  double d_rho_velocity(double, double w) const { return -w / rho_m_; }
  double d_w_velocity(double rho, double) const { return 1.0 - rho / rho_m_; }

  double critical_density(double) const { return 0.5 * rho_m_; }

  double invert_flux(double q, double w, Branch b) const {
    // rho^2 / rho_m - rho + q / w = 0
    const double disc = std::max(0.0, 1.0 - 4.0 * q / (w * rho_m_));
    const double root = std::sqrt(disc);
    return b == Branch::free_flow ? 0.5 * rho_m_ * (1.0 - root)
                                  : 0.5 * rho_m_ * (1.0 + root);
  }

  double density_at_velocity(double v, double w) const {
    return rho_m_ * (1.0 - v / w);
  }

  // sup (1 - rho) * rho_m / w' * w' (1 - rho'') is attained at rho = rho'' = 0.
  double c_star() const { return 2.0 * rho_m_; }

private:
  double rho_m_;
  double w_lo_;
  double w_hi_;
};

/// Family given by callables. Missing derivatives fall back to central
/// differences.
class CustomFamily {
public:
  using Fn = std::function<double(double, double)>;

  CustomFamily(std::string name, double rho_m, double w_lo, double w_hi, Fn v,
               Fn v_rho = {}, Fn v_w = {})
      : name_(std::move(name)), rho_m_(rho_m), w_lo_(w_lo), w_hi_(w_hi),
        v_(std::move(v)), v_rho_(std::move(v_rho)), v_w_(std::move(v_w)) {}

  std::string name() const { return name_; }
  double rho_max(double) const { return rho_m_; }
  double w_min() const { return w_lo_; }
  double w_max() const { return w_hi_; }

  double velocity(double rho, double w) const { return v_(rho, w); }

  double d_rho_velocity(double rho, double w) const {
    if (v_rho_) {
      return v_rho_(rho, w);
    }
    const double h = 1e-6 * rho_m_;
    return (v_(rho + h, w) - v_(rho - h, w)) / (2.0 * h);
  }

  double d_w_velocity(double rho, double w) const {
    if (v_w_) {
      return v_w_(rho, w);
    }
    const double h = 1e-6 * std::max(1.0, std::abs(w));
    return (v_(rho, w + h) - v_(rho, w - h)) / (2.0 * h);
  }

private:
  std::string name_;
  double rho_m_;
  double w_lo_;
  double w_hi_;
  Fn v_;
  Fn v_rho_;
  Fn v_w_;
};

namespace families {

/// V = w (1 - rho/rho_m)^2, so Q = w rho (1 - rho/rho_m)^2 peaks at rho_m/3.
inline CustomFamily quadratic_decay(double rho_m, double w_lo, double w_hi) {
  return CustomFamily(
      "quadratic-decay", rho_m, w_lo, w_hi,
      [rho_m](double r, double w) {
        const double u = 1.0 - r / rho_m;
        return w * u * u;
      },
      [rho_m](double r, double w) { return -2.0 * w * (1.0 - r / rho_m) / rho_m; },
      [rho_m](double r, double) {
        const double u = 1.0 - r / rho_m;
        return u * u;
      });
}

/// V = w (1 - (rho/rho_m)^3). Curvature of Q vanishes at rho = 0.
inline CustomFamily cubic_speed(double rho_m, double w_lo, double w_hi) {
  return CustomFamily(
      "cubic-speed", rho_m, w_lo, w_hi,
      [rho_m](double r, double w) {
        const double u = r / rho_m;
        return w * (1.0 - u * u * u);
      },
      [rho_m](double r, double w) {
        const double u = r / rho_m;
        return -3.0 * w * u * u / rho_m;
      },
      [rho_m](double r, double) {
        const double u = r / rho_m;
        return 1.0 - u * u * u;
      });
}

/// V = 1 - rho/rho_m regardless of w: the attribute is a passive label.
inline CustomFamily attribute_free(double rho_m, double w_lo, double w_hi) {
  return CustomFamily(
      "attribute-free", rho_m, w_lo, w_hi,
      [rho_m](double r, double) { return 1.0 - r / rho_m; },
      [rho_m](double, double) { return -1.0 / rho_m; },
      [](double, double) { return 0.0; });
}

} // namespace families
} // namespace gsom
