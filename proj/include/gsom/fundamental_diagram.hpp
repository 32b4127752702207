#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "gsom/errors.hpp"
#include "gsom/families.hpp"
#include "gsom/roots.hpp"

namespace gsom {

/// States closer than this (per coordinate) are the same state.
inline constexpr double kStateTol = 1e-10;
/// Slack accepted on domain bounds before raising DomainError.
inline constexpr double kDomainSlack = 1e-9;

/// Checked scalar constructions over a velocity family.
template <FluxFamily M> class FundamentalDiagram {
public:
  explicit FundamentalDiagram(M model) : model_(std::move(model)) {}

  const M &model() const { return model_; }
  double w_min() const { return model_.w_min(); }
  double w_max() const { return model_.w_max(); }
  double rho_max(double w) const { return model_.rho_max(w); }

  double flux(double rho, double w) const {
    check(rho, w);
    return clamp_rho(rho, w) * model_.velocity(clamp_rho(rho, w), w);
  }
  double flux(const RoadState &u) const { return flux(u.rho, u.w); }

  double velocity(double rho, double w) const {
    check(rho, w);
    return model_.velocity(clamp_rho(rho, w), w);
  }
  double velocity(const RoadState &u) const { return velocity(u.rho, u.w); }

  double max_velocity(double w) const {
    check(0.0, w);
    return model_.velocity(0.0, w);
  }

  /// First characteristic speed, d/drho of Q.
  double lambda1(double rho, double w) const {
    check(rho, w);
    const double r = clamp_rho(rho, w);
    return model_.velocity(r, w) + r * model_.d_rho_velocity(r, w);
  }
  double lambda1(const RoadState &u) const { return lambda1(u.rho, u.w); }

  /// rho * dQ/drho - Q, negative for rho > 0 under the hypotheses.
  double f(double rho, double w) const {
    const double r = clamp_rho(rho, w);
    return r * lambda1(r, w) - flux(r, w);
  }

  double critical_density(double w) const {
    check(0.0, w);
    if constexpr (HasCriticalDensity<M>) {
      return model_.critical_density(w);
    } else {
      return roots::golden_max(
          [&](double r) { return r * model_.velocity(r, w); }, 0.0,
          model_.rho_max(w));
    }
  }

  double max_flux(double w) const {
    const double s = critical_density(w);
    return s * model_.velocity(s, w);
  }

  double demand(double rho, double w) const {
    return clamp_rho(rho, w) <= critical_density(w) ? flux(rho, w) : max_flux(w);
  }
  double demand(const RoadState &u) const { return demand(u.rho, u.w); }

  double supply(double rho, double w) const {
    return clamp_rho(rho, w) <= critical_density(w) ? max_flux(w) : flux(rho, w);
  }
  double supply(const RoadState &u) const { return supply(u.rho, u.w); }

  /// Density on `branch` carrying flux q at attribute w.
  double invert_flux_on_branch(double q, double w, Branch branch) const {
    check(0.0, w);
    const double qmax = max_flux(w);
    if (q > qmax + 1e-12 * std::max(1.0, qmax) || q < -1e-12) {
      std::ostringstream os;
      os.precision(17);
      os << "flux " << q << " outside [0, " << qmax << "] at w=" << w;
      throw InfeasibleFlux(os.str());
    }
    q = std::clamp(q, 0.0, qmax);
    const double sigma = critical_density(w);
    if (q >= qmax) {
      return sigma;
    }
    if constexpr (HasFluxInverse<M>) {
      const double r = model_.invert_flux(q, w, branch);
      return branch == Branch::free_flow ? std::clamp(r, 0.0, sigma)
                                         : std::clamp(r, sigma, model_.rho_max(w));
    } else {
      auto g = [&](double r) { return r * model_.velocity(r, w) - q; };
      if (branch == Branch::free_flow) {
        return roots::bisect(g, 0.0, sigma);
      }
      return roots::bisect(g, sigma, model_.rho_max(w));
    }
  }

  /// Density on the other side of sigma(w) with the same flux.
  double companion_density(double rho, double w) const {
    check(rho, w);
    const double r = clamp_rho(rho, w);
    const double sigma = critical_density(w);
    if (r == sigma) {
      return sigma;
    }
    const double q = flux(r, w);
    return invert_flux_on_branch(q, w, r < sigma ? Branch::congested
                                                 : Branch::free_flow);
  }

  /// Density with attribute w_bar moving at speed v_plus; 0 if unreachable.
  double rho_dagger(double w_bar, double v_plus) const {
    check(0.0, w_bar);
    if (v_plus < 0.0) {
      throw DomainError("rho_dagger: negative velocity");
    }
    const double vmax = model_.velocity(0.0, w_bar);
    if (v_plus > vmax) {
      return 0.0;
    }
    const double rmax = model_.rho_max(w_bar);
    if (v_plus <= model_.velocity(rmax, w_bar)) {
      return rmax;
    }
    if constexpr (HasVelocityInverse<M>) {
      return std::clamp(model_.density_at_velocity(v_plus, w_bar), 0.0, rmax);
    } else {
      return roots::bisect(
          [&](double r) { return model_.velocity(r, w_bar) - v_plus; }, 0.0, rmax);
    }
  }

  /// Throws DomainError for states outside the admissible box.
  void check(double rho, double w) const {
    if (!std::isfinite(rho) || !std::isfinite(w)) {
      throw DomainError("non-finite state");
    }
    const double span = std::max(1.0, std::abs(model_.w_max()));
    if (w < model_.w_min() - kDomainSlack * span ||
        w > model_.w_max() + kDomainSlack * span) {
      std::ostringstream os;
      os.precision(17);
      os << "w=" << w << " outside [" << model_.w_min() << ", " << model_.w_max()
         << "]";
      throw DomainError(os.str());
    }
    const double rmax = model_.rho_max(w);
    if (rho < -kDomainSlack || rho > rmax + kDomainSlack) {
      std::ostringstream os;
      os.precision(17);
      os << "rho=" << rho << " outside [0, " << rmax << "]";
      throw DomainError(os.str());
    }
  }

  void check(const RoadState &u) const { check(u.rho, u.w); }

  bool same_state(const RoadState &a, const RoadState &b) const {
    return std::abs(a.rho - b.rho) <= kStateTol && std::abs(a.w - b.w) <= kStateTol;
  }

private:
  double clamp_rho(double rho, double w) const {
    return std::clamp(rho, 0.0, model_.rho_max(w));
  }

  M model_;
};

} // namespace gsom
