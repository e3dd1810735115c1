#include "rankbreak/diagnostics.hpp"

#include <cmath>
#include <limits>

#include "rankbreak/errors.hpp"

namespace rankbreak {

ComparisonLaplacian comparison_laplacian(const Dataset& data, bool include_all_edges) {
  data.validate();
  if (data.d > kMaxDenseSpectrum) throw ConfigError("comparison_laplacian: d exceeds the dense spectrum cap");
  ComparisonLaplacian out;
  out.matrix = Eigen::MatrixXd::Zero(data.d, data.d);
  for (const auto& obs : data.observations) {
    double p = 0.0;
    for (const auto& e : obs.edges) {
      if (include_all_edges || e.m() <= data.M) p += e.m();
    }
    if (p == 0.0) continue;
    const double kappa = static_cast<double>(obs.offer_set.size());
    if (kappa < 2) continue;
    const double w = p / (kappa * (kappa - 1.0));
    for (int i : obs.offer_set) {
      out.matrix(i, i) += w * (kappa - 1.0);
      for (int i2 : obs.offer_set) {
        if (i2 != i) out.matrix(i, i2) -= w;
      }
    }
  }
  return out;
}

SpectralSummary spectral_quantities(const ComparisonLaplacian& laplacian) {
  const int d = static_cast<int>(laplacian.matrix.rows());
  if (d < 2 || laplacian.matrix.cols() != d) throw DataError("spectral_quantities: malformed matrix");
  SpectralSummary out;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian.matrix);
  if (solver.info() != Eigen::Success) throw NumericError("spectral_quantities: eigensolver failed");
  out.eigenvalues = solver.eigenvalues();
  const double trace = laplacian.matrix.trace();
  const double lambda2 = out.eigenvalues[1];
  const double lambda_max = out.eigenvalues[d - 1];
  if (trace > 0.0) out.alpha = lambda2 * (d - 1.0) / trace;
  if (lambda_max > 0.0) out.beta = trace / (lambda_max * (d - 1.0));
  return out;
}

TopologyConstants topology_constants(const Dataset& data, double bound) {
  data.validate();
  if (!(bound >= 0.0)) throw ConfigError("topology_constants: bound must be non-negative");
  TopologyConstants out;
  out.gamma1 = std::numeric_limits<double>::infinity();
  out.gamma2 = std::numeric_limits<double>::infinity();
  out.nu = 0.0;
  const double exponent = 2.0 * std::exp(2.0 * bound) - 2.0;
  bool any = false;
  for (const auto& obs : data.observations) {
    const double kappa = static_cast<double>(obs.offer_set.size());
    for (const auto& e : obs.edges) {
      if (e.m() > data.M) continue;
      any = true;
      const double m = e.m();
      const double r = e.r();
      out.gamma1 = std::min(out.gamma1, std::pow((r - m) / kappa, exponent));
      out.gamma2 = std::min(out.gamma2, ((r - m) / r) * ((r - m) / r));
      out.nu = std::max(out.nu, m * kappa * kappa / ((r - m) * (r - m)));
    }
  }
  if (!any) throw DataError("topology_constants: no edges retained at order M");

  double worst = 0.0;
  for (const auto& obs : data.observations) {
    const double kappa = static_cast<double>(obs.offer_set.size());
    for (const auto& e : obs.edges) {
      if (e.m() > data.M) continue;
      const double m = e.m();
      const double r = e.r();
      const double drop = 4.0 * std::exp(16.0 * bound) / out.gamma1 * m * m * r * r * kappa * kappa /
                          std::pow(r - m, 5.0);
      worst = std::max(worst, drop);
    }
  }
  out.gamma3 = 1.0 - worst;
  return out;
}

double eta_correction(int m, int r) {
  if (m < 1 || r <= m) throw ConfigError("eta_correction: need 1 <= m < r");
  const double md = m;
  const double rd = r;
  double eta = 0.0;
  for (int u = 0; u < m; ++u) {
    const double ru = rd - u;
    eta += 1.0 / ru + u * (md - u) / (md * ru * ru);
  }
  for (int u = 1; u < m; ++u) {
    for (int u2 = u + 1; u2 < m; ++u2) {
      eta += (2.0 * u / (md * (rd - u))) * ((md - u2) / (rd - u2));
    }
  }
  return eta;
}

CramerRaoResult cramer_rao_lower_bound(const Dataset& data, const ComparisonLaplacian& all_edge_laplacian) {
  data.validate();
  const int d = data.d;
  if (all_edge_laplacian.matrix.rows() != d) throw DataError("cramer_rao_lower_bound: Laplacian size mismatch");

  CramerRaoResult out;
  double information = 0.0;
  for (const auto& obs : data.observations) {
    for (const auto& e : obs.edges) {
      const double eta = eta_correction(e.m(), e.r());
      out.eta_values.push_back(eta);
      const double contrib = e.m() - eta;
      information += contrib;
      out.mu = std::max(out.mu, contrib);
    }
  }
  if (out.eta_values.empty()) throw DataError("cramer_rao_lower_bound: dataset has no edges");

  const double trace_term = (d - 1.0) * (d - 1.0) / information;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(all_edge_laplacian.matrix);
  if (solver.info() != Eigen::Success) throw NumericError("cramer_rao_lower_bound: eigensolver failed");
  const Eigen::VectorXd& ev = solver.eigenvalues();
  const double zero_tol = 1e-12 * std::max(1.0, ev[d - 1]);
  double spectral_term = 0.0;
  for (int i = 1; i < d; ++i) {
    if (ev[i] <= zero_tol) {
      spectral_term = std::numeric_limits<double>::infinity();
      break;
    }
    spectral_term += 1.0 / ev[i];
  }
  spectral_term /= out.mu;

  out.bound = std::max(trace_term, spectral_term);
  return out;
}

ErrorUpperBound error_upper_bound(const Dataset& data, double bound, const SpectralSummary& spectral,
                                  const TopologyConstants& topology) {
  if (!(bound >= 0.0)) throw ConfigError("error_upper_bound: bound must be non-negative");
  const double n_eff = static_cast<double>(data.effective_sample_size());
  if (n_eff <= 0.0) throw DataError("error_upper_bound: no edges retained at order M");
  const double gamma3_eff = data.M <= 3 ? 1.0 : topology.gamma3;
  if (!(spectral.alpha > 0.0)) throw NumericError("error_upper_bound: alpha = 0 (disconnected graph)");
  if (!(topology.gamma1 > 0.0) || !(topology.gamma2 > 0.0)) {
    throw NumericError("error_upper_bound: degenerate edge-shape constants");
  }
  if (!(gamma3_eff > 0.0)) {
    throw NumericError("error_upper_bound: non-positive gamma3 at order cap above 3; bound undefined");
  }

  const double d = static_cast<double>(data.d);
  const double dlogd = d * std::log(d);
  ErrorUpperBound out;
  out.rhs = 40.0 * std::exp(7.0 * bound) /
            (spectral.alpha * topology.gamma1 * std::pow(topology.gamma2, 1.5) * gamma3_eff) *
            std::sqrt(dlogd / n_eff);

  double p_max = 0.0;
  double kappa_min = std::numeric_limits<double>::infinity();
  for (const auto& obs : data.observations) {
    double p = 0.0;
    for (const auto& e : obs.edges) {
      if (e.m() <= data.M) p += e.m();
    }
    if (p == 0.0) continue;
    p_max = std::max(p_max, p);
    kappa_min = std::min(kappa_min, static_cast<double>(obs.offer_set.size()));
  }
  const double denom = spectral.alpha * topology.gamma1 * topology.gamma2 * gamma3_eff;
  const double required = std::pow(2.0, 14.0) * std::exp(20.0 * bound) * topology.nu * topology.nu /
                          (denom * denom * spectral.beta) * (p_max / kappa_min) * dlogd;
  out.sample_condition_met = n_eff >= required;
  return out;
}

double directional_second_difference(const Eigen::VectorXd& theta, const Dataset& data,
                                     const Eigen::VectorXd& direction, double step) {
  if (!(step > 0.0)) throw ConfigError("directional_second_difference: step must be positive");
  const double up = total_log_likelihood(theta + step * direction, data, 1).value;
  const double mid = total_log_likelihood(theta, data, 1).value;
  const double dn = total_log_likelihood(theta - step * direction, data, 1).value;
  return (up - 2.0 * mid + dn) / (step * step);
}

CurvatureCheck numerical_hessian_check(const Eigen::VectorXd& theta, const Dataset& data, int directions,
                                       double step, RngStream& rng) {
  if (directions < 1) throw ConfigError("numerical_hessian_check: need at least one direction");
  CurvatureCheck out;
  out.max_curvature = -std::numeric_limits<double>::infinity();
  out.min_curvature = std::numeric_limits<double>::infinity();
  const int d = static_cast<int>(theta.size());
  for (int k = 0; k < directions; ++k) {
    Eigen::VectorXd u(d);
    for (int i = 0; i < d; ++i) u[i] = rng.normal();
    u.array() -= u.mean();
    const double norm = u.norm();
    if (norm < 1e-12) {
      --k;  // astronomically unlikely; redraw
      continue;
    }
    u /= norm;
    const double curv = directional_second_difference(theta, data, u, step);
    out.max_curvature = std::max(out.max_curvature, curv);
    out.min_curvature = std::min(out.min_curvature, curv);
    ++out.directions;
  }
  return out;
}

DiagnosticsReport diagnose(const Dataset& data, double bound) {
  data.validate();
  DiagnosticsReport rep;
  const ComparisonLaplacian retained = comparison_laplacian(data, false);
  rep.laplacian_trace = retained.matrix.trace();
  const SpectralSummary spectral = spectral_quantities(retained);
  rep.alpha = spectral.alpha;
  rep.beta = spectral.beta;
  rep.effective_sample_size = data.effective_sample_size();

  const double nan = std::numeric_limits<double>::quiet_NaN();
  TopologyConstants topo;
  if (rep.effective_sample_size > 0) {
    topo = topology_constants(data, bound);
    rep.gamma1 = topo.gamma1;
    rep.gamma2 = topo.gamma2;
    rep.gamma3 = topo.gamma3;
    rep.nu = topo.nu;
  } else {
    // Nothing retained at this order: shape constants and the upper bound are
    // undefined, but the report is still produced (callers warn, not fail).
    rep.gamma1 = rep.gamma2 = rep.gamma3 = rep.nu = nan;
  }

  bool any_edges = false;
  for (const auto& obs : data.observations) any_edges = any_edges || !obs.edges.empty();
  if (any_edges) {
    const ComparisonLaplacian full = comparison_laplacian(data, true);
    const CramerRaoResult cr = cramer_rao_lower_bound(data, full);
    rep.cramer_rao_bound = cr.bound;
    rep.eta_values = cr.eta_values;
    rep.mu = cr.mu;
  } else {
    rep.cramer_rao_bound = nan;
    rep.mu = nan;
  }

  rep.error_upper_bound_rhs = nan;
  rep.sample_condition_met = false;
  if (rep.effective_sample_size > 0) {
    try {
      const ErrorUpperBound ub = error_upper_bound(data, bound, spectral, topo);
      rep.error_upper_bound_rhs = ub.rhs;
      rep.sample_condition_met = ub.sample_condition_met;
    } catch (const NumericError&) {
      // alpha = 0 or non-positive effective gamma3: leave the bound undefined.
    }
  }
  return rep;
}

}  // namespace rankbreak
