#include "mpfb/mild_solver.hpp"

#include <algorithm>
#include <cmath>

#include "mpfb/fft.hpp"
#include "mpfb/rng.hpp"
#include "mpfb/semigroup.hpp"

namespace mpfb {

namespace {

// phi_1(z) = (e^z - 1)/z and phi_2(z) = (e^z - 1 - z)/z^2, series near 0.
double phi1(double z) {
  if (std::abs(z) < 1e-2)
    return 1.0 + z * (1.0 / 2 + z * (1.0 / 6 + z * (1.0 / 24 + z * (1.0 / 120 + z / 720))));
  return std::expm1(z) / z;
}

double phi2(double z) {
  if (std::abs(z) < 1e-2)
    return 1.0 / 2 + z * (1.0 / 6 + z * (1.0 / 24 + z * (1.0 / 120 + z * (1.0 / 720 + z / 5040))));
  return (std::expm1(z) - z) / (z * z);
}

template <class G>
SpectralWeights weights_of(double s, G&& g) {
  return spectral_weights(s, [&](double lam) { return Cplx(g(lam)); });
}

void require_lattice(const SpectralField& f, const char* what) {
  if (!f.is_lattice()) throw Error(ErrorCode::UnsupportedRepresentation, std::string(what) + " needs a lattice field");
}

std::vector<char> dealias_mask(const LatticeGrid& g, double fraction) {
  std::vector<char> keep(g.size(), 1);
  if (fraction >= 1.0) return keep;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto m = g.modes(i);
    for (int a = 0; a < 3; ++a)
      if (std::abs(m[a]) > fraction * (g.n[a] / 2)) keep[i] = 0;
  }
  return keep;
}

/// Weighted per-frequency combination out = sum_k g_k(A) in_k.
struct Term {
  const SpectralField* field;
  std::function<double(double)> g;
};

SpectralField combine(const std::vector<Term>& terms) {
  SpectralField out = *terms.front().field;
  out.set_zero();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Vec3 xi = out.frequency(i);
    const double s = xi.squaredNorm();
    Vec6c acc = Vec6c::Zero();
    for (const Term& t : terms) acc += spectral_apply(xi, weights_of(s, t.g), t.field->value(i));
    out.set_value(i, acc);
  }
  return out;
}

std::vector<double> block_norms_fb(const SpectralField& f, const DyadicPartition& part) {
  auto b = block_lp_norms(f, 1.0, part);
  for (std::size_t k = 0; k < b.size(); ++k) b[k] *= std::pow(2.0, -(part.j_min() + static_cast<int>(k)));
  return b;
}

StepDiagnostics diagnose(const SpectralField& U, double t, const SolverConfig& cfg, const DyadicPartition& part) {
  StepDiagnostics d;
  d.time = t;
  d.divergence_residual = U.divergence_residual();
  d.hermitian_residual = U.hermitian_residual();
  d.fb_norm = fb_norm(U, -1.0, 1.0, cfg.r, part);
  return d;
}

bool uniform_times(const std::vector<double>& t) {
  if (t.size() < 2) return false;
  const double h = t[1] - t[0];
  for (std::size_t k = 1; k < t.size(); ++k)
    if (std::abs((t[k] - t[k - 1]) - h) > 1e-9 * std::max(1.0, std::abs(h))) return false;
  return true;
}

}  // namespace

DyadicPartition partition_covering(const LatticeGrid& grid) {
  const double hmin = grid.h.minCoeff();
  const double rmax = grid.half_extent().norm();
  const int j_min = static_cast<int>(std::floor(std::log2(hmin * 0.75)));
  const int j_max = static_cast<int>(std::ceil(std::log2(rmax * 4.0 / 3.0)));
  return DyadicPartition(j_min, std::max(j_max, j_min + 1));
}

DyadicPartition SolverConfig::partition() const {
  if (partition_range) return DyadicPartition(partition_range->first, partition_range->second);
  return partition_covering(grid());
}

void SolverConfig::validate() const {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidParameter, "solver.dt must be positive");
  if (!(T > 0.0)) throw Error(ErrorCode::InvalidParameter, "solver.T must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidParameter, "solver.alpha must lie in (0,1)");
  if (!(r >= 1.0)) throw Error(ErrorCode::InvalidParameter, "solver.r must lie in [1, inf]");
  if (!(dealias_fraction > 0.0 && dealias_fraction <= 1.0))
    throw Error(ErrorCode::InvalidParameter, "solver.dealias_fraction must lie in (0,1]");
  if (picard_depth < 1) throw Error(ErrorCode::InvalidParameter, "solver.picard_depth must be >= 1");
  if (save_stride < 1) throw Error(ErrorCode::InvalidParameter, "save stride must be >= 1");
  (void)grid();
}

namespace {

void leray_in_place(SpectralField& out) {
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Vec3 xi = out.frequency(i);
    const double s = xi.squaredNorm();
    if (s == 0.0) {
      for (int a = 0; a < 3; ++a) out.component(a)[i] = 0.0;
      continue;
    }
    Cplx d(0.0);
    for (int a = 0; a < 3; ++a) d += xi[a] * out.component(a)[i];
    for (int a = 0; a < 3; ++a) out.component(a)[i] -= xi[a] * d / s;
  }
  out.divergence_free = true;
}

}  // namespace

SpectralField leray_project(const SpectralField& f) {
  SpectralField out = f;
  leray_in_place(out);
  return out;
}

void dealias(SpectralField& f, double fraction) {
  require_lattice(f, "dealias");
  const auto keep = dealias_mask(f.lattice(), fraction);
  for (int c = 0; c < kComponents; ++c)
    for (std::size_t i = 0; i < f.size(); ++i)
      if (!keep[i]) f.component(c)[i] = 0.0;
}

SpectralField bilinear_flux(const SpectralField& U1, const SpectralField& U2, const SolverConfig& cfg) {
  require_lattice(U1, "nonlinear flux");
  require_lattice(U2, "nonlinear flux");
  if (!U1.same_layout(U2)) throw Error(ErrorCode::InvalidParameter, "flux operands on different lattices");
  const LatticeGrid& g = U1.lattice();
  const auto keep = dealias_mask(g, cfg.dealias_fraction);
  const bool same = &U1 == &U2;
  LatticeTransform tr(g);
  const std::size_t n = g.size();

  std::vector<Cplx> spec(n);
  auto physical = [&](const SpectralField& f, int c, std::vector<Cplx>& out) {
    const auto& comp = f.component(c);
    for (std::size_t i = 0; i < n; ++i) spec[i] = keep[i] ? comp[i] : Cplx(0.0);
    tr.to_physical(spec, out);
  };
  std::array<std::vector<Cplx>, 3> u1;
  std::array<std::vector<Cplx>, 6> v2;
  for (int c = 0; c < 3; ++c) physical(U1, c, u1[c]);
  for (int c = same ? 3 : 0; c < 6; ++c) physical(U2, c, v2[c]);

  SpectralField out = SpectralField::on_lattice(g);
  std::vector<Cplx> prod(n);
  std::vector<double> xi_axis[3];
  for (int a = 0; a < 3; ++a) {
    xi_axis[a].resize(g.n[a]);
    for (int k = 0; k < g.n[a]; ++k) xi_axis[a][k] = LatticeGrid::mode(k, g.n[a]) * g.h[a];
  }
  // out_l += i xi_k F[p] for the product p = a_k b_l.
  auto accumulate = [&](const std::vector<Cplx>& a, const std::vector<Cplx>& b, int k, int l_out,
                        int k2, int l_out2) {
    for (std::size_t i = 0; i < n; ++i) prod[i] = a[i] * b[i];
    tr.to_spectral(prod, spec);
    std::size_t i = 0;
    for (int i0 = 0; i0 < g.n[0]; ++i0)
      for (int i1 = 0; i1 < g.n[1]; ++i1)
        for (int i2 = 0; i2 < g.n[2]; ++i2, ++i) {
          if (!keep[i]) continue;
          const double xi[3] = {xi_axis[0][i0], xi_axis[1][i1], xi_axis[2][i2]};
          out.component(l_out)[i] += Cplx(0.0, xi[k]) * spec[i];
          if (l_out2 >= 0) out.component(l_out2)[i] += Cplx(0.0, xi[k2]) * spec[i];
        }
  };
  for (int k = 0; k < 3; ++k)
    for (int l = 0; l < 3; ++l) {
      if (same) {
        if (l < k) continue;
        // u_k u_l contributes to row l through xi_k and to row k through xi_l.
        if (l == k) accumulate(u1[k], u1[l], k, l, -1, -1);
        else accumulate(u1[k], u1[l], k, l, l, k);
      } else {
        accumulate(u1[k], v2[l], k, l, -1, -1);
      }
    }
  for (int k = 0; k < 3; ++k)
    for (int l = 0; l < 3; ++l) accumulate(u1[k], v2[3 + l], k, 3 + l, -1, -1);

  leray_in_place(out);
  out.real_valued = U1.real_valued && U2.real_valued;
  return out;
}

SpectralField nonlinear_flux(const SpectralField& U, const SolverConfig& cfg) {
  return bilinear_flux(U, U, cfg);
}

SpectralField linear_propagate(const SpectralField& U, double t) {
  if (!(t >= 0.0)) throw Error(ErrorCode::InvalidTime, "propagation needs t >= 0");
  SpectralField out = U;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Vec3 xi = out.frequency(i);
    const double s = xi.squaredNorm();
    out.set_value(i, spectral_apply(xi, weights_of(s, [t](double l) { return std::exp(-t * l); }), U.value(i)));
  }
  return out;
}

SpectralField duhamel_step(const SpectralField& U, double t, double dt, const SolverConfig& cfg) {
  (void)t;
  require_lattice(U, "duhamel_step");
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidTime, "step must be positive");
  if (dt > cfg.dt * (1.0 + 1e-12)) throw Error(ErrorCode::InvalidParameter, "step exceeds solver.dt");
  const double h = dt;
  auto E = [h](double l) { return std::exp(-h * l); };
  auto P1 = [h](double l) { return h * phi1(-h * l); };
  auto P2 = [h](double l) { return h * phi2(-h * l); };
  if (!cfg.nonlinear) {
    SpectralField out = combine({{&U, E}});
    out.real_valued = U.real_valued;
    out.divergence_free = U.divergence_free;
    return out;
  }
  const SpectralField FU = nonlinear_flux(U, cfg);
  SpectralField a = combine({{&U, E}, {&FU, [&](double l) { return -P1(l); }}});
  a.real_valued = U.real_valued;
  SpectralField Fa = nonlinear_flux(a, cfg);
  Fa.axpy(-1.0, FU);
  SpectralField out = a;
  out.axpy(1.0, combine({{&Fa, [&](double l) { return -P2(l); }}}));
  out.real_valued = U.real_valued;
  out.divergence_free = true;

  const DyadicPartition part = cfg.partition();
  const auto bp = block_norms_fb(a, part);
  const auto bc = block_norms_fb(out, part);
  const double top = *std::max_element(bp.begin(), bp.end());
  for (std::size_t k = 0; k < bp.size(); ++k) {
    if (bp[k] < 1e-3 * top) continue;
    if (std::abs(bc[k] - bp[k]) > 0.2 * bp[k])
      throw Error(ErrorCode::StepTooLarge, "corrector moved block " + std::to_string(part.j_min() + static_cast<int>(k)) +
                                               " by more than 20%");
  }
  return out;
}

namespace {

SpectralField advance(const SpectralField& U, double t, double h, int depth, const SolverConfig& cfg) {
  try {
    return duhamel_step(U, t, h, cfg);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::StepTooLarge || depth >= 3) throw;
  }
  SpectralField mid = advance(U, t, 0.5 * h, depth + 1, cfg);
  return advance(mid, t + 0.5 * h, 0.5 * h, depth + 1, cfg);
}

}  // namespace

Trajectory solve_mild(const SpectralField& U0, const SolverConfig& cfg) {
  cfg.validate();
  require_lattice(U0, "solve_mild");
  const DyadicPartition part = cfg.partition();
  Trajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(U0);
  traj.diagnostics.push_back(diagnose(U0, 0.0, cfg, part));
  const long steps = std::max(1L, static_cast<long>(std::ceil(cfg.T / cfg.dt - 1e-9)));
  const double h = cfg.T / steps;
  SpectralField U = U0;
  for (long k = 0; k < steps; ++k) {
    const double t = k * h;
    try {
      U = advance(U, t, h, 0, cfg);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::StepTooLarge)
        throw BlowUpError("step rejected after 3 halvings at t = " + std::to_string(t), traj);
      throw;
    }
    const double tn = (k + 1 == steps) ? cfg.T : (k + 1) * h;
    if ((k + 1) % cfg.save_stride == 0 || k + 1 == steps) {
      traj.times.push_back(tn);
      traj.states.push_back(U);
      traj.diagnostics.push_back(diagnose(U, tn, cfg, part));
    }
  }
  return traj;
}

std::vector<SpectralField> picard_terms(const SpectralField& f, double t, int n_max, const SolverConfig& cfg,
                                        const PicardTimeRule& rule) {
  require_lattice(f, "picard_terms");
  if (n_max < 1) throw Error(ErrorCode::InvalidParameter, "n_max must be >= 1");
  if (!(t >= 0.0)) throw Error(ErrorCode::InvalidTime, "picard_terms needs t >= 0");
  std::vector<SpectralField> out;
  out.push_back(linear_propagate(f, t));
  if (n_max == 1) return out;
  if (t == 0.0) {
    for (int n = 2; n <= n_max; ++n) {
      SpectralField z = f;
      z.set_zero();
      out.push_back(std::move(z));
    }
    return out;
  }

  if (!rule.gauss.nodes.empty()) {
    if (n_max > 2) throw Error(ErrorCode::InvalidParameter, "Gauss time rule supports n_max <= 2 only");
    SpectralField acc = f;
    acc.set_zero();
    for (std::size_t q = 0; q < rule.gauss.size(); ++q) {
      const double tau = rule.gauss.nodes[q];
      SpectralField F;
      {
        const SpectralField a1 = linear_propagate(f, tau);
        F = nonlinear_flux(a1, cfg);
      }
      const double w = rule.gauss.weights[q], lag = t - tau;
      // Accumulate in place; the lattice path may be large.
      for (std::size_t i = 0; i < acc.size(); ++i) {
        const Vec3 xi = acc.frequency(i);
        const SpectralWeights sw = spectral_weights(xi.squaredNorm(), [w, lag](double l) {
          return Cplx(-w * std::exp(-lag * l));
        });
        acc.set_value(i, acc.value(i) + spectral_apply(xi, sw, F.value(i)));
      }
    }
    acc.real_valued = f.real_valued;
    acc.divergence_free = true;
    out.push_back(std::move(acc));
    return out;
  }

  const long K = std::max(1L, static_cast<long>(std::ceil(t / cfg.dt - 1e-9)));
  const double h = t / K;
  auto E = [h](double l) { return std::exp(-h * l); };
  auto W0 = [h](double l) { return -h * (phi1(-h * l) - phi2(-h * l)); };
  auto W1 = [h](double l) { return -h * phi2(-h * l); };

  // cur[n-1] = A_n(tau_k); flux[n-1] = sum B(A_n1, A_n2)(tau_k) for n >= 2.
  // flux_of only reads A_1..A_{n-1}.
  auto flux_of = [&](const std::vector<const SpectralField*>& A, int n) {
    SpectralField F = *A[0];
    F.set_zero();
    for (int n1 = 1; n1 < n; ++n1) {
      const int n2 = n - n1;
      if (A[n1 - 1]->max_abs() == 0.0 || A[n2 - 1]->max_abs() == 0.0) continue;
      if (n1 == n2) F.axpy(1.0, nonlinear_flux(*A[n1 - 1], cfg));
      else F.axpy(1.0, bilinear_flux(*A[n1 - 1], *A[n2 - 1], cfg));
    }
    return F;
  };
  auto pointers = [](const std::vector<SpectralField>& v) {
    std::vector<const SpectralField*> p;
    for (const auto& x : v) p.push_back(&x);
    return p;
  };
  std::vector<SpectralField> cur(n_max, f), flux(n_max);
  for (int n = 2; n <= n_max; ++n) cur[n - 1].set_zero();
  for (int n = 2; n <= n_max; ++n) flux[n - 1] = flux_of(pointers(cur), n);
  for (long k = 0; k < K; ++k) {
    std::vector<SpectralField> next(n_max);
    next[0] = combine({{&cur[0], E}});
    for (int n = 2; n <= n_max; ++n) {
      SpectralField Fn = flux_of(pointers(next), n);
      next[n - 1] = combine({{&cur[n - 1], E}, {&flux[n - 1], W0}, {&Fn, W1}});
      flux[n - 1] = std::move(Fn);
    }
    cur = std::move(next);
  }
  for (int n = 2; n <= n_max; ++n) {
    cur[n - 1].real_valued = f.real_valued;
    cur[n - 1].divergence_free = true;
    out.push_back(std::move(cur[n - 1]));
  }
  return out;
}

Trajectory linear_trajectory(const SpectralField& U0, double T, int n_steps) {
  if (n_steps < 1) throw Error(ErrorCode::InvalidParameter, "need at least one interval");
  Trajectory tr;
  for (int k = 0; k <= n_steps; ++k) {
    const double t = T * k / n_steps;
    tr.times.push_back(t);
    tr.states.push_back(linear_propagate(U0, t));
  }
  return tr;
}

Trajectory duhamel_bilinear(const Trajectory& U1, const Trajectory& U2, const SolverConfig& cfg) {
  if (U1.times != U2.times || !uniform_times(U1.times))
    throw Error(ErrorCode::InvalidParameter, "bilinear term needs a shared uniform time grid");
  const double h = U1.times[1] - U1.times[0];
  auto E = [h](double l) { return std::exp(-h * l); };
  auto W0 = [h](double l) { return h * (phi1(-h * l) - phi2(-h * l)); };
  auto W1 = [h](double l) { return h * phi2(-h * l); };
  Trajectory out;
  out.times = U1.times;
  SpectralField W = U1.states[0];
  W.set_zero();
  W.real_valued = U1.states[0].real_valued && U2.states[0].real_valued;
  out.states.push_back(W);
  SpectralField Fprev = bilinear_flux(U1.states[0], U2.states[0], cfg);
  for (std::size_t k = 1; k < U1.times.size(); ++k) {
    SpectralField Fk = bilinear_flux(U1.states[k], U2.states[k], cfg);
    W = combine({{&W, E}, {&Fprev, W0}, {&Fk, W1}});
    W.real_valued = out.states[0].real_valued;
    W.divergence_free = true;
    out.states.push_back(W);
    Fprev = std::move(Fk);
  }
  return out;
}

double x_alpha_norm(const Trajectory& U, double alpha, double r, const DyadicPartition& part) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidParameter, "alpha must lie in (0,1)");
  const auto w = trapezoid_weights(U.times);
  const double T = U.times.back();
  return chemin_lerner_norm(U.states, U.times, w, 2.0 / (1.0 + alpha), alpha, 1.0, r, T, part) +
         chemin_lerner_norm(U.states, U.times, w, 2.0 / (1.0 - alpha), -alpha, 1.0, r, T, part);
}

Trajectory trajectory_difference(const Trajectory& a, const Trajectory& b) {
  if (a.times != b.times) throw Error(ErrorCode::InvalidParameter, "trajectories on different time grids");
  Trajectory d;
  d.times = a.times;
  for (std::size_t k = 0; k < a.states.size(); ++k) {
    SpectralField s = a.states[k];
    s.axpy(-1.0, b.states[k]);
    d.states.push_back(std::move(s));
  }
  return d;
}

PicardFixedPoint picard_fixed_point(const SpectralField& U0, double T, int n_steps, int iterations,
                                    const SolverConfig& cfg) {
  const DyadicPartition part = cfg.partition();
  PicardFixedPoint res;
  const Trajectory L = linear_trajectory(U0, T, n_steps);
  res.linear_norm = x_alpha_norm(L, cfg.alpha, cfg.r, part);
  Trajectory U = L;
  for (int it = 0; it < iterations; ++it) {
    const Trajectory Bu = duhamel_bilinear(U, U, cfg);
    Trajectory next = trajectory_difference(L, Bu);
    res.increments.push_back(x_alpha_norm(trajectory_difference(next, U), cfg.alpha, cfg.r, part));
    U = std::move(next);
  }
  for (std::size_t k = 1; k < res.increments.size(); ++k)
    res.ratios.push_back(res.increments[k - 1] > 0.0 ? res.increments[k] / res.increments[k - 1] : 0.0);
  res.solution_norm = x_alpha_norm(U, cfg.alpha, cfg.r, part);
  res.solution = std::move(U);
  return res;
}

LocalExistence find_local_existence_time(const SpectralField& U0, const SolverConfig& cfg, double c1_hat) {
  cfg.validate();
  if (!(c1_hat > 0.0)) throw Error(ErrorCode::InvalidParameter, "bilinear constant must be positive");
  LocalExistence out;
  if (U0.max_abs() == 0.0) {
    out.T_loc = cfg.T;
    return out;
  }
  const DyadicPartition part = cfg.partition();
  const double threshold = 1.0 / (4.0 * c1_hat);
  // Geometric sampling in t: the heat factor e^{-t 4^j} varies on the scale
  // 4^{-j}, which a uniform grid on [0, T] misses when T >> 4^{-j}.
  constexpr int kSamples = 64;
  constexpr double kSpan = 1e-6;
  auto norm_at = [&](double T) {
    Trajectory tr;
    tr.times.push_back(0.0);
    tr.states.push_back(U0);
    for (int k = 0; k < kSamples; ++k) {
      const double t = T * std::pow(kSpan, 1.0 - static_cast<double>(k) / (kSamples - 1));
      tr.times.push_back(t);
      tr.states.push_back(linear_propagate(U0, t));
    }
    return x_alpha_norm(tr, cfg.alpha, cfg.r, part);
  };
  double T_loc;
  if (norm_at(cfg.T) < threshold) {
    T_loc = cfg.T;
  } else {
    if (!(norm_at(cfg.dt) < threshold))
      throw Error(ErrorCode::TimeResolution, "smallness fails already at t = dt");
    double lo = cfg.dt, hi = cfg.T;
    for (int it = 0; it < 40 && hi - lo > 1e-6 * hi; ++it) {
      const double mid = std::sqrt(lo * hi);
      if (norm_at(mid) < threshold) lo = mid;
      else hi = mid;
    }
    T_loc = lo;
  }
  out.T_loc = T_loc;
  const int steps = std::clamp(static_cast<int>(std::ceil(T_loc / cfg.dt)), 8, 256);
  const auto fp = picard_fixed_point(U0, T_loc, steps, 4, cfg);
  double ratio = 0.0;
  for (double r : fp.ratios) ratio = std::max(ratio, r);
  out.contraction_ratio = ratio;
  return out;
}

SpectralField random_solenoidal_field(const LatticeGrid& grid, std::uint64_t seed, double r_lo, double r_hi,
                                      double amplitude) {
  if (!(r_hi > r_lo && r_lo >= 0.0)) throw Error(ErrorCode::InvalidParameter, "bad spectral shell");
  SpectralField f = SpectralField::on_lattice(grid);
  const CounterRng rng(seed, 0x5eed);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto m = grid.modes(i);
    bool nyquist = false;
    for (int a = 0; a < 3; ++a) nyquist = nyquist || m[a] == -grid.n[a] / 2;
    if (nyquist) continue;
    const std::size_t j = grid.index(-m[0], -m[1], -m[2]);
    if (j < i) continue;
    const Vec3 xi = grid.frequency(i);
    const double rho = xi.norm();
    if (rho <= r_lo || rho >= r_hi || j == i) continue;
    const double x = (rho - r_lo) / (r_hi - r_lo);
    const double taper = std::pow(std::sin(kPi * x), 2);
    Vec6c v;
    for (int c = 0; c < kComponents; ++c)
      v[c] = taper * Cplx(rng.normal(24 * i + 4 * c), rng.normal(24 * i + 4 * c + 2));
    f.set_value(i, v);
    f.set_value(j, v.conjugate());
  }
  f = leray_project(f);
  const double m = f.max_abs();
  if (m > 0.0) f.scale(amplitude / m);
  f.real_valued = true;
  f.divergence_free = true;
  return f;
}

}  // namespace mpfb
