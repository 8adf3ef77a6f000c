#include "mpfb/littlewood_paley.hpp"

#include <algorithm>
#include <cmath>

#include "mpfb/error.hpp"
#include "mpfb/fft.hpp"

namespace mpfb {

DyadicPartition::DyadicPartition(int j_min, int j_max) : j_min_(j_min), j_max_(j_max) {
  if (j_min >= j_max) throw Error(ErrorCode::InvalidRange, "partition needs j_min < j_max");
}

double DyadicPartition::theta(double x) noexcept {
  constexpr double lo = 0.75, hi = 4.0 / 3.0;
  const double t = std::clamp((std::abs(x) - lo) / (hi - lo), 0.0, 1.0);
  return 1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

double DyadicPartition::psi_j(int j, double norm) noexcept { return psi(std::ldexp(norm, -j)); }

double DyadicPartition::band_sum(double norm) const noexcept {
  return theta(std::ldexp(norm, -j_max_ - 1)) - theta(std::ldexp(norm, -j_min_));
}

std::pair<double, double> DyadicPartition::resolved_band() const noexcept {
  return {std::ldexp(4.0 / 3.0, j_min_), std::ldexp(0.75, j_max_)};
}

std::vector<int> DyadicPartition::blocks_meeting(double r_lo, double r_hi) const {
  std::vector<int> out;
  for (int j = j_min_; j <= j_max_; ++j) {
    const double a = std::ldexp(0.75, j), b = std::ldexp(8.0 / 3.0, j);
    if (b > r_lo && a < r_hi) out.push_back(j);
  }
  return out;
}

DyadicPartition make_partition(int j_min, int j_max) { return DyadicPartition(j_min, j_max); }

SpectralField apply_block(const SpectralField& f, int j, const DyadicPartition& part) {
  if (!part.contains(j)) throw Error(ErrorCode::InvalidScale, "block index outside partition");
  SpectralField out = f;
  out.multiply([j](const Vec3& xi) { return DyadicPartition::psi_j(j, xi.norm()); });
  return out;
}

std::vector<double> block_lp_norms(const SpectralField& f, double p, const DyadicPartition& part) {
  if (!(p >= 1.0)) throw Error(ErrorCode::InvalidParameter, "p must lie in [1, inf]");
  std::vector<double> acc(part.count(), 0.0);
  const bool sup = std::isinf(p);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double m = f.magnitude(i);
    if (m == 0.0) continue;
    const double rho = f.frequency(i).norm();
    if (rho == 0.0) continue;
    // Only two neighbouring blocks can be nonzero at a given radius.
    const int jc = static_cast<int>(std::floor(std::log2(rho)));
    for (int j = std::max(part.j_min(), jc - 2); j <= std::min(part.j_max(), jc + 2); ++j) {
      const double w = DyadicPartition::psi_j(j, rho);
      if (w == 0.0) continue;
      const double v = w * m;
      double& a = acc[j - part.j_min()];
      if (sup) a = std::max(a, v);
      else if (p == 1.0) a += f.weight(i) * v;
      else a += f.weight(i) * std::pow(v, p);
    }
  }
  if (!sup && p != 1.0)
    for (double& a : acc) a = std::pow(a, 1.0 / p);
  return acc;
}

double lr_combine(const std::vector<double>& blocks, int j_min, double s, double r) {
  if (!(r >= 1.0)) throw Error(ErrorCode::InvalidParameter, "r must lie in [1, inf]");
  double acc = 0.0;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const double v = std::pow(2.0, (j_min + static_cast<int>(k)) * s) * blocks[k];
    if (std::isinf(r)) acc = std::max(acc, v);
    else acc += std::pow(v, r);
  }
  return std::isinf(r) ? acc : std::pow(acc, 1.0 / r);
}

double fb_norm(const SpectralField& f, double s, double p, double r, const DyadicPartition& part) {
  if (!(p >= 1.0) || !(r >= 1.0)) throw Error(ErrorCode::InvalidParameter, "p and r must lie in [1, inf]");
  if (f.empty()) return 0.0;
  return lr_combine(block_lp_norms(f, p, part), part.j_min(), s, r);
}

double besov_norm(const SpectralField& f, double s, double p, double r, const DyadicPartition& part) {
  if (!f.is_lattice())
    throw Error(ErrorCode::UnsupportedRepresentation, "Besov norm needs a lattice field");
  if (!std::isinf(p)) throw Error(ErrorCode::InvalidParameter, "only p = inf is supported");
  if (!(r >= 1.0)) throw Error(ErrorCode::InvalidParameter, "r must lie in [1, inf]");
  const LatticeGrid& g = f.lattice();
  LatticeTransform tr(g);
  std::vector<double> blocks(part.count(), 0.0);
  std::vector<double> rho(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) rho[i] = g.frequency(i).norm();
  std::vector<Cplx> spec(f.size()), phys;
  std::vector<double> mag2(f.size());
  for (int j = part.j_min(); j <= part.j_max(); ++j) {
    std::fill(mag2.begin(), mag2.end(), 0.0);
    bool any = false;
    for (int c = 0; c < kComponents; ++c) {
      const auto& comp = f.component(c);
      bool nz = false;
      for (std::size_t i = 0; i < f.size(); ++i) {
        const double w = DyadicPartition::psi_j(j, rho[i]);
        spec[i] = w * comp[i];
        nz = nz || spec[i] != Cplx(0.0);
      }
      if (!nz) continue;
      any = true;
      tr.to_physical(spec, phys);
      for (std::size_t i = 0; i < f.size(); ++i) mag2[i] += std::norm(phys[i]);
    }
    if (any) blocks[j - part.j_min()] = std::sqrt(*std::max_element(mag2.begin(), mag2.end()));
  }
  return lr_combine(blocks, part.j_min(), s, r);
}

std::vector<double> trapezoid_weights(const std::vector<double>& times) {
  std::vector<double> w(times.size(), 0.0);
  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    const double h = times[k + 1] - times[k];
    w[k] += 0.5 * h;
    w[k + 1] += 0.5 * h;
  }
  return w;
}

std::vector<double> chemin_lerner_blocks(const std::vector<SpectralField>& states,
                                         const std::vector<double>& time_weights, double lambda,
                                         double p, const DyadicPartition& part) {
  if (states.size() != time_weights.size())
    throw Error(ErrorCode::InvalidParameter, "one time weight per state required");
  const bool sup = std::isinf(lambda);
  if (!sup && states.size() < 2)
    throw Error(ErrorCode::InsufficientSampling, "need at least 2 time samples for finite lambda");
  if (!(lambda >= 1.0)) throw Error(ErrorCode::InvalidParameter, "lambda must lie in [1, inf]");
  std::vector<double> acc(part.count(), 0.0);
  for (std::size_t k = 0; k < states.size(); ++k) {
    const auto b = block_lp_norms(states[k], p, part);
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (sup) acc[j] = std::max(acc[j], b[j]);
      else acc[j] += time_weights[k] * std::pow(b[j], lambda);
    }
  }
  if (!sup)
    for (double& a : acc) a = std::pow(a, 1.0 / lambda);
  return acc;
}

double chemin_lerner_norm(const std::vector<SpectralField>& states, const std::vector<double>& times,
                          const std::vector<double>& time_weights, double lambda, double s, double p,
                          double r, double T, const DyadicPartition& part) {
  if (states.size() != times.size())
    throw Error(ErrorCode::InvalidParameter, "one time per state required");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < 0.0 || times[k] > T * (1.0 + 1e-12))
      throw Error(ErrorCode::InvalidTime, "sample time outside [0, T]");
    if (k > 0 && !(times[k] > times[k - 1]))
      throw Error(ErrorCode::InvalidTime, "sample times must increase");
  }
  return lr_combine(chemin_lerner_blocks(states, time_weights, lambda, p, part), part.j_min(), s, r);
}

std::vector<std::vector<Cplx>> tensor_product_spectral(const SpectralField& f, const SpectralField& g) {
  if (!f.is_lattice() || !f.same_layout(g))
    throw Error(ErrorCode::UnsupportedRepresentation, "product needs two fields on one lattice");
  LatticeTransform tr(f.lattice());
  std::array<std::vector<Cplx>, kComponents> pf, pg;
  for (int c = 0; c < kComponents; ++c) {
    tr.to_physical(f.component(c), pf[c]);
    tr.to_physical(g.component(c), pg[c]);
  }
  std::vector<std::vector<Cplx>> out(kComponents * kComponents);
  std::vector<Cplx> prod(f.size());
  for (int a = 0; a < kComponents; ++a)
    for (int b = 0; b < kComponents; ++b) {
      for (std::size_t i = 0; i < f.size(); ++i) prod[i] = pf[a][i] * pg[b][i];
      tr.to_spectral(prod, out[a * kComponents + b]);
    }
  return out;
}

double product_law_ratio(const std::vector<SpectralField>& f, const std::vector<SpectralField>& g,
                         const std::vector<double>& times, double alpha, double r, double T,
                         const DyadicPartition& part) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidParameter, "alpha must lie in (0,1)");
  if (f.size() != g.size() || f.size() != times.size())
    throw Error(ErrorCode::InvalidParameter, "trajectories must share the time sampling");
  const auto w = trapezoid_weights(times);
  const double lp = 2.0 / (1.0 + alpha), lm = 2.0 / (1.0 - alpha);
  auto cl = [&](const std::vector<SpectralField>& x, double lam, double s) {
    return chemin_lerner_norm(x, times, w, lam, s, 1.0, r, T, part);
  };
  const double den = cl(f, lp, alpha) * cl(g, lm, -alpha) + cl(g, lp, alpha) * cl(f, lm, -alpha);
  if (!(den > 0.0)) throw Error(ErrorCode::UndefinedRatio, "product-law denominator vanishes");

  // The 36-component tensor is folded into a field whose pointwise magnitude
  // is the Frobenius norm, so block_lp_norms applies unchanged.
  std::vector<SpectralField> prod;
  prod.reserve(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) {
    const auto t = tensor_product_spectral(f[k], g[k]);
    SpectralField p = SpectralField::on_lattice(f[k].lattice());
    for (std::size_t i = 0; i < p.size(); ++i) {
      double m2 = 0.0;
      for (const auto& comp : t) m2 += std::norm(comp[i]);
      p.component(0)[i] = std::sqrt(m2);
    }
    prod.push_back(std::move(p));
  }
  return cl(prod, 1.0, 0.0) / den;
}

}  // namespace mpfb
