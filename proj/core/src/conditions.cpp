#include "nclab/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <locale>
#include <ostream>
#include <string>

#include "nclab/error.hpp"
#include "nclab/parallel.hpp"

namespace nclab {

namespace {

// ln[lambda^2 (1-eps) / (1 - eps lambda^2)]: log of the per-success moment growth when a
// coordinate collects its successes at rate (1-eps). Requires eps lambda^2 < 1.
double log_round_growth(double ln_l, double eps) {
  return 2.0 * ln_l + std::log1p(-eps) - std::log1p(-eps * std::exp(2.0 * ln_l));
}

bool moment_diverges(double ln_l, double eps) { return eps * std::exp(2.0 * ln_l) >= 1.0; }

}  // namespace

namespace threshold {

double single_mode(const ChannelParams& ch) {
  const double eps = ch.drop_prob;
  return -0.5 * std::log(eps + (1.0 - eps) * delta(ch));
}

double pair_sum(const ChannelParams& ch) {
  const double eps = ch.drop_prob;
  return -std::log((1.0 - eps) * std::sqrt(delta(ch)) + eps);
}

double equal_magnitude(int total_block_size, const ChannelParams& ch) {
  const double eps = ch.drop_prob;
  return -0.5 * std::log(eps + (1.0 - eps) * std::pow(delta(ch), 1.0 / total_block_size));
}

}  // namespace threshold

bool tdma_sufficient(const SystemSpec& spec, const ChannelParams& ch) {
  double lhs = 0.0;
  for (const auto& b : spec.blocks) lhs += b.block_size() * b.log_magnitude;
  return lhs < threshold::single_mode(ch);
}

NecessityCheck necessity_holds(const SystemSpec& spec, const ChannelParams& ch) {
  const double eps = ch.drop_prob;
  const double d = delta(ch);
  const std::size_t count = spec.blocks.size();

  // Odometer over v in prod {0..m_i}, last index fastest: lexicographic order.
  std::vector<int> v(count, 0);
  auto advance = [&] {
    for (std::size_t k = count; k-- > 0;) {
      if (v[k] < spec.blocks[k].algebraic_multiplicity) {
        ++v[k];
        return true;
      }
      v[k] = 0;
    }
    return false;
  };

  while (advance()) {
    int total = 0;
    double lhs = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
      const int av = spec.blocks[k].weight() * v[k];
      total += av;
      lhs += av * spec.blocks[k].log_magnitude;
    }
    const double rhs = -0.5 * total * std::log(eps + (1.0 - eps) * std::pow(d, 1.0 / total));
    if (!(lhs < rhs)) return NecessityCheck{false, v, total};
  }
  return NecessityCheck{};
}

AlphaVector adaptive_feasible(const SystemSpec& spec, const ChannelParams& ch) {
  const double eps = ch.drop_prob;
  const double ln_delta = std::log(delta(ch));

  AlphaVector out;
  out.minimum_fractions.reserve(spec.blocks.size());
  bool divergent = false;
  for (const auto& b : spec.blocks) {
    if (b.log_magnitude > 0.0 && moment_diverges(b.log_magnitude, eps)) {
      divergent = true;
      out.minimum_fractions.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    // alpha > mu ln[(lambda^-2 - eps)/(1-eps)] / ln delta, i.e. mu * log_round_growth / (-ln delta).
    const double need = b.block_size() * log_round_growth(b.log_magnitude, eps) / -ln_delta;
    out.minimum_fractions.push_back(std::max(0.0, need));
  }
  if (divergent) return out;

  double total = 0.0;
  int total_size = 0;
  for (std::size_t i = 0; i < spec.blocks.size(); ++i) {
    total += out.minimum_fractions[i];
    total_size += spec.blocks[i].block_size();
  }
  if (!(total < 1.0)) return out;

  out.feasible = true;
  const double slack = 1.0 - total;
  out.witness.reserve(spec.blocks.size());
  for (std::size_t i = 0; i < spec.blocks.size(); ++i) {
    out.witness.push_back(out.minimum_fractions[i] + slack * spec.blocks[i].block_size() / total_size);
  }
  return out;
}

std::vector<int> quota_search(const SystemSpec& spec, const ChannelParams& ch, int cap) {
  if (!adaptive_feasible(spec, ch).feasible) {
    throw Error(ErrorKind::Infeasible, "adaptive TDMA condition does not hold; no quotas exist");
  }
  const double eps = ch.drop_prob;
  const double ln_delta = std::log(delta(ch));
  const std::vector<double> lns = coordinate_log_magnitudes(spec);
  const int n = static_cast<int>(lns.size());

  std::vector<double> growth(lns.size());
  std::transform(lns.begin(), lns.end(), growth.begin(), [&](double l) { return log_round_growth(l, eps); });

  auto contracts = [&](int quota, int total, double g) {
    return g + (static_cast<double>(quota) / total) * ln_delta < 0.0;
  };

  std::vector<int> quotas(lns.size());
  for (int total = n; total <= cap; ++total) {
    int used = 0;
    bool ok = true;
    for (int j = 0; j < n && ok; ++j) {
      int q = 1;
      while (q <= total && !contracts(q, total, growth[j])) ++q;
      if (q > total) ok = false;
      quotas[j] = q;
      used += q;
    }
    if (!ok || used > total) continue;
    // Lexicographically smallest: everything but the last at its minimum.
    quotas.back() += total - used;
    return quotas;
  }
  throw Error(ErrorKind::CapExceeded, "no quota vector with total <= " + std::to_string(cap));
}

bool optimal2d_condition(double ln_l1, double ln_l2, const ChannelParams& ch) {
  if (ln_l1 < ln_l2) {
    throw Error(ErrorKind::OrderViolation, "ln_l1 must be >= ln_l2");
  }
  return ln_l1 < threshold::single_mode(ch) && ln_l1 + ln_l2 < threshold::pair_sum(ch);
}

bool equal_magnitude_condition(double common_ln, int total_block_size, const ChannelParams& ch) {
  if (total_block_size < 1) {
    throw Error(ErrorKind::ConfigError, "total block size must be >= 1");
  }
  return common_ln < threshold::equal_magnitude(total_block_size, ch);
}

double expected_round_factor(double ln_l, int n, const ChannelParams& ch) {
  if (n < 1) throw Error(ErrorKind::ConfigError, "quota must be >= 1");
  if (moment_diverges(ln_l, ch.drop_prob)) {
    throw Error(ErrorKind::DivergentMoment, "eps * lambda^2 >= 1; the negative-binomial moment is infinite");
  }
  return std::exp(n * log_round_growth(ln_l, ch.drop_prob));
}

ThetaSolution solve_theta(double ln_l1, double ln_l2, const ChannelParams& ch) {
  if (ln_l1 == ln_l2) {
    throw Error(ErrorKind::DegenerateEqualMagnitudes, "phi vanishes when |l1| = |l2|");
  }
  if (ln_l1 < ln_l2) {
    throw Error(ErrorKind::OrderViolation, "ln_l1 must exceed ln_l2");
  }
  const double eps = ch.drop_prob;
  const double ln_delta = std::log(delta(ch));
  const double phi = 2.0 * (ln_l1 - ln_l2) / ln_delta;

  auto f = [&](double theta) { return theta * phi - std::log((1.0 - eps) * std::exp(theta) + eps) - 2.0 * ln_l1; };

  double lo = 0.5 * ln_delta + 1e-12;
  double hi = -1e-12;
  double f_lo = f(lo);
  if (!(f_lo > 0.0 && f(hi) < 0.0)) {
    throw Error(ErrorKind::NoRoot, "endpoints do not bracket a root; ln_l1 + ln_l2 must be below " +
                                       std::to_string(threshold::pair_sum(ch)));
  }

  // f is strictly decreasing on the bracket.
  double mid = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) break;
    if ((fm > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = fm;
    } else {
      hi = mid;
    }
  }

  ThetaSolution sol;
  sol.theta = mid;
  sol.phi = phi;
  sol.drift = -std::log((1.0 - eps) * std::exp(mid) + eps);
  sol.residual = f(mid);
  if (!(std::abs(sol.residual) < 1e-10)) {
    throw Error(ErrorKind::NoRoot, "bisection did not reach residual 1e-10");
  }
  return sol;
}

int min_n1_for_contraction(const ThetaSolution& sol, double ln_l1, const ChannelParams& ch, int cap) {
  const double eps = ch.drop_prob;
  const double d = delta(ch);
  if (moment_diverges(ln_l1, eps)) {
    throw Error(ErrorKind::CapExceeded, "eps * lambda_1^2 >= 1; no n_1 contracts");
  }
  const double tilt = d * std::exp(-2.0 * sol.theta);
  const double rho = std::exp(2.0 * ln_l1) * d * (1.0 - eps) / (1.0 - eps * std::exp(2.0 * ln_l1));
  for (int n = 1; n <= cap; ++n) {
    if (2.0 * std::pow(tilt, n) + std::pow(rho, n) < 1.0) return n;
  }
  throw Error(ErrorKind::CapExceeded, "no n_1 <= " + std::to_string(cap) + " gives a contracting round");
}

std::vector<double> oracle_allocation(const std::vector<double>& ln_ls, long t, double n, const ChannelParams& ch) {
  if (ln_ls.empty()) throw Error(ErrorKind::ConfigError, "need at least one eigenvalue");
  const double ln_delta = std::log(delta(ch));
  const double count = static_cast<double>(ln_ls.size());
  double mean_ln = 0.0;
  for (double l : ln_ls) mean_ln += l;
  mean_ln /= count;

  std::vector<double> out;
  out.reserve(ln_ls.size());
  for (double l : ln_ls) out.push_back(n / count + 2.0 * static_cast<double>(t) * (mean_ln - l) / ln_delta);
  return out;
}

RegionCell classify_cell(double ln_l1, double ln_l2, const ChannelParams& ch) {
  const double hi = std::max(ln_l1, ln_l2);
  const double lo = std::min(ln_l1, ln_l2);
  const SystemSpec sys = diagonal_system({hi, lo});

  RegionCell cell;
  cell.ln_l1 = ln_l1;
  cell.ln_l2 = ln_l2;
  cell.necessary = necessity_holds(sys, ch).holds;
  cell.tdma = tdma_sufficient(sys, ch);
  cell.adaptive = adaptive_feasible(sys, ch).feasible;
  cell.optimal2d = optimal2d_condition(hi, lo, ch);
  return cell;
}

RegionReport region_sweep(const ChannelParams& ch, double ln_max, int resolution) {
  if (resolution < 2) throw Error(ErrorKind::ConfigError, "resolution must be >= 2");
  if (!(ln_max > 0.0) || !std::isfinite(ln_max)) throw Error(ErrorKind::ConfigError, "ln_max must be positive");

  RegionReport report;
  report.resolution = resolution;
  report.ln_max = ln_max;
  const auto res = static_cast<std::size_t>(resolution);
  report.grid.resize(res * res);

  auto coord = [&](std::size_t i) { return ln_max * static_cast<double>(i) / (resolution - 1); };
  parallel_for(res, [&](std::size_t row) {
    for (std::size_t col = 0; col < res; ++col) {
      report.grid[row * res + col] = classify_cell(coord(row), coord(col), ch);
    }
  });
  return report;
}

void write_region_csv(std::ostream& os, const RegionReport& report) {
  const auto old_locale = os.imbue(std::locale::classic());
  const auto old_precision = os.precision(17);
  os << "ln_l1,ln_l2,necessary,tdma,adaptive,optimal2d\n";
  for (const auto& c : report.grid) {
    os << c.ln_l1 << ',' << c.ln_l2 << ',' << int{c.necessary} << ',' << int{c.tdma} << ',' << int{c.adaptive}
       << ',' << int{c.optimal2d} << '\n';
  }
  os.precision(old_precision);
  os.imbue(old_locale);
}

}  // namespace nclab
