#include "ldis/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "ldis/errors.hpp"
#include "ldis/quadrature.hpp"

namespace ldis {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;
constexpr double kSumTol = 1e-12;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Range compute_domain(const DistributionModel::Kind& k) {
  return std::visit(Overloaded{
                        [](const Gaussian&) { return Range{-kInf, kInf}; },
                        [](const Exponential& e) { return Range{-kInf, e.rate}; },
                        [](const FiniteDiscrete&) { return Range{-kInf, kInf}; },
                        [](const Mixture& m) {
                          Range r{-kInf, kInf};
                          for (const auto& c : m.components) {
                            r.lo = std::max(r.lo, c.mgf_domain().lo);
                            r.hi = std::min(r.hi, c.mgf_domain().hi);
                          }
                          return r;
                        },
                    },
                    k);
}

void check_in_domain(const DistributionModel& m, double theta) {
  const Range d = m.mgf_domain();
  if (!(theta > d.lo && theta < d.hi)) {
    std::ostringstream os;
    os << "theta=" << theta << " outside the log-MGF domain of " << m.name();
    throw DomainError(os.str());
  }
}

// Atoms of a discrete model (FiniteDiscrete or a mixture of them), merged by point.
std::map<double, double> atoms(const DistributionModel& m) {
  std::map<double, double> out;
  if (const auto* fd = std::get_if<FiniteDiscrete>(&m.kind())) {
    for (std::size_t i = 0; i < fd->points.size(); ++i) {
      if (fd->probs[i] > 0) out[fd->points[i]] += fd->probs[i];
    }
  } else if (const auto* mx = std::get_if<Mixture>(&m.kind())) {
    for (std::size_t i = 0; i < mx->components.size(); ++i) {
      for (auto [x, w] : atoms(mx->components[i])) out[x] += mx->weights[i] * w;
    }
  }
  return out;
}

}  // namespace

DistributionModel::DistributionModel(Kind k) : kind_(std::move(k)), mgf_domain_(compute_domain(kind_)) {}

DistributionModel DistributionModel::gaussian(double mean, double variance) {
  if (!std::isfinite(mean) || !(variance > 0) || !std::isfinite(variance)) {
    throw DomainError("gaussian: need finite mean and variance > 0");
  }
  return DistributionModel(Gaussian{mean, variance});
}

DistributionModel DistributionModel::exponential(double rate) {
  if (!(rate > 0) || !std::isfinite(rate)) throw DomainError("exponential: need rate > 0");
  return DistributionModel(Exponential{rate});
}

DistributionModel DistributionModel::finite_discrete(std::vector<double> points,
                                                     std::vector<double> probs) {
  if (points.empty() || points.size() != probs.size()) {
    throw DomainError("finite_discrete: points and probs must be non-empty and equal length");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i])) throw DomainError("finite_discrete: non-finite point");
    if (i > 0 && !(points[i] > points[i - 1])) {
      throw DomainError("finite_discrete: points must be strictly increasing");
    }
    if (!(probs[i] >= 0)) throw DomainError("finite_discrete: negative probability");
    total += probs[i];
  }
  if (std::abs(total - 1.0) > kSumTol) throw DomainError("finite_discrete: probs must sum to 1");
  return DistributionModel(FiniteDiscrete{std::move(points), std::move(probs)});
}

DistributionModel DistributionModel::mixture(std::vector<double> weights,
                                             std::vector<DistributionModel> components) {
  if (components.size() < 2 || weights.size() != components.size()) {
    throw DomainError("mixture: need >= 2 components and one weight per component");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0)) throw DomainError("mixture: weights must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > kSumTol) throw DomainError("mixture: weights must sum to 1");
  const bool disc = components.front().is_discrete();
  for (const auto& c : components) {
    if (c.is_discrete() != disc) {
      throw DomainError("mixture: components must be all discrete or all continuous");
    }
  }
  return DistributionModel(Mixture{std::move(weights), std::move(components)});
}

Range DistributionModel::support() const {
  return std::visit(Overloaded{
                        [](const Gaussian&) { return Range{-kInf, kInf}; },
                        [](const Exponential&) { return Range{0.0, kInf}; },
                        [](const FiniteDiscrete& f) { return Range{f.points.front(), f.points.back()}; },
                        [](const Mixture& m) {
                          Range r{kInf, -kInf};
                          for (const auto& c : m.components) {
                            r.lo = std::min(r.lo, c.support().lo);
                            r.hi = std::max(r.hi, c.support().hi);
                          }
                          return r;
                        },
                    },
                    kind_);
}

bool DistributionModel::is_discrete() const {
  if (std::holds_alternative<FiniteDiscrete>(kind_)) return true;
  if (const auto* m = std::get_if<Mixture>(&kind_)) return m->components.front().is_discrete();
  return false;
}

std::string DistributionModel::name() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(Overloaded{
                 [&](const Gaussian& g) { os << "gaussian(" << g.mean << ", " << g.variance << ")"; },
                 [&](const Exponential& e) { os << "exponential(" << e.rate << ")"; },
                 [&](const FiniteDiscrete& f) { os << "finite_discrete(" << f.points.size() << " points)"; },
                 [&](const Mixture& m) {
                   os << "mixture(";
                   for (std::size_t i = 0; i < m.components.size(); ++i) {
                     if (i) os << ", ";
                     os << m.weights[i] << "*" << m.components[i].name();
                   }
                   os << ")";
                 },
             },
             kind_);
  return os.str();
}

bool operator==(const Gaussian& a, const Gaussian& b) {
  return a.mean == b.mean && a.variance == b.variance;
}
bool operator==(const Exponential& a, const Exponential& b) { return a.rate == b.rate; }
bool operator==(const FiniteDiscrete& a, const FiniteDiscrete& b) {
  return a.points == b.points && a.probs == b.probs;
}
bool operator==(const Mixture& a, const Mixture& b) {
  return a.weights == b.weights && a.components == b.components;
}
bool operator==(const DistributionModel& a, const DistributionModel& b) { return a.kind_ == b.kind_; }

double log_density(const DistributionModel& m, double x) {
  return std::visit(Overloaded{
                        [&](const Gaussian& g) {
                          const double z = x - g.mean;
                          return -kLogSqrt2Pi - 0.5 * std::log(g.variance) - 0.5 * z * z / g.variance;
                        },
                        [&](const Exponential& e) {
                          return x < 0 ? -kInf : std::log(e.rate) - e.rate * x;
                        },
                        [&](const FiniteDiscrete& f) {
                          auto it = std::lower_bound(f.points.begin(), f.points.end(), x);
                          if (it == f.points.end() || *it != x) return -kInf;
                          const double p = f.probs[static_cast<std::size_t>(it - f.points.begin())];
                          return p > 0 ? std::log(p) : -kInf;
                        },
                        [&](const Mixture& mx) {
                          double acc = -kInf;
                          for (std::size_t i = 0; i < mx.components.size(); ++i) {
                            acc = log_add(acc, std::log(mx.weights[i]) + log_density(mx.components[i], x));
                          }
                          return acc;
                        },
                    },
                    m.kind());
}

MgfDerivatives log_mgf_derivatives(const DistributionModel& m, double theta) {
  check_in_domain(m, theta);
  return std::visit(
      Overloaded{
          [&](const Gaussian& g) {
            return MgfDerivatives{g.mean * theta + 0.5 * g.variance * theta * theta,
                                  g.mean + g.variance * theta, g.variance};
          },
          [&](const Exponential& e) {
            const double inv = 1.0 / (e.rate - theta);
            return MgfDerivatives{-std::log1p(-theta / e.rate), inv, inv * inv};
          },
          [&](const FiniteDiscrete& f) {
            const std::size_t k = f.points.size();
            std::vector<double> lw(k);
            for (std::size_t i = 0; i < k; ++i) {
              lw[i] = f.probs[i] > 0 ? std::log(f.probs[i]) + theta * f.points[i] : -kInf;
            }
            const double lam = log_sum_exp(lw);
            double mu = 0.0;
            for (std::size_t i = 0; i < k; ++i) mu += std::exp(lw[i] - lam) * f.points[i];
            double var = 0.0;
            for (std::size_t i = 0; i < k; ++i) {
              const double d = f.points[i] - mu;
              var += std::exp(lw[i] - lam) * d * d;
            }
            return MgfDerivatives{lam, mu, var};
          },
          [&](const Mixture& mx) {
            const std::size_t k = mx.components.size();
            std::vector<MgfDerivatives> parts(k);
            std::vector<double> lu(k);
            for (std::size_t i = 0; i < k; ++i) {
              parts[i] = log_mgf_derivatives(mx.components[i], theta);
              lu[i] = std::log(mx.weights[i]) + parts[i].value;
            }
            const double lam = log_sum_exp(lu);
            double mu = 0.0;
            for (std::size_t i = 0; i < k; ++i) mu += std::exp(lu[i] - lam) * parts[i].d1;
            double var = 0.0;
            for (std::size_t i = 0; i < k; ++i) {
              const double d = parts[i].d1 - mu;
              var += std::exp(lu[i] - lam) * (parts[i].d2 + d * d);
            }
            return MgfDerivatives{lam, mu, var};
          },
      },
      m.kind());
}

double log_mgf(const DistributionModel& m, double theta) {
  if (theta == 0.0) return 0.0;
  return log_mgf_derivatives(m, theta).value;
}

DistributionModel tilt(const DistributionModel& m, double theta) {
  if (std::holds_alternative<Mixture>(m.kind())) {
    throw UnsupportedError("tilt: a tilted mixture leaves the model family");
  }
  check_in_domain(m, theta);
  if (theta == 0.0) return m;
  return std::visit(Overloaded{
                        [&](const Gaussian& g) {
                          return DistributionModel::gaussian(g.mean + g.variance * theta, g.variance);
                        },
                        [&](const Exponential& e) { return DistributionModel::exponential(e.rate - theta); },
                        [&](const FiniteDiscrete& f) {
                          const double lam = log_mgf(m, theta);
                          std::vector<double> probs(f.points.size());
                          for (std::size_t i = 0; i < probs.size(); ++i) {
                            probs[i] = f.probs[i] > 0
                                           ? std::exp(std::log(f.probs[i]) + theta * f.points[i] - lam)
                                           : 0.0;
                          }
                          // Renormalize away the last bits of rounding.
                          const double s = std::accumulate(probs.begin(), probs.end(), 0.0);
                          for (double& p : probs) p /= s;
                          return DistributionModel::finite_discrete(f.points, std::move(probs));
                        },
                        [&](const Mixture&) -> DistributionModel { throw UnsupportedError("unreachable"); },
                    },
                    m.kind());
}

double sample(const DistributionModel& m, RandomStream& stream) {
  return std::visit(Overloaded{
                        [&](const Gaussian& g) { return g.mean + std::sqrt(g.variance) * stream.normal(); },
                        [&](const Exponential& e) { return -std::log(stream.uniform()) / e.rate; },
                        [&](const FiniteDiscrete& f) {
                          const double u = stream.uniform();
                          double c = 0.0;
                          for (std::size_t i = 0; i + 1 < f.points.size(); ++i) {
                            c += f.probs[i];
                            if (u < c) return f.points[i];
                          }
                          return f.points.back();
                        },
                        [&](const Mixture& mx) {
                          const double u = stream.uniform();
                          double c = 0.0;
                          std::size_t pick = mx.components.size() - 1;
                          for (std::size_t i = 0; i + 1 < mx.components.size(); ++i) {
                            c += mx.weights[i];
                            if (u < c) {
                              pick = i;
                              break;
                            }
                          }
                          return sample(mx.components[pick], stream);
                        },
                    },
                    m.kind());
}

double mean(const DistributionModel& m) {
  return std::visit(Overloaded{
                        [](const Gaussian& g) { return g.mean; },
                        [](const Exponential& e) { return 1.0 / e.rate; },
                        [](const FiniteDiscrete& f) {
                          double s = 0.0;
                          for (std::size_t i = 0; i < f.points.size(); ++i) s += f.probs[i] * f.points[i];
                          return s;
                        },
                        [](const Mixture& mx) {
                          double s = 0.0;
                          for (std::size_t i = 0; i < mx.components.size(); ++i) {
                            s += mx.weights[i] * mean(mx.components[i]);
                          }
                          return s;
                        },
                    },
                    m.kind());
}

double variance(const DistributionModel& m) {
  return std::visit(Overloaded{
                        [](const Gaussian& g) { return g.variance; },
                        [](const Exponential& e) { return 1.0 / (e.rate * e.rate); },
                        [&](const FiniteDiscrete& f) {
                          const double mu = mean(m);
                          double s = 0.0;
                          for (std::size_t i = 0; i < f.points.size(); ++i) {
                            s += f.probs[i] * (f.points[i] - mu) * (f.points[i] - mu);
                          }
                          return s;
                        },
                        [&](const Mixture& mx) {
                          const double mu = mean(m);
                          double s = 0.0;
                          for (std::size_t i = 0; i < mx.components.size(); ++i) {
                            const double d = mean(mx.components[i]) - mu;
                            s += mx.weights[i] * (variance(mx.components[i]) + d * d);
                          }
                          return s;
                        },
                    },
                    m.kind());
}

bool support_contained(const DistributionModel& p, const DistributionModel& q) {
  if (p.is_discrete() != q.is_discrete()) return false;
  if (p.is_discrete()) {
    const auto pa = atoms(p);
    const auto qa = atoms(q);
    for (auto [x, w] : pa) {
      auto it = qa.find(x);
      if (it == qa.end() || !(it->second > 0)) return false;
    }
    return true;
  }
  const Range sp = p.support();
  const Range sq = q.support();
  return sq.lo <= sp.lo && sp.hi <= sq.hi;
}

double kl_divergence(const DistributionModel& nu, const DistributionModel& mu) {
  if (!support_contained(nu, mu)) return kInf;
  const auto* gn = std::get_if<Gaussian>(&nu.kind());
  const auto* gm = std::get_if<Gaussian>(&mu.kind());
  if (gn && gm) {
    const double d = gn->mean - gm->mean;
    return 0.5 * (std::log(gm->variance / gn->variance) + (gn->variance + d * d) / gm->variance - 1.0);
  }
  const auto* en = std::get_if<Exponential>(&nu.kind());
  const auto* em = std::get_if<Exponential>(&mu.kind());
  if (en && em) {
    const double ratio = em->rate / en->rate;
    return -std::log(ratio) + ratio - 1.0;
  }
  if (nu.is_discrete()) {
    double s = 0.0;
    for (auto [x, w] : atoms(nu)) s += w * (std::log(w) - log_density(mu, x));
    return std::max(s, 0.0);
  }
  auto integrand = [&](double y) {
    const double ln = log_density(nu, y);
    if (ln == -kInf) return 0.0;
    return std::exp(ln) * (ln - log_density(mu, y));
  };
  const QuadResult r =
      integrate_split(integrand, nu.support(), mean(nu), std::sqrt(variance(nu)), tol::kKlRel);
  return std::max(r.value, 0.0);
}

}  // namespace ldis
