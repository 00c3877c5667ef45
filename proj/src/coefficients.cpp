#include "cascade/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <ostream>

#include <json.hpp>

#include "cascade/error.hpp"
#include "cascade/io.hpp"

namespace cascade {

namespace {

constexpr double kPi = std::numbers::pi;
// (2 pi)^{-3} 4 pi
const double kDensityPrefactor = 4.0 * kPi / std::pow(2.0 * kPi, 3);

template <class Body>
void parallel_for(std::size_t n, bool parallel, Body body) {
  std::exception_ptr failure;
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 1) if (parallel)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(cascade_parallel_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::string to_string(EpsilonPolicy p) {
  return p == EpsilonPolicy::limit ? "limit" : "eta2";
}

std::string to_string(TensorFilter f) {
  switch (f) {
    case TensorFilter::resonant: return "resonant";
    case TensorFilter::diagonal: return "diagonal";
    default: return "all";
  }
}

EpsilonPolicy parse_epsilon_policy(const std::string& s) {
  if (s == "eta2") return EpsilonPolicy::eta_squared;
  if (s == "limit") return EpsilonPolicy::limit;
  throw config_error("epsilon policy must be 'eta2' or 'limit', got '" + s + "'");
}

TensorFilter parse_tensor_filter(const std::string& s) {
  if (s == "all") return TensorFilter::all;
  if (s == "resonant") return TensorFilter::resonant;
  if (s == "diagonal") return TensorFilter::diagonal;
  throw config_error("tensor filter must be all, resonant or diagonal, got '" + s + "'");
}

void fill_limit_matrix(CoefficientSet& c) {
  const std::size_t K = c.K;
  c.limit = Square<cplx>(K);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t kp = 0; kp < K; ++kp) {
      const double dir = (k > kp) ? 1.0 : (kp > k ? -1.0 : 0.0);
      double imag = -(c.hartree(k, kp) - c.lamb(k, kp));
      if (c.direct_terms && k != kp) imag -= c.hartree_direct(k, kp) - c.lamb_direct(k, kp);
      c.limit(k, kp) = {-c.gamma_eff(k, kp) * dir, imag};
    }
  }
}

CoefficientSet synthetic_logistic_coefficients(std::size_t K, double gamma) {
  if (K < 2) throw dimension_error("logistic preset needs at least two modes");
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw validation_error("logistic preset: rate must be positive");
  CoefficientSet c;
  c.K = K;
  c.energies.resize(K);
  for (std::size_t k = 0; k < K; ++k) c.energies[k] = static_cast<double>(k);
  c.hartree = c.lamb = c.hartree_direct = c.lamb_direct = c.fgr = c.gamma_eff = Square<double>(K);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t kp = 0; kp < K; ++kp)
      if (k != kp) c.fgr(k, kp) = c.gamma_eff(k, kp) = gamma;
  c.fgr_pi = false;
  c.direct_terms = false;
  c.synthetic = true;
  c.description = "logistic(" + io::format_double(gamma) + ")";
  fill_limit_matrix(c);
  return c;
}

ResonanceModel::ResonanceModel(const EigenBasis& basis, const InteractionKernel& w,
                               const InteractionKernel& v, const MomentumGrid& momenta,
                               bool parallel)
    : basis_(basis), w_(w), v_(v), momenta_(momenta), K_(basis.size()) {
  if (K_ == 0) throw dimension_error("resonance model: empty basis");
  if (w_.transform().size() != momenta_.size() || v_.transform().size() != momenta_.size())
    throw dimension_error("resonance model: kernels not transformed on this momentum grid");
  for (std::size_t k = 0; k < K_; ++k)
    for (std::size_t kp = 0; kp < K_; ++kp) {
      const double gap = std::abs(basis_.energies[k] - basis_.energies[kp]);
      if (gap >= momenta_.rho_max())
        throw numerical_error("momentum-range", "energy gap " + io::format_double(gap) +
                                                    " exceeds rho_max");
    }

  std::vector<std::vector<double>> products;
  for (std::size_t k = 0; k < K_; ++k)
    for (std::size_t kp = k; kp < K_; ++kp) products.push_back(mode_product(basis_, k, kp));
  std::vector<std::span<const double>> views(products.begin(), products.end());
  pair_hat_ = fourier_radial_batch(basis_.grid, views, momenta_, parallel);
}

void ResonanceModel::check_index(std::size_t k) const {
  if (k >= K_) throw dimension_error("mode index " + std::to_string(k) + " out of range");
}

std::size_t ResonanceModel::pair_slot(std::size_t k, std::size_t kp) const {
  check_index(k);
  check_index(kp);
  if (k > kp) std::swap(k, kp);
  // Row k of the upper triangle starts after sum_{i<k} (K - i) entries.
  return k * K_ - k * (k - 1) / 2 + (kp - k);
}

std::span<const double> ResonanceModel::pair_transform(std::size_t k, std::size_t kp) const {
  return pair_hat_[pair_slot(k, kp)];
}

std::vector<double> ResonanceModel::source_transform(std::size_t k, std::size_t kp) const {
  const auto p = pair_transform(k, kp);
  const auto wh = w_.transform();
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = wh[i] * p[i];
  return out;
}

SpectralDensity ResonanceModel::density(std::size_t k, std::size_t kp, std::size_t j,
                                        std::size_t jp) const {
  const auto f = pair_transform(k, kp);
  const auto g = pair_transform(j, jp);
  const auto wh = w_.transform();
  std::vector<cplx> vals(momenta_.size());
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const double rho = momenta_[i];
    vals[i] = kDensityPrefactor * rho * rho * (wh[i] * f[i]) * (wh[i] * g[i]);
  }
  return SpectralDensity(momenta_, std::move(vals));
}

cplx ResonanceModel::resolvent_sum(std::size_t k, std::size_t kp, std::size_t j, std::size_t jp,
                                   double eps) const {
  const double lam = basis_.energies.at(j) - basis_.energies.at(jp);
  const auto a = density(k, kp, j, jp);
  const cplx minus = std::conj(resolvent_pairing(a, lam, eps));
  const cplx plus = resolvent_pairing(a, -lam, eps);
  return minus + plus;
}

double ResonanceModel::gamma_fgr(std::size_t k, std::size_t kp, bool pi) const {
  check_index(k);
  check_index(kp);
  if (k == kp) return 0.0;
  const double gap = std::abs(basis_.energies[k] - basis_.energies[kp]);
  const auto a = density(k, kp, k, kp);
  const double val = std::max(0.0, a.at(gap).real());
  return pi ? kPi * val : val;
}

double ResonanceModel::gamma_fgr_resolvent(std::size_t k, std::size_t kp, bool pi,
                                           double eps) const {
  check_index(k);
  check_index(kp);
  if (k == kp) return 0.0;
  if (!(eps > 0.0)) throw validation_error("gamma_fgr_resolvent: eps must be positive");
  const double gap = std::abs(basis_.energies[k] - basis_.energies[kp]);
  const auto a = density(k, kp, k, kp);
  const double im = richardson3(cauchy_transform(a, gap, eps).imag(),
                                cauchy_transform(a, gap, 0.5 * eps).imag(),
                                cauchy_transform(a, gap, 0.25 * eps).imag());
  return pi ? -im : -im / kPi;
}

double ResonanceModel::lambda_lamb_shift(std::size_t k, std::size_t kp, std::size_t j,
                                         std::size_t jp) const {
  return resolvent_sum(k, kp, j, jp, 0.0).real();
}

double ResonanceModel::lambda_hartree(std::size_t k, std::size_t kp, std::size_t j,
                                      std::size_t jp) const {
  const auto f = pair_transform(k, kp);
  const auto g = pair_transform(j, jp);
  const auto vh = v_.transform();
  std::vector<double> integrand(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double rho = momenta_[i];
    integrand[i] = kDensityPrefactor * rho * rho * f[i] * vh[i] * g[i];
  }
  return momenta_.integrate(integrand);
}

CoefficientSet ResonanceModel::assemble_limit_matrix(const CoefficientOptions& opts,
                                                     double eps) const {
  if (!(eps >= 0.0) || !std::isfinite(eps))
    throw validation_error("assemble_limit_matrix: eps must be non-negative");
  CoefficientSet c;
  c.K = K_;
  c.energies = basis_.energies;
  c.hartree = c.lamb = c.hartree_direct = c.lamb_direct = c.fgr = c.gamma_eff = Square<double>(K_);
  c.fgr_pi = opts.fgr_pi;
  c.direct_terms = opts.direct_terms;
  c.description = eps == 0.0 ? "limit" : "eps=" + io::format_double(eps);

  parallel_for(K_ * K_, opts.parallel, [&](std::size_t idx) {
    const std::size_t k = idx / K_, kp = idx % K_;
    c.hartree(k, kp) = lambda_hartree(k, kp, k, kp);
    const cplx s = resolvent_sum(k, kp, k, kp, eps);
    c.lamb(k, kp) = s.real();
    if (eps == 0.0) {
      c.fgr(k, kp) = gamma_fgr(k, kp, false);
      c.gamma_eff(k, kp) = opts.fgr_pi ? kPi * c.fgr(k, kp) : c.fgr(k, kp);
    } else if (k != kp) {
      // Im s carries the direction sign: positive for k > k'.
      const double signed_rate = k > kp ? s.imag() : -s.imag();
      c.gamma_eff(k, kp) = opts.fgr_pi ? signed_rate : signed_rate / kPi;
      c.fgr(k, kp) = signed_rate / kPi;
    }
    if (opts.direct_terms && k != kp) {
      c.hartree_direct(k, kp) = lambda_hartree(k, k, kp, kp);
      c.lamb_direct(k, kp) = resolvent_sum(k, k, kp, kp, eps).real();
    }
  });
  fill_limit_matrix(c);
  return c;
}

CoefficientSet ResonanceModel::assemble_prelimit_tensor(double eta,
                                                        const CoefficientOptions& opts) const {
  if (K_ > opts.tensor_max_K)
    throw dimension_error("prelimit tensor: K = " + std::to_string(K_) + " exceeds the guard " +
                          std::to_string(opts.tensor_max_K));
  if (!(eta > 0.0) || !std::isfinite(eta))
    throw validation_error("prelimit tensor: eta must be positive");

  CoefficientSet c = assemble_limit_matrix(opts, 0.0);
  PrelimitTensor t;
  t.K = K_;
  t.eta = eta;
  t.epsilon = opts.epsilon_policy == EpsilonPolicy::limit ? 0.0 : eta * eta;
  t.filter = opts.filter;
  const std::size_t n = K_ * K_ * K_ * K_;
  t.coefficients.assign(n, cplx{});
  t.mismatch.assign(n, 0.0);
  t.hartree.assign(n, 0.0);

  parallel_for(n, opts.parallel, [&](std::size_t q) {
    const Quadruple idx{q / (K_ * K_ * K_), (q / (K_ * K_)) % K_, (q / K_) % K_, q % K_};
    const auto [k, kp, j, jp] = idx;
    t.mismatch[q] = energy_mismatch(basis_.energies, idx);
    t.hartree[q] = lambda_hartree(k, kp, j, jp);
    bool keep = true;
    if (opts.filter == TensorFilter::diagonal) keep = (k == j && kp == jp);
    if (opts.filter == TensorFilter::resonant) keep = is_trivially_resonant(idx);
    if (!keep) return;
    const cplx s = resolvent_sum(k, kp, j, jp, t.epsilon);
    t.coefficients[q] = cplx{0.0, -t.hartree[q]} + cplx{0.0, 1.0} * s;
  });
  c.tensor = std::move(t);
  return c;
}

EpsilonUniformity epsilon_uniformity(const ResonanceModel& model, std::span<const double> eps,
                                     const CoefficientOptions& opts) {
  EpsilonUniformity out;
  const std::size_t K = model.size();
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0)) throw validation_error("epsilon_uniformity: eps must be positive");
    if (i > 0 && !(eps[i] < eps[i - 1]))
      throw validation_error("epsilon_uniformity: eps list must be decreasing");
    out.eps.push_back(eps[i]);
    const auto c = model.assemble_limit_matrix(opts, eps[i]);
    Square<double> abs_m(K), sup(K);
    for (std::size_t q = 0; q < K * K; ++q) {
      abs_m.data[q] = std::abs(c.limit.data[q]);
      sup.data[q] = i == 0 ? abs_m.data[q] : std::max(abs_m.data[q], out.running_sup.back().data[q]);
    }
    out.abs_entries.push_back(std::move(abs_m));
    out.running_sup.push_back(std::move(sup));
  }
  if (out.running_sup.size() >= 2) {
    const auto& last = out.running_sup.back();
    const auto& prev = out.running_sup[out.running_sup.size() - 2];
    for (std::size_t q = 0; q < K * K; ++q)
      out.worst_growth =
          std::max(out.worst_growth, prev.data[q] > 0.0 ? last.data[q] / prev.data[q] : 1.0);
  }
  return out;
}

namespace {

nlohmann::json matrix_json(const Square<double>& m) { return m.data; }

}  // namespace

std::string coefficients_json(const CoefficientSet& c, const std::string& provenance_json) {
  nlohmann::json doc;
  doc["K"] = c.K;
  doc["energies"] = c.energies;
  doc["conventions"] = {
      {"fourier", "forward exp(-i x.xi), inverse (2 pi)^-3"},
      {"fgr_pi", c.fgr_pi},
      {"direct_terms", c.direct_terms},
      {"source", c.synthetic ? c.description : "computed"},
  };
  doc["hartree"] = matrix_json(c.hartree);
  doc["lamb"] = matrix_json(c.lamb);
  doc["hartree_direct"] = matrix_json(c.hartree_direct);
  doc["lamb_direct"] = matrix_json(c.lamb_direct);
  doc["fgr"] = matrix_json(c.fgr);
  doc["gamma_eff"] = matrix_json(c.gamma_eff);
  std::vector<double> re, im;
  for (const auto& z : c.limit.data) {
    re.push_back(z.real());
    im.push_back(z.imag());
  }
  doc["limit_matrix"] = {{"re", re}, {"im", im}};
  if (c.tensor) {
    const auto& t = *c.tensor;
    std::vector<double> tre, tim;
    for (const auto& z : t.coefficients) {
      tre.push_back(z.real());
      tim.push_back(z.imag());
    }
    doc["tensor"] = {{"eta", t.eta},         {"epsilon", t.epsilon},
                     {"filter", to_string(t.filter)}, {"entries", t.size()},
                     {"re", tre},            {"im", tim},
                     {"mismatch", t.mismatch}, {"hartree", t.hartree}};
  }
  doc["provenance"] = nlohmann::json::parse(provenance_json.empty() ? "{}" : provenance_json);
  return doc.dump(2) + "\n";
}

void write_limit_matrix_csv(std::ostream& out, const CoefficientSet& c,
                            std::span<const std::string> header_lines) {
  io::write_comments(out, header_lines);
  const std::vector<std::string> head = {"k",     "kp",  "re_M",          "im_M",
                                         "hartree", "lamb", "hartree_direct", "lamb_direct",
                                         "fgr",   "gamma_eff"};
  io::write_row(out, head);
  for (std::size_t k = 0; k < c.K; ++k)
    for (std::size_t kp = 0; kp < c.K; ++kp) {
      const std::vector<std::string> row = {
          std::to_string(k),
          std::to_string(kp),
          io::format_double(c.limit(k, kp).real()),
          io::format_double(c.limit(k, kp).imag()),
          io::format_double(c.hartree(k, kp)),
          io::format_double(c.lamb(k, kp)),
          io::format_double(c.hartree_direct(k, kp)),
          io::format_double(c.lamb_direct(k, kp)),
          io::format_double(c.fgr(k, kp)),
          io::format_double(c.gamma_eff(k, kp))};
      io::write_row(out, row);
    }
}

}  // namespace cascade
