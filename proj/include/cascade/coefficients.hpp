#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cascade/radial_fourier.hpp"
#include "cascade/spectral.hpp"
#include "cascade/trap_spectrum.hpp"

namespace cascade {

/// Regularisation used for the prelimit tensor: eps = eta^2, or the eps -> 0+ values.
enum class EpsilonPolicy { eta_squared, limit };

/// Which quadruples a prelimit tensor keeps; the others are stored as zero.
///  all       every quadruple
///  resonant  quadruples with identically vanishing mismatch, (k,k';k,k') and (k,k;j,j)
///  diagonal  only (k,k';k,k')
enum class TensorFilter { all, resonant, diagonal };

std::string to_string(EpsilonPolicy p);
std::string to_string(TensorFilter f);
EpsilonPolicy parse_epsilon_policy(const std::string& s);
TensorFilter parse_tensor_filter(const std::string& s);

struct CoefficientOptions {
  /// Multiply the on-shell spectral density by pi (the eps -> 0+ limit of the resolvent).
  bool fgr_pi = true;
  /// Add the (k,k;k',k') quadruples, which are resonant for every spectrum, to the limit matrix.
  bool direct_terms = true;
  EpsilonPolicy epsilon_policy = EpsilonPolicy::eta_squared;
  TensorFilter filter = TensorFilter::all;
  std::size_t tensor_max_K = 12;
  /// Regularisations of the resolvent route to the FGR rates (Richardson, eps, eps/2, eps/4).
  double resolvent_eps = 1e-5;
  bool parallel = true;
};

/// Row-major square matrix.
template <class T>
struct Square {
  std::size_t n = 0;
  std::vector<T> data;

  Square() = default;
  explicit Square(std::size_t size) : n(size), data(size * size, T{}) {}
  T& operator()(std::size_t i, std::size_t j) { return data[i * n + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data[i * n + j]; }
};

struct PrelimitTensor {
  std::size_t K = 0;
  double eta = 0.0;
  double epsilon = 0.0;  // 0 means the eps -> 0+ values
  TensorFilter filter = TensorFilter::all;
  std::vector<cplx> coefficients;  // M^eta, index ((k K + k') K + j) K + j'
  std::vector<double> mismatch;    // dE_{k,k';j,j'}
  std::vector<double> hartree;     // Lambda^Har_{k,k';j,j'}

  std::size_t index(std::size_t k, std::size_t kp, std::size_t j, std::size_t jp) const {
    return ((k * K + kp) * K + j) * K + jp;
  }
  std::size_t size() const noexcept { return coefficients.size(); }
};

/// Limit matrix M_{k,k'} with its components, and optionally the prelimit tensor.
struct CoefficientSet {
  std::size_t K = 0;
  std::vector<double> energies;
  Square<double> hartree;         // Lambda^Har_{k,k';k,k'}
  Square<double> lamb;            // Lambda^LS_{k,k';k,k'}
  Square<double> hartree_direct;  // Lambda^Har_{k,k;k',k'}, zero diagonal
  Square<double> lamb_direct;     // Lambda^LS_{k,k;k',k'}, zero diagonal
  Square<double> fgr;             // Gamma^FGR_{k,k'} (raw delta pairing)
  Square<double> gamma_eff;       // rate entering M: pi * fgr or fgr
  Square<cplx> limit;             // M_{k,k'}
  bool fgr_pi = true;
  bool direct_terms = true;
  bool synthetic = false;
  std::string description;
  std::optional<PrelimitTensor> tensor;

  const cplx& M(std::size_t k, std::size_t kp) const { return limit(k, kp); }
};

/// Builds M from its components:
/// M_{k,k'} = -i(Lhar - Lls) - G_eff (1_{k>k'} - 1_{k'>k}) [ - i(Lhar_dir - Lls_dir) ].
void fill_limit_matrix(CoefficientSet& c);

/// Two-or-more-mode synthetic set with Gamma_eff_{k,k'} = gamma for k != k' and no
/// energy shifts. Energies are taken as 0, 1, ..., K-1.
CoefficientSet synthetic_logistic_coefficients(std::size_t K, double gamma);

/// All coefficient integrals for one basis and kernel pair. Transforms of the
/// mode products are computed once at construction.
class ResonanceModel {
 public:
  ResonanceModel(const EigenBasis& basis, const InteractionKernel& w, const InteractionKernel& v,
                 const MomentumGrid& momenta, bool parallel = true);

  std::size_t size() const noexcept { return K_; }
  const EigenBasis& basis() const noexcept { return basis_; }
  const MomentumGrid& momenta() const noexcept { return momenta_; }
  const InteractionKernel& photon_kernel() const noexcept { return w_; }
  const InteractionKernel& pair_kernel() const noexcept { return v_; }

  /// (chi_k chi_k')^ on the momentum grid.
  std::span<const double> pair_transform(std::size_t k, std::size_t kp) const;
  /// Momentum-space transform of w * (chi_k chi_k').
  std::vector<double> source_transform(std::size_t k, std::size_t kp) const;

  /// Spectral density of f = w*(chi_k chi_k'), g = w*(chi_j chi_j').
  SpectralDensity density(std::size_t k, std::size_t kp, std::size_t j, std::size_t jp) const;

  /// Lambda^- + Lambda^+ + i(Gamma^- + Gamma^+) at regularisation eps (eps = 0: the limit).
  cplx resolvent_sum(std::size_t k, std::size_t kp, std::size_t j, std::size_t jp,
                     double eps) const;

  /// Delta-route rate: a(|E_k - E_k'|) times pi when `pi` is set; 0 for k = k'.
  double gamma_fgr(std::size_t k, std::size_t kp, bool pi = true) const;
  /// Resolvent route: -Im of the eps -> 0 extrapolated Cauchy transform at |dE|.
  double gamma_fgr_resolvent(std::size_t k, std::size_t kp, bool pi = true,
                             double eps = 1e-5) const;
  double lambda_lamb_shift(std::size_t k, std::size_t kp, std::size_t j, std::size_t jp) const;
  double lambda_hartree(std::size_t k, std::size_t kp, std::size_t j, std::size_t jp) const;

  /// Limit matrix at finite regularisation eps (eps = 0 gives the limit matrix itself).
  CoefficientSet assemble_limit_matrix(const CoefficientOptions& opts = {}, double eps = 0.0) const;
  /// Limit matrix plus the K^4 tensor M^eta with mismatches.
  CoefficientSet assemble_prelimit_tensor(double eta, const CoefficientOptions& opts = {}) const;

 private:
  void check_index(std::size_t k) const;
  std::size_t pair_slot(std::size_t k, std::size_t kp) const;

  EigenBasis basis_;
  InteractionKernel w_;
  InteractionKernel v_;
  MomentumGrid momenta_;
  std::size_t K_;
  std::vector<std::vector<double>> pair_hat_;  // upper triangle k <= k'
};

/// sup_{eps >= eps_i} |M^eps_{k,k'}| along a decreasing list of eps.
struct EpsilonUniformity {
  std::vector<double> eps;
  std::vector<Square<double>> abs_entries;  // |M^eps| per eps
  std::vector<Square<double>> running_sup;  // sup over eps' >= eps
  double worst_growth = 0.0;                // max_{k,k'} sup(last) / sup(second-to-last)
};

EpsilonUniformity epsilon_uniformity(const ResonanceModel& model, std::span<const double> eps,
                                     const CoefficientOptions& opts = {});

/// JSON document: dimensions, conventions, component matrices (row-major),
/// optional tensor, and the caller's provenance block.
std::string coefficients_json(const CoefficientSet& c, const std::string& provenance_json);

/// CSV with one row per (k, k'): Re/Im M and the components.
void write_limit_matrix_csv(std::ostream& out, const CoefficientSet& c,
                            std::span<const std::string> header_lines = {});

}  // namespace cascade
