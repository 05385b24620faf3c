#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace hentropy {

enum class Family { kFinite, kGeometric, kZeta };

// Discrete probability mass function over positive-integer symbols.
//
// Three families:
//  * finite  — explicit masses; inputs whose sum is within 1e-9 of one are
//              renormalized, anything further off is rejected. Stored sorted
//              in decreasing order (symbol labels are arbitrary anyway).
//  * geometric(p) on {1, 2, ...}, mass p(1-p)^{j-1}, 0 < p < 1.
//  * zeta(gamma), mass j^{-gamma}/zeta(gamma), gamma > 1.
//
// Entropy, Var[ln p(X)] and the zeta normalizer are computed once at
// construction; infinite-family series are closed with Euler–Maclaurin tails
// whose truncation bounds are driven below 1e-12.
class Pmf {
 public:
  static Pmf finite(std::vector<double> probs);
  static Pmf geometric(double p);
  static Pmf zeta(double gamma);

  Family family() const { return family_; }

  // p or gamma; 0 for the finite family.
  double param() const { return param_; }

  // Decay exponent alpha with p_j ~ j^{-1/alpha}: 1/gamma for zeta, 0 for
  // families with geometric or finite tails.
  double declared_alpha() const;

  // Mass of a symbol (symbols start at 1; beyond a finite support -> 0).
  double mass(std::uint64_t symbol) const;

  // Shannon entropy in nats.
  double entropy() const { return entropy_; }

  // Var[ln p(X)], the asymptotic variance scale of the harmonic estimator.
  double var_log_p() const { return var_log_p_; }

  // sum_j p_j^m (1-p_j)^k, the k-step missing-mass style moment; m >= 1.
  double tail_moment(int m, std::uint64_t k) const;

  // E[harmonic estimate at sample size n] - entropy(), computed from the
  // per-symbol rearrangement  bias(n) = -sum_j p_j sum_{i>=n} (1-p_j)^i / i.
  // Requires n >= 2 (the estimator's own domain). Strictly negative (zero
  // only for a single-symbol pmf), increasing to 0 in n. Truncation error
  // for the infinite families is below ~1e-12.
  double exact_bias(std::uint64_t n) const;

  // Finite family only: the stored (sorted, renormalized) masses.
  const std::vector<double>& finite_probs() const;

  // Finite family only: inclusive prefix sums of finite_probs(); back() == 1.
  const std::vector<double>& cumulative() const;

  std::string family_name() const;

 private:
  Pmf() = default;

  Family family_ = Family::kFinite;
  double param_ = 0.0;
  std::vector<double> probs_;       // finite: sorted descending
  std::vector<double> cumulative_;  // finite: inclusive prefix sums
  double entropy_ = 0.0;
  double var_log_p_ = 0.0;
  double zeta_norm_ = 0.0;  // zeta: Z = zeta(gamma)
};

// One sample of size n, drawn with a private mt19937_64 stream seeded by
// `seed`. Identical (pmf, n, seed) give identical symbols on every platform:
// the generator is bit-portable and all inverse-CDF / rejection steps use
// explicitly constructed uniforms.
struct SampleDraw {
  std::vector<std::uint64_t> symbols;
  std::uint64_t n = 0;  // == symbols.size()
  std::uint64_t seed = 0;
};

SampleDraw sample(const Pmf& pmf, std::uint64_t n, std::uint64_t seed);

// JSON <-> Pmf:  {"family":"finite","probs":[...]}
//                {"family":"geometric","p":0.1}
//                {"family":"zeta","gamma":2.0}
Pmf pmf_from_json(const nlohmann::json& j);
void pmf_to_json(const Pmf& pmf, nlohmann::json& j);

}  // namespace hentropy
