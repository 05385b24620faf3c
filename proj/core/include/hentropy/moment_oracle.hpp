#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hentropy/special_functions.hpp"

namespace hentropy {

class Pmf;

// Outcome of checking one algebraic identity (or inequality) at one parameter
// point. The two sides are always computed along routes that share no
// intermediate algebra: one side enumerates expectations directly, the other
// evaluates the closed form. For equalities gap = |lhs - rhs|; for
// inequalities of the form lhs <= rhs, gap = max(0, lhs - rhs). `tolerance`
// is the fully resolved threshold (scale factors already applied), so
// pass == (gap <= tolerance) always holds.
struct IdentityReport {
  std::string identity_name;
  std::map<std::string, double> parameters;
  double lhs = 0.0;
  double rhs = 0.0;
  double gap = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

void identity_report_to_json(const IdentityReport& report, nlohmann::json& j);

// E[J(B)] for B ~ Binomial(n, p), by direct O(n) enumeration of the binomial
// weights in log space. Enumeration-bounded: 1 <= n <= 60, p in (0, 1].
double binom_expect_J(std::uint64_t n, double p,
                      const HarmonicTable& table = shared_harmonic_table());

// E[J(n) - J(B)] == sum_{m=1..n} (1-p)^m / m,  B ~ Binomial(n, p).
// 1 <= n <= 60, p in (0, 1].
IdentityReport verify_first_moment(std::uint64_t n, double p,
                                   const HarmonicTable& table = shared_harmonic_table());

// E[(J(n) - J(B))^2] == sum_{m=2..n} sum_{k=1..m-1} (1-p)^m / (k (m-k))
//                     + sum_{m=1..n} sum_{k=n-m+1..n} (1-p)^m / (m k).
// 1 <= n <= 60, p in (0, 1].
IdentityReport verify_second_moment(std::uint64_t n, double p,
                                    const HarmonicTable& table = shared_harmonic_table());

// sum_{k=0..n} J(k) C(n,k) p^k q^{n-k}
//   == sum_{k=1..n} [ (p+q)^n - q^k (p+q)^{n-k} ] / k,  for arbitrary real
// p, q (no probability interpretation required). 1 <= n <= 40.
IdentityReport verify_harmonic_binomial(std::uint64_t n, double p, double q,
                                        const HarmonicTable& table = shared_harmonic_table());

// sum_{k=1..n} (1/k) C(n,k) p^k q^{n-k}
//   == sum_{k=1..n} [ (p+q)^k q^{n-k} - q^n ] / k,  arbitrary real p, q,
// 1 <= n <= 40.
IdentityReport verify_reciprocal_binomial(std::uint64_t n, double p, double q);

// For (M, K) the multinomial occupancy counts of two symbols with masses
// p and q (p, q > 0, p + q <= 1) among n trials (1 <= n <= 30):
//   E[(J(n)-J(M)) (J(n)-J(K))]
//     == sum_{m=1..n} sum_{k=1..m} [ (1-q)^m (1-p/(1-q))^k
//                                  + (1-p)^m (1-q/(1-p))^k ] / (m k)
//      + sum_{m=1..n} [ 1 - (1-p)^m - (1-q)^m ] / m^2.
// The left side enumerates the trinomial distribution directly.
IdentityReport verify_multinomial_product(std::uint64_t n, double p, double q,
                                          const HarmonicTable& table = shared_harmonic_table());

// Exact Cov[J(M), J(K)] for the same two-symbol occupancy counts, i.e.
// E[(J(n)-J(M))(J(n)-J(K))] - E[J(n)-J(M)] E[J(n)-J(K)], both factors by
// direct enumeration. Nonpositive on the tested grid (the occupancy counts
// are negatively associated). Same domain as verify_multinomial_product.
double multinomial_covariance(std::uint64_t n, double p, double q,
                              const HarmonicTable& table = shared_harmonic_table());

// The cross-tail double series collapses to dilogarithms (p, q > 0,
// p + q < 1):
//   sum_{m>=1} sum_{k>m} [ (1-p)^m (1-q/(1-p))^k
//                        + (1-q)^m (1-p/(1-q))^k ] / (m k)
//     == ln p ln q - ln q ln(1-q) - ln p ln(1-p) + zeta(2)
//        - Li2(1-p) - Li2(1-q).
// The left side truncates after `terms` outer terms (terms >= 1000); the
// (computable) geometric remainder bound is folded into the report tolerance.
IdentityReport verify_series_dilog(double p, double q, std::uint64_t terms);

// Two-point minimax construction on {1, 2}: masses (1/3, 2/3) against
// ((1+eps)/3, (2-eps)/3), 0 < eps < 1, n >= 1. Throws if the computed
// values ever violate the bounds recorded below (they cannot, analytically;
// the throw guards the implementation, not the caller).
struct TwoPointBound {
  double epsilon = 0.0;
  std::uint64_t n = 0;
  double kl = 0.0;                // KL(p || q), <= eps^2
  double entropy_gap = 0.0;       // |H(q) - H(p)|, >= eps ln2 / 3 - eps^2
  double risk_lower_bound = 0.0;  // gap^2 exp(-n kl) / 4
};

TwoPointBound lecam_two_point(double epsilon, std::uint64_t n);

// The three checkable claims behind the construction: the KL bound, the
// entropy-gap bound, and 0 < risk_lower_bound <= gap^2 / 4.
std::vector<IdentityReport> verify_lecam(double epsilon, std::uint64_t n);

// E[harmonic estimate] - entropy for a finite pmf at sample size n (n >= 2),
// by exhaustive enumeration of all count vectors with multinomial weights.
// Independent of Pmf::exact_bias (which goes through the per-symbol tail
// series), so the two routes cross-check each other. Throws if the
// composition count exceeds 5e6.
double exhaustive_bias(const Pmf& pmf, std::uint64_t n,
                       const HarmonicTable& table = shared_harmonic_table());

// The full verification sweep: every identity above over a deterministic
// parameter grid (the extended grid widens ranges and adds boundary cases).
std::vector<IdentityReport> run_verification_grid(bool extended,
                                                  const HarmonicTable& table = shared_harmonic_table());

}  // namespace hentropy
