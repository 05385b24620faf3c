#include "hentropy/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "hentropy/special_functions.hpp"

namespace hentropy {

namespace {

// Direct heads of the zeta sums sum_j j^{-gamma} (ln j)^r, r = 0, 1, 2,
// closed with Euler–Maclaurin tails. J grows until every truncation bound
// clears 1e-13 of its sum.
struct ZetaSums {
  double s0 = 0.0;  // zeta(gamma)
  double s1 = 0.0;  // sum j^-gamma ln j
  double s2 = 0.0;  // sum j^-gamma ln^2 j
};

ZetaSums zeta_sums(double gamma) {
  std::uint64_t j_cut =
      std::max<std::uint64_t>(512, 8 * static_cast<std::uint64_t>(gamma) + 8);
  for (int attempt = 0; attempt < 24; ++attempt) {
    KahanSum h0;
    KahanSum h1;
    KahanSum h2;
    h0.add(1.0);  // j = 1 contributes 1, ln 1 = 0
    for (std::uint64_t j = 2; j <= j_cut; ++j) {
      const double lj = std::log(static_cast<double>(j));
      const double w = std::exp(-gamma * lj);
      h0.add(w);
      h1.add(w * lj);
      h2.add(w * lj * lj);
    }
    const TailSum t0 = power_log_tail(gamma, j_cut, 0);
    const TailSum t1 = power_log_tail(gamma, j_cut, 1);
    const TailSum t2 = power_log_tail(gamma, j_cut, 2);
    ZetaSums out;
    out.s0 = h0.value() + t0.value;
    out.s1 = h1.value() + t1.value;
    out.s2 = h2.value() + t2.value;
    const double worst = std::max({t0.error_bound / out.s0,
                                   t1.error_bound / std::max(out.s1, 1e-300),
                                   t2.error_bound / std::max(out.s2, 1e-300)});
    if (worst < 1e-13) return out;
    j_cut *= 2;
  }
  throw std::runtime_error("zeta_sums: tail bounds failed to converge");
}

}  // namespace

Pmf Pmf::finite(std::vector<double> probs) {
  if (probs.empty()) {
    throw std::invalid_argument("finite pmf: empty mass vector");
  }
  double total = 0.0;
  for (const double p : probs) {
    if (!std::isfinite(p) || p <= 0.0) {
      throw std::invalid_argument("finite pmf: masses must be positive");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument(
        "finite pmf: masses sum to " + std::to_string(total) +
        ", outside the 1e-9 renormalization window");
  }
  for (double& p : probs) p /= total;
  std::sort(probs.begin(), probs.end(), std::greater<>());

  Pmf pmf;
  pmf.family_ = Family::kFinite;
  pmf.probs_ = std::move(probs);
  pmf.cumulative_.resize(pmf.probs_.size());
  KahanSum cum;
  KahanSum ent;
  KahanSum sq;
  for (std::size_t i = 0; i < pmf.probs_.size(); ++i) {
    const double p = pmf.probs_[i];
    cum.add(p);
    pmf.cumulative_[i] = cum.value();
    const double lp = std::log(p);
    ent.add(-p * lp);
    sq.add(p * lp * lp);
  }
  pmf.cumulative_.back() = 1.0;
  pmf.entropy_ = std::max(ent.value(), 0.0);
  pmf.var_log_p_ = std::max(sq.value() - pmf.entropy_ * pmf.entropy_, 0.0);
  return pmf;
}

Pmf Pmf::geometric(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("geometric pmf: p must lie in (0, 1)");
  }
  Pmf pmf;
  pmf.family_ = Family::kGeometric;
  pmf.param_ = p;
  const double q = 1.0 - p;
  const double lq = std::log1p(-p);
  pmf.entropy_ = (-q * lq - p * std::log(p)) / p;
  pmf.var_log_p_ = lq * lq * q / (p * p);
  return pmf;
}

Pmf Pmf::zeta(double gamma) {
  if (!(gamma > 1.0)) {
    throw std::invalid_argument("zeta pmf: gamma must be > 1");
  }
  Pmf pmf;
  pmf.family_ = Family::kZeta;
  pmf.param_ = gamma;
  const ZetaSums sums = zeta_sums(gamma);
  const double z = sums.s0;
  const double log_z = std::log(z);
  pmf.zeta_norm_ = z;
  // ln p_j = -(gamma ln j + ln Z)
  pmf.entropy_ = log_z + gamma * sums.s1 / z;
  const double second_moment =
      (gamma * gamma * sums.s2 + 2.0 * gamma * log_z * sums.s1) / z +
      log_z * log_z;
  pmf.var_log_p_ = std::max(second_moment - pmf.entropy_ * pmf.entropy_, 0.0);
  return pmf;
}

double Pmf::declared_alpha() const {
  return family_ == Family::kZeta ? 1.0 / param_ : 0.0;
}

double Pmf::mass(std::uint64_t symbol) const {
  if (symbol == 0) throw std::domain_error("mass: symbols start at 1");
  switch (family_) {
    case Family::kFinite:
      return symbol <= probs_.size() ? probs_[symbol - 1] : 0.0;
    case Family::kGeometric:
      return std::exp(std::log(param_) +
                      static_cast<double>(symbol - 1) * std::log1p(-param_));
    case Family::kZeta:
      return std::exp(-param_ * std::log(static_cast<double>(symbol))) /
             zeta_norm_;
  }
  return 0.0;
}

const std::vector<double>& Pmf::finite_probs() const {
  if (family_ != Family::kFinite) {
    throw std::logic_error("finite_probs: not a finite pmf");
  }
  return probs_;
}

const std::vector<double>& Pmf::cumulative() const {
  if (family_ != Family::kFinite) {
    throw std::logic_error("cumulative: not a finite pmf");
  }
  return cumulative_;
}

std::string Pmf::family_name() const {
  switch (family_) {
    case Family::kFinite:
      return "finite";
    case Family::kGeometric:
      return "geometric";
    case Family::kZeta:
      return "zeta";
  }
  return "unknown";
}

namespace {

// p^m (1-p)^k with the k = 0 and p = 1 corners handled explicitly.
double moment_term(double p, int m, std::uint64_t k) {
  const double head = std::pow(p, m);
  if (k == 0) return head;
  if (p >= 1.0) return 0.0;
  return head * std::exp(static_cast<double>(k) * std::log1p(-p));
}

}  // namespace

double Pmf::tail_moment(int m, std::uint64_t k) const {
  if (m < 1) throw std::domain_error("tail_moment: m must be >= 1");
  switch (family_) {
    case Family::kFinite: {
      KahanSum acc;
      for (const double p : probs_) acc.add(moment_term(p, m, k));
      return acc.value();
    }
    case Family::kGeometric: {
      const double q = 1.0 - param_;
      const double lq = std::log1p(-param_);
      const double decay = -std::expm1(m * lq);  // 1 - q^m
      KahanSum acc;
      for (std::uint64_t j = 1;; ++j) {
        const double pj =
            std::exp(std::log(param_) + static_cast<double>(j - 1) * lq);
        acc.add(moment_term(pj, m, k));
        // remaining <= sum_{i>j} p_i^m = (p_j q)^m / (1 - q^m)
        const double rest = std::pow(pj * q, m) / decay;
        if (rest <= std::max(1e-16 * acc.value(), 1e-18)) break;
        if (j > (std::uint64_t{1} << 40)) {
          throw std::runtime_error("tail_moment: geometric sum stalled");
        }
      }
      return acc.value();
    }
    case Family::kZeta: {
      // Direct head until k p_j <= 1/2, then expand (1-p)^k binomially; each
      // power of p turns the tail into a Hurwitz-style sum handled in log
      // space. The expansion alternates with decaying terms, so the first
      // omitted term bounds the remainder.
      const double gamma = param_;
      const double lc = -std::log(zeta_norm_);  // ln(1/Z)
      const double c = 1.0 / zeta_norm_;
      std::uint64_t j_cut = 64;
      if (k > 0) {
        const double needed =
            std::pow(2.0 * static_cast<double>(k) * c, 1.0 / gamma);
        if (needed > static_cast<double>(j_cut)) {
          j_cut = static_cast<std::uint64_t>(std::ceil(needed));
        }
      }
      KahanSum acc;
      for (std::uint64_t j = 1; j <= j_cut; ++j) {
        const double pj =
            std::exp(lc - gamma * std::log(static_cast<double>(j)));
        acc.add(moment_term(pj, m, k));
      }
      for (std::uint64_t i = 0;; ++i) {
        if (k < (std::uint64_t{1} << 62) && i > k) break;  // C(k, i) = 0
        const double log_term = log_binomial(k, i) +
                                (static_cast<double>(m) + i) * lc +
                                power_tail_log(gamma * (m + i), j_cut);
        const double term = std::exp(log_term);
        acc.add((i & 1) ? -term : term);
        if (term <= std::max(1e-16 * std::abs(acc.value()), 1e-300)) break;
        if (i > 512) {
          throw std::runtime_error("tail_moment: zeta expansion stalled");
        }
      }
      return std::max(acc.value(), 0.0);
    }
  }
  return 0.0;
}

double Pmf::exact_bias(std::uint64_t n) const {
  if (n < 2) throw std::domain_error("exact_bias: n must be >= 2");
  switch (family_) {
    case Family::kFinite: {
      KahanSum acc;
      for (const double p : probs_) {
        const double x = 1.0 - p;
        if (x >= 1.0) continue;  // p below one ulp of 1; contribution < 1e-14
        acc.add(p * log_tail_series(x, n));
      }
      return -acc.value();
    }
    case Family::kGeometric: {
      const double p = param_;
      const double lq = std::log1p(-p);
      const double neg_lq = -lq;
      KahanSum acc;
      for (std::uint64_t j = 1;; ++j) {
        const double lpj = std::log(p) + static_cast<double>(j - 1) * lq;
        const double pj = std::exp(lpj);
        const double x = 1.0 - pj;
        if (x >= 1.0) break;  // symbols this deep carry < 1e-14 total
        acc.add(pj * log_tail_series(x, n));
        // sum_{i>j} p_i (-ln p_i) bounds the rest: the per-symbol tail series
        // is at most -ln p_i.
        const double qj = std::exp(static_cast<double>(j) * lq);
        const double rest =
            -std::log(p) * qj +
            neg_lq * qj * (static_cast<double>(j) * p + (1.0 - p)) / p;
        if (rest <= std::max(1e-15 * acc.value(), 1e-15)) break;
      }
      return -acc.value();
    }
    case Family::kZeta: {
      // Head: per-symbol tail series for j <= J. Beyond J every p_j is small
      // enough that  sum_{i>=n} (1-p)^i / i = -ln p - J(n-1) + D(p)  with
      //   D(p) = sum_{i>=1} (-1)^{i+1} C(n-1, i) p^i / i
      // truncated after p^3; with (n-1) p_J <= 1/4 the alternating terms
      // decay and the first omitted one bounds the remainder.
      const double gamma = param_;
      const double c = 1.0 / zeta_norm_;
      const double log_z = std::log(zeta_norm_);
      const double nm1 = static_cast<double>(n) - 1.0;
      const double j_n1 = harmonic(n - 1);

      std::uint64_t j_cut = std::max<std::uint64_t>(
          1000, 8 * static_cast<std::uint64_t>(gamma) + 8);
      if (nm1 > 0.0) {
        const double needed = std::pow(4.0 * nm1 * c, 1.0 / gamma);
        if (needed > static_cast<double>(j_cut)) {
          j_cut = static_cast<std::uint64_t>(std::ceil(needed));
        }
      }

      const double b1 = nm1;
      const double b2 = nm1 * (nm1 - 1.0) / 2.0 / 2.0;        // C(n-1,2)/2
      const double b3 = nm1 * (nm1 - 1.0) * (nm1 - 2.0) / 6.0 / 3.0;
      const double b4 = nm1 * (nm1 - 1.0) * (nm1 - 2.0) * (nm1 - 3.0) / 24.0 / 4.0;

      for (int attempt = 0;; ++attempt) {
        const TailSum t0 = power_log_tail(gamma, j_cut, 0);
        const TailSum t1 = power_log_tail(gamma, j_cut, 1);
        const TailSum t2 = power_log_tail(2.0 * gamma, j_cut, 0);
        const TailSum t3 = power_log_tail(3.0 * gamma, j_cut, 0);
        const TailSum t4 = power_log_tail(4.0 * gamma, j_cut, 0);
        const TailSum t5 = power_log_tail(5.0 * gamma, j_cut, 0);
        const double truncation =
            std::max(b4, 1.0) * std::pow(c, 5) * t5.value +
            t0.error_bound * (gamma + log_z + j_n1) + t1.error_bound * gamma +
            t2.error_bound * b1 * c * c + t3.error_bound * b2 * std::pow(c, 3) +
            t4.error_bound * b3 * std::pow(c, 4);
        if (truncation > 1e-12 && attempt < 24) {
          j_cut *= 2;
          continue;
        }
        if (truncation > 1e-10) {
          throw std::runtime_error("exact_bias: zeta tail failed to converge");
        }
        KahanSum acc;
        for (std::uint64_t j = 1; j <= j_cut; ++j) {
          const double pj =
              std::exp(-gamma * std::log(static_cast<double>(j))) * c;
          acc.add(pj * log_tail_series(1.0 - pj, n));
        }
        acc.add(c * (gamma * t1.value + log_z * t0.value));  // p (-ln p)
        acc.add(-j_n1 * c * t0.value);
        acc.add(b1 * c * c * t2.value);
        acc.add(-b2 * std::pow(c, 3) * t3.value);
        acc.add(b3 * std::pow(c, 4) * t4.value);
        return -acc.value();
      }
    }
  }
  return 0.0;
}

namespace {

// Uniform on the open interval (0,1): 53-bit mantissa, offset half a step so
// 0 and 1 are unreachable. Everything downstream of the engine is explicit
// IEEE arithmetic, keeping draws identical across platforms.
inline double uniform01(std::mt19937_64& eng) {
  return (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53;
}

constexpr double kSymbolLimit = 9.2e18;  // stay clear of uint64 wraparound

std::uint64_t sample_zeta_once(std::mt19937_64& eng, double gamma, double b) {
  // Rejection sampler for p_j proportional to j^{-gamma} (Devroye's method):
  // exact for the full infinite support, no truncation.
  const double am1 = gamma - 1.0;
  for (;;) {
    const double u = uniform01(eng);
    const double v = uniform01(eng);
    const double xd = std::floor(std::pow(u, -1.0 / am1));
    if (xd >= kSymbolLimit) {
      throw std::overflow_error(
          "zeta sample: candidate symbol exceeds 64-bit range (gamma too "
          "close to 1)");
    }
    const double t = std::pow(1.0 + 1.0 / xd, am1);
    if (v * xd * (t - 1.0) / (b - 1.0) <= t / b) {
      return static_cast<std::uint64_t>(xd);
    }
  }
}

}  // namespace

SampleDraw sample(const Pmf& pmf, std::uint64_t n, std::uint64_t seed) {
  if (n == 0) throw std::domain_error("sample: n must be >= 1");
  SampleDraw draw;
  draw.n = n;
  draw.seed = seed;
  draw.symbols.reserve(static_cast<std::size_t>(n));
  std::mt19937_64 eng(seed);
  switch (pmf.family()) {
    case Family::kFinite: {
      const auto& cum = pmf.cumulative();
      for (std::uint64_t i = 0; i < n; ++i) {
        const double u = uniform01(eng);
        const auto it = std::upper_bound(cum.begin(), cum.end(), u);
        const std::size_t idx =
            std::min<std::size_t>(static_cast<std::size_t>(it - cum.begin()),
                                  cum.size() - 1);
        draw.symbols.push_back(static_cast<std::uint64_t>(idx) + 1);
      }
      break;
    }
    case Family::kGeometric: {
      const double lq = std::log1p(-pmf.param());
      for (std::uint64_t i = 0; i < n; ++i) {
        const double u = uniform01(eng);
        const double r = std::ceil(std::log1p(-u) / lq);
        if (r >= kSymbolLimit) {
          throw std::overflow_error("geometric sample: symbol out of range");
        }
        draw.symbols.push_back(r < 1.0 ? 1 : static_cast<std::uint64_t>(r));
      }
      break;
    }
    case Family::kZeta: {
      const double b = std::pow(2.0, pmf.param() - 1.0);
      for (std::uint64_t i = 0; i < n; ++i) {
        draw.symbols.push_back(sample_zeta_once(eng, pmf.param(), b));
      }
      break;
    }
  }
  return draw;
}

Pmf pmf_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("family") || !j.at("family").is_string()) {
    throw std::invalid_argument(
        "distribution: expected an object with a \"family\" string");
  }
  const std::string family = j.at("family").get<std::string>();
  if (family == "finite") {
    if (!j.contains("probs") || !j.at("probs").is_array()) {
      throw std::invalid_argument("finite distribution: missing \"probs\" array");
    }
    std::vector<double> probs;
    for (const auto& v : j.at("probs")) {
      if (!v.is_number()) {
        throw std::invalid_argument("finite distribution: probs must be numbers");
      }
      probs.push_back(v.get<double>());
    }
    return Pmf::finite(std::move(probs));
  }
  if (family == "geometric") {
    if (!j.contains("p") || !j.at("p").is_number()) {
      throw std::invalid_argument("geometric distribution: missing numeric \"p\"");
    }
    return Pmf::geometric(j.at("p").get<double>());
  }
  if (family == "zeta") {
    if (!j.contains("gamma") || !j.at("gamma").is_number()) {
      throw std::invalid_argument("zeta distribution: missing numeric \"gamma\"");
    }
    return Pmf::zeta(j.at("gamma").get<double>());
  }
  throw std::invalid_argument("distribution: unknown family \"" + family + "\"");
}

void pmf_to_json(const Pmf& pmf, nlohmann::json& j) {
  j = nlohmann::json::object();
  j["family"] = pmf.family_name();
  switch (pmf.family()) {
    case Family::kFinite:
      j["probs"] = pmf.finite_probs();
      break;
    case Family::kGeometric:
      j["p"] = pmf.param();
      break;
    case Family::kZeta:
      j["gamma"] = pmf.param();
      break;
  }
}

}  // namespace hentropy
