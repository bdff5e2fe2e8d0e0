#include "fuzzypov/membership.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numeric>

#include "fuzzypov/errors.hpp"
#include "fuzzypov/rng.hpp"
#include "fuzzypov/util.hpp"

namespace fuzzypov {

std::string to_string(MembershipKind kind) {
  switch (kind) {
    case MembershipKind::kCerioliZani: return "cerioli_zani";
    case MembershipKind::kBelhadj2011: return "belhadj_2011";
    case MembershipKind::kZediniBelhadj2015: return "zedini_belhadj_2015";
    case MembershipKind::kBelhadj2014: return "belhadj_2014";
    case MembershipKind::kChakravarty2019: return "chakravarty_2019";
    case MembershipKind::kCheliLemmiTfr: return "cheli_lemmi_tfr";
    case MembershipKind::kBettiVerma: return "betti_verma";
    case MembershipKind::kBetti2006: return "betti_2006";
  }
  throw ValidationError("unknown membership kind");
}

MembershipKind membership_kind_from_string(const std::string& name) {
  std::string lower;
  for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "cerioli_zani") return MembershipKind::kCerioliZani;
  if (lower == "belhadj_2011") return MembershipKind::kBelhadj2011;
  if (lower == "zedini_belhadj_2015" || lower == "zbm") return MembershipKind::kZediniBelhadj2015;
  if (lower == "belhadj_2014") return MembershipKind::kBelhadj2014;
  if (lower == "chakravarty_2019" || lower == "chakravarty") return MembershipKind::kChakravarty2019;
  if (lower == "cheli_lemmi_tfr" || lower == "tfr") return MembershipKind::kCheliLemmiTfr;
  if (lower == "betti_verma") return MembershipKind::kBettiVerma;
  if (lower == "betti_2006") return MembershipKind::kBetti2006;
  throw ValidationError("UnknownKind: " + name);
}

bool is_distribution_based(MembershipKind kind) {
  switch (kind) {
    case MembershipKind::kCheliLemmiTfr:
    case MembershipKind::kBettiVerma:
    case MembershipKind::kBetti2006:
      return true;
    default:
      return false;
  }
}

ParameterProvenance default_provenance(MembershipKind kind) {
  // Calibrated or bootstrap-estimated parameters make an index positive;
  // researcher-chosen thresholds make it normative.
  switch (kind) {
    case MembershipKind::kZediniBelhadj2015:
    case MembershipKind::kCheliLemmiTfr:
    case MembershipKind::kBettiVerma:
    case MembershipKind::kBetti2006:
      return ParameterProvenance::kPositive;
    default:
      return ParameterProvenance::kNormative;
  }
}

std::string to_string(ParameterProvenance provenance) {
  return provenance == ParameterProvenance::kPositive ? "positive" : "normative";
}

void ZbmParams::validate() const {
  if (triples.empty()) throw ValidationError("EmptyTriples");
  if (set_cardinalities.size() != triples.size())
    throw ValidationError("cardinality vector does not match triples");
  for (const Triple& t : triples) {
    if (!(t.a <= t.b && t.b <= t.c))
      throw ValidationError("triple not ordered: a <= b <= c required");
  }
  for (double card : set_cardinalities)
    if (!(card >= 0.0)) throw ValidationError("negative set cardinality");
}

void MembershipSpec::validate() const {
  switch (kind) {
    case MembershipKind::kCerioliZani:
    case MembershipKind::kBelhadj2011:
      if (!z1 || !z2) throw ValidationError(to_string(kind) + " requires z1 and z2");
      if (!(*z1 < *z2)) throw ValidationError("BadThresholds: z1 < z2 required");
      break;
    case MembershipKind::kBelhadj2014:
      if (!z1 || !z2 || !beta)
        throw ValidationError("belhadj_2014 requires z1, z2 and beta");
      if (!(0.0 < *z1 && *z1 < *z2)) throw ValidationError("BadThresholds: 0 < z1 < z2 required");
      if (!(*beta > 0.0)) throw ValidationError("BadShape: beta > 0 required");
      break;
    case MembershipKind::kChakravarty2019:
      if (!z2) throw ValidationError("chakravarty_2019 requires z2");
      if (!(*z2 > 0.0)) throw ValidationError("BadThresholds: z2 > 0 required");
      break;
    case MembershipKind::kZediniBelhadj2015:
      if (!zbm) throw ValidationError("zedini_belhadj_2015 requires fitted percentile sets");
      zbm->validate();
      break;
    case MembershipKind::kCheliLemmiTfr:
    case MembershipKind::kBettiVerma:
    case MembershipKind::kBetti2006:
      if (!alpha) throw ValidationError(to_string(kind) + " requires alpha");
      if (!(*alpha >= 1.0)) throw ValidationError("BadAlpha: alpha >= 1 required");
      break;
  }
  if (z1 && z2 && !(*z1 < *z2)) throw ValidationError("BadThresholds: z1 < z2 required");
}

double eval_trapezoidal(double income, double z1, double z2) {
  if (!(z1 < z2)) throw ValidationError("BadThresholds: z1 < z2 required");
  if (income <= z1) return 1.0;
  if (income >= z2) return 0.0;
  return (z2 - income) / (z2 - z1);
}

double eval_chakravarty(double income, double z2) {
  if (!(z2 > 0.0)) throw ValidationError("BadThresholds: z2 > 0 required");
  if (income >= z2) return 0.0;
  return (z2 - income) / z2;
}

double belhadj_flex_point(double z1, double z2) { return 2.0 * z1 * z2 / (z1 + z2); }

double eval_belhadj2014(double income, double z1, double z2, double beta) {
  if (!(0.0 < z1 && z1 < z2)) throw ValidationError("BadThresholds: 0 < z1 < z2 required");
  if (!(beta > 0.0)) throw ValidationError("BadShape: beta > 0 required");
  if (income < z1) return 1.0;
  if (income >= z2) return 0.0;
  const double flex = belhadj_flex_point(z1, z2);
  const double mu = income < flex
                        ? 1.0 - 0.5 * std::pow((income - z1) / z1, beta)
                        : 1.0 - 0.5 * std::pow((z2 - income) / z2, beta);
  return std::clamp(mu, 0.0, 1.0);
}

double eval_zbm(double income, const ZbmParams& params) {
  if (params.triples.empty()) throw ValidationError("EmptyTriples");
  double weighted = 0.0;
  double total_card = 0.0;
  double unweighted = 0.0;
  std::size_t live_sets = 0;
  for (std::size_t k = 0; k < params.triples.size(); ++k) {
    const auto& [a, b, c] = params.triples[k];
    if (!(a < c)) continue;  // empty support contributes nothing
    ++live_sets;
    double mu = 0.0;
    if (income >= a && income < b) mu = 1.0;
    else if (income >= b && income < c) mu = (c - income) / (c - b);
    const double card = params.set_cardinalities[k];
    weighted += card * mu;
    total_card += card;
    unweighted += mu;
  }
  if (live_sets == 0) throw ValidationError("AllZeroCardinality: every set is degenerate");
  if (total_card > 0.0) return weighted / total_card;
  return unweighted / static_cast<double>(live_sets);
}

double eval_tfr(double income, const WeightedEcdf& ecdf, double alpha) {
  if (!(alpha >= 1.0)) throw ValidationError("BadAlpha: alpha >= 1 required");
  return std::pow(1.0 - ecdf(income), alpha);
}

double eval_betti_verma(double income, const LorenzComplement& lorenz, double alpha) {
  if (!(alpha >= 1.0)) throw ValidationError("BadAlpha: alpha >= 1 required");
  if (alpha == 1.0) return 1.0;
  return std::pow(lorenz(income), alpha - 1.0);
}

double eval_betti2006(double income, const WeightedEcdf& ecdf, const LorenzComplement& lorenz,
                      double alpha) {
  if (!(alpha >= 1.0)) throw ValidationError("BadAlpha: alpha >= 1 required");
  const double upper = lorenz(income);
  if (alpha == 1.0) return upper;
  return std::pow(1.0 - ecdf(income), alpha - 1.0) * upper;
}

DistributionContext make_distribution_context(const DomainData& domain) {
  return DistributionContext{weighted_ecdf(domain), lorenz_complement(domain)};
}

std::vector<double> evaluate_spec(const DomainData& domain, const MembershipSpec& spec,
                                  const DistributionContext* context) {
  spec.validate();
  std::vector<double> mu(domain.size());

  DistributionContext local;
  if (is_distribution_based(spec.kind) && context == nullptr) {
    local = make_distribution_context(domain);
    context = &local;
  }

  for (std::size_t i = 0; i < domain.size(); ++i) {
    const double y = domain.income[i];
    switch (spec.kind) {
      case MembershipKind::kCerioliZani:
      case MembershipKind::kBelhadj2011:
        mu[i] = eval_trapezoidal(y, *spec.z1, *spec.z2);
        break;
      case MembershipKind::kBelhadj2014:
        mu[i] = eval_belhadj2014(y, *spec.z1, *spec.z2, *spec.beta);
        break;
      case MembershipKind::kChakravarty2019:
        mu[i] = eval_chakravarty(y, *spec.z2);
        break;
      case MembershipKind::kZediniBelhadj2015:
        mu[i] = eval_zbm(y, *spec.zbm);
        break;
      case MembershipKind::kCheliLemmiTfr:
        mu[i] = eval_tfr(y, context->ecdf, *spec.alpha);
        break;
      case MembershipKind::kBettiVerma:
        mu[i] = eval_betti_verma(y, context->lorenz, *spec.alpha);
        break;
      case MembershipKind::kBetti2006:
        mu[i] = eval_betti2006(y, context->ecdf, context->lorenz, *spec.alpha);
        break;
    }
  }
  return mu;
}

namespace {

// Per-unit base values the calibrated kinds raise to a power of alpha:
// u = 1 - F for the ECDF-based kind, l = 1 - L for the Lorenz-based ones.
struct CalibrationBases {
  std::vector<double> u;  // 1 - F(y_i); empty when unused
  std::vector<double> l;  // 1 - L(y_i); empty when unused
  std::vector<double> weight;
  double total_weight = 0.0;
};

CalibrationBases calibration_bases(const DomainData& domain, MembershipKind kind,
                                   const DistributionContext& context) {
  CalibrationBases bases;
  bases.weight = domain.weight;
  bases.total_weight = std::accumulate(domain.weight.begin(), domain.weight.end(), 0.0);
  if (!(bases.total_weight > 0.0)) throw ValidationError("ZeroTotalWeight");
  const bool need_u = kind != MembershipKind::kBettiVerma;
  const bool need_l = kind != MembershipKind::kCheliLemmiTfr;
  for (double y : domain.income) {
    if (need_u) bases.u.push_back(1.0 - context.ecdf(y));
    if (need_l) bases.l.push_back(context.lorenz(y));
  }
  return bases;
}

double mean_membership(const CalibrationBases& bases, MembershipKind kind, double alpha) {
  double sum = 0.0;
  const std::size_t n = bases.weight.size();
  switch (kind) {
    case MembershipKind::kCheliLemmiTfr:
      for (std::size_t i = 0; i < n; ++i)
        sum += bases.weight[i] * std::pow(bases.u[i], alpha);
      break;
    case MembershipKind::kBettiVerma:
      if (alpha == 1.0) return 1.0;
      for (std::size_t i = 0; i < n; ++i)
        sum += bases.weight[i] * std::pow(bases.l[i], alpha - 1.0);
      break;
    case MembershipKind::kBetti2006:
      if (alpha == 1.0) {
        for (std::size_t i = 0; i < n; ++i) sum += bases.weight[i] * bases.l[i];
      } else {
        for (std::size_t i = 0; i < n; ++i)
          sum += bases.weight[i] * std::pow(bases.u[i], alpha - 1.0) * bases.l[i];
      }
      break;
    default:
      throw ValidationError("calibration requires a distribution-based kind");
  }
  return sum / bases.total_weight;
}

// Limit of the mean membership as alpha decreases to 1. Differs from the
// value at alpha = 1 only for the Lorenz-power kind, whose convention there
// is the constant 1.
double mean_membership_above_one(const CalibrationBases& bases, MembershipKind kind) {
  if (kind != MembershipKind::kBettiVerma) return mean_membership(bases, kind, 1.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < bases.weight.size(); ++i)
    if (bases.l[i] > 0.0) sum += bases.weight[i];
  return sum / bases.total_weight;
}

}  // namespace

double calibrate_alpha(const DomainData& domain, MembershipKind kind, double hcr_target,
                       const DistributionContext* context) {
  if (!is_distribution_based(kind))
    throw ValidationError("calibration applies to distribution-based kinds only");
  if (!(hcr_target > 0.0 && hcr_target < 1.0))
    throw ValidationError("hcr target must lie in (0,1)");

  DistributionContext local;
  if (context == nullptr) {
    local = make_distribution_context(domain);
    context = &local;
  }
  const CalibrationBases bases = calibration_bases(domain, kind, *context);

  constexpr double kTolerance = 1e-8;
  constexpr double kAlphaCap = 1048576.0;  // 2^20
  constexpr int kMaxIterations = 200;

  const double at_one = mean_membership(bases, kind, 1.0);
  if (at_one + kTolerance < hcr_target)
    throw ValidationError("TargetNotBracketable: mean membership at alpha = 1 is below the target");
  if (std::abs(at_one - hcr_target) <= kTolerance) return 1.0;
  if (mean_membership_above_one(bases, kind) + kTolerance < hcr_target)
    throw ValidationError(
        "TargetNotBracketable: membership degenerates above alpha = 1 and cannot reach the target");

  double hi = 2.0;
  while (mean_membership(bases, kind, hi) > hcr_target) {
    hi *= 2.0;
    if (hi > kAlphaCap)
      throw ValidationError("TargetNotBracketable: target unreachable below the alpha cap");
  }

  double lo = 1.0;
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double mean = mean_membership(bases, kind, mid);
    if (std::abs(mean - hcr_target) <= kTolerance) return mid;
    if (mean > hcr_target) lo = mid;
    else hi = mid;
  }
  throw ComputationError("NoConvergence: alpha bisection exceeded the iteration cap");
}

ZbmParams zbm_params_from_percentiles(std::span<const double> percentiles,
                                      const DomainData& domain) {
  const std::size_t m = percentiles.size();
  if (m < 2) throw ValidationError("need at least two percentile estimates");
  ZbmParams params;
  params.triples.reserve(m);
  params.triples.push_back({0.0, percentiles[0], percentiles[1]});
  for (std::size_t j = 1; j + 1 < m; ++j)
    params.triples.push_back({percentiles[j - 1], percentiles[j], percentiles[j + 1]});
  params.triples.push_back({percentiles[m - 2],
                            0.5 * (percentiles[m - 2] + percentiles[m - 1]),
                            percentiles[m - 1]});

  // Card(A_k) = sum of per-set memberships over the domain units.
  params.set_cardinalities.assign(params.triples.size(), 0.0);
  for (double y : domain.income) {
    for (std::size_t k = 0; k < params.triples.size(); ++k) {
      const auto& [a, b, c] = params.triples[k];
      if (y >= a && y < b) params.set_cardinalities[k] += 1.0;
      else if (y >= b && y < c) params.set_cardinalities[k] += (c - y) / (c - b);
    }
  }
  params.validate();
  return params;
}

ZbmParams fit_zbm_params(const DomainData& domain, int rounds, std::uint64_t seed) {
  if (domain.size() < 100) throw ValidationError("DomainTooSmall: need at least 100 observations");
  if (rounds < 1) throw ValidationError("bootstrap rounds must be positive");
  const double total = std::accumulate(domain.weight.begin(), domain.weight.end(), 0.0);
  if (!(total > 0.0)) throw ValidationError("ZeroTotalWeight");

  std::vector<double> ps(100);
  for (int j = 1; j <= 100; ++j) ps[static_cast<std::size_t>(j - 1)] = j / 100.0;

  const std::size_t n = domain.size();
  std::vector<double> mean_percentiles(100, 0.0);
  DomainData resample;
  resample.income.resize(n);
  resample.weight.resize(n);
  for (int b = 0; b < rounds; ++b) {
    Rng rng(derive_seed(seed, seed_stream::kZbmFit, static_cast<std::uint64_t>(b)));
    for (std::size_t m = 0; m < n; ++m) {
      const auto pick = static_cast<std::size_t>(rng.below(n));
      resample.income[m] = domain.income[pick];
      resample.weight[m] = domain.weight[pick];
    }
    const std::vector<double> qs = weighted_quantiles(resample, ps);
    for (std::size_t j = 0; j < 100; ++j) mean_percentiles[j] += qs[j];
  }
  for (double& p : mean_percentiles) p /= rounds;
  return zbm_params_from_percentiles(mean_percentiles, domain);
}

double ParamValue::resolve(const DomainData& reference) const {
  if (kind == Kind::kLiteral) return value;
  return weighted_quantile(reference, value);
}

std::string ParamValue::to_text() const {
  if (kind == Kind::kLiteral) return format_double(value);
  return "Q(" + format_double(value) + ")";
}

ParamValue ParamValue::parse(const std::string& text) {
  std::string trimmed;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) trimmed.push_back(c);
  if ((trimmed.starts_with("Q(") || trimmed.starts_with("q(")) && trimmed.ends_with(")")) {
    const std::string inner = trimmed.substr(2, trimmed.size() - 3);
    double p = 0.0;
    auto [ptr, ec] = std::from_chars(inner.data(), inner.data() + inner.size(), p);
    if (ec != std::errc() || ptr != inner.data() + inner.size() || !(p >= 0.0 && p <= 1.0))
      throw ValidationError("bad quantile parameter: " + text);
    return quantile(p);
  }
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(trimmed.data(), trimmed.data() + trimmed.size(), v);
  if (ec != std::errc() || ptr != trimmed.data() + trimmed.size())
    throw ValidationError("bad parameter value: " + text);
  return literal(v);
}

MembershipSpec MembershipSpecConfig::resolve(const DomainData& reference,
                                             const DistributionContext& context,
                                             std::uint64_t seed) const {
  MembershipSpec spec;
  spec.kind = kind;
  spec.provenance = provenance.value_or(default_provenance(kind));
  if (z1) spec.z1 = z1->resolve(reference);
  if (z2) spec.z2 = z2->resolve(reference);
  spec.beta = beta;
  if (is_distribution_based(kind)) {
    if (alpha) {
      spec.alpha = *alpha;
    } else {
      const double line = poverty_line(reference);
      const double target = head_count_ratio(reference, line);
      spec.alpha = calibrate_alpha(reference, kind, target, &context);
    }
  }
  if (kind == MembershipKind::kZediniBelhadj2015)
    spec.zbm = fit_zbm_params(reference, zbm_fit_rounds,
                              derive_seed(seed, seed_stream::kSpecResolve));
  spec.validate();
  return spec;
}

std::vector<MembershipSpecConfig> default_spec_configs() {
  std::vector<MembershipSpecConfig> configs;
  {
    MembershipSpecConfig c;
    c.kind = MembershipKind::kBelhadj2014;
    c.z1 = ParamValue::quantile(0.01);
    c.z2 = ParamValue::quantile(0.99);
    c.beta = 2.0;
    configs.push_back(c);
  }
  {
    MembershipSpecConfig c;
    c.kind = MembershipKind::kCerioliZani;
    c.z1 = ParamValue::quantile(0.001);
    c.z2 = ParamValue::quantile(0.99);
    configs.push_back(c);
  }
  {
    MembershipSpecConfig c;
    c.kind = MembershipKind::kChakravarty2019;
    c.z2 = ParamValue::quantile(0.5);
    configs.push_back(c);
  }
  configs.push_back({MembershipKind::kCheliLemmiTfr, {}, {}, {}, {}, {}, 100});
  configs.push_back({MembershipKind::kBettiVerma, {}, {}, {}, {}, {}, 100});
  configs.push_back({MembershipKind::kBetti2006, {}, {}, {}, {}, {}, 100});
  configs.push_back({MembershipKind::kZediniBelhadj2015, {}, {}, {}, {}, {}, 100});
  return configs;
}

}  // namespace fuzzypov
