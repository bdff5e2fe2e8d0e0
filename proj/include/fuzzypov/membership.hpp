#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fuzzypov/estimation.hpp"

namespace fuzzypov {

enum class MembershipKind {
  kCerioliZani,
  kBelhadj2011,
  kZediniBelhadj2015,
  kBelhadj2014,
  kChakravarty2019,
  kCheliLemmiTfr,
  kBettiVerma,
  kBetti2006,
};

inline constexpr MembershipKind kAllMembershipKinds[] = {
    MembershipKind::kBelhadj2014,     MembershipKind::kCerioliZani,
    MembershipKind::kChakravarty2019, MembershipKind::kCheliLemmiTfr,
    MembershipKind::kBettiVerma,      MembershipKind::kBetti2006,
    MembershipKind::kZediniBelhadj2015};

std::string to_string(MembershipKind kind);
MembershipKind membership_kind_from_string(const std::string& name);

// Distribution-based kinds evaluate against the income distribution itself
// (ECDF and/or Lorenz complement) rather than fixed thresholds.
bool is_distribution_based(MembershipKind kind);

// Whether the kind's parameters are estimated from data (positive) or chosen
// by the researcher (normative).
enum class ParameterProvenance { kPositive, kNormative };
ParameterProvenance default_provenance(MembershipKind kind);
std::string to_string(ParameterProvenance provenance);

// The 100 percentile-bracket fuzzy sets with their cardinalities.
struct ZbmParams {
  struct Triple {
    double a = 0.0, b = 0.0, c = 0.0;
  };
  std::vector<Triple> triples;
  std::vector<double> set_cardinalities;

  void validate() const;
};

// A fully resolved membership function: kind plus the numeric parameters the
// kind requires.
struct MembershipSpec {
  MembershipKind kind = MembershipKind::kCerioliZani;
  std::optional<double> z1;
  std::optional<double> z2;
  std::optional<double> beta;
  std::optional<double> alpha;
  std::optional<ZbmParams> zbm;
  ParameterProvenance provenance = ParameterProvenance::kNormative;

  void validate() const;
};

// --- Per-unit evaluators ------------------------------------------------

// 1 below z1, linear ramp down on (z1, z2), 0 at and above z2.
double eval_trapezoidal(double income, double z1, double z2);

// Trapezoidal with z1 = 0: full membership only at zero income.
double eval_chakravarty(double income, double z2);

// Harmonic mean of the thresholds; the point where the two ramp pieces of
// the 2014 Belhadj function meet for every beta.
double belhadj_flex_point(double z1, double z2);

double eval_belhadj2014(double income, double z1, double z2, double beta);

// Cardinality-weighted average of the 100 per-set memberships. Sets with an
// empty support interval are ignored; if every remaining cardinality is zero
// the remaining sets are averaged with equal weights.
double eval_zbm(double income, const ZbmParams& params);

double eval_tfr(double income, const WeightedEcdf& ecdf, double alpha);
double eval_betti_verma(double income, const LorenzComplement& lorenz, double alpha);
double eval_betti2006(double income, const WeightedEcdf& ecdf,
                      const LorenzComplement& lorenz, double alpha);

// --- Domain-level evaluation ---------------------------------------------

// Reference distribution for the distribution-based kinds. Estimates for a
// sub-domain evaluate against the national context by default.
struct DistributionContext {
  WeightedEcdf ecdf;
  LorenzComplement lorenz;
};

DistributionContext make_distribution_context(const DomainData& domain);

// Membership vector aligned with the domain rows. When context is null,
// distribution-based kinds use the domain's own distribution.
std::vector<double> evaluate_spec(const DomainData& domain, const MembershipSpec& spec,
                                  const DistributionContext* context = nullptr);

// Solves for alpha >= 1 such that the weighted mean membership equals
// hcr_target, by bisection on the nonincreasing mean-membership curve.
double calibrate_alpha(const DomainData& domain, MembershipKind kind, double hcr_target,
                       const DistributionContext* context = nullptr);

// Assembles the percentile-bracket triples from a 100-vector of estimated
// percentiles and computes set cardinalities on the domain.
ZbmParams zbm_params_from_percentiles(std::span<const double> percentiles,
                                      const DomainData& domain);

// Estimates the percentiles as bootstrap means over `rounds` with-replacement
// resamples of the domain, then assembles the triples.
ZbmParams fit_zbm_params(const DomainData& domain, int rounds, std::uint64_t seed);

// --- Symbolic configuration ----------------------------------------------

// A parameter that is either a literal income or a quantile of a reference
// distribution, written "Q(p)" in config files.
struct ParamValue {
  enum class Kind { kLiteral, kQuantile };
  Kind kind = Kind::kLiteral;
  double value = 0.0;  // literal income, or the quantile probability

  static ParamValue literal(double v) { return {Kind::kLiteral, v}; }
  static ParamValue quantile(double p) { return {Kind::kQuantile, p}; }

  double resolve(const DomainData& reference) const;
  std::string to_text() const;
  static ParamValue parse(const std::string& text);
};

// Unresolved description of a membership function; resolve() binds quantile
// parameters, calibrates alpha and fits percentile triples against a
// reference domain (normally the national sample or population).
struct MembershipSpecConfig {
  MembershipKind kind = MembershipKind::kCerioliZani;
  std::optional<ParamValue> z1;
  std::optional<ParamValue> z2;
  std::optional<double> beta;
  std::optional<double> alpha;  // absent: calibrate to the head count ratio
  std::optional<ParameterProvenance> provenance;
  int zbm_fit_rounds = 100;

  MembershipSpec resolve(const DomainData& reference, const DistributionContext& context,
                         std::uint64_t seed) const;
};

// The bundled default parameterisation of all seven functions: thresholds at
// reference-distribution quantiles, alpha calibrated, percentile triples fit.
std::vector<MembershipSpecConfig> default_spec_configs();

}  // namespace fuzzypov
