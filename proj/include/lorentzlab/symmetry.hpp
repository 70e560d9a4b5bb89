#pragma once

// Killing / homothetic / conformal analysis of a vector field over a sampled
// region, its causal character, the sign of L_X g on spacelike vectors and the
// non-existence results for compact spacelike submanifolds that follow.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "lorentzlab/spacetime.hpp"

namespace lorentzlab {

enum class SymmetryClass { killing, homothetic, conformal, none };
enum class SignClass { psd, nsd, indefinite, zero };

std::string_view to_string(SymmetryClass c);
std::string_view to_string(SignClass c);

inline constexpr std::size_t kMinSymmetrySamples = 100;
inline constexpr std::size_t kRandomSpacelikeTests = 200;
inline constexpr double kConformalTolerance = 1e-8;
inline constexpr double kSignTolerance = 1e-9;

struct SymmetryOptions {
  double conformal_tolerance = kConformalTolerance;  // relative to max|g|
  double sign_tolerance = kSignTolerance;            // relative to max|g|
  std::size_t random_tests = kRandomSpacelikeTests;
};

struct SymmetryReport {
  SymmetryClass classification = SymmetryClass::none;
  std::vector<std::vector<double>> points;
  std::vector<double> rho;  // per sample
  double rho_min = 0.0, rho_max = 0.0;
  /// max over samples of max|L - 2 rho g|, and the metric scale max|g|.
  double max_conformal_residual = 0.0;
  double scale = 0.0;
  double conformal_tolerance = kConformalTolerance;
  /// L_X g folds to zero, or to a constant multiple of a constant metric.
  bool symbolic_killing = false;
  std::optional<double> symbolic_rho;

  std::size_t timelike = 0, lightlike = 0, zero = 0, spacelike = 0;
  bool future_causal = false;  // every sample future causal (zero allowed)
  bool past_causal = false;
  bool strictly_causal = false;  // timelike or nonzero lightlike everywhere

  SignClass sign = SignClass::zero;
  std::optional<std::size_t> positive_definite_at;  // first witnessing sample
  std::optional<std::size_t> negative_definite_at;
  std::string certification;  // "symbolic" or "sampled-N"
  std::size_t sign_tests = 0;

  bool parallel_lightlike = false;
  ModelKind kind = ModelKind::custom;
  /// Orthogonal-splitted models only: d_t beta <= 0 and d_t g_t >= 0 (resp.
  /// reversed) at every sample.
  std::optional<bool> non_contracting, non_expanding;
};

/// Throws ConfigError with fewer than kMinSymmetrySamples points and
/// HypothesisError if the metric is degenerate at a sample.
SymmetryReport analyze_vector_field(const MetricModel& model, const VectorFieldSpec& x,
                                    const std::vector<std::vector<double>>& region, std::uint64_t seed,
                                    const SymmetryOptions& options = {});

/// Uniform points in the box [lo, hi].
std::vector<std::vector<double>> box_sample(const std::vector<double>& lo, const std::vector<double>& hi,
                                            std::size_t count, std::uint64_t seed);

struct TheoremVerdict {
  std::string id;
  bool applies = false;
  std::vector<std::pair<std::string, bool>> hypotheses;
  /// Excluded compact spacelike submanifolds, empty when nothing applies.
  std::string excluded;
  std::string certification;
  std::optional<std::vector<double>> witness;
};

/// Verdicts in a fixed order: causal_lie_definite, strictly_causal_lie_semidefinite,
/// strictly_causal_killing, conformal_signed, conformal_nonzero_signed,
/// orthogonal_splitted_monotone. Past-directed fields are handled through -X.
std::vector<TheoremVerdict> theorem_applicability(const SymmetryReport& report);

}  // namespace lorentzlab
