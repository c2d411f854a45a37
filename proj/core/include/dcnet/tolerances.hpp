#pragma once

namespace dcnet {

/// Global numeric policy. Every rank/degeneracy decision in the library goes
/// through these thresholds so that "generic" has one tunable meaning.
struct Tolerances {
  /// Singular values below rank_rel * sigma_max count as zero.
  double rank_rel = 1e-10;
  /// Residual threshold for incidence/conjugacy decisions on canonical
  /// representatives (unit vectors, unit-Frobenius forms).
  double residual = 1e-8;
  /// Spread threshold for Laplace-sequence degeneracy classification.
  /// Looser than rank_rel because degeneracy compounds roundoff.
  double spread = 1e-7;

  static Tolerances& global();
};

}  // namespace dcnet
