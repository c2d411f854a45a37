#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcnet/tolerances.hpp"

namespace dcnet {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct GeometryError : std::runtime_error {
  explicit GeometryError(const std::string& what) : std::runtime_error(what) {}
};

/// Point of RP^n stored as its canonical representative: unit Euclidean norm,
/// first non-negligible coordinate positive.
class HPoint {
 public:
  explicit HPoint(Vec v);
  static HPoint from_list(std::initializer_list<double> v);

  int ambient() const { return static_cast<int>(v_.size()) - 1; }
  const Vec& coords() const { return v_; }

  /// Sign-invariant chordal metric d([x],[y]) = min(|x-y|, |x+y|).
  static double distance(const HPoint& a, const HPoint& b);

 private:
  Vec v_;
};

/// Projective subspace of RP^n, stored as an orthonormal basis of the
/// underlying linear space. Projective dimension = basis columns - 1.
class Subspace {
 public:
  /// Columns of `span` spanning the linear space; rank is decided by the
  /// global tolerance and the basis is orthonormalized.
  explicit Subspace(const Mat& span);
  static Subspace from_points(const std::vector<HPoint>& pts);

  int ambient() const { return static_cast<int>(basis_.rows()) - 1; }
  int dim() const { return static_cast<int>(basis_.cols()) - 1; }
  const Mat& basis() const { return basis_; }

  Mat projector() const { return basis_ * basis_.transpose(); }
  double distance_to(const HPoint& p) const;
  bool contains(const HPoint& p, double tol) const;

  /// Frobenius distance between orthogonal projectors; 0 iff equal subspaces.
  static double distance(const Subspace& a, const Subspace& b);

 private:
  Mat basis_;
};

struct Signature {
  int p = 0;  ///< positive eigenvalues
  int q = 0;  ///< negative eigenvalues
  int r = 0;  ///< numerically zero eigenvalues
  int generator_dim() const { return std::min(p, q) - 1 + r; }
  bool operator==(const Signature&) const = default;
};

/// Real quadric hypersurface of RP^n as a symmetric bilinear form,
/// canonicalized to unit Frobenius norm with a deterministic sign.
class Quadric {
 public:
  explicit Quadric(Mat form);
  static Quadric diagonal(std::initializer_list<double> d);

  int ambient() const { return static_cast<int>(form_.rows()) - 1; }
  const Mat& form() const { return form_; }

  double eval(const Vec& a, const Vec& b) const { return a.dot(form_ * b); }
  double eval(const HPoint& a, const HPoint& b) const {
    return eval(a.coords(), b.coords());
  }
  /// |phi(p,p)| on the canonical representative.
  double incidence_residual(const HPoint& p) const {
    return std::abs(eval(p, p));
  }

 private:
  Mat form_;
};

/// Pencil {lambda*a + mu*b}; members must not be proportional.
struct Pencil {
  Quadric a;
  Quadric b;
  Pencil(Quadric a_, Quadric b_);
  Quadric member(double lambda, double mu) const;
};

// --- operations -----------------------------------------------------------

Subspace join(const std::vector<Subspace>& spaces);
Subspace join(const Subspace& a, const Subspace& b);

/// Orthogonal complement of the underlying linear space.
Subspace complement(const Subspace& s);

/// Intersection; throws GeometryError("empty meet") when the underlying
/// linear intersection is trivial.
Subspace meet(const std::vector<Subspace>& spaces);
Subspace meet(const Subspace& a, const Subspace& b);

struct ConjugacyResult {
  double residual = 0.0;
  bool conjugate = false;
};
ConjugacyResult conjugate(const HPoint& a, const HPoint& b, const Quadric& q,
                          double tol = Tolerances::global().residual);

/// Polar subspace of s with respect to q. Throws when q*basis(s) is rank
/// deficient (s meets the singular locus).
Subspace polar(const Subspace& s, const Quadric& q);
Subspace polar(const HPoint& p, const Quadric& q);
HPoint polar_point(const Subspace& hyperplane, const Quadric& q);

struct Restriction {
  bool isotropic = false;            ///< restricted form vanished identically
  std::optional<Quadric> form;       ///< on s's intrinsic coordinates
  Signature sig;                     ///< zero signature when isotropic
  double residual = 0.0;             ///< max |entry| of the raw restriction
};
Restriction restrict(const Quadric& q, const Subspace& s);

Signature signature(const Quadric& q);
Signature signature_of(const Mat& symmetric);

struct SecondIntersection {
  HPoint point;
  bool tangent = false;  ///< line tangent at p; point == p
};
/// Second point of line ∩ q given that p lies on both. Throws for isotropic
/// lines and when p fails the incidence precondition.
SecondIntersection second_intersection(const Subspace& line, const HPoint& p,
                                       const Quadric& q);

struct PencilMember {
  double lambda = 0.0;
  double mu = 0.0;
  Quadric quadric;
  Signature sig;
  int multiplicity = 1;
  double det_residual = 0.0;  ///< |det| at the root, relative to poly scale
};
struct PencilDegeneration {
  bool everywhere_degenerate = false;
  std::vector<PencilMember> members;
};
/// All real projective parameters [lambda:mu] where det(lambda*A + mu*B) = 0.
PencilDegeneration degenerate_members(const Pencil& p);

/// Tagged isotropic-subspace constraint for quadric_through.
struct IsotropicConstraint {
  Subspace subspace;
};

/// Unique quadric through the given points with the given isotropic
/// subspaces. Throws "over-constrained" / "under-determined(k)".
Quadric quadric_through(const std::vector<HPoint>& points,
                        const std::vector<IsotropicConstraint>& constraints = {});

struct QuadricFit {
  Quadric quadric;
  double residual = 0.0;  ///< sigma_min / sigma_max of the constraint matrix
};
/// Least-squares variant: always returns the best-fitting quadric.
QuadricFit fit_quadric(const std::vector<HPoint>& points,
                       const std::vector<IsotropicConstraint>& constraints = {});

struct MeetPoint {
  HPoint point;
  double residual = 0.0;  ///< second-smallest singular value ratio; small iff
                          ///< the intersection is honestly 0-dimensional
};
/// Least-squares common point of several subspaces (stacked projector
/// conditions). More robust than meet() for chained constructions.
MeetPoint meet_point(const std::vector<Subspace>& spaces);

// --- small helpers used across modules ------------------------------------

/// Rank of a matrix with the global relative singular-value cutoff.
int numeric_rank(const Mat& m);

/// sigma_min / sigma_max, or 0 for a zero matrix. Small iff rank deficient.
double rank_deficiency_residual(const Mat& m);

/// Orthonormal basis (columns) of the nullspace of m (right null vectors).
Mat nullspace(const Mat& m);

}  // namespace dcnet
