#pragma once

#include <vector>

#include "dcnet/qnet.hpp"
#include "dcnet/rng.hpp"

namespace dcnet {

/// Q-net with every vertex on a quadric. Construction validates incidence;
/// edge-line isotropy is measured and recorded, not rejected.
struct InscribedNet {
  QNet net;
  Quadric quadric;
  double incidence_residual = 0.0;  ///< max over vertices of |phi(P,P)|
  double min_edge_isotropy_i = 0.0; ///< min over i-edges of |phi(P,P')|
  double min_edge_isotropy_j = 0.0; ///< min over j-edges of |phi(P,P')|
};

InscribedNet make_inscribed(QNet net, Quadric q,
                            double tol = Tolerances::global().residual);

// --- random generation -------------------------------------------------------

/// Random nondegenerate indefinite quadric in RP^n (real points guaranteed).
Quadric random_quadric(int n, Rng& rng);

/// Some point on q, decorrelated by a few random chord hops.
HPoint random_point_on(const Quadric& q, Rng& rng);

/// Second intersection of a random chord of q through p; when `section` is
/// given the chord stays inside it. Retries past tangencies.
HPoint random_chord_point(const Quadric& q, const HPoint& p, Rng& rng,
                          const Subspace* section = nullptr);

/// Generic inscribed Q-net: first row and column sampled freely on q,
/// interior vertices placed in quad-plane ∩ q, so every quad is planar and
/// every vertex is on q by construction.
InscribedNet random_inscribed_net(const Quadric& q, int rows, int cols, Rng& rng);

/// rows x (m+1) inscribed strip whose i-parameter lines live in fixed
/// m-dimensional subspaces H_j (the Goursat-side hypothesis family).
InscribedNet goursat_strip(const Quadric& q, int m, int rows, Rng& rng);

/// Inscribed net whose i-direction edge lines are concurrent per column
/// through focal points, so the first A-transform is already Laplace
/// degenerate (m = 1 hypothesis family).
InscribedNet laplace_focal_net(const Quadric& q, int rows, int cols, Rng& rng);

// --- theorem operations ------------------------------------------------------

struct Theorem11Result {
  bool corner_on_quadric = false;
  bool transforms_conjugate = false;
  double corner_residual = 0.0;  ///< |phi(P_mm, P_mm)|
  double conj_residual = 0.0;    ///< |phi(L_A^{m-1}, L_B^{m-1})|
};
/// Both sides of the inscribed-net conjugacy criterion, evaluated
/// independently on an m x m net whose other vertices lie on q.
Theorem11Result check_theorem_1_1(const QNet& net, const Quadric& q,
                                  double tol = Tolerances::global().residual);

struct CornerMeets {
  HPoint x;  ///< meet of all i-line spans H_j
  HPoint y;  ///< meet of all j-line spans V_i
  double x_vs_iterated = 0.0;  ///< distance to L_A^{m-1}
  double y_vs_iterated = 0.0;  ///< distance to L_B^{m-1}
};
CornerMeets corollary_XY(const QNet& net);

/// Seed for the unique inscribed extension: a square patch plus the free
/// boundary points (one per step and direction) on q ∩ V_first / q ∩ H_first.
struct ConstrainedSeed {
  InscribedNet patch;
  std::vector<HPoint> boundary_col;  ///< new points of the first j-line
  std::vector<HPoint> boundary_row;  ///< new points of the first i-line
  int d = 1;                         ///< parameter-line span dimension
};

ConstrainedSeed make_constrained_seed(const Quadric& q, int d, int steps, Rng& rng);

/// One extension step: consumes the first boundary pair and returns the
/// (s+1) x (s+1) inscribed net. All new vertices land on the quadric by the
/// conjugacy mechanism; residuals are asserted, not assumed.
InscribedNet extend_constrained(const ConstrainedSeed& seed);

struct ExtensionTrace {
  InscribedNet net;
  double max_new_vertex_residual = 0.0;
  double x_drift = 0.0;
  double y_drift = 0.0;
  std::vector<int> row_span_dims;
  std::vector<int> col_span_dims;
};
ExtensionTrace extend_constrained_steps(ConstrainedSeed seed, int steps);

struct TerminationReport {
  bool hypothesis_met = false;
  bool conclusion_met = false;
  double hypothesis_residual = 0.0;
  double conclusion_residual = 0.0;
  int conclusion_step = 0;
};
/// Goursat degeneracy of the A-sequence at step m forces Laplace degeneracy
/// of the B-sequence at the same step (edge lines must be non-isotropic).
TerminationReport check_goursat_implies_laplace(const InscribedNet& net, int m);
/// Laplace degeneracy of the A-sequence at step m forces Goursat degeneracy
/// of the B-sequence at step m+n-1 (nondegenerate quadric).
TerminationReport check_laplace_implies_goursat(const InscribedNet& net, int m);

struct PencilStructure {
  Quadric v;
  Quadric h;
  Signature v_sig;
  Signature h_sig;
  double pencil_residual = 0.0;   ///< distance of q to span{v, h}
  int dim_v_adjacent = -9;        ///< dim(V_i ∩ V_{i+1})
  int dim_v_skip = -9;            ///< dim(V_i ∩ V_{i+2})
  int dim_h_adjacent = -9;
  int dim_h_skip = -9;
};
/// For a net in RP^{2m} with m-dimensional parameter-line spans: the two
/// quadrics carrying the spans as generators, their signatures, pencil
/// membership of the inscribing quadric, and the generator-system parity.
PencilStructure recover_pencil_structure(const InscribedNet& net);

struct SmallDegeneracyReport {
  int meet_dim = -1;       ///< dim of the common intersection of the H_j
  int expected_step = 0;   ///< A-steps after which Laplace degeneracy must hold
  bool laplace_degenerate = false;
  double residual = 0.0;
};
/// 3x3 nets with 2-dim i-line spans meeting in a line degenerate after one
/// A-step; 4x4 nets with 3-dim spans meeting in a line (resp. plane)
/// degenerate after two (resp. one).
SmallDegeneracyReport check_small_degeneracy(const QNet& net);

/// Pure-projective test nets for check_small_degeneracy.
QNet small_degeneracy_net_3x3(Rng& rng);
QNet small_degeneracy_net_4x4(int common_dim, Rng& rng);

}  // namespace dcnet
