#pragma once

#include "skewfatou/expr.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace skewfatou {

struct disk {
  cplx center{0.0, 0.0};
  double radius = 0.0;
};

struct approx_piece {
  disk d;
  fn target; // holomorphic on a neighbourhood of d
};

// One polynomial approximating several targets on pairwise disjoint closed
// disks (Runge-type data). Boundary sampling suffices: fit minus target is
// holomorphic on each disk, so its sup over the disk sits on the circle.
struct approx_problem {
  std::vector<approx_piece> pieces;
  double tolerance = 1e-6;       // sup-error target on the union, >= 0
  int max_degree = 256;
  std::size_t samples_per_disk = 4096; // fit grid; clamped up to 4096
  std::uint64_t seed = 1;        // interior spot checks
  unsigned threads = 0;
};

struct piece_fit_error {
  double achieved = 0.0; // max |fit - target| on the >=4096-point fit grid
  bool met = false;
};

struct polynomial_fit {
  bool success = false;     // every piece met tolerance and coefficients export cleanly
  int degree_used = 0;
  double requested_tolerance = 0.0;
  // Monomial basis in u = (x - center)/scale. Kept even when the tolerance was
  // missed (best polynomial the ladder reached); cleared only when the
  // monomial export disagrees with the ladder evaluation.
  std::vector<cplx> coeffs;
  cplx center{0.0, 0.0};
  double scale = 1.0;       // hull of all disks maps into the unit disk
  std::vector<piece_fit_error> errors;
  std::size_t grid_per_disk = 0;
  // Conditioning diagnostics from the orthogonalized-ladder least squares.
  double min_subdiag_ratio = 1.0; // min h_{j+1,j} / ||ladder column||
  double max_reorth = 0.0;        // largest second-pass correction
  double eval_consistency = 0.0;  // recurrence vs Horner on a probe set
  std::string note;

  fn to_expr() const; // polynomial node; throws when coeffs were rejected
};

// Least squares over weighted boundary samples of all disks (each piece
// weighted equally), built degree by degree on an orthogonalized monomial
// ladder with early stop once every piece meets tolerance.
polynomial_fit fit_piecewise(const approx_problem& p);

// Independent certification: per-piece sup of |fit - target| on a fresh
// boundary grid density_factor times denser, times a 1.05 safety factor.
std::vector<double> certify_sup_error(const polynomial_fit& fit, const approx_problem& p,
                                      std::size_t density_factor = 4);

// Max |fit - target| over n random interior points of each disk (maximum
// modulus makes these no larger than the boundary sup; tests assert that).
std::vector<double> interior_spot_max(const polynomial_fit& fit, const approx_problem& p,
                                      std::size_t n, std::uint64_t seed);

} // namespace skewfatou
