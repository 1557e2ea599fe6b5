#include "skewfatou/fit.hpp"

#include "skewfatou/parallel.hpp"
#include "skewfatou/util.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace skewfatou {

namespace {

constexpr std::size_t min_grid_per_disk = 4096;

void validate_problem(const approx_problem& p) {
  if (p.pieces.empty()) throw std::invalid_argument("fit: no pieces");
  if (!(p.tolerance >= 0.0) || !std::isfinite(p.tolerance))
    throw std::invalid_argument("fit: tolerance must be finite and >= 0");
  if (p.max_degree < 0) throw std::invalid_argument("fit: max_degree must be >= 0");
  for (std::size_t i = 0; i < p.pieces.size(); ++i) {
    const disk& d = p.pieces[i].d;
    if (!is_finite(d.center) || !std::isfinite(d.radius) || d.radius <= 0.0)
      throw std::invalid_argument("fit: piece " + std::to_string(i) + " has a bad disk");
    if (!p.pieces[i].target) throw std::invalid_argument("fit: piece " + std::to_string(i) + " has no target");
  }
  for (std::size_t i = 0; i < p.pieces.size(); ++i)
    for (std::size_t j = i + 1; j < p.pieces.size(); ++j) {
      const disk& a = p.pieces[i].d;
      const disk& b = p.pieces[j].d;
      if (!(std::abs(a.center - b.center) > a.radius + b.radius)) {
        std::ostringstream os;
        os << "fit: closed disks " << i << " and " << j << " are not disjoint ("
           << "|c_i - c_j| = " << fmt_double(std::abs(a.center - b.center))
           << ", r_i + r_j = " << fmt_double(a.radius + b.radius) << ")";
        throw std::invalid_argument(os.str());
      }
    }
}

struct sample_set {
  std::vector<cplx> x;         // raw sample locations
  std::vector<cplx> target;    // target values at x
  std::vector<double> weight;  // per-sample least squares weight
  std::vector<std::size_t> offset; // piece i occupies [offset[i], offset[i+1])
  std::size_t per_disk = 0;
};

cplx circle_point(const disk& d, double turn) {
  double a = 2.0 * std::numbers::pi * turn;
  return d.center + d.radius * cplx(std::cos(a), std::sin(a));
}

// Boundary grid, same count on every disk. half_step shifts the angles so a
// denser grid shares no point with the fit grid.
sample_set boundary_samples(const approx_problem& p, std::size_t per_disk, bool half_step) {
  sample_set s;
  s.per_disk = per_disk;
  std::size_t np = p.pieces.size();
  s.offset.resize(np + 1);
  s.x.resize(np * per_disk);
  s.target.resize(np * per_disk);
  s.weight.resize(np * per_disk);
  double w = 1.0 / std::sqrt(static_cast<double>(per_disk));
  for (std::size_t i = 0; i < np; ++i) {
    s.offset[i] = i * per_disk;
    const approx_piece& pc = p.pieces[i];
    parallel_for(per_disk, p.threads, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t t = lo; t < hi; ++t) {
        double turn = (static_cast<double>(t) + (half_step ? 0.5 : 0.0)) /
                      static_cast<double>(per_disk);
        cplx x = circle_point(pc.d, turn);
        cplx v = eval_z(pc.target, x);
        s.x[i * per_disk + t] = x;
        s.target[i * per_disk + t] = v;
        s.weight[i * per_disk + t] = w;
      }
    });
  }
  s.offset[np] = np * per_disk;
  for (std::size_t t = 0; t < s.target.size(); ++t)
    if (!is_finite(s.target[t])) {
      std::size_t piece = t / per_disk;
      throw std::invalid_argument("fit: target of piece " + std::to_string(piece) +
                                  " is not finite on its sample circle");
    }
  return s;
}

// Affine map sending the hull of the disks into the unit disk: center of the
// bounding box, radius reaching the farthest disk edge.
void hull_frame(const approx_problem& p, cplx& center, double& scale) {
  double xmin = 1e308, xmax = -1e308, ymin = 1e308, ymax = -1e308;
  for (const approx_piece& pc : p.pieces) {
    xmin = std::min(xmin, pc.d.center.real() - pc.d.radius);
    xmax = std::max(xmax, pc.d.center.real() + pc.d.radius);
    ymin = std::min(ymin, pc.d.center.imag() - pc.d.radius);
    ymax = std::max(ymax, pc.d.center.imag() + pc.d.radius);
  }
  center = cplx(0.5 * (xmin + xmax), 0.5 * (ymin + ymax));
  scale = 0.0;
  for (const approx_piece& pc : p.pieces)
    scale = std::max(scale, std::abs(pc.d.center - center) + pc.d.radius);
  if (scale <= 0.0) scale = 1.0;
}

cplx horner(const std::vector<cplx>& coeffs, cplx u) {
  cplx acc(0.0, 0.0);
  for (std::size_t j = coeffs.size(); j-- > 0;) acc = acc * u + coeffs[j];
  return acc;
}

double piece_max_residual(const Eigen::VectorXcd& res, const sample_set& s, std::size_t piece) {
  double m = 0.0;
  double w = s.weight[s.offset[piece]];
  for (std::size_t t = s.offset[piece]; t < s.offset[piece + 1]; ++t)
    m = std::max(m, std::abs(res[static_cast<Eigen::Index>(t)]));
  return m / w;
}

} // namespace

fn polynomial_fit::to_expr() const {
  if (coeffs.empty()) throw std::logic_error("fit: to_expr on a fit with rejected coefficients");
  return polynomial(coeffs, var_kind::z, center, cplx(scale, 0.0));
}

polynomial_fit fit_piecewise(const approx_problem& p) {
  validate_problem(p);
  std::size_t per_disk = std::max(p.samples_per_disk, min_grid_per_disk);
  std::size_t m_total = per_disk * p.pieces.size();
  std::size_t cols_max = static_cast<std::size_t>(p.max_degree) + 1;
  if (m_total < cols_max)
    throw std::invalid_argument("fit: " + std::to_string(m_total) + " samples cannot determine degree " +
                                std::to_string(p.max_degree) + "; raise samples_per_disk");

  sample_set s = boundary_samples(p, per_disk, false);

  polynomial_fit out;
  out.requested_tolerance = p.tolerance;
  out.grid_per_disk = per_disk;
  hull_frame(p, out.center, out.scale);

  Eigen::Index m = static_cast<Eigen::Index>(m_total);
  Eigen::VectorXcd u(m); // scaled coordinates, |u| <= 1 on the hull
  Eigen::VectorXcd b(m); // weighted target values
  for (Eigen::Index t = 0; t < m; ++t) {
    u[t] = (s.x[static_cast<std::size_t>(t)] - out.center) / out.scale;
    b[t] = s.weight[static_cast<std::size_t>(t)] * s.target[static_cast<std::size_t>(t)];
  }

  Eigen::MatrixXcd q(m, static_cast<Eigen::Index>(cols_max));
  std::vector<std::vector<cplx>> hcol(cols_max); // hcol[j]: ladder coefficients, diagonal last
  std::vector<cplx> dcoef(cols_max);             // projections of the target
  Eigen::VectorXcd res = b;
  Eigen::VectorXcd v(m), corr(cols_max);

  out.min_subdiag_ratio = 1.0;
  int degree_reached = -1;
  bool met_all = false;
  for (std::size_t j = 0; j < cols_max; ++j) {
    if (j == 0)
      for (Eigen::Index t = 0; t < m; ++t) v[t] = s.weight[static_cast<std::size_t>(t)];
    else
      v = u.cwiseProduct(q.col(static_cast<Eigen::Index>(j - 1)));
    double in_norm = v.norm();

    hcol[j].assign(j + 1, cplx(0.0, 0.0));
    if (j > 0) {
      auto prev = q.leftCols(static_cast<Eigen::Index>(j));
      Eigen::VectorXcd c1 = prev.adjoint() * v;
      v.noalias() -= prev * c1;
      Eigen::VectorXcd c2 = prev.adjoint() * v; // second pass keeps the ladder orthonormal
      v.noalias() -= prev * c2;
      for (std::size_t i = 0; i < j; ++i) {
        hcol[j][i] = c1[static_cast<Eigen::Index>(i)] + c2[static_cast<Eigen::Index>(i)];
        out.max_reorth = std::max(out.max_reorth, std::abs(c2[static_cast<Eigen::Index>(i)]));
      }
    }
    double norm = v.norm();
    if (in_norm > 0.0) out.min_subdiag_ratio = std::min(out.min_subdiag_ratio, norm / in_norm);
    if (!(norm > 1e-14 * in_norm)) {
      std::ostringstream os;
      os << "fit: orthogonal ladder broke down at degree " << j << " (column norm ratio "
         << fmt_double(in_norm > 0.0 ? norm / in_norm : 0.0) << ", min ratio so far "
         << fmt_double(out.min_subdiag_ratio) << ", max reorth " << fmt_double(out.max_reorth)
         << "); the sample set cannot separate this degree";
      throw std::runtime_error(os.str());
    }
    hcol[j][j] = norm;
    q.col(static_cast<Eigen::Index>(j)) = v / norm;

    cplx d = q.col(static_cast<Eigen::Index>(j)).dot(res);
    dcoef[j] = d;
    res.noalias() -= d * q.col(static_cast<Eigen::Index>(j));

    degree_reached = static_cast<int>(j);
    met_all = true;
    for (std::size_t i = 0; i < p.pieces.size(); ++i)
      if (!(piece_max_residual(res, s, i) <= p.tolerance)) {
        met_all = false;
        break;
      }
    if (met_all) break;
  }

  out.degree_used = degree_reached;
  out.errors.resize(p.pieces.size());
  for (std::size_t i = 0; i < p.pieces.size(); ++i) {
    out.errors[i].achieved = piece_max_residual(res, s, i);
    out.errors[i].met = out.errors[i].achieved <= p.tolerance;
  }

  if (!met_all) {
    std::ostringstream os;
    os << "tolerance " << fmt_double(p.tolerance) << " not met at max degree " << p.max_degree
       << "; worst piece error " << fmt_double(std::max_element(out.errors.begin(), out.errors.end(),
                                                                [](const piece_fit_error& a, const piece_fit_error& b) {
                                                                  return a.achieved < b.achieved;
                                                                })
                                                   ->achieved);
    out.note = os.str();
  }

  // Expand the ladder into monomial coefficients of u, even when the tolerance
  // was missed: a shortfall still produces the best polynomial the ladder
  // found, and callers report the achieved errors next to the request.
  // Triangular recurrence:
  // u * phi_{j-1} = sum_{i<=j} h(i,j) phi_i.
  std::size_t cols = static_cast<std::size_t>(degree_reached) + 1;
  std::vector<std::vector<cplx>> basis(cols);
  basis[0] = {cplx(1.0, 0.0) / hcol[0][0]};
  for (std::size_t j = 1; j < cols; ++j) {
    std::vector<cplx> acc(j + 1, cplx(0.0, 0.0));
    for (std::size_t t = 0; t < basis[j - 1].size(); ++t) acc[t + 1] = basis[j - 1][t];
    for (std::size_t i = 0; i < j; ++i)
      for (std::size_t t = 0; t < basis[i].size(); ++t) acc[t] -= hcol[j][i] * basis[i][t];
    for (cplx& c : acc) c /= hcol[j][j];
    basis[j] = std::move(acc);
  }
  out.coeffs.assign(cols, cplx(0.0, 0.0));
  for (std::size_t j = 0; j < cols; ++j)
    for (std::size_t t = 0; t < basis[j].size(); ++t) out.coeffs[t] += dcoef[j] * basis[j][t];

  // The ladder recurrence is the well conditioned evaluation; make sure the
  // exported monomial form reproduces it before trusting the coefficients.
  double consistency = 0.0;
  std::size_t probes = 256;
  for (std::size_t t = 0; t < probes; ++t) {
    const approx_piece& pc = p.pieces[t % p.pieces.size()];
    double turn = 0.61803398874989485 * static_cast<double>(t + 1);
    turn -= std::floor(turn);
    cplx x = circle_point(pc.d, turn);
    cplx uu = (x - out.center) / out.scale;
    std::vector<cplx> phi(cols);
    phi[0] = cplx(1.0, 0.0) / hcol[0][0];
    for (std::size_t j = 1; j < cols; ++j) {
      cplx val = uu * phi[j - 1];
      for (std::size_t i = 0; i < j; ++i) val -= hcol[j][i] * phi[i];
      phi[j] = val / hcol[j][j];
    }
    cplx rec(0.0, 0.0);
    for (std::size_t j = 0; j < cols; ++j) rec += dcoef[j] * phi[j];
    consistency = std::max(consistency, std::abs(rec - horner(out.coeffs, uu)));
  }
  out.eval_consistency = consistency;

  out.success = met_all;
  double worst = 0.0;
  for (const piece_fit_error& e : out.errors) worst = std::max(worst, e.achieved);
  double level = std::max(p.tolerance, worst);
  if (consistency > 0.01 * level) {
    if (!out.note.empty()) out.note += "; ";
    out.note += "monomial form drifts " + fmt_double(consistency) +
                " from the ladder evaluation (error level " + fmt_double(level) + ")";
    if (consistency > 0.5 * level) {
      out.success = false;
      out.note += "; coefficients rejected";
      out.coeffs.clear();
    }
  }
  return out;
}

std::vector<double> certify_sup_error(const polynomial_fit& fit, const approx_problem& p,
                                      std::size_t density_factor) {
  if (fit.coeffs.empty()) throw std::invalid_argument("certify: fit has no coefficients");
  if (density_factor < 1) throw std::invalid_argument("certify: density_factor must be >= 1");
  validate_problem(p);
  std::size_t per_disk = std::max(p.samples_per_disk, min_grid_per_disk) * density_factor;
  std::vector<double> out(p.pieces.size(), 0.0);
  for (std::size_t i = 0; i < p.pieces.size(); ++i) {
    const approx_piece& pc = p.pieces[i];
    double err = parallel_reduce<double>(
        per_disk, p.threads, 0.0,
        [&](std::size_t lo, std::size_t hi) {
          double m = 0.0;
          for (std::size_t t = lo; t < hi; ++t) {
            double turn = (static_cast<double>(t) + 0.5) / static_cast<double>(per_disk);
            cplx x = circle_point(pc.d, turn);
            cplx u = (x - fit.center) / fit.scale;
            m = std::max(m, std::abs(horner(fit.coeffs, u) - eval_z(pc.target, x)));
          }
          return m;
        },
        [](double a, double b) { return std::max(a, b); });
    out[i] = err * 1.05;
  }
  return out;
}

std::vector<double> interior_spot_max(const polynomial_fit& fit, const approx_problem& p,
                                      std::size_t n, std::uint64_t seed) {
  if (fit.coeffs.empty()) throw std::invalid_argument("interior check: fit has no coefficients");
  validate_problem(p);
  std::vector<double> out(p.pieces.size(), 0.0);
  for (std::size_t i = 0; i < p.pieces.size(); ++i) {
    const approx_piece& pc = p.pieces[i];
    std::mt19937_64 rng = seeded_engine(seed, i);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double m = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      double r = pc.d.radius * std::sqrt(unit(rng));
      double a = 2.0 * std::numbers::pi * unit(rng);
      cplx x = pc.d.center + r * cplx(std::cos(a), std::sin(a));
      cplx u = (x - fit.center) / fit.scale;
      m = std::max(m, std::abs(horner(fit.coeffs, u) - eval_z(pc.target, x)));
    }
    out[i] = m;
  }
  return out;
}

} // namespace skewfatou
