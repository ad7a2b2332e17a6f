#pragma once

#include <cstddef>
#include <vector>

#include "stou/model.hpp"
#include "stou/random.hpp"
#include "stou/sim_cholesky.hpp"

namespace stou {

struct GridSimConfig {
  int truncation_p = 300;       // kernel set to zero beyond truncation_p * dt time units
  int cells_per_obs_cell = 1;   // integration mesh subdivision per lattice step

  void validate() const;
};

/// Approximate simulation of the ambit-set integral
///
///   Y_t(x) = int_{s <= t} int_{|xi - x| <= c (t - s)} exp(-lambda (t - s)) L(dxi, ds)
///
/// on a rectangular mesh of (dx/m) x (dt/m) cells, m = cells_per_obs_cell,
/// restricted to t - s <= p dt. A cell meeting the cone of an observation
/// point contributes exp(-lambda (t - s_mid)) * (mu_seed A + tau sqrt(A) Z_cell),
/// where A is the exact intersected area and Z_cell is one standard normal
/// per mesh cell shared by every observation point. Each point therefore sees
/// seed increments with exact mean mu_seed A and variance tau^2 A.
///
/// Because observation points sit on mesh edges the weight pattern is the
/// same for every point; it is tabulated once per (params, lattice, config).
class GridSimulator final : public FieldSimulator {
 public:
  /// Throws BudgetExceeded if the mesh or stencil would exceed max_cells.
  GridSimulator(const StouParams& params, const Lattice& lattice, const GridSimConfig& cfg,
                std::size_t max_cells = 50'000'000);

  FieldSample simulate(Rng& rng) const override;
  const Lattice& lattice() const noexcept override { return lattice_; }

  /// Deterministic part of every value: mu_seed * sum(kernel * A).
  double mean_component() const noexcept { return mean_component_; }
  /// tau^2 * sum(kernel^2 * A): the marginal variance this discretization produces.
  double variance_component() const noexcept { return variance_component_; }
  std::size_t mesh_rows() const noexcept { return mesh_rows_; }
  std::size_t mesh_cols() const noexcept { return mesh_cols_; }

 private:
  struct StencilRow {
    int depth;           // rows back from the observation time, >= 1
    int col_offset;      // mesh column offset of coeffs[0] relative to the point
    std::vector<double> coeffs;  // tau * kernel * sqrt(A)
  };

  Lattice lattice_;
  int cells_per_obs_;
  int depth_rows_;
  int half_width_cols_;
  std::size_t mesh_rows_ = 0;
  std::size_t mesh_cols_ = 0;
  double mean_component_ = 0.0;
  double variance_component_ = 0.0;
  std::vector<StencilRow> stencil_;
};

FieldSample simulate_grid(const StouParams& params, const Lattice& lattice, const GridSimConfig& cfg, Rng& rng);

/// Area of {(u, xi): u in [u0, u1], xi in [a, b], |xi| <= c u}: the part of a
/// mesh cell (depth interval x offset interval) inside the ambit cone.
double cone_cell_area(double u0, double u1, double a, double b, double c);

}  // namespace stou
