#include "stou/sim_grid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>

#include "stou/errors.hpp"

namespace stou {

void GridSimConfig::validate() const {
  if (truncation_p < 1) throw Error(ErrorKind::InvalidArgument, "truncation_p must be >= 1");
  if (cells_per_obs_cell < 1) throw Error(ErrorKind::InvalidArgument, "cells_per_obs_cell must be >= 1");
}

double cone_cell_area(double u0, double u1, double a, double b, double c) {
  auto width = [&](double u) { return std::max(0.0, std::min(b, c * u) - std::max(a, -c * u)); };
  // The width is piecewise linear in u with kinks where the cone edge
  // crosses a cell side, so the trapezoid rule between kinks is exact.
  std::array<double, 4> knots{u0, u1, std::abs(a) / c, std::abs(b) / c};
  std::sort(knots.begin(), knots.end());
  double area = 0.0;
  double prev_u = u0;
  double prev_w = width(u0);
  for (double u : knots) {
    if (u <= prev_u || u > u1) continue;
    const double w = width(u);
    area += 0.5 * (prev_w + w) * (u - prev_u);
    prev_u = u;
    prev_w = w;
  }
  return area;
}

GridSimulator::GridSimulator(const StouParams& params, const Lattice& lattice, const GridSimConfig& cfg,
                             std::size_t max_cells)
    : lattice_(lattice), cells_per_obs_(cfg.cells_per_obs_cell) {
  cfg.validate();
  const double lambda = params.lambda();
  const double c = params.c();
  const double depth = cfg.truncation_p * lattice.dt();
  if (std::exp(-lambda * depth) > 1e-2) {
    warn("kernel truncation too shallow: exp(-lambda p dt) = " + std::to_string(std::exp(-lambda * depth)));
  }

  const int m = cells_per_obs_;
  const double ht = lattice.dt() / m;
  const double hx = lattice.dx() / m;
  depth_rows_ = cfg.truncation_p * m;
  const double cols_needed = std::ceil(c * depth / hx - 1e-9);
  if (!(cols_needed < 1e9)) throw Error(ErrorKind::BudgetExceeded, "cone too wide for the integration mesh");
  half_width_cols_ = std::max(1, static_cast<int>(cols_needed));

  mesh_rows_ = static_cast<std::size_t>(depth_rows_) + static_cast<std::size_t>(m) * (lattice.nt() - 1);
  mesh_cols_ = 2 * static_cast<std::size_t>(half_width_cols_) + static_cast<std::size_t>(m) * (lattice.nx() - 1);
  if (mesh_rows_ * mesh_cols_ > max_cells) {
    throw Error(ErrorKind::BudgetExceeded, "integration mesh of " + std::to_string(mesh_rows_) + "x" +
                                               std::to_string(mesh_cols_) + " cells exceeds budget");
  }

  const double tau = params.tau();
  std::size_t stencil_size = 0;
  stencil_.reserve(static_cast<std::size_t>(depth_rows_));
  for (int r = 1; r <= depth_rows_; ++r) {
    const double u0 = (r - 1) * ht;
    const double u1 = r * ht;
    const double kernel = std::exp(-lambda * 0.5 * (u0 + u1));
    const int q_lo = std::max(-half_width_cols_, static_cast<int>(std::floor(-c * u1 / hx)));
    const int q_hi = std::min(half_width_cols_ - 1, static_cast<int>(std::ceil(c * u1 / hx)));
    StencilRow row{r, q_lo, {}};
    row.coeffs.reserve(static_cast<std::size_t>(q_hi - q_lo + 1));
    for (int q = q_lo; q <= q_hi; ++q) {
      const double area = cone_cell_area(u0, u1, q * hx, (q + 1) * hx, c);
      row.coeffs.push_back(tau * kernel * std::sqrt(area));
      mean_component_ += kernel * area;
      variance_component_ += kernel * kernel * area;
    }
    // Drop zero-area cells at both ends.
    while (!row.coeffs.empty() && row.coeffs.back() == 0.0) row.coeffs.pop_back();
    std::size_t lead = 0;
    while (lead < row.coeffs.size() && row.coeffs[lead] == 0.0) ++lead;
    row.coeffs.erase(row.coeffs.begin(), row.coeffs.begin() + static_cast<std::ptrdiff_t>(lead));
    row.col_offset += static_cast<int>(lead);
    stencil_size += row.coeffs.size();
    if (!row.coeffs.empty()) stencil_.push_back(std::move(row));
  }
  if (stencil_size > max_cells) throw Error(ErrorKind::BudgetExceeded, "grid stencil exceeds budget");
  mean_component_ *= params.mu_seed();
  variance_component_ *= params.tau2();
}

FieldSample GridSimulator::simulate(Rng& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> z(mesh_rows_ * mesh_cols_);
  for (double& v : z) v = normal(rng);

  const int m = cells_per_obs_;
  FieldMatrix values(lattice_.nt(), lattice_.nx());
  for (int k = 0; k < lattice_.nt(); ++k) {
    const std::size_t boundary = static_cast<std::size_t>(depth_rows_) + static_cast<std::size_t>(m) * k;
    for (int j = 0; j < lattice_.nx(); ++j) {
      const std::ptrdiff_t edge = half_width_cols_ + static_cast<std::ptrdiff_t>(m) * j;
      double noise = 0.0;
      for (const StencilRow& row : stencil_) {
        const double* zrow = z.data() + (boundary - static_cast<std::size_t>(row.depth)) * mesh_cols_ +
                             (edge + row.col_offset);
        double acc = 0.0;
        for (std::size_t i = 0; i < row.coeffs.size(); ++i) acc += row.coeffs[i] * zrow[i];
        noise += acc;
      }
      values(k, j) = mean_component_ + noise;
    }
  }
  return FieldSample(lattice_, std::move(values));
}

FieldSample simulate_grid(const StouParams& params, const Lattice& lattice, const GridSimConfig& cfg, Rng& rng) {
  return GridSimulator(params, lattice, cfg).simulate(rng);
}

}  // namespace stou
