#include "wallflip/she.hpp"

#include <cmath>
#include <stdexcept>

#include "wallflip/stats.hpp"

namespace wallflip {

void SheGrid::validate() const {
  if (!(dx > 0.0) || !(dt > 0.0) || !(x_max > 0.0)) {
    throw std::invalid_argument("grid parameters must be positive");
  }
  if (nodes() < 3) throw std::invalid_argument("grid too small");
  if (dt > dx * dx / 4.0 * (1.0 + 1e-12)) {
    throw std::invalid_argument(
        "time step violates the stability bound dt <= dx^2/4");
  }
}

std::vector<double> sample_bessel3_path(const SheGrid& grid, RngStream& rng) {
  const int n = grid.nodes();
  const double root_dx = std::sqrt(grid.dx);
  std::vector<double> path(n);
  double bx = 0.0;
  double by = 0.0;
  double bz = 0.0;
  path[0] = 0.0;
  for (int i = 1; i < n; ++i) {
    bx += root_dx * rng.normal();
    by += root_dx * rng.normal();
    bz += root_dx * rng.normal();
    path[i] = std::sqrt(bx * bx + by * by + bz * bz);
  }
  return path;
}

double bessel3_marginal_cdf(double x, double r) {
  if (!(x > 0.0)) throw std::invalid_argument("position must be positive");
  if (r <= 0.0) return 0.0;
  const double s = r / std::sqrt(x);
  return std::erf(s / std::sqrt(2.0)) -
         std::sqrt(2.0 / M_PI) * s * std::exp(-0.5 * s * s);
}

namespace {

double do_step(SheState& st, const SheGrid& grid, RngStream& rng,
               std::vector<double>* xi_out, std::vector<double>* deficit_out) {
  const int last = grid.nodes() - 1;
  const double inv_dx2 = 1.0 / (grid.dx * grid.dx);
  const double sigma = std::sqrt(2.0 * grid.dt / grid.dx);
  if (xi_out) xi_out->assign(last + 1, 0.0);
  if (deficit_out) deficit_out->assign(last + 1, 0.0);

  double defect = 0.0;
  double left = st.u[0];
  for (int i = 1; i <= last; ++i) {
    const double old = st.u[i];
    const double right = i < last ? st.u[i + 1] : left;
    const double lap = (left - 2.0 * old + right) * inv_dx2;
    const double xi = rng.normal();
    double next = old + grid.dt * lap + sigma * xi;
    if (xi_out) (*xi_out)[i] = xi;
    if (next < 0.0) {
      const double deficit = -next;
      st.eta_cell[i] += deficit * grid.dx;
      if (deficit_out) (*deficit_out)[i] = deficit;
      next = 0.0;
      defect += next * deficit;
    }
    if (std::abs(next) > 1e8) {
      throw std::runtime_error("explicit scheme blew up");
    }
    st.u[i] = next;
    left = old;
  }
  st.time += grid.dt;
  ++st.steps;
  return defect;
}

}  // namespace

void she_step(SheState& state, const SheGrid& grid, RngStream& rng) {
  do_step(state, grid, rng, nullptr, nullptr);
}

double SheWeakForm::scale() const {
  return std::abs(pairing_final) + std::abs(pairing_initial) +
         std::abs(drift_sum) + std::abs(noise_sum) + std::abs(eta_sum);
}

SheRunResult she_run(std::vector<double> u0, double horizon,
                     const SheGrid& grid, RngStream& rng,
                     std::span<const TestFunction> observers) {
  grid.validate();
  const int n = grid.nodes();
  if (static_cast<int>(u0.size()) != n) {
    throw std::invalid_argument("initial field does not match the grid");
  }
  if (u0[0] != 0.0) {
    throw std::invalid_argument("initial field must vanish at the origin");
  }
  for (double v : u0) {
    if (v < 0.0) {
      throw std::invalid_argument("initial field must be nonnegative");
    }
  }

  SheRunResult out;
  out.state.u = std::move(u0);
  out.state.eta_cell.assign(n, 0.0);

  std::vector<std::vector<double>> phi_tab(observers.size());
  std::vector<KahanSum> drift(observers.size());
  std::vector<KahanSum> noise(observers.size());
  std::vector<KahanSum> eta(observers.size());
  out.weak.resize(observers.size());
  for (std::size_t k = 0; k < observers.size(); ++k) {
    phi_tab[k].resize(n);
    for (int i = 0; i < n; ++i) phi_tab[k][i] = observers[k](grid.dx * i);
    if (phi_tab[k][0] != 0.0) {
      throw std::invalid_argument("observer must vanish at the origin");
    }
    KahanSum p;
    for (int i = 0; i < n; ++i) p.add(out.state.u[i] * phi_tab[k][i]);
    out.weak[k].pairing_initial = grid.dx * p.value();
  }

  const bool observed = !observers.empty();
  std::vector<double> xi;
  std::vector<double> deficit;
  const double inv_dx2 = 1.0 / (grid.dx * grid.dx);
  const double sigma = std::sqrt(2.0 * grid.dt / grid.dx);
  const std::int64_t total_steps = static_cast<std::int64_t>(
      std::ceil(horizon / grid.dt - 1e-9));

  for (std::int64_t step = 0; step < total_steps; ++step) {
    if (observed) {
      for (std::size_t k = 0; k < observers.size(); ++k) {
        KahanSum lap_phi;
        for (int i = 1; i < n; ++i) {
          const double right =
              i + 1 < n ? out.state.u[i + 1] : out.state.u[i - 1];
          const double lap =
              (out.state.u[i - 1] - 2.0 * out.state.u[i] + right) * inv_dx2;
          lap_phi.add(lap * phi_tab[k][i]);
        }
        drift[k].add(grid.dt * grid.dx * lap_phi.value());
      }
    }
    const double defect = do_step(out.state, grid, rng,
                                  observed ? &xi : nullptr,
                                  observed ? &deficit : nullptr);
    out.max_support_defect = std::max(out.max_support_defect, defect);
    if (observed) {
      for (std::size_t k = 0; k < observers.size(); ++k) {
        KahanSum xf;
        KahanSum ef;
        for (int i = 1; i < n; ++i) {
          xf.add(xi[i] * phi_tab[k][i]);
          ef.add(deficit[i] * phi_tab[k][i]);
        }
        noise[k].add(sigma * grid.dx * xf.value());
        eta[k].add(grid.dx * ef.value());
      }
    }
  }

  for (std::size_t k = 0; k < observers.size(); ++k) {
    KahanSum p;
    for (int i = 0; i < n; ++i) p.add(out.state.u[i] * phi_tab[k][i]);
    out.weak[k].pairing_final = grid.dx * p.value();
    out.weak[k].drift_sum = drift[k].value();
    out.weak[k].noise_sum = noise[k].value();
    out.weak[k].eta_sum = eta[k].value();
  }
  return out;
}

double field_value(const std::vector<double>& u, const SheGrid& grid,
                   double x) {
  if (u.empty() || x < 0.0) return 0.0;
  const double pos = x / grid.dx;
  if (pos >= static_cast<double>(u.size() - 1)) return u.back();
  const std::size_t i = static_cast<std::size_t>(pos);
  const double f = pos - static_cast<double>(i);
  return u[i] * (1.0 - f) + u[i + 1] * f;
}

}  // namespace wallflip
