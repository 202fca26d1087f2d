#pragma once

// Lumped resistor-capacitor network of the pit storage and the surrounding
// ground. Every coefficient is a function of the storage volume scale s_s and is
// computed generically over the scalar type so that derivatives with respect to
// s_s propagate through the geometry.

#include <cmath>
#include <vector>

#include "stes/core/error.hpp"
#include "stes/core/jet.hpp"
#include "stes/model/params.hpp"

namespace stes::model {

template <class S>
struct ThermalNetworkT {
  int storage_layers = 0;
  int ground_layers = 0;
  double c_p = 0.0;
  double t_boundary = 0.0;

  S volume{};
  S top_side{};
  S bottom_side{};
  std::vector<double> layer_depths;  // interface depths z_0 = 0 ... z_M = H (m), independent of s_s

  std::vector<S> c_storage;   // C_s,m (J/K)
  std::vector<S> c_ground;    // C_g,n (J/K)
  std::vector<S> a_cross;     // A_q,m at the interface between layers m and m+1 (m^2)
  std::vector<S> a_wall;      // A_surf,m, buried wall area of layer m (m^2)
  S a_top{};
  std::vector<S> shell_volume;  // V_n (m^3)
  std::vector<S> shell_area;    // A_surf,n at the shell mid-surface (m^2)
  std::vector<double> shell_thickness;

  std::vector<S> r_eff;     // M-1 layer-to-layer resistances (K/W)
  std::vector<S> r_wall;    // R_s,m
  S r_g0{};                 // storage wall to first ground node, already multiplied by M
  std::vector<S> r_ground;  // R_g,n; the last entry connects to the far-field boundary
  S r_top{};

  // Conductances used by the dynamics.
  std::vector<S> g_eff;
  std::vector<S> g_wall_ground;  // 1 / (R_g,0 + R_s,m)
  std::vector<S> g_ground;
  S g_top{};
};

using ThermalNetwork = ThermalNetworkT<double>;

/// Interface depths that split the pyramid into `layers` equal volumes. The
/// split does not depend on the horizontal scale, because every cross-section
/// scales by the same factor.
inline std::vector<double> equal_volume_depths(const StorageGeometry& g) {
  const double a = g.top_side, b = g.bottom_side;
  std::vector<double> z(static_cast<std::size_t>(g.layers) + 1);
  for (int m = 0; m <= g.layers; ++m) {
    const double frac = static_cast<double>(m) / g.layers;
    const double side = std::cbrt(a * a * a - frac * (a * a * a - b * b * b));
    z[static_cast<std::size_t>(m)] = (a - side) * g.height / (a - b);
  }
  z.front() = 0.0;
  z.back() = g.height;
  return z;
}

/// Builds the network for volume scale `scale` (side lengths scale with its square
/// root, the height stays fixed).
template <class S>
ThermalNetworkT<S> derive_network(const StorageGeometry& geom, const GroundMesh& mesh, const ThermalParams& tp,
                                  const S& scale) {
  geom.validate();
  mesh.validate();
  tp.validate();
  if (!(ad::value_of(scale) > 0.0)) throw ConfigError("storage scale must be positive");
  using ad::reciprocal;
  using std::sqrt;

  const int M = geom.layers;
  const int N = mesh.layers;
  const double H = geom.height;

  ThermalNetworkT<S> net;
  net.storage_layers = M;
  net.ground_layers = N;
  net.c_p = tp.c_p;
  net.t_boundary = mesh.t_boundary;

  const S root = sqrt(scale);
  const S a = root * geom.top_side;
  const S b = root * geom.bottom_side;
  const S w = (a - b) * 0.5;
  const S slant = sqrt(w * w + H * H);
  net.top_side = a;
  net.bottom_side = b;
  net.volume = (a * a + a * b + b * b) * (H / 3.0);
  net.layer_depths = equal_volume_depths(geom);
  const auto& z = net.layer_depths;

  auto side_at = [&](double depth) { return a - (a - b) * (depth / H); };

  net.c_storage.assign(static_cast<std::size_t>(M), net.volume * (tp.rho * tp.c_p / M));
  for (int m = 0; m < M; ++m) {
    const auto mi = static_cast<std::size_t>(m);
    S area = (side_at(z[mi]) + side_at(z[mi + 1])) * 2.0 * (z[mi + 1] - z[mi]) * slant / H;
    if (m == M - 1) area = area + b * b;
    net.a_wall.push_back(area);
    net.r_wall.push_back(reciprocal(area * tp.u_wall));
  }
  for (int m = 0; m + 1 < M; ++m) {
    const auto mi = static_cast<std::size_t>(m);
    const S side = side_at(z[mi + 1]);
    const S area = side * side;
    const double dist = 0.5 * (z[mi + 2] - z[mi]);
    net.a_cross.push_back(area);
    net.r_eff.push_back(S(dist) / (area * tp.lambda_eff));
  }
  net.a_top = a * a;
  net.r_top = reciprocal(net.a_top * tp.u_top);

  S wall_total = net.a_wall.front();
  for (int m = 1; m < M; ++m) wall_total = wall_total + net.a_wall[static_cast<std::size_t>(m)];

  // Uniform-thickness offsets of the buried faces. An offset by r of the pyramid
  // is again a truncated pyramid with top side a + 2 r L / H, bottom side
  // b + 2 r (L - w) / H and depth H + r.
  const double dn = mesh.boundary_distance / N;
  auto offset_area = [&](double r) {
    const S at = a + slant * (2.0 * r / H);
    const S bt = b + (slant - w) * (2.0 * r / H);
    return bt * bt + (at + bt) * slant * (2.0 * (H + r) / H);
  };
  auto offset_volume = [&](double r) {
    const S at = a + slant * (2.0 * r / H);
    const S bt = b + (slant - w) * (2.0 * r / H);
    return (at * at + at * bt + bt * bt) * ((H + r) / 3.0);
  };
  for (int n = 0; n < N; ++n) {
    const S vol = offset_volume((n + 1) * dn) - offset_volume(n * dn);
    const S area = offset_area((n + 0.5) * dn);
    net.shell_volume.push_back(vol);
    net.shell_area.push_back(area);
    net.shell_thickness.push_back(dn);
    net.c_ground.push_back(vol * (tp.rho_g * tp.c_p_g));
    net.r_ground.push_back(S(dn) / (area * tp.lambda_g));
  }
  const S r_g0_single = S(0.5 * dn) / (wall_total * tp.lambda_g);
  net.r_g0 = r_g0_single * static_cast<double>(M);

  for (const auto& r : net.r_eff) net.g_eff.push_back(reciprocal(r));
  for (const auto& r : net.r_wall) net.g_wall_ground.push_back(reciprocal(net.r_g0 + r));
  for (const auto& r : net.r_ground) net.g_ground.push_back(reciprocal(r));
  net.g_top = reciprocal(net.r_top);

  for (const auto& c : net.c_storage)
    if (!(ad::value_of(c) > 0.0)) throw ConfigError("degenerate storage geometry");
  for (const auto& c : net.c_ground)
    if (!(ad::value_of(c) > 0.0)) throw ConfigError("degenerate ground mesh");
  return net;
}

inline ThermalNetwork derive_network(const StorageGeometry& geom, const GroundMesh& mesh, const ThermalParams& tp,
                                     double scale = 1.0) {
  return derive_network<double>(geom, mesh, tp, scale);
}

}  // namespace stes::model
