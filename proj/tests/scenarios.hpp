#pragma once

// Shared test scenarios: the straight strip with a bottom Neumann window and
// the bulged strip (cavity + half-infinite guide).

#include "wgwin/model.hpp"

namespace wgwin::testing {

// Straight strip R x (0,1), window (-0.5-l, -0.5+l) x {0}.
inline ValidatedModel strip_model(double ell = 0.2, double L = 12.0) {
  WaveguideSpec spec;
  spec.height = 1.0;
  spec.R = 0.0;
  spec.mirror_end = true;
  spec.bounded = {Rect{-1.0, 0.0, 0.0, 1.0}};
  spec.coeff = make_coefficients("identity", {});
  ChartSpec chart;
  chart.center_y = -0.5;
  chart.halflen = 0.5;
  WindowSpec window;
  window.ref_half = 1.0;
  window.ell = ell;
  TruncationSpec trunc;
  trunc.L = L;
  trunc.beta = 1.0;
  trunc.tol = 1e-8;
  return validate_spec(spec, chart, window, trunc);
}

// Same strip with configurable coefficients on the cylinder.
inline ValidatedModel strip_model_coeff(const std::string& type, const std::vector<double>& params,
                                        double ell = 0.2) {
  WaveguideSpec spec;
  spec.height = 1.0;
  spec.R = 0.0;
  spec.mirror_end = true;
  spec.bounded = {Rect{-1.0, 0.0, 0.0, 1.0}};
  spec.coeff = make_coefficients(type, params);
  ChartSpec chart;
  chart.center_y = -0.5;
  chart.halflen = 0.5;
  WindowSpec window;
  window.ref_half = 1.0;
  window.ell = ell;
  TruncationSpec trunc;
  trunc.L = 12.0;
  trunc.beta = 1.0;
  trunc.tol = 1e-8;
  return validate_spec(spec, chart, window, trunc);
}

// Bulged strip: cavity (-1,0)x(0,1.5) attached to the guide (0,inf)x(0,1).
inline ValidatedModel bulge_model(double ell = 0.2, double L = 10.0) {
  WaveguideSpec spec;
  spec.height = 1.0;
  spec.R = 0.0;
  spec.mirror_end = false;
  spec.bounded = {Rect{-1.0, 0.0, 0.0, 1.5}};
  spec.coeff = make_coefficients("identity", {});
  ChartSpec chart;
  chart.center_y = -0.5;
  chart.halflen = 0.5;
  WindowSpec window;
  window.ref_half = 1.0;
  window.ell = ell;
  TruncationSpec trunc;
  trunc.L = L;
  trunc.beta = 1.0;
  trunc.tol = 1e-8;
  return validate_spec(spec, chart, window, trunc);
}

// Wide strip for window-scaling tests (chart large enough for ell = 1).
inline ValidatedModel wide_strip_model(double ell = 0.5) {
  WaveguideSpec spec;
  spec.height = 1.0;
  spec.R = 0.0;
  spec.mirror_end = true;
  spec.bounded = {Rect{-3.0, 0.0, 0.0, 1.0}};
  spec.coeff = make_coefficients("identity", {});
  ChartSpec chart;
  chart.center_y = -1.5;
  chart.halflen = 1.4;
  WindowSpec window;
  window.ref_half = 1.0;
  window.ell = ell;
  TruncationSpec trunc;
  trunc.L = 12.0;
  trunc.beta = 1.0;
  trunc.tol = 1e-8;
  return validate_spec(spec, chart, window, trunc);
}

}  // namespace wgwin::testing
