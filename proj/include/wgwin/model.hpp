#pragma once

#include <Eigen/Dense>
#include <functional>
#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <string>
#include <vector>

#include "wgwin/common.hpp"

namespace wgwin {

using json = nlohmann::json;

struct Rect {
  double y0, y1, z0, z1;
};

// Coefficients of the operator  -div(a_mat grad u) + a_scl u, given as
// closed-form evaluators together with their cylinder limits (functions of
// the transversal variable only).
struct CoefficientField {
  std::string name;
  std::vector<double> params;
  std::function<Eigen::Matrix2d(double, double)> a_mat;  // (y, z)
  std::function<double(double, double)> a_scl;
  std::function<Eigen::Matrix2d(double)> a_mat0;  // (z), valid for y >= R
  std::function<double(double)> a_scl0;
};

CoefficientField make_coefficients(const std::string& type, const std::vector<double>& params);

struct WaveguideSpec {
  int dim = 2;
  std::vector<Rect> bounded;   // bounded part, contiguous in y, bottoms at z=0
  double height = 1.0;         // cross-section G = (0, height)
  double R = 0.0;              // cylindrical end starts at y = R
  bool mirror_end = false;     // second cylindrical end towards y -> -inf
  CoefficientField coeff;
};

// Boundary chart around the window centre s0 = (center_y, 0) on the bottom
// side z = 0: kappa(y, 0) = scale * (y - center_y). The Jacobian of the
// inverse chart is alpha = 1/scale (constant in v1; the field keeps the
// general signature).
struct ChartSpec {
  double center_y = 0.0;
  double halflen = 1.0;  // chart covers kappa(U) = (-halflen, halflen), chart units
  double scale = 1.0;    // chart units per unit arc length
  std::function<double(double)> alpha;  // defaults to t -> 1/scale

  double alpha_at(double t) const { return alpha ? alpha(t) : 1.0 / scale; }
};

struct WindowSpec {
  double ref_half = 1.0;  // reference window (-ref_half, ref_half) in chart coords
  double ell = 0.1;       // configured scale
};

struct TruncationSpec {
  double L = 10.0;     // cylinder cut at y = L, Dirichlet cap
  double beta = 1.0;   // decay-rate budget / continuation strip half-width
  double tol = 1e-8;   // target truncation tolerance
};

struct WindowInstance {
  double y_lo, y_hi;  // physical window on the bottom boundary
  double ell;
};

struct ValidatedModel {
  WaveguideSpec spec;
  ChartSpec chart;
  WindowSpec window;
  TruncationSpec trunc;
  double alpha0 = 1.0;  // alpha at the window centre

  double y_min() const;  // leftmost extent of the bounded part
  json to_json() const;
};

// Runs all invariant checks on a sampling grid (density: samples_per_unit
// points per unit length in each direction) and returns the violations.
std::vector<std::string> check_model(const WaveguideSpec& spec, const ChartSpec& chart,
                                     const WindowSpec& window, const TruncationSpec& trunc,
                                     int samples_per_unit = 64);

// Throwing variant: EllipticityViolation / GeometryInconsistency on the
// first failed invariant, otherwise the normalized model.
ValidatedModel validate_spec(const WaveguideSpec& spec, const ChartSpec& chart,
                             const WindowSpec& window, const TruncationSpec& trunc,
                             int samples_per_unit = 64);

WindowInstance scale_window(const ValidatedModel& model, double ell);

// Strict JSON loading: unknown keys are rejected.
ValidatedModel model_from_json(const json& j);
ValidatedModel load_model_file(const std::string& path);

}  // namespace wgwin
