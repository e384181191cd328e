#include "wgwin/model.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>

namespace wgwin {

namespace {

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  for (auto it = j.begin(); it != j.end(); ++it)
    require(allowed.count(it.key()) > 0, Errc::BadConfig, "unknown key '" + it.key() + "' in " + where);
}

double poly_eval(const std::vector<double>& flat, int ny, int nz, double y, double z) {
  // coefficients c_{ij} y^i z^j, row-major in i
  double s = 0.0, yi = 1.0;
  for (int i = 0; i < ny; ++i) {
    double zj = 1.0, row = 0.0;
    for (int j = 0; j < nz; ++j) {
      row += flat[i * nz + j] * zj;
      zj *= z;
    }
    s += row * yi;
    yi *= y;
  }
  return s;
}

}  // namespace

CoefficientField make_coefficients(const std::string& type, const std::vector<double>& params) {
  CoefficientField c;
  c.name = type;
  c.params = params;
  auto ident = [](double, double) { return Eigen::Matrix2d::Identity().eval(); };
  if (type == "identity") {
    c.a_mat = ident;
    c.a_scl = [](double, double) { return 0.0; };
    c.a_mat0 = [](double) { return Eigen::Matrix2d::Identity().eval(); };
    c.a_scl0 = [](double) { return 0.0; };
  } else if (type == "diag") {
    require(params.size() == 3, Errc::BadConfig, "diag needs [ayy, azz, a0]");
    double ayy = params[0], azz = params[1], a0 = params[2];
    c.a_mat = [=](double, double) { return Eigen::Vector2d(ayy, azz).asDiagonal().toDenseMatrix(); };
    c.a_scl = [=](double, double) { return a0; };
    c.a_mat0 = [=](double) { return Eigen::Vector2d(ayy, azz).asDiagonal().toDenseMatrix(); };
    c.a_scl0 = [=](double) { return a0; };
  } else if (type == "sheared") {
    require(params.size() == 1, Errc::BadConfig, "sheared needs [c]");
    double s = params[0];
    Eigen::Matrix2d m;
    m << 1.0, s, s, 1.0;
    c.a_mat = [=](double, double) { return m; };
    c.a_scl = [](double, double) { return 0.0; };
    c.a_mat0 = [=](double) { return m; };
    c.a_scl0 = [](double) { return 0.0; };
  } else if (type == "linear_a0") {
    c.a_mat = ident;
    c.a_scl = [](double, double z) { return 1.0 + z; };
    c.a_mat0 = [](double) { return Eigen::Matrix2d::Identity().eval(); };
    c.a_scl0 = [](double z) { return 1.0 + z; };
  } else if (type == "layered") {
    c.a_mat = ident;
    c.a_scl = [](double, double z) { return z > 0.5 ? 10.0 : 0.0; };
    c.a_mat0 = [](double) { return Eigen::Matrix2d::Identity().eval(); };
    c.a_scl0 = [](double z) { return z > 0.5 ? 10.0 : 0.0; };
  } else if (type == "pinched") {
    // a_zz dips to -0.1 at (y,z) = (-1/2, 1/2); constructed ellipticity failure
    c.a_mat = [](double y, double z) {
      double b = std::exp(-((y + 0.5) * (y + 0.5) + (z - 0.5) * (z - 0.5)) / 0.01);
      return Eigen::Vector2d(1.0, 1.0 - 1.1 * b).asDiagonal().toDenseMatrix();
    };
    c.a_scl = [](double, double) { return 0.0; };
    c.a_mat0 = [](double) { return Eigen::Matrix2d::Identity().eval(); };
    c.a_scl0 = [](double) { return 0.0; };
  } else {
    fail(Errc::BadConfig, "unknown coefficient type '" + type + "'");
  }
  return c;
}

double ValidatedModel::y_min() const {
  double m = spec.R;
  for (const auto& r : spec.bounded) m = std::min(m, r.y0);
  return m;
}

std::vector<std::string> check_model(const WaveguideSpec& spec, const ChartSpec& chart,
                                     const WindowSpec& window, const TruncationSpec& trunc,
                                     int samples_per_unit) {
  std::vector<std::string> bad;
  auto note = [&](const std::string& tag, const std::string& msg) { bad.push_back(tag + ": " + msg); };

  if (spec.dim != 2) note("GeometryInconsistency", "only d=2 supported");
  if (spec.height <= 0) note("GeometryInconsistency", "cross-section height must be positive");
  if (spec.bounded.empty()) note("GeometryInconsistency", "bounded part is empty");

  // Bounded rectangles: contiguous in y, bottoms at z=0, last one ends at R.
  double ymin = spec.R;
  for (std::size_t i = 0; i < spec.bounded.size(); ++i) {
    const Rect& r = spec.bounded[i];
    if (r.y1 <= r.y0 || r.z1 <= r.z0) note("GeometryInconsistency", "degenerate bounded rectangle");
    if (r.z0 != 0.0) note("GeometryInconsistency", "bounded rectangles must start at z=0");
    if (r.z1 < spec.height) note("GeometryInconsistency", "bounded rectangle shorter than cross-section");
    if (i + 1 < spec.bounded.size() && spec.bounded[i + 1].y0 != r.y1)
      note("GeometryInconsistency", "bounded rectangles not contiguous in y");
    ymin = std::min(ymin, r.y0);
  }
  if (!spec.bounded.empty() && spec.bounded.back().y1 != spec.R)
    note("GeometryInconsistency", "bounded part must end at the cylinder start R");
  if (spec.mirror_end)
    for (const auto& r : spec.bounded)
      if (r.z1 != spec.height)
        note("GeometryInconsistency", "mirror-ended domain must be a straight strip");

  // Coefficient sampling: ellipticity and positivity on the bounded part and
  // one cylinder slice.
  double elow = 1e30, alow = 1e30;
  bool symm_ok = true;
  auto scan_rect = [&](double y0, double y1, double z0, double z1) {
    int ny = std::max(2, int(std::ceil((y1 - y0) * samples_per_unit)));
    int nz = std::max(2, int(std::ceil((z1 - z0) * samples_per_unit)));
    for (int i = 0; i <= ny; ++i)
      for (int j = 0; j <= nz; ++j) {
        double y = y0 + (y1 - y0) * i / ny, z = z0 + (z1 - z0) * j / nz;
        Eigen::Matrix2d a = spec.coeff.a_mat(y, z);
        if (std::abs(a(0, 1) - a(1, 0)) > 1e-12 * a.norm()) symm_ok = false;
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(a, Eigen::EigenvaluesOnly);
        elow = std::min(elow, es.eigenvalues().minCoeff());
        alow = std::min(alow, spec.coeff.a_scl(y, z));
      }
  };
  for (const auto& r : spec.bounded) scan_rect(r.y0, r.y1, r.z0, r.z1);
  scan_rect(spec.R, spec.R + 1.0, 0.0, spec.height);
  if (!symm_ok) note("EllipticityViolation", "coefficient matrix not symmetric");
  if (elow < 1e-8)
    note("EllipticityViolation",
         "min eigenvalue of coefficient matrix is " + std::to_string(elow) + " (need >= c > 0)");
  if (alow < 0.0) note("EllipticityViolation", "zero-order coefficient negative: " + std::to_string(alow));

  // Cylinder limit must be attained exactly for y >= R.
  {
    int nz = std::max(2, int(std::ceil(spec.height * samples_per_unit)));
    for (double y : {spec.R, spec.R + 0.7, spec.R + 3.1}) {
      for (int j = 0; j <= nz; ++j) {
        double z = spec.height * j / nz;
        if ((spec.coeff.a_mat(y, z) - spec.coeff.a_mat0(z)).norm() > 1e-14 ||
            std::abs(spec.coeff.a_scl(y, z) - spec.coeff.a_scl0(z)) > 1e-14) {
          note("GeometryInconsistency", "coefficients not transversal on the cylinder (y >= R)");
          goto cyl_done;
        }
      }
      if (spec.mirror_end) {
        for (int j = 0; j <= nz; ++j) {
          double z = spec.height * j / nz;
          if ((spec.coeff.a_mat(ymin - (y - spec.R), z) - spec.coeff.a_mat0(z)).norm() > 1e-14) {
            note("GeometryInconsistency", "coefficients not transversal on the mirror end");
            goto cyl_done;
          }
        }
      }
    }
  }
cyl_done:

  // Chart and window.
  if (chart.halflen <= 0) note("GeometryInconsistency", "chart halflen must be positive");
  if (chart.scale <= 0) note("GeometryInconsistency", "chart scale must be positive");
  {
    int ns = std::max(2, int(std::ceil(2 * chart.halflen * samples_per_unit)));
    for (int i = 0; i <= ns; ++i) {
      double t = -chart.halflen + 2 * chart.halflen * i / ns;
      if (chart.alpha_at(t) <= 0) {
        note("GeometryInconsistency", "chart Jacobian alpha not positive");
        break;
      }
    }
  }
  if (window.ref_half <= 0) note("GeometryInconsistency", "reference window must be nonempty");
  if (!(window.ell > 0 && window.ell < 1)) note("GeometryInconsistency", "window scale ell must lie in (0,1)");
  if (window.ell * window.ref_half > chart.halflen)
    note("GeometryInconsistency", "scaled window does not fit inside the chart");
  // Window must lie on the bottom boundary of the bounded part.
  {
    double wlo = chart.center_y - window.ell * window.ref_half / chart.scale;
    double whi = chart.center_y + window.ell * window.ref_half / chart.scale;
    bool inside = false;
    for (const auto& r : spec.bounded) inside = inside || (wlo >= r.y0 && whi <= r.y1);
    if (!inside) note("GeometryInconsistency", "window not contained in the bounded bottom boundary");
  }

  if (trunc.L <= spec.R) note("GeometryInconsistency", "truncation length must exceed the cylinder start");
  if (trunc.beta <= 0) note("GeometryInconsistency", "decay budget beta must be positive");
  if (std::exp(-2.0 * trunc.beta * (trunc.L - spec.R)) > trunc.tol)
    note("GeometryInconsistency", "truncation budget exp(-2 beta (L-R)) exceeds tolerance");

  return bad;
}

ValidatedModel validate_spec(const WaveguideSpec& spec, const ChartSpec& chart, const WindowSpec& window,
                             const TruncationSpec& trunc, int samples_per_unit) {
  auto bad = check_model(spec, chart, window, trunc, samples_per_unit);
  if (!bad.empty()) {
    Errc code = bad.front().rfind("EllipticityViolation", 0) == 0 ? Errc::EllipticityViolation
                                                                  : Errc::GeometryInconsistency;
    std::string what = bad.front();
    if (bad.size() > 1) what += " (+" + std::to_string(bad.size() - 1) + " more)";
    fail(code, what);
  }
  ValidatedModel m{spec, chart, window, trunc, chart.alpha_at(0.0)};
  return m;
}

WindowInstance scale_window(const ValidatedModel& model, double ell) {
  require(ell > 0 && ell <= 1, Errc::ScaleOutOfRange, "ell must lie in (0,1]");
  require(ell * model.window.ref_half <= model.chart.halflen, Errc::ScaleOutOfRange,
          "scaled window leaves the chart");
  double h = ell * model.window.ref_half / model.chart.scale;
  return WindowInstance{model.chart.center_y - h, model.chart.center_y + h, ell};
}

json ValidatedModel::to_json() const {
  json g;
  g["height"] = spec.height;
  g["cylinder_start"] = spec.R;
  g["mirror_end"] = spec.mirror_end;
  g["bounded"] = json::array();
  for (const auto& r : spec.bounded) g["bounded"].push_back({{"y0", r.y0}, {"y1", r.y1}, {"z0", r.z0}, {"z1", r.z1}});
  json c;
  c["type"] = spec.coeff.name;
  if (!spec.coeff.params.empty()) c["params"] = spec.coeff.params;
  json j;
  j["geometry"] = g;
  j["coefficients"] = c;
  j["chart"] = {{"center_y", chart.center_y}, {"halflen", chart.halflen}, {"scale", chart.scale}};
  j["window"] = {{"ref_half", window.ref_half}, {"ell", window.ell}};
  j["truncation"] = {{"L", trunc.L}, {"beta", trunc.beta}, {"tol", trunc.tol}};
  return j;
}

ValidatedModel model_from_json(const json& j) {
  check_keys(j, "model", {"geometry", "coefficients", "chart", "window", "truncation"});
  require(j.contains("geometry") && j.contains("coefficients") && j.contains("chart") &&
              j.contains("window") && j.contains("truncation"),
          Errc::BadConfig, "model file must contain geometry/coefficients/chart/window/truncation");

  const json& g = j.at("geometry");
  check_keys(g, "geometry", {"height", "cylinder_start", "bounded", "mirror_end"});
  WaveguideSpec spec;
  spec.height = g.at("height").get<double>();
  spec.R = g.at("cylinder_start").get<double>();
  spec.mirror_end = g.value("mirror_end", false);
  for (const auto& rj : g.at("bounded")) {
    check_keys(rj, "geometry.bounded[]", {"y0", "y1", "z0", "z1"});
    spec.bounded.push_back(Rect{rj.at("y0").get<double>(), rj.at("y1").get<double>(),
                                rj.at("z0").get<double>(), rj.at("z1").get<double>()});
  }

  const json& c = j.at("coefficients");
  check_keys(c, "coefficients", {"type", "params"});
  std::vector<double> params;
  if (c.contains("params")) params = c.at("params").get<std::vector<double>>();
  spec.coeff = make_coefficients(c.at("type").get<std::string>(), params);

  const json& ch = j.at("chart");
  check_keys(ch, "chart", {"center_y", "halflen", "scale"});
  ChartSpec chart;
  chart.center_y = ch.at("center_y").get<double>();
  chart.halflen = ch.at("halflen").get<double>();
  chart.scale = ch.value("scale", 1.0);

  const json& w = j.at("window");
  check_keys(w, "window", {"ref_half", "ell"});
  WindowSpec window;
  window.ref_half = w.at("ref_half").get<double>();
  window.ell = w.at("ell").get<double>();

  const json& t = j.at("truncation");
  check_keys(t, "truncation", {"L", "beta", "tol"});
  TruncationSpec trunc;
  trunc.L = t.at("L").get<double>();
  trunc.beta = t.at("beta").get<double>();
  trunc.tol = t.at("tol").get<double>();

  return validate_spec(spec, chart, window, trunc);
}

ValidatedModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), Errc::BadConfig, "cannot open model file " + path);
  json j = json::parse(in);
  return model_from_json(j);
}

}  // namespace wgwin
