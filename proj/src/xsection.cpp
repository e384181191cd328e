#include "wgwin/xsection.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace wgwin {

namespace {

Eigen::MatrixXcd solve_real_spd(const Eigen::LLT<Eigen::MatrixXd>& llt, const Eigen::MatrixXcd& B) {
  Eigen::MatrixXcd out(B.rows(), B.cols());
  out.real() = llt.solve(B.real().eval());
  out.imag() = llt.solve(B.imag().eval());
  return out;
}

// real sparse times complex dense
Eigen::VectorXcd smulc(const Eigen::SparseMatrix<double>& S, const Eigen::VectorXcd& v) {
  Eigen::VectorXd vr = v.real(), vi = v.imag();
  Eigen::VectorXcd w(v.size());
  w.real() = S * vr;
  w.imag() = S * vi;
  return w;
}

Eigen::MatrixXcd smulc(const Eigen::SparseMatrix<double>& S, const Eigen::MatrixXcd& V) {
  Eigen::MatrixXd vr = V.real(), vi = V.imag();
  Eigen::MatrixXcd w(V.rows(), V.cols());
  w.real() = S * vr;
  w.imag() = S * vi;
  return w;
}

}  // namespace

TransversalPencil assemble_transversal(const ValidatedModel& model, int N) {
  require(N >= 8, Errc::AssemblyFailure, "grid size N must be >= 8");
  const auto& c = model.spec.coeff;
  TransversalPencil p;
  p.height = model.spec.height;
  p.fe = std::make_shared<Fem1D>(linspace(0.0, p.height, N + 1));
  auto ayy = [&](double z) { return c.a_mat0(z)(0, 0); };
  auto azz = [&](double z) { return c.a_mat0(z)(1, 1); };
  auto ayz = [&](double z) { return c.a_mat0(z)(0, 1); };
  auto a0 = [&](double z) { return c.a_scl0(z); };

  Eigen::SparseMatrix<double> M2f = p.fe->mass(ayy);
  Eigen::SparseMatrix<double> M0f = p.fe->stiffness(azz) + p.fe->mass(a0);
  Eigen::SparseMatrix<double> Mbf = p.fe->mass([](double) { return 1.0; });
  Eigen::SparseMatrix<double> M1f = p.fe->skew(ayz);

  p.M0_full = M0f;
  p.Mb_full = Mbf;
  p.M2 = drop_dirichlet(M2f);
  p.M0 = drop_dirichlet(M0f);
  p.Mb = drop_dirichlet(Mbf);
  p.M1 = drop_dirichlet(M1f);
  p.has_m1 = p.M1.norm() > 1e-14 * (1.0 + M0f.norm());
  p.n = int(p.M0.rows());
  require(p.M2.coeffs().allFinite() && p.M0.coeffs().allFinite(), Errc::AssemblyFailure,
          "degenerate coefficients");
  return p;
}

Eigen::MatrixXcd TransversalPencil::a_dense(Complex xi, Complex omega2) const {
  Eigen::MatrixXcd A = (xi * xi) * Eigen::MatrixXd(M2).cast<Complex>();
  A += Eigen::MatrixXd(M0).cast<Complex>();
  A -= omega2 * Eigen::MatrixXd(Mb).cast<Complex>();
  if (has_m1) A += (Complex(0, 1) * xi) * Eigen::MatrixXd(M1).cast<Complex>();
  return A;
}

Eigen::MatrixXcd TransversalPencil::a_prime_dense(Complex xi) const {
  Eigen::MatrixXcd A = (2.0 * xi) * Eigen::MatrixXd(M2).cast<Complex>();
  if (has_m1) A += Complex(0, 1) * Eigen::MatrixXd(M1).cast<Complex>();
  return A;
}

BandedEig TransversalPencil::lowest(double xi, int count) const {
  if (!has_m1) {
    Eigen::SparseMatrix<double> A = xi * xi * M2 + M0;
    return banded_lowest_sym(A, Mb, kd, count);
  }
  Eigen::SparseMatrix<Complex> A = (xi * xi * M2 + M0).cast<Complex>();
  A += (Complex(0, 1) * xi) * M1.cast<Complex>();
  return banded_lowest_herm(A, Mb, kd, count);
}

double TransversalPencil::mu_prime(double xi, const Eigen::VectorXcd& x) const {
  Complex num = 2.0 * xi * x.dot(smulc(M2, x));
  if (has_m1) num += Complex(0, 1) * x.dot(smulc(M1, x));
  Complex den = x.dot(smulc(Mb, x));
  return (num / den).real();
}

Eigen::VectorXcd TransversalPencil::embed(const Eigen::VectorXcd& x) const {
  Eigen::VectorXcd full = Eigen::VectorXcd::Zero(n + 2);
  full.segment(1, n) = x;
  return full;
}

double TransversalPencil::boundary_flux_bottom(const Eigen::VectorXd& interior, double mu) const {
  Eigen::VectorXd full = Eigen::VectorXd::Zero(n + 2);
  full.segment(1, n) = interior;
  Eigen::VectorXd r = M0_full * full - mu * (Mb_full * full);
  return r[0];
}

// ---------------------------------------------------------------------------
// Dispersion sweep with eigenvector-overlap branch tracking.

namespace {

struct SweepPoint {
  double xi;
  Eigen::VectorXd vals;    // nb sorted eigenvalues
  Eigen::MatrixXcd vecs;   // (n, nb), Mb-orthonormal
  std::vector<int> order;  // column index of branch b
};

SweepPoint solve_point(const TransversalPencil& p, double xi, int nb) {
  SweepPoint sp;
  sp.xi = xi;
  BandedEig e = p.lowest(xi, nb);
  sp.vals = e.values;
  sp.vecs = e.vectors;
  sp.order.resize(nb);
  std::iota(sp.order.begin(), sp.order.end(), 0);
  return sp;
}

// Greedy branch assignment by Mb-overlap against the previous point.
// Returns the minimal matched overlap over the first k_max branches.
double match_branches(const TransversalPencil& p, const SweepPoint& prev, SweepPoint& cur, int k_max) {
  int nb = int(prev.order.size());
  Eigen::MatrixXcd mbv = smulc(p.Mb, cur.vecs);
  Eigen::MatrixXd ov(nb, nb);  // ov(b_prev, c_cur) = |<x_prev, Mb x_cur>|
  for (int b = 0; b < nb; ++b)
    for (int c = 0; c < nb; ++c)
      ov(b, c) = std::abs((prev.vecs.col(prev.order[b]).conjugate().array() * mbv.col(c).array()).sum());

  std::vector<int> assign(nb, -1);
  std::vector<bool> used(nb, false);
  // Assign branches in order of their best available overlap.
  std::vector<int> branches(nb);
  std::iota(branches.begin(), branches.end(), 0);
  double min_ov = 1.0;
  for (int round = 0; round < nb; ++round) {
    int best_b = -1, best_c = -1;
    double best = -1.0;
    for (int b : branches) {
      if (assign[b] >= 0) continue;
      for (int c = 0; c < nb; ++c) {
        if (used[c]) continue;
        if (ov(b, c) > best) {
          best = ov(b, c);
          best_b = b;
          best_c = c;
        }
      }
    }
    assign[best_b] = best_c;
    used[best_c] = true;
    if (best_b < k_max) min_ov = std::min(min_ov, best);
  }
  cur.order = assign;
  return min_ov;
}

}  // namespace

DispersionData dispersion_sweep(std::shared_ptr<const TransversalPencil> pencil,
                                const std::vector<double>& xi_grid, int k_max,
                                const SweepOptions& opts) {
  require(!xi_grid.empty(), Errc::AssemblyFailure, "empty xi grid");
  require(std::is_sorted(xi_grid.begin(), xi_grid.end()), Errc::AssemblyFailure, "xi grid not sorted");
  require(k_max >= 1, Errc::AssemblyFailure, "k_max must be >= 1");
  const TransversalPencil& p = *pencil;
  int nb = std::min(k_max + opts.buffer, p.n);
  require(nb >= k_max, Errc::AssemblyFailure, "pencil too small for requested branches");

  std::vector<SweepPoint> pts(xi_grid.size());
  parallel_for(xi_grid.size(), opts.threads,
               [&](std::size_t i) { pts[i] = solve_point(p, xi_grid[i], nb); });

  double min_spacing = 1e30;
  for (std::size_t i = 1; i < xi_grid.size(); ++i)
    min_spacing = std::min(min_spacing, xi_grid[i] - xi_grid[i - 1]);
  double spacing_floor = min_spacing / std::pow(2.0, opts.max_refine);

  std::vector<double> overlaps;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    double ov = match_branches(p, pts[i - 1], pts[i], k_max);
    if (ov < opts.overlap_min) {
      double gap = pts[i].xi - pts[i - 1].xi;
      require(gap > 2.0 * spacing_floor, Errc::TrackingAmbiguity,
              "branch tracking did not resolve near xi = " + std::to_string(pts[i].xi));
      SweepPoint mid = solve_point(p, 0.5 * (pts[i].xi + pts[i - 1].xi), nb);
      pts.insert(pts.begin() + i, std::move(mid));
      --i;  // re-examine the left half
      continue;
    }
    overlaps.push_back(ov);
  }

  DispersionData d;
  d.pencil = pencil;
  d.interval_overlap = overlaps;
  d.xi.resize(pts.size());
  d.mu.resize(k_max, pts.size());
  d.dmu.resize(k_max, pts.size());
  d.vecs.resize(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    d.xi[i] = pts[i].xi;
    d.vecs[i].resize(p.n, k_max);
    for (int b = 0; b < k_max; ++b) {
      int c = pts[i].order[b];
      d.mu(b, i) = pts[i].vals[c];
      d.vecs[i].col(b) = pts[i].vecs.col(c);
      d.dmu(b, i) = p.mu_prime(pts[i].xi, pts[i].vecs.col(c));
    }
  }
  return d;
}

DispersionData inject_dispersion(const std::vector<double>& xi,
                                 const std::vector<std::vector<double>>& mu_branches) {
  DispersionData d;
  d.xi = xi;
  int k = int(mu_branches.size());
  d.mu.resize(k, xi.size());
  d.dmu.resize(k, xi.size());
  for (int b = 0; b < k; ++b) {
    require(mu_branches[b].size() == xi.size(), Errc::AssemblyFailure, "injected branch size mismatch");
    for (std::size_t i = 0; i < xi.size(); ++i) d.mu(b, i) = mu_branches[b][i];
  }
  // derivative of the local interpolant
  for (int b = 0; b < k; ++b)
    for (std::size_t i = 0; i < xi.size(); ++i) d.dmu(b, i) = d.branch_dmu(b, xi[i]);
  return d;
}

namespace {

// 5-point Lagrange interpolation (exact for quartics).
double lagrange5(const std::vector<double>& xs, const double* ys, int i0, double x, int deriv) {
  double acc = 0.0;
  for (int a = 0; a < 5; ++a) {
    double xa = xs[i0 + a];
    if (deriv == 0) {
      double term = ys[a];
      for (int b = 0; b < 5; ++b)
        if (b != a) term *= (x - xs[i0 + b]) / (xa - xs[i0 + b]);
      acc += term;
    } else {
      double sum = 0.0;
      for (int c = 0; c < 5; ++c) {
        if (c == a) continue;
        double term = 1.0 / (xa - xs[i0 + c]);
        for (int b = 0; b < 5; ++b)
          if (b != a && b != c) term *= (x - xs[i0 + b]) / (xa - xs[i0 + b]);
        sum += term;
      }
      acc += ys[a] * sum;
    }
  }
  return acc;
}

int window5(const std::vector<double>& xs, double x) {
  int n = int(xs.size());
  int i = int(std::lower_bound(xs.begin(), xs.end(), x) - xs.begin());
  int i0 = std::max(0, std::min(i - 2, n - 5));
  return i0;
}

}  // namespace

double DispersionData::branch_mu(int k, double x) const {
  if (pencil) {
    Eigen::VectorXcd v = branch_vec(k, x);
    Eigen::MatrixXcd A = pencil->a_dense(Complex(x, 0), Complex(0, 0));
    Complex mu = v.dot(A * v) / v.dot(smulc(pencil->Mb, v));
    return mu.real();
  }
  require(xi.size() >= 5, Errc::InsufficientData, "need >= 5 samples to interpolate");
  std::vector<double> ys(5);
  int i0 = window5(xi, x);
  for (int a = 0; a < 5; ++a) ys[a] = mu(k, i0 + a);
  return lagrange5(xi, ys.data(), i0, x, 0);
}

double DispersionData::branch_dmu(int k, double x) const {
  if (pencil) {
    Eigen::VectorXcd v = branch_vec(k, x);
    return pencil->mu_prime(x, v);
  }
  require(xi.size() >= 5, Errc::InsufficientData, "need >= 5 samples to interpolate");
  std::vector<double> ys(5);
  int i0 = window5(xi, x);
  for (int a = 0; a < 5; ++a) ys[a] = mu(k, i0 + a);
  return lagrange5(xi, ys.data(), i0, x, 1);
}

double DispersionData::branch_d2mu(int k, double x, double step) const {
  return (branch_dmu(k, x + step) - branch_dmu(k, x - step)) / (2.0 * step);
}

Eigen::VectorXcd DispersionData::branch_vec(int k, double x) const {
  require(pencil != nullptr, Errc::InsufficientData, "no pencil attached to dispersion data");
  // Solve at x and pick the eigenvector best matching the stored branch
  // vector at the nearest grid point.
  int i = int(std::lower_bound(xi.begin(), xi.end(), x) - xi.begin());
  if (i >= int(xi.size())) i = int(xi.size()) - 1;
  if (i > 0 && std::abs(xi[i - 1] - x) < std::abs(xi[i] - x)) --i;
  int nb = std::min(k_max() + 3, pencil->n);
  BandedEig e = pencil->lowest(x, nb);
  Eigen::VectorXcd ref = smulc(pencil->Mb, Eigen::VectorXcd(vecs[i].col(k)));
  int best = 0;
  double best_ov = -1.0;
  for (int c = 0; c < e.vectors.cols(); ++c) {
    double ov = std::abs((ref.conjugate().array() * e.vectors.col(c).array()).sum());
    if (ov > best_ov) {
      best_ov = ov;
      best = c;
    }
  }
  return e.vectors.col(best);
}

// ---------------------------------------------------------------------------
// Threshold detection: local extrema of the dispersion curves.

std::vector<Threshold> find_thresholds(const DispersionData& data, double omega_max) {
  int K = data.k_max();
  int nx = int(data.xi.size());
  double w2 = omega_max * omega_max;
  require(nx >= 5, Errc::InsufficientData, "sweep too short");

  // Coverage: the highest tracked branch must stay above omega_max^2,
  // otherwise branches beyond k_max could contribute thresholds too.
  double top_min = data.mu.row(K - 1).minCoeff();
  require(K == 1 || top_min > w2, Errc::CoverageIncomplete,
          "highest tracked branch dips below omega_max^2; increase k_max");

  std::vector<Threshold> out;
  for (int k = 0; k < K; ++k) {
    // A minimum just outside the swept interval would be missed.
    bool near_left = data.dmu(k, 0) > 0 && data.mu(k, 0) < w2 * 1.2;
    bool near_right = data.dmu(k, nx - 1) < 0 && data.mu(k, nx - 1) < w2 * 1.2;
    require(!near_left && !near_right, Errc::CoverageIncomplete,
            "branch " + std::to_string(k) + " may have an extremum outside the swept xi range");

    std::vector<double> seeds;
    for (int i = 0; i + 1 < nx; ++i) {
      double d0 = data.dmu(k, i), d1 = data.dmu(k, i + 1);
      if (d0 == 0.0)
        seeds.push_back(data.xi[i]);
      else if (d0 * d1 < 0.0)
        seeds.push_back(data.xi[i] - d0 * (data.xi[i + 1] - data.xi[i]) / (d1 - d0));
    }
    for (double s : seeds) {
      // Newton on mu' with finite-difference second derivative; golden-section
      // style bisection fallback on sign changes.
      double x = s;
      double scale = std::max(1.0, std::abs(data.branch_mu(k, x)));
      bool ok = false;
      for (int it = 0; it < 60; ++it) {
        double g = data.branch_dmu(k, x);
        if (std::abs(g) <= 1e-10 * scale) {
          ok = true;
          break;
        }
        double g2 = data.branch_d2mu(k, x);
        if (std::abs(g2) < 1e-14) break;
        double step = g / g2;
        double limit = 0.5 * (data.xi.back() - data.xi.front());
        if (std::abs(step) > limit) step = std::copysign(limit, step);
        x -= step;
        if (x < data.xi.front() || x > data.xi.back()) {
          x = std::min(std::max(x, data.xi.front()), data.xi.back());
        }
      }
      if (!ok) {
        // bisection on dmu sign change around the seed
        double a = x - 1e-3, b = x + 1e-3;
        double ga = data.branch_dmu(k, a), gb = data.branch_dmu(k, b);
        int expand = 0;
        while (ga * gb > 0 && expand++ < 20) {
          a -= 1e-3;
          b += 1e-3;
          ga = data.branch_dmu(k, a);
          gb = data.branch_dmu(k, b);
        }
        if (ga * gb <= 0) {
          for (int it = 0; it < 200; ++it) {
            double m = 0.5 * (a + b);
            double gm = data.branch_dmu(k, m);
            if (std::abs(gm) <= 1e-10 * scale) break;
            if (ga * gm <= 0) {
              b = m;
              gb = gm;
            } else {
              a = m;
              ga = gm;
            }
          }
          x = 0.5 * (a + b);
          ok = std::abs(data.branch_dmu(k, x)) <= 1e-10 * scale;
        }
      }
      if (!ok) continue;
      double muv = data.branch_mu(k, x);
      if (muv <= 0 || muv > w2 * (1.0 + 1e-12)) continue;
      Threshold t;
      t.Lambda = std::sqrt(muv);
      t.xi_star = x;
      t.branch = k;
      t.mu2 = data.branch_d2mu(k, x);
      t.order = 2;
      out.push_back(t);
    }
  }
  // Deduplicate seeds that converged to the same extremum.
  std::sort(out.begin(), out.end(), [](const Threshold& a, const Threshold& b) {
    return a.Lambda != b.Lambda ? a.Lambda < b.Lambda : a.xi_star < b.xi_star;
  });
  std::vector<Threshold> uniq;
  for (const auto& t : out) {
    bool dup = false;
    for (const auto& u : uniq)
      dup = dup || (u.branch == t.branch && std::abs(u.xi_star - t.xi_star) < 1e-7 &&
                    std::abs(u.Lambda - t.Lambda) < 1e-9 * std::max(1.0, t.Lambda));
    if (!dup) uniq.push_back(t);
  }
  return uniq;
}

// ---------------------------------------------------------------------------
// Characteristic values in the strip |Im xi| <= beta.

namespace {

// Winding number and centroid of det(T(xi)) roots inside a circle; trapezoid
// on the circle with the logarithmic derivative tr(T^{-1} T').
struct WindingResult {
  double count;
  Complex centroid;
};

WindingResult local_root_count(const TransversalPencil& p, Complex omega2, Complex center, double radius,
                               int nq = 32) {
  Complex total(0, 0), first(0, 0);
  for (int q = 0; q < nq; ++q) {
    double th = 2.0 * M_PI * q / nq;
    Complex w = std::polar(radius, th);
    Complex xi = center + w;
    Eigen::MatrixXcd T = p.a_dense(xi, omega2);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(T);
    Eigen::MatrixXcd X = lu.solve(p.a_prime_dense(xi));
    Complex tr = X.trace();
    Complex dxi = Complex(0, 1) * w * (2.0 * M_PI / nq);
    total += tr * dxi;
    first += xi * tr * dxi;
  }
  WindingResult r;
  r.count = (total / Complex(0, 2.0 * M_PI)).real();
  double m = std::round(r.count);
  r.centroid = (m != 0.0) ? (first / Complex(0, 2.0 * M_PI)) / m : center;
  return r;
}

}  // namespace

int CharacteristicSet::total_multiplicity_plus() const {
  int s = 0;
  for (const auto& r : roots)
    if (r.sign > 0) s += r.multiplicity;
  return s;
}
int CharacteristicSet::total_multiplicity_minus() const {
  int s = 0;
  for (const auto& r : roots)
    if (r.sign < 0) s += r.multiplicity;
  return s;
}

static CharacteristicSet charvals_basic(const TransversalPencil& p, Complex omega, double beta) {
  Complex omega2 = omega * omega;
  int n = p.n;
  Eigen::MatrixXd M2d = Eigen::MatrixXd(p.M2);
  Eigen::LLT<Eigen::MatrixXd> llt(M2d);
  require(llt.info() == Eigen::Success, Errc::AssemblyFailure, "M2 not positive definite");

  Eigen::MatrixXcd Kt = Eigen::MatrixXd(p.M0).cast<Complex>() - omega2 * Eigen::MatrixXd(p.Mb).cast<Complex>();
  Eigen::MatrixXcd Ct = Eigen::MatrixXcd::Zero(n, n);
  if (p.has_m1) Ct = Complex(0, 1) * Eigen::MatrixXd(p.M1).cast<Complex>();

  Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
  comp.topRightCorner(n, n) = Eigen::MatrixXcd::Identity(n, n);
  comp.bottomLeftCorner(n, n) = -solve_real_spd(llt, Kt);
  comp.bottomRightCorner(n, n) = -solve_real_spd(llt, Ct);

  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
  require(es.info() == Eigen::Success, Errc::LinalgFailure, "companion eigensolve failed");

  std::vector<Complex> all_roots(es.eigenvalues().data(), es.eigenvalues().data() + 2 * n);
  std::vector<Complex> cand;
  for (Complex xi : all_roots)
    if (std::abs(xi.imag()) <= beta + 1e-7 * (1.0 + std::abs(xi))) cand.push_back(xi);
  // No root may sit on the strip boundary.
  for (Complex xi : cand)
    require(std::abs(std::abs(xi.imag()) - beta) > 1e-8 * (1.0 + std::abs(xi)), Errc::RootOnStripBoundary,
            "characteristic value on |Im xi| = beta");
  std::erase_if(cand, [&](Complex xi) { return std::abs(xi.imag()) > beta; });

  // Cluster candidates, verify each cluster with a local winding count, then
  // polish: Newton on the logarithmic derivative for simple roots, contour
  // centroid for multiple ones.
  std::sort(cand.begin(), cand.end(), [](Complex a, Complex b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  // Pairs closer than the cluster tolerance are reported as one root with
  // their total local multiplicity (they are unresolved at quadrature level).
  std::vector<std::vector<Complex>> clusters;
  for (Complex xi : cand) {
    if (!clusters.empty()) {
      double tol = 1e-4 * (1.0 + std::abs(xi));
      bool close = false;
      for (Complex c : clusters.back()) close = close || std::abs(c - xi) < tol;
      if (close) {
        clusters.back().push_back(xi);
        continue;
      }
    }
    clusters.push_back({xi});
  }

  CharacteristicSet cs;
  cs.omega = omega;
  cs.beta = beta;
  for (auto& cl : clusters) {
    Complex mean(0, 0);
    for (Complex c : cl) mean += c;
    mean /= double(cl.size());
    double spread = 0.0;
    for (Complex c : cl) spread = std::max(spread, std::abs(c - mean));
    // Verification circle: large enough that T stays well conditioned on it
    // (the count degrades like eps * ||T|| / |mu - omega^2| near the circle),
    // small enough to exclude every other pencil root.
    double radius = cl.size() == 1 ? std::max(1e-3 * (1.0 + std::abs(mean)), 50.0 * spread)
                                   : std::max(1e-1 * (1.0 + std::abs(mean)), 100.0 * spread);
    for (Complex c : all_roots) {
      bool in_cluster = false;
      for (Complex d : cl) in_cluster = in_cluster || std::abs(c - d) < 1e-12 * (1.0 + std::abs(c));
      if (!in_cluster) radius = std::min(radius, 0.45 * std::abs(c - mean));
    }
    radius = std::max(radius, 1e-7);

    // Isolated single candidates skip the contour count; the Newton polish
    // below certifies a simple root. Clusters and crowded candidates get the
    // full winding verification.
    double nearest_other = 1e30;
    for (Complex c : all_roots) {
      bool in_cluster = false;
      for (Complex d : cl) in_cluster = in_cluster || std::abs(c - d) < 1e-12 * (1.0 + std::abs(c));
      if (!in_cluster) nearest_other = std::min(nearest_other, std::abs(c - mean));
    }
    int mult = 1;
    CharRoot root;
    root.xi = mean;
    if (cl.size() >= 2 || nearest_other < 1e-2 * (1.0 + std::abs(mean))) {
      WindingResult wr = local_root_count(p, omega2, mean, radius);
      double mr = std::round(wr.count);
      require(std::abs(wr.count - mr) < 1e-6, Errc::NotNearInteger,
              "local multiplicity count not near an integer");
      mult = int(mr);
      if (mult <= 0) continue;  // spurious companion artifacts, none expected
      if (mult >= 2) root.xi = wr.centroid;
    }
    if (mult == 1) {
      // Newton on the reciprocal trace: near a simple root
      // tr(T^{-1} T') = 1/(xi - xi0) + O(1).
      for (int it = 0; it < 3; ++it) {
        Eigen::MatrixXcd T = p.a_dense(root.xi, omega2);
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(T);
        Complex tr = lu.solve(p.a_prime_dense(root.xi)).trace();
        Complex step = 1.0 / tr;
        root.xi -= step;
        if (std::abs(step) < 1e-13 * (1.0 + std::abs(root.xi))) break;
      }
    }
    root.multiplicity = mult;

    // Null vector by inverse iteration on T(xi).
    Eigen::MatrixXcd T = p.a_dense(root.xi, omega2);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(T);
    Eigen::VectorXcd v = Eigen::VectorXcd::Ones(n);
    for (int it = 0; it < 3; ++it) {
      v = lu.solve(v);
      v /= v.norm();
    }
    Complex nrm = std::sqrt((v.transpose() * smulc(p.Mb, v)).value());
    if (std::abs(nrm) > 1e-8) v /= nrm;
    root.vec = v;
    root.mu_prime = (v.transpose() * (p.a_prime_dense(root.xi) * v)).value() /
                    (v.transpose() * smulc(p.Mb, v)).value();

    // Partition for Im(omega) > 0 by the half-plane, otherwise (real omega)
    // by limiting absorption: a real root moves up iff mu' > 0.
    double imw = omega.imag();
    if (std::abs(root.xi.imag()) > 1e-9 * (1.0 + std::abs(root.xi))) {
      root.sign = root.xi.imag() > 0 ? +1 : -1;
    } else if (std::abs(imw) <= 1e-14) {
      double mp = root.mu_prime.real();
      double scale = std::max(1.0, std::abs(omega2));
      root.sign = std::abs(mp) < 1e-7 * scale ? 0 : (mp * omega.real() > 0 ? +1 : -1);
    } else {
      root.sign = 0;
    }
    cs.roots.push_back(root);
  }
  std::sort(cs.roots.begin(), cs.roots.end(), [](const CharRoot& a, const CharRoot& b) {
    double tol = 1e-9 * (1.0 + std::abs(a.xi) + std::abs(b.xi));
    if (std::abs(a.xi.real() - b.xi.real()) > tol) return a.xi.real() < b.xi.real();
    return a.xi.imag() < b.xi.imag();
  });
  return cs;
}

CharacteristicSet characteristic_values(const TransversalPencil& p, Complex omega, double beta,
                                        const OmegaPath* path) {
  // Roots never need the path; only the +/- partition does for Im(omega) < 0.
  CharacteristicSet cs = charvals_basic(p, omega, beta);
  if (omega.imag() >= -1e-14) return cs;

  require(path != nullptr && path->points.size() >= 2, Errc::ContinuationPathMissing,
          "lower half-plane frequency requires a stored continuation path");
  require(path->points.front().imag() > 0, Errc::ContinuationPathMissing,
          "continuation path must start in the upper half-plane");

  // Walk the path, carrying the +/- labels by nearest-root matching with
  // adaptive step subdivision.
  std::vector<Complex> pathpts = path->points;
  CharacteristicSet prev = charvals_basic(p, pathpts.front(), beta);
  for (std::size_t s = 1; s < pathpts.size(); ++s) {
    Complex target = pathpts[s];
    Complex at = pathpts[s - 1];
    int depth = 0;
    while (true) {
      CharacteristicSet nxt = charvals_basic(p, target, beta);
      // match each new root to nearest previous root
      bool ok = true;
      double min_sep = 1e30;
      for (std::size_t a = 0; a < nxt.roots.size(); ++a)
        for (std::size_t b = a + 1; b < nxt.roots.size(); ++b)
          min_sep = std::min(min_sep, std::abs(nxt.roots[a].xi - nxt.roots[b].xi));
      for (auto& r : nxt.roots) {
        double best = 1e30;
        const CharRoot* bp = nullptr;
        for (const auto& pr : prev.roots) {
          double dd = std::abs(pr.xi - r.xi);
          if (dd < best) {
            best = dd;
            bp = &pr;
          }
        }
        if (bp == nullptr || best > 0.4 * min_sep) {
          ok = false;
          break;
        }
        r.sign = bp->sign;
      }
      if (ok) {
        prev = std::move(nxt);
        if (target == pathpts[s]) break;
        at = target;
        target = pathpts[s];
        continue;
      }
      require(++depth <= 24, Errc::NotConverged, "continuation path matching ambiguous");
      target = 0.5 * (at + target);
    }
  }
  // Transfer carried signs to the final set (same frequency).
  cs = std::move(prev);
  return cs;
}

// ---------------------------------------------------------------------------
// Outgoing mode construction (Jordan chains of length <= 2).

Complex OutgoingMode::eval(int j, double y, double z) const {
  require(j >= 0 && j < int(chain.size()), Errc::InsufficientData, "mode index out of range");
  Complex fac(1, 0);
  Complex s(0, 0);
  double qfac = 1.0;
  for (int q = 0; q <= j; ++q) {
    if (q > 0) {
      fac *= Complex(0, 1) * y;
      qfac *= q;
    }
    s += fac / qfac * fe->eval(chain[j - q], z);
  }
  return std::exp(Complex(0, 1) * xi0 * y) * s;
}

std::vector<OutgoingMode> outgoing_modes(const CharacteristicSet& cs, const TransversalPencil& p) {
  std::vector<OutgoingMode> out;
  Complex omega2 = cs.omega * cs.omega;
  for (const auto& r : cs.roots) {
    if (r.sign < 0) continue;  // outgoing selection: Xi_{beta,+} and threshold pairs
    require(r.multiplicity <= 2, Errc::UnsupportedJordanLength,
            "Jordan chains longer than 2 are not supported");
    Eigen::MatrixXcd T = p.a_dense(r.xi, omega2);
    Eigen::MatrixXcd Tp = p.a_prime_dense(r.xi);
    Eigen::VectorXcd u0 = r.vec;
    Complex nn = std::sqrt((u0.transpose() * smulc(p.Mb, u0)).value());
    u0 /= nn;

    OutgoingMode m;
    m.xi0 = r.xi;
    m.sign = r.sign;
    m.fe = p.fe;
    double scale = T.norm();
    double res = (T * u0).norm() / scale;

    if (r.multiplicity == 2) {
      // Geometric multiplicity from the two smallest singular values.
      Eigen::BDCSVD<Eigen::MatrixXcd> svd(T, Eigen::ComputeThinU | Eigen::ComputeThinV);
      int nsv = int(svd.singularValues().size());
      double s_last = svd.singularValues()(nsv - 1);
      double s_prev = svd.singularValues()(nsv - 2);
      if (s_prev < 1e-8 * svd.singularValues()(0)) {
        // semisimple pair: two independent chains of length one
        for (int t = 0; t < 2; ++t) {
          OutgoingMode mm = m;
          Eigen::VectorXcd v = svd.matrixV().col(nsv - 1 - t);
          Complex vn = std::sqrt((v.transpose() * smulc(p.Mb, v)).value());
          mm.chain = {p.embed(v / vn)};
          mm.residual = (T * (v / vn)).norm() / scale;
          out.push_back(std::move(mm));
        }
        continue;
      }
      (void)s_last;
      // Length-2 chain: T u1 = -T' u0, solved with a bordered system that
      // removes the null direction.
      Eigen::VectorXcd bu = smulc(p.Mb, u0);
      Eigen::MatrixXcd B(p.n + 1, p.n + 1);
      B.setZero();
      B.topLeftCorner(p.n, p.n) = T;
      B.topRightCorner(p.n, 1) = bu;
      B.bottomLeftCorner(1, p.n) = bu.transpose();
      Eigen::VectorXcd rhs(p.n + 1);
      rhs.head(p.n) = -(Tp * u0);
      rhs[p.n] = 0;
      Eigen::VectorXcd sol = B.partialPivLu().solve(rhs);
      Eigen::VectorXcd u1 = sol.head(p.n);
      double res1 = (T * u1 + Tp * u0).norm() / scale;
      m.chain = {p.embed(u0), p.embed(u1)};
      m.residual = std::max(res, res1);
      out.push_back(std::move(m));
      continue;
    }
    m.chain = {p.embed(u0)};
    m.residual = res;
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace wgwin
