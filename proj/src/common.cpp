#include "wgwin/common.hpp"

#include <atomic>
#include <cstdio>
#include <mutex>

namespace wgwin {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::EllipticityViolation: return "EllipticityViolation";
    case Errc::GeometryInconsistency: return "GeometryInconsistency";
    case Errc::ScaleOutOfRange: return "ScaleOutOfRange";
    case Errc::AssemblyFailure: return "AssemblyFailure";
    case Errc::TrackingAmbiguity: return "TrackingAmbiguity";
    case Errc::CoverageIncomplete: return "CoverageIncomplete";
    case Errc::RootOnStripBoundary: return "RootOnStripBoundary";
    case Errc::ContinuationPathMissing: return "ContinuationPathMissing";
    case Errc::UnsupportedJordanLength: return "UnsupportedJordanLength";
    case Errc::RootOnContour: return "RootOnContour";
    case Errc::QuadratureNotConverged: return "QuadratureNotConverged";
    case Errc::MeshTooCoarse: return "MeshTooCoarse";
    case Errc::NotConverged: return "NotConverged";
    case Errc::InteriorSingular: return "InteriorSingular";
    case Errc::NodeMismatch: return "NodeMismatch";
    case Errc::NonSmoothAtWindow: return "NonSmoothAtWindow";
    case Errc::IllConditioned: return "IllConditioned";
    case Errc::SingularOnContour: return "SingularOnContour";
    case Errc::NotNearInteger: return "NotNearInteger";
    case Errc::MultiplicityNotOne: return "MultiplicityNotOne";
    case Errc::DegenerateCurvature: return "DegenerateCurvature";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::BadConfig: return "BadConfig";
    case Errc::LinalgFailure: return "LinalgFailure";
  }
  return "UnknownError";
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  int nt = std::min<std::size_t>(threads, n);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr err;
  std::mutex err_mtx;
  pool.reserve(nt);
  for (int t = 0; t < nt; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mtx);
          if (!err) err = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = a;
    return v;
  }
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * double(i) / double(n - 1);
  return v;
}

std::string fmt_full(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.16e", x);
  return buf;
}

}  // namespace wgwin
