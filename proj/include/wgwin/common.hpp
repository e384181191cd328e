#pragma once

#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace wgwin {

using Complex = std::complex<double>;

// Error codes exposed by the library. Each operation documents which of
// these it can raise; everything else surfaces as std::runtime_error.
enum class Errc {
  EllipticityViolation,
  GeometryInconsistency,
  ScaleOutOfRange,
  AssemblyFailure,
  TrackingAmbiguity,
  CoverageIncomplete,
  RootOnStripBoundary,
  ContinuationPathMissing,
  UnsupportedJordanLength,
  RootOnContour,
  QuadratureNotConverged,
  MeshTooCoarse,
  NotConverged,
  InteriorSingular,
  NodeMismatch,
  NonSmoothAtWindow,
  IllConditioned,
  SingularOnContour,
  NotNearInteger,
  MultiplicityNotOne,
  DegenerateCurvature,
  InsufficientData,
  BadConfig,
  LinalgFailure,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, Errc code, const std::string& what) {
  if (!cond) fail(code, what);
}

// Chunked parallel loop. Each index writes only to its own slot, so results
// are deterministic for any thread count.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

std::vector<double> linspace(double a, double b, int n);

// Full-precision scientific formatting used for all CSV output.
std::string fmt_full(double x);

}  // namespace wgwin
