#pragma once
// Shared error types, deterministic RNG, and small utilities.

#include <cstdint>
#include <stdexcept>
#include <string>

namespace k3lines {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Field degree outside the supported range 1..8.
struct UnsupportedDegree : Error {
  explicit UnsupportedDegree(int k)
      : Error("unsupported field degree " + std::to_string(k) + " (need 1..8)") {}
};

struct DivisionByZero : Error {
  DivisionByZero() : Error("division by zero field element") {}
};

/// Source field is not a subfield of the destination (src_k must divide dst_k).
struct NotASubfield : Error {
  NotASubfield(int src_k, int dst_k)
      : Error("GF(3^" + std::to_string(src_k) + ") is not a subfield of GF(3^" +
              std::to_string(dst_k) + ")") {}
};

/// A computation needed a field extension beyond GF(3^8).
struct ExtensionExceeded : Error {
  explicit ExtensionExceeded(const std::string& what)
      : Error("extension beyond GF(3^8) required: " + what) {}
};

struct NonHomogeneous : Error {
  explicit NonHomogeneous(const std::string& what) : Error("not homogeneous: " + what) {}
};

struct VariableClash : Error {
  explicit VariableClash(const std::string& what) : Error("variable clash: " + what) {}
};

struct SingularMatrix : Error {
  SingularMatrix() : Error("matrix is singular") {}
};

/// A polynomial system expected to be zero-dimensional has a solution curve.
struct PositiveDimensional : Error {
  explicit PositiveDimensional(const std::string& what)
      : Error("positive-dimensional solution set: " + what) {}
};

/// Input quartic fails one of the surface admissibility checks.
struct NotK3 : Error {
  enum class Reason { NotQuartic, NotHomogeneous, Zero, NotSquarefree, SingularLocusNotFinite };
  Reason reason;
  NotK3(Reason r, const std::string& what) : Error("not an admissible quartic: " + what), reason(r) {}
};

struct DegenerateParameter : Error {
  explicit DegenerateParameter(const std::string& what)
      : Error("degenerate parameter: " + what) {}
};

struct NormalizationImpossible : Error {
  explicit NormalizationImpossible(const std::string& what)
      : Error("normalization impossible: " + what) {}
};

struct ParseError : Error {
  int line, col;
  ParseError(int ln, int c, const std::string& what)
      : Error("parse error at " + std::to_string(ln) + ":" + std::to_string(c) + ": " + what),
        line(ln), col(c) {}
};

/// SplitMix64: deterministic seedable generator for every randomized algorithm.
struct Rng {
  uint64_t state;
  explicit Rng(uint64_t seed) : state(seed) {}
  uint64_t next() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  /// Uniform value in [0, n).
  uint64_t below(uint64_t n) { return n ? next() % n : 0; }
};

}  // namespace k3lines
