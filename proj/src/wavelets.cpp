#include "edgems/wavelets.hpp"

#include <cmath>

#include "edgems/common.hpp"

namespace edgems {

namespace {

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

// Enumeration of the Haar basis of V_l: index 0 is the scaling function,
// indices 2^{m-1}..2^m-1 are level m with translation j ascending.
void haar_index(int k, int& level, int& j) {
  if (k == 0) {
    level = 0;
    j = 0;
    return;
  }
  level = 1;
  while ((1 << level) <= k) ++level;
  j = k - (1 << (level - 1));
}

// Hierarchical basis of V_l: indices 0,1 are the endpoint hats of level 0,
// indices 2^{m-1}+1..2^m are level m with odd j ascending.
void hier_index(int k, int& level, int& j) {
  if (k <= 1) {
    level = 0;
    j = k;
    return;
  }
  level = 1;
  while ((1 << level) <= k - 1) ++level;
  j = 2 * (k - 1 - (1 << (level - 1))) + 1;
}

}  // namespace

int wavelet_dim(WaveletSpec spec) {
  EDGEMS_REQUIRE(spec.level >= 0, "wavelet_dim: level must be >= 0");
  const int base = 1 << spec.level;
  return spec.kind == WaveletKind::Haar ? base : base + 1;
}

double haar_function(int level, int j, double x) {
  EDGEMS_REQUIRE(level >= 0, "haar_function: level must be >= 0");
  if (level == 0) {
    EDGEMS_REQUIRE(j == 0, "haar_function: scaling function has j = 0");
    return (x >= 0.0 && x <= 1.0) ? 1.0 : 0.0;
  }
  const int translations = 1 << (level - 1);
  EDGEMS_REQUIRE(j >= 0 && j < translations,
                 "haar_function: translation j out of range");
  const double t = translations * x - j;
  if (t < 0.0 || t >= 1.0) return 0.0;
  const double amp = std::pow(2.0, 0.5 * (level - 1));
  return t < 0.5 ? amp : -amp;
}

double hierarchical_function(int level, int j, double x) {
  EDGEMS_REQUIRE(level >= 0, "hierarchical_function: level must be >= 0");
  if (level == 0) {
    EDGEMS_REQUIRE(j == 0 || j == 1,
                   "hierarchical_function: level 0 has j in {0,1}");
  } else {
    EDGEMS_REQUIRE(j >= 1 && j <= (1 << level) - 1 && (j % 2) == 1,
                   "hierarchical_function: j must be an odd index in B_l");
  }
  if (x < 0.0 || x > 1.0) return 0.0;
  const double t = std::ldexp(x, level) - j;  // x / h_l - j
  const double a = std::abs(t);
  return a >= 1.0 ? 0.0 : 1.0 - a;
}

Vector haar_project_coefficients(const Vector& samples, int level) {
  const int m = static_cast<int>(samples.size());
  EDGEMS_REQUIRE(level >= 0, "haar_project_coefficients: level must be >= 0");
  EDGEMS_REQUIRE(is_power_of_two(m),
                 "haar_project_coefficients: sample count must be a power of "
                 "two (dyadic grid)");
  EDGEMS_REQUIRE(m >= (1 << level),
                 "haar_project_coefficients: sample resolution too coarse for "
                 "the requested level");
  const int nfun = 1 << level;
  Vector c = Vector::Zero(nfun);
  const double w = 1.0 / m;
  for (int k = 0; k < nfun; ++k) {
    int lvl, j;
    haar_index(k, lvl, j);
    double acc = 0.0;
    for (int cell = 0; cell < m; ++cell)
      acc += samples[cell] * haar_function(lvl, j, (cell + 0.5) * w);
    c[k] = acc * w;
  }
  return c;
}

Vector haar_reconstruct(const Vector& coefficients, int level,
                        int sample_count) {
  EDGEMS_REQUIRE(coefficients.size() == (1 << level),
                 "haar_reconstruct: coefficient count does not match level");
  EDGEMS_REQUIRE(is_power_of_two(sample_count) && sample_count >= (1 << level),
                 "haar_reconstruct: invalid sample count");
  Vector out = Vector::Zero(sample_count);
  const double w = 1.0 / sample_count;
  for (int k = 0; k < coefficients.size(); ++k) {
    int lvl, j;
    haar_index(k, lvl, j);
    for (int cell = 0; cell < sample_count; ++cell)
      out[cell] += coefficients[k] * haar_function(lvl, j, (cell + 0.5) * w);
  }
  return out;
}

EdgeBasisSet edge_basis(int fine_segments, WaveletSpec spec) {
  EDGEMS_REQUIRE(spec.level >= 0, "edge_basis: level must be >= 0");
  EDGEMS_REQUIRE(is_power_of_two(fine_segments),
                 "edge_basis: edge must have a power-of-two fine resolution");
  EDGEMS_REQUIRE(fine_segments >= (1 << spec.level),
                 "edge_basis: edge resolution below 2^level intervals");

  EdgeBasisSet set;
  set.spec = spec;
  set.segments = fine_segments;
  const int nfun = wavelet_dim(spec);
  if (spec.kind == WaveletKind::Haar) {
    set.samples.resize(fine_segments, nfun);
    const double w = 1.0 / fine_segments;
    for (int k = 0; k < nfun; ++k) {
      int lvl, j;
      haar_index(k, lvl, j);
      for (int s = 0; s < fine_segments; ++s)
        set.samples(s, k) = haar_function(lvl, j, (s + 0.5) * w);
    }
  } else {
    set.samples.resize(fine_segments + 1, nfun);
    const double w = 1.0 / fine_segments;
    for (int k = 0; k < nfun; ++k) {
      int lvl, j;
      hier_index(k, lvl, j);
      for (int q = 0; q <= fine_segments; ++q)
        set.samples(q, k) = hierarchical_function(lvl, j, q * w);
    }
  }
  return set;
}

EdgeBasisSet edge_basis(const CoarseEdge& edge, WaveletSpec spec) {
  return edge_basis(edge.segment_count(), spec);
}

}  // namespace edgems
