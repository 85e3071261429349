#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "dmt/data.hpp"
#include "dmt/rng.hpp"
#include "dmt/student.hpp"

namespace dmt::testing {

inline Instance random_instance(Rng& rng, std::size_t m, std::size_t n, double p = 0.3) {
  Instance x(m, n);
  for (std::size_t f = 0; f < m; ++f)
    for (std::size_t v = 0; v < n; ++v) x.set(f, v, rng.bernoulli(p));
  return x;
}

inline Instance random_one_hot(Rng& rng, std::size_t m, std::size_t n) {
  Instance x(m, n);
  for (std::size_t f = 0; f < m; ++f) x.set(f, rng.index(n), true);
  return x;
}

inline ModelParams random_model(Rng& rng, const ModelSpec& spec, std::size_t d, std::size_t c,
                                double scale = 1.0) {
  ModelParams p = ModelParams::zeros(spec, d, c);
  for (double& w : p.weights) w = rng.uniform(-scale, scale);
  return p;
}

inline std::vector<double> random_vector(Rng& rng, std::size_t d, double lo = 0.0,
                                         double hi = 1.0) {
  std::vector<double> v(d);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

/// max |a - b| / max(1, max |b|)
inline double relative_error(std::span<const double> a, std::span<const double> b) {
  double diff = 0.0, scale = 1.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max(scale, std::abs(b[i]));
  }
  return diff / scale;
}

template <typename F>
std::vector<double> central_difference(F&& f, std::vector<double> at, double h = 1e-5) {
  std::vector<double> g(at.size());
  for (std::size_t i = 0; i < at.size(); ++i) {
    const double keep = at[i];
    at[i] = keep + h;
    const double up = f(at);
    at[i] = keep - h;
    const double down = f(at);
    at[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

inline Dataset make_dataset(std::size_t m, std::size_t n, std::size_t c,
                            const std::vector<std::pair<Instance, int>>& rows) {
  DatasetSchema s;
  s.num_features = m;
  s.arity = n;
  s.num_classes = c;
  Dataset d(s);
  for (const auto& [x, y] : rows) d.add(x, y);
  return d;
}

}  // namespace dmt::testing
