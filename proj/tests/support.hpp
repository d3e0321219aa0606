#pragma once

// Shared test oracles. Everything here recomputes results through an
// independent route (dense scans, coordinate descent, finite differences)
// so library outputs can be checked against them.

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "sparseshield/bounds.hpp"
#include "sparseshield/model.hpp"
#include "sparseshield/rng.hpp"
#include "sparseshield/synth.hpp"

namespace testsupport {

using sparseshield::Dictionary;
using sparseshield::Mat;
using sparseshield::Rng;
using sparseshield::Vec;

// exhaustive pairwise scan, no Gram matrix
inline double coherence_oracle(const Mat& d) {
  double mu = 0.0;
  for (int i = 0; i < d.cols(); ++i) {
    for (int j = 0; j < d.cols(); ++j) {
      if (i == j) continue;
      double dot = 0.0;
      for (int r = 0; r < d.rows(); ++r) dot += d(r, i) * d(r, j);
      mu = std::max(mu, std::abs(dot));
    }
  }
  return mu;
}

// cyclic coordinate descent for xi ||x||_1 + 1/2 ||D x - y||^2 with
// unit-norm atoms; independent of the proximal-gradient solver
inline Vec lasso_cd_oracle(const Mat& d, const Vec& y, double xi, int sweeps = 4000,
                           double tol = 1e-14) {
  const int n = static_cast<int>(d.cols());
  const Mat gram = d.transpose() * d;
  const Vec corr = d.transpose() * y;
  Vec x = Vec::Zero(n);
  double prev_obj = std::numeric_limits<double>::infinity();
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    for (int j = 0; j < n; ++j) {
      const double rho = corr(j) - (gram.col(j).dot(x) - gram(j, j) * x(j));
      double v = 0.0;
      if (rho > xi)
        v = (rho - xi) / gram(j, j);
      else if (rho < -xi)
        v = (rho + xi) / gram(j, j);
      x(j) = v;
    }
    const double obj =
        xi * x.lpNorm<1>() + 0.5 * (d * x - y).squaredNorm();
    if (prev_obj - obj < tol * std::max(1.0, std::abs(obj))) break;
    prev_obj = obj;
  }
  return x;
}

inline double lasso_objective(const Mat& d, const Vec& y, double xi, const Vec& x) {
  return xi * x.lpNorm<1>() + 0.5 * (d * x - y).squaredNorm();
}

// central finite differences of a scalar function
inline Vec finite_difference(const std::function<double(const Vec&)>& f, const Vec& x,
                             double step = 1e-6) {
  Vec g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    Vec xp = x;
    Vec xm = x;
    xp(i) += step;
    xm(i) -= step;
    g(i) = (f(xp) - f(xm)) / (2.0 * step);
  }
  return g;
}

inline Mat random_gaussian(int rows, int cols, Rng& rng) {
  Mat m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

inline Dictionary random_normalized_dictionary(int rows, int cols, Rng& rng) {
  Mat m = random_gaussian(rows, cols, rng);
  for (int j = 0; j < cols; ++j) m.col(j) /= m.col(j).norm();
  return Dictionary(m);
}

// low-coherence dictionary through the library's reduction path
inline Dictionary reduced_dictionary(int rows, int cols, double floor, Rng& rng,
                                     double* mu_out = nullptr) {
  sparseshield::SynthConfig cfg;
  cfg.seed = 1;
  cfg.n = rows;
  cfg.m = cols;
  cfg.k = 1;
  cfg.dict_mode = sparseshield::DictMode::CoherenceReduced;
  cfg.coherence_floor = floor;
  auto result = sparseshield::random_dictionary(cfg, rng);
  if (mu_out) *mu_out = result.mu;
  return result.dict;
}

// random unit vector
inline Vec random_direction(int dim, Rng& rng) {
  Vec v(dim);
  double norm = 0.0;
  while (norm == 0.0) {
    for (int i = 0; i < dim; ++i) v(i) = rng.normal();
    norm = v.norm();
  }
  return v / norm;
}

// One on-model instance whose parameters provably satisfy a single-layer
// certificate: the true code, a noisy signal at ||E||_2 = eps with eps drawn
// strictly inside the certificate's admissible range, and the evaluated
// certificate report.
struct CertifiedInstance {
  sparseshield::SparseCode code;
  sparseshield::LinearClassifier clf;
  int label = 1;
  double margin = 0.0;
  Vec clean;
  Vec noisy;
  double eps = 0.0;
  sparseshield::BoundReport report;
};

inline sparseshield::SparseCode random_sparse_code(int m, int k, double lo, double hi,
                                                   Rng& rng) {
  std::vector<int> support = rng.sample_without_replacement(m, k);
  Vec values(k);
  for (int i = 0; i < k; ++i) values(i) = rng.uniform(lo, hi);
  return sparseshield::SparseCode::from_support(m, support, values);
}

// instance meeting Corollary-1 (THR) premises with its own per-instance
// values; eps is drawn in (0, frac * eps_max]
inline CertifiedInstance make_cor1_instance(const Dictionary& dict, double mu, int k,
                                            Rng& rng, double frac = 0.95) {
  const int m = dict.cols();
  while (true) {
    CertifiedInstance inst;
    inst.code = random_sparse_code(m, k, 1.0, 2.0, rng);
    inst.clf = sparseshield::LinearClassifier{random_direction(m, rng), 0.0};
    const double score = inst.clf.score(inst.code);
    if (std::abs(score) < 0.25) continue;  // keep margins workable
    inst.label = score >= 0.0 ? 1 : -1;
    inst.margin = std::abs(score);
    inst.report = sparseshield::cor1_thr(mu, k, inst.code.min_abs(),
                                         inst.code.max_abs(), 1.0, inst.margin);
    if (!inst.report.feasible) continue;
    inst.eps = rng.uniform(0.05, frac) * inst.report.eps_max;
    inst.clean = dict.matrix() * inst.code.dense();
    inst.noisy = inst.clean + inst.eps * random_direction(dict.rows(), rng);
    return inst;
  }
}

// instance meeting Corollary-2 (BP) premises; requires k <= (1 + 1/mu)/3
inline CertifiedInstance make_cor2_instance(const Dictionary& dict, double mu, int k,
                                            Rng& rng, double frac = 0.95) {
  const int m = dict.cols();
  while (true) {
    CertifiedInstance inst;
    inst.code = random_sparse_code(m, k, 1.0, 2.0, rng);
    inst.clf = sparseshield::LinearClassifier{random_direction(m, rng), 0.0};
    const double score = inst.clf.score(inst.code);
    if (std::abs(score) < 0.25) continue;
    inst.label = score >= 0.0 ? 1 : -1;
    inst.margin = std::abs(score);
    inst.report = sparseshield::cor2_bp(mu, k, 1.0, inst.margin);
    if (!inst.report.feasible) continue;
    inst.eps = rng.uniform(0.05, frac) * inst.report.eps_max;
    inst.clean = dict.matrix() * inst.code.dense();
    inst.noisy = inst.clean + inst.eps * random_direction(dict.rows(), rng);
    return inst;
  }
}

}  // namespace testsupport
