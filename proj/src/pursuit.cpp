#include "sparseshield/pursuit.hpp"

#include <cmath>

namespace sparseshield {

Vec soft_threshold(const Vec& v, double beta, bool nonneg) {
  if (beta < 0.0) throw invalid_input("soft_threshold: beta must be >= 0");
  Vec out(v.size());
  for (int i = 0; i < v.size(); ++i) out(i) = soft_threshold(v(i), beta, nonneg);
  return out;
}

double soft_threshold(double v, double beta, bool nonneg) {
  if (beta < 0.0) throw invalid_input("soft_threshold: beta must be >= 0");
  if (nonneg) return std::max(0.0, v - beta);
  if (v > beta) return v - beta;
  if (v < -beta) return v + beta;
  return 0.0;
}

SparseCode thr_pursuit(const Vec& y, const Dictionary& dict, double beta, bool nonneg) {
  if (y.size() != dict.rows())
    throw invalid_input("thr_pursuit: signal length must match dictionary rows");
  return SparseCode::from_dense(
      soft_threshold(dict.matrix().transpose() * y, beta, nonneg));
}

namespace {

// largest eigenvalue of the (PSD) Gram matrix by power iteration
double gram_spectral_norm(const Mat& gram) {
  const int n = static_cast<int>(gram.rows());
  Vec v = Vec::Ones(n) / std::sqrt(static_cast<double>(n));
  double lambda = 0.0;
  for (int it = 0; it < 50; ++it) {
    Vec w = gram * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    w /= norm;
    const double next = w.dot(gram * w);
    const bool settled = std::abs(next - lambda) <= 1e-10 * std::max(1.0, next);
    lambda = next;
    v = w;
    if (settled) break;
  }
  return lambda;
}

double lasso_objective(const Vec& x, const Mat& gram, const Vec& corr,
                       double y_sq, double xi) {
  return xi * x.lpNorm<1>() +
         0.5 * (x.dot(gram * x) - 2.0 * corr.dot(x) + y_sq);
}

}  // namespace

BpResult bp_pursuit(const Vec& y, const Dictionary& dict, double xi,
                    const SolverOptions& opts, BpTape* tape) {
  if (y.size() != dict.rows())
    throw invalid_input("bp_pursuit: signal length must match dictionary rows");
  if (xi <= 0.0) throw invalid_input("bp_pursuit: xi must be > 0");
  if (opts.max_iters < 1) throw invalid_input("bp_pursuit: max_iters must be >= 1");

  const Mat& d = dict.matrix();
  const Mat gram = d.transpose() * d;
  const Vec corr = d.transpose() * y;
  const double y_sq = y.squaredNorm();
  const int n = dict.cols();

  double lip = gram_spectral_norm(gram);
  if (lip <= 0.0) lip = 1.0;
  const double step = 1.0 / lip;
  const double shrink = xi * step;

  if (tape) {
    *tape = BpTape{};
    tape->step = step;
    tape->xi = xi;
    tape->masks.reserve(64);
    tape->thetas.reserve(64);
  }

  Vec x = Vec::Zero(n);
  Vec x_prev = x;
  double t_momentum = 1.0;
  double obj = lasso_objective(x, gram, corr, y_sq, xi);

  BpResult res;
  res.objective_trajectory.reserve(64);
  bool converged = false;
  int iters = 0;

  for (int it = 0; it < opts.max_iters; ++it) {
    double theta = 0.0;
    Vec z;
    if (opts.acceleration && it > 0) {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_momentum * t_momentum));
      theta = (t_momentum - 1.0) / t_next;
      t_momentum = t_next;
      z = x + theta * (x - x_prev);
    } else {
      z = x;
    }
    Vec u = z - step * (gram * z - corr);
    Vec x_next(n);
    std::vector<uint8_t> mask;
    if (tape) mask.resize(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) {
      const double v = u(j);
      double s = 0.0;
      if (v > shrink)
        s = v - shrink;
      else if (v < -shrink)
        s = v + shrink;
      if (tape) mask[static_cast<size_t>(j)] = (s != 0.0);
      x_next(j) = s;
    }
    if (tape) {
      tape->masks.push_back(std::move(mask));
      tape->thetas.push_back(theta);
    }
    x_prev = x;
    x = x_next;
    ++iters;

    const double obj_next = lasso_objective(x, gram, corr, y_sq, xi);
    res.objective_trajectory.push_back(obj_next);

    // KKT residual: on support D'(Dx - y) = -xi sign(x); off support
    // |D'(Dx - y)| <= xi
    const Vec g = gram * x - corr;
    double kkt = 0.0;
    for (int j = 0; j < n; ++j) {
      if (x(j) > 0.0)
        kkt = std::max(kkt, std::abs(g(j) + xi));
      else if (x(j) < 0.0)
        kkt = std::max(kkt, std::abs(g(j) - xi));
      else
        kkt = std::max(kkt, std::max(0.0, std::abs(g(j)) - xi));
    }
    res.kkt_residual = kkt;

    if (kkt <= opts.kkt_tol) {
      converged = true;
      obj = obj_next;
      break;
    }
    if (opts.tol > 0.0 &&
        std::abs(obj - obj_next) <= opts.tol * std::max(1.0, std::abs(obj_next))) {
      converged = true;
      obj = obj_next;
      break;
    }
    obj = obj_next;
  }

  res.code = SparseCode::from_dense(x);
  res.iterations = iters;
  res.converged = converged;
  res.objective = obj;
  return res;
}

PursuitTrace layered_thr(const Vec& y, const ModelStack& stack,
                         const ThresholdSchedule& schedule) {
  if (static_cast<int>(schedule.betas.size()) != stack.depth())
    throw invalid_input("layered_thr: schedule length must match stack depth");
  PursuitTrace trace;
  trace.layers.reserve(stack.depth());
  Vec current = y;
  for (int i = 0; i < stack.depth(); ++i) {
    const Dictionary& dict = stack.layer(i);
    SparseCode code = thr_pursuit(current, dict, schedule.betas[i], schedule.nonneg);
    LayerResult layer;
    layer.residual_norm = (dict.matrix() * code.dense() - current).norm();
    layer.iterations = 1;
    layer.converged = true;
    current = code.dense();
    layer.code = std::move(code);
    trace.layers.push_back(std::move(layer));
  }
  return trace;
}

PursuitTrace layered_bp(const Vec& y, const ModelStack& stack,
                        const BpSchedule& schedule, std::vector<BpTape>* tapes) {
  if (static_cast<int>(schedule.xis.size()) != stack.depth())
    throw invalid_input("layered_bp: schedule length must match stack depth");
  PursuitTrace trace;
  trace.layers.reserve(stack.depth());
  if (tapes) tapes->assign(static_cast<size_t>(stack.depth()), BpTape{});
  Vec current = y;
  for (int i = 0; i < stack.depth(); ++i) {
    const Dictionary& dict = stack.layer(i);
    BpTape* tape = tapes ? &(*tapes)[static_cast<size_t>(i)] : nullptr;
    BpResult res = bp_pursuit(current, dict, schedule.xis[i], schedule.solver, tape);
    LayerResult layer;
    layer.residual_norm = (dict.matrix() * res.code.dense() - current).norm();
    layer.iterations = res.iterations;
    layer.converged = res.converged;
    current = res.code.dense();
    layer.code = std::move(res.code);
    trace.layers.push_back(std::move(layer));
  }
  return trace;
}

Classification classify(const SparseCode& code, const LinearClassifier& clf) {
  const double s = clf.score(code);
  return {s >= 0.0 ? 1 : -1, {s}};
}

Classification classify(const SparseCode& code, const MultiClassifier& clf) {
  Classification out;
  out.scores.resize(static_cast<size_t>(clf.n_classes()));
  int best = 0;
  for (int u = 0; u < clf.n_classes(); ++u) {
    out.scores[static_cast<size_t>(u)] = clf.score(code.dense(), u);
    if (out.scores[static_cast<size_t>(u)] > out.scores[static_cast<size_t>(best)])
      best = u;
  }
  out.label = best;
  return out;
}

Classification classify(const PursuitTrace& trace, const LinearClassifier& clf) {
  return classify(trace.deepest(), clf);
}

Classification classify(const PursuitTrace& trace, const MultiClassifier& clf) {
  return classify(trace.deepest(), clf);
}

}  // namespace sparseshield
