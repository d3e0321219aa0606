#include "sparseshield/attack.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace sparseshield {

namespace {

void check_label(int label) {
  if (label != 1 && label != -1)
    throw invalid_input("pipeline_gradient: binary label must be +1 or -1");
}

// d loss / d f for the binary losses at score f
double binary_loss_slope(double f, int label, AttackLoss loss) {
  const double y = static_cast<double>(label);
  if (loss == AttackLoss::NegMargin) return -y;
  // logistic: log(1 + exp(-y f))
  const double t = -y * f;
  const double sig = 1.0 / (1.0 + std::exp(-t));
  return -y * sig;
}

struct ThrForward {
  std::vector<Vec> activations;  // a_1 .. a_K
  std::vector<Vec> preacts;      // z_i = D_i' a_{i-1}
};

ThrForward thr_forward(const Vec& x, const ModelStack& stack,
                       const ThresholdSchedule& schedule) {
  ThrForward f;
  Vec current = x;
  for (int i = 0; i < stack.depth(); ++i) {
    Vec z = stack.layer(i).matrix().transpose() * current;
    current = soft_threshold(z, schedule.betas[static_cast<size_t>(i)], schedule.nonneg);
    f.preacts.push_back(std::move(z));
    f.activations.push_back(current);
  }
  return f;
}

// backprop d loss / d a_K -> d loss / d x through the threshold masks
Vec thr_backward(const ModelStack& stack, const ThresholdSchedule& schedule,
                 const ThrForward& f, Vec grad_a) {
  for (int i = stack.depth() - 1; i >= 0; --i) {
    const Vec& z = f.preacts[static_cast<size_t>(i)];
    const double beta = schedule.betas[static_cast<size_t>(i)];
    for (int j = 0; j < z.size(); ++j) {
      const bool active = schedule.nonneg ? z(j) > beta : std::abs(z(j)) > beta;
      if (!active) grad_a(j) = 0.0;
    }
    grad_a = stack.layer(i).matrix() * grad_a;
  }
  return grad_a;
}

// backprop one BP layer: maps d loss / d x_T to d loss / d(layer input)
Vec bp_layer_backward(const Dictionary& dict, const BpTape& tape, Vec lam) {
  const Mat& d = dict.matrix();
  const Mat gram = d.transpose() * d;
  const double s = tape.step;
  const int n = dict.cols();
  Vec lam_prev = Vec::Zero(n);
  Vec dc = Vec::Zero(n);
  for (int t = static_cast<int>(tape.masks.size()) - 1; t >= 0; --t) {
    const auto& mask = tape.masks[static_cast<size_t>(t)];
    Vec a = lam;
    for (int j = 0; j < n; ++j)
      if (!mask[static_cast<size_t>(j)]) a(j) = 0.0;
    dc += s * a;
    const Vec dz = a - s * (gram * a);
    const double theta = tape.thetas[static_cast<size_t>(t)];
    Vec next = lam_prev + (1.0 + theta) * dz;
    lam_prev = -theta * dz;
    lam = std::move(next);
  }
  return d * dc;  // c = D' b, so d loss / d b = D dc
}

struct BpForward {
  PursuitTrace trace;
  std::vector<BpTape> tapes;
};

BpForward bp_forward(const Vec& x, const ModelStack& stack, const BpSchedule& schedule) {
  BpForward f;
  f.trace = layered_bp(x, stack, schedule, &f.tapes);
  return f;
}

Vec bp_backward(const ModelStack& stack, const BpForward& f, Vec grad_code) {
  for (int i = stack.depth() - 1; i >= 0; --i)
    grad_code = bp_layer_backward(stack.layer(i), f.tapes[static_cast<size_t>(i)],
                                  std::move(grad_code));
  return grad_code;
}

// margin-loss seed for the multi-class head: -(f_u - f_{v*})
Vec multiclass_loss_seed(const Vec& code, const MultiClassifier& clf, int label) {
  if (label < 0 || label >= clf.n_classes())
    throw invalid_input("pipeline_gradient: class label out of range");
  int rival = -1;
  double best = -std::numeric_limits<double>::infinity();
  for (int v = 0; v < clf.n_classes(); ++v) {
    if (v == label) continue;
    const double s = clf.score(code, v);
    if (s > best) {
      best = s;
      rival = v;
    }
  }
  return clf.weights().col(rival) - clf.weights().col(label);
}

}  // namespace

GradientResult pipeline_gradient(const Vec& x, const ModelStack& stack,
                                 const ThresholdSchedule& schedule,
                                 const LinearClassifier& clf, int label,
                                 AttackLoss loss) {
  check_label(label);
  ThrForward f = thr_forward(x, stack, schedule);
  const double score = clf.score(f.activations.back());
  Vec seed = binary_loss_slope(score, label, loss) * clf.weights;
  return {thr_backward(stack, schedule, f, std::move(seed)), false};
}

GradientResult pipeline_gradient(const Vec& x, const ModelStack& stack,
                                 const BpSchedule& schedule,
                                 const LinearClassifier& clf, int label,
                                 AttackLoss loss) {
  check_label(label);
  BpForward f = bp_forward(x, stack, schedule);
  const double score = clf.score(f.trace.deepest());
  Vec seed = binary_loss_slope(score, label, loss) * clf.weights;
  return {bp_backward(stack, f, std::move(seed)), !f.trace.all_converged()};
}

GradientResult pipeline_gradient(const Vec& x, const ModelStack& stack,
                                 const ThresholdSchedule& schedule,
                                 const MultiClassifier& clf, int label) {
  ThrForward f = thr_forward(x, stack, schedule);
  Vec seed = multiclass_loss_seed(f.activations.back(), clf, label);
  return {thr_backward(stack, schedule, f, std::move(seed)), false};
}

GradientResult pipeline_gradient(const Vec& x, const ModelStack& stack,
                                 const BpSchedule& schedule,
                                 const MultiClassifier& clf, int label) {
  BpForward f = bp_forward(x, stack, schedule);
  Vec seed = multiclass_loss_seed(f.trace.deepest().dense(), clf, label);
  return {bp_backward(stack, f, std::move(seed)), !f.trace.all_converged()};
}

PerturbResult perturb(const Vec& x, const Vec& grad, const AttackSpec& spec) {
  if (spec.epsilon < 0.0) throw invalid_input("perturb: epsilon must be >= 0");
  if (grad.size() != x.size()) throw invalid_input("perturb: gradient size mismatch");
  PerturbResult out;
  if (spec.kind == AttackKind::FgsmLinf) {
    Vec step(x.size());
    bool any = false;
    for (int i = 0; i < x.size(); ++i) {
      const double s = grad(i) > 0.0 ? 1.0 : (grad(i) < 0.0 ? -1.0 : 0.0);
      any = any || s != 0.0;
      step(i) = spec.epsilon * s;
    }
    out.zero_gradient = !any;
    out.x_adv = x + step;
  } else {
    const double norm = grad.norm();
    if (norm == 0.0) {
      out.zero_gradient = true;
      out.x_adv = x;
    } else {
      out.x_adv = x + (spec.epsilon / norm) * grad;
    }
  }
  return out;
}

Classification Pipeline::evaluate(const Vec& x, bool* converged) const {
  if (kind == Kind::Thr) {
    if (converged) *converged = true;
    return classify(layered_thr(x, stack, thr), clf);
  }
  PursuitTrace trace = layered_bp(x, stack, bp);
  if (converged) *converged = trace.all_converged();
  return classify(trace, clf);
}

GradientResult Pipeline::gradient(const Vec& x, int label, AttackLoss loss) const {
  if (kind == Kind::Thr) return pipeline_gradient(x, stack, thr, clf, label, loss);
  return pipeline_gradient(x, stack, bp, clf, label, loss);
}

namespace {

template <typename Fn>
void parallel_for(int n, int jobs, Fn&& fn) {
  jobs = std::max(1, jobs);
  if (jobs == 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  const int workers = std::min(jobs, n);
  pool.reserve(static_cast<size_t>(workers));
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

SweepResult accuracy_sweep(const SweepInput& data, const Pipeline& pipeline,
                           const std::vector<double>& eps_grid, AttackKind kind,
                           AttackLoss loss, uint64_t seed, int jobs) {
  if (data.signals.size() != data.labels.size() || data.signals.empty())
    throw invalid_input("accuracy_sweep: empty or mismatched dataset");
  SweepResult out;
  std::atomic<int> non_converged{0};
  const int n = static_cast<int>(data.signals.size());
  for (double eps : eps_grid) {
    std::vector<uint8_t> correct(static_cast<size_t>(n), 0);
    parallel_for(n, jobs, [&](int i) {
      const Vec& x = data.signals[static_cast<size_t>(i)];
      const int y = data.labels[static_cast<size_t>(i)];
      // the attack is recomputed from scratch for every (signal, eps) pair
      GradientResult g = pipeline.gradient(x, y, loss);
      if (g.approximate) non_converged.fetch_add(1);
      AttackSpec spec{kind, eps, loss};
      PerturbResult p = perturb(x, g.grad, spec);
      bool conv = true;
      const Classification c = pipeline.evaluate(p.x_adv, &conv);
      if (!conv) non_converged.fetch_add(1);
      correct[static_cast<size_t>(i)] = (c.label == y);
    });
    int n_correct = 0;
    for (uint8_t c : correct) n_correct += c;
    SweepRow row;
    row.pipeline = pipeline.name();
    row.eps = eps;
    row.norm_kind = to_string(kind);
    row.n_signals = n;
    row.n_correct = n_correct;
    row.accuracy = static_cast<double>(n_correct) / n;
    row.seed = seed;
    out.rows.push_back(std::move(row));
  }
  out.non_converged_solves = non_converged.load();
  return out;
}

const char* to_string(AttackKind kind) {
  return kind == AttackKind::FgsmLinf ? "fgsm-linf" : "grad-ascent-l2";
}

const char* to_string(AttackLoss loss) {
  return loss == AttackLoss::NegMargin ? "neg-margin" : "logistic";
}

}  // namespace sparseshield
