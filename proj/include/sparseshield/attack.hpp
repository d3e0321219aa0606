#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sparseshield/model.hpp"
#include "sparseshield/pursuit.hpp"

namespace sparseshield {

enum class AttackKind { FgsmLinf, GradAscentL2 };
enum class AttackLoss { NegMargin, Logistic };

struct AttackSpec {
  AttackKind kind = AttackKind::GradAscentL2;
  double epsilon = 0.0;
  AttackLoss loss = AttackLoss::NegMargin;
};

struct GradientResult {
  Vec grad;
  // set when a BP layer did not converge; the gradient is exact for the
  // iterate the solver actually returned, approximate for the minimizer
  bool approximate = false;
};

// d loss / d x through the thresholding pipeline. Soft-threshold
// coordinates backpropagate 1 when active, 0 otherwise (0 at the kink).
GradientResult pipeline_gradient(const Vec& x, const ModelStack& stack,
                                 const ThresholdSchedule& schedule,
                                 const LinearClassifier& clf, int label,
                                 AttackLoss loss = AttackLoss::NegMargin);

// d loss / d x through the BP pipeline, backpropagating the recorded
// proximal-gradient iterations of each layer.
GradientResult pipeline_gradient(const Vec& x, const ModelStack& stack,
                                 const BpSchedule& schedule,
                                 const LinearClassifier& clf, int label,
                                 AttackLoss loss = AttackLoss::NegMargin);

// Multi-class variants; the margin loss differentiates f_u - f_{v*} with
// v* the strongest competitor at x.
GradientResult pipeline_gradient(const Vec& x, const ModelStack& stack,
                                 const ThresholdSchedule& schedule,
                                 const MultiClassifier& clf, int label);
GradientResult pipeline_gradient(const Vec& x, const ModelStack& stack,
                                 const BpSchedule& schedule,
                                 const MultiClassifier& clf, int label);

struct PerturbResult {
  Vec x_adv;
  // gradient was identically zero; x is returned unchanged
  bool zero_gradient = false;
};

// FGSM: x + eps sign(grad) (sign(0) = 0), so ||x' - x||_inf <= eps.
// Gradient-ascent l2: x + eps grad/||grad||, so ||x' - x||_2 = eps.
PerturbResult perturb(const Vec& x, const Vec& grad, const AttackSpec& spec);

// One pursuit-plus-classifier pipeline under attack evaluation.
struct Pipeline {
  enum class Kind { Thr, Bp };

  static Pipeline thresholding(ModelStack stack, ThresholdSchedule schedule,
                               LinearClassifier clf) {
    return Pipeline(Kind::Thr, std::move(stack), std::move(schedule), {},
                    std::move(clf));
  }
  static Pipeline basis_pursuit(ModelStack stack, BpSchedule schedule,
                                LinearClassifier clf) {
    return Pipeline(Kind::Bp, std::move(stack), {}, std::move(schedule),
                    std::move(clf));
  }

  Kind kind;
  ModelStack stack;
  ThresholdSchedule thr;
  BpSchedule bp;
  LinearClassifier clf;

  std::string name() const { return kind == Kind::Thr ? "thr" : "bp"; }
  Classification evaluate(const Vec& x, bool* converged = nullptr) const;
  GradientResult gradient(const Vec& x, int label, AttackLoss loss) const;

 private:
  Pipeline(Kind k, ModelStack s, ThresholdSchedule t, BpSchedule b,
           LinearClassifier c)
      : kind(k), stack(std::move(s)), thr(std::move(t)), bp(std::move(b)),
        clf(std::move(c)) {}
};

struct SweepRow {
  std::string pipeline;
  double eps = 0.0;
  std::string norm_kind;
  int n_signals = 0;
  int n_correct = 0;
  double accuracy = 0.0;
  uint64_t seed = 0;
};

struct SweepInput {
  std::vector<Vec> signals;
  std::vector<int> labels;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  int non_converged_solves = 0;
};

// Accuracy of `pipeline` under a fresh attack per (signal, eps) pair.
// Deterministic for a fixed seed and independent of the job count.
SweepResult accuracy_sweep(const SweepInput& data, const Pipeline& pipeline,
                           const std::vector<double>& eps_grid,
                           AttackKind kind, AttackLoss loss, uint64_t seed,
                           int jobs = 1);

const char* to_string(AttackKind kind);
const char* to_string(AttackLoss loss);

}  // namespace sparseshield
