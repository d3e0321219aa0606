#pragma once

#include <optional>
#include <vector>

#include "sparseshield/model.hpp"

namespace sparseshield {

// Elementwise soft threshold. Signed: sign(v) max(|v| - beta, 0);
// non-negative: max(v - beta, 0). beta must be >= 0.
Vec soft_threshold(const Vec& v, double beta, bool nonneg = false);
double soft_threshold(double v, double beta, bool nonneg = false);

// Per-layer thresholds beta_i for the layered thresholding pipeline.
struct ThresholdSchedule {
  std::vector<double> betas;
  bool nonneg = false;
};

struct SolverOptions {
  int max_iters = 10000;
  // relative objective change below which the iteration stops; 0 disables
  // the objective test (run to max_iters or the KKT tolerance)
  double tol = 1e-10;
  double kkt_tol = 1e-8;
  bool acceleration = false;  // FISTA momentum
};

// Per-layer l1 weights xi_i (all > 0) plus solver settings.
struct BpSchedule {
  std::vector<double> xis;
  SolverOptions solver;
};

// Record of one proximal-gradient solve, sufficient to backpropagate
// through the exact sequence of iterations the solver performed.
struct BpTape {
  double step = 0.0;  // 1/L
  double xi = 0.0;
  // active-coordinate mask after each shrink, one entry per iteration
  std::vector<std::vector<uint8_t>> masks;
  // FISTA extrapolation weight used at each iteration (0 for ISTA)
  std::vector<double> thetas;
};

struct BpResult {
  SparseCode code;
  int iterations = 0;
  bool converged = false;
  double objective = 0.0;
  double kkt_residual = 0.0;
  // objective after every iteration; monotone non-increasing without
  // acceleration
  std::vector<double> objective_trajectory;
};

// One-shot thresholding of the analysis coefficients D'y.
SparseCode thr_pursuit(const Vec& y, const Dictionary& dict, double beta,
                       bool nonneg = false);

// min_x xi ||x||_1 + 1/2 ||D x - y||_2^2 by proximal gradient with step 1/L
// (L from power iteration on D'D). Non-convergence is reported on the
// result, not thrown; the last iterate is returned either way.
BpResult bp_pursuit(const Vec& y, const Dictionary& dict, double xi,
                    const SolverOptions& opts = {}, BpTape* tape = nullptr);

struct LayerResult {
  SparseCode code;
  double residual_norm = 0.0;  // ||D_i code - input_i||_2
  int iterations = 0;
  bool converged = true;
};

struct PursuitTrace {
  std::vector<LayerResult> layers;
  std::optional<double> score;

  const SparseCode& deepest() const { return layers.back().code; }
  bool all_converged() const {
    for (const auto& l : layers)
      if (!l.converged) return false;
    return true;
  }
};

// Gamma_i = S_{beta_i}(D_i' Gamma_{i-1}), Gamma_0 = y.
PursuitTrace layered_thr(const Vec& y, const ModelStack& stack,
                         const ThresholdSchedule& schedule);

// Per-layer basis pursuit with Gamma_0 = y. When `tapes` is given it
// receives one tape per layer for backpropagation.
PursuitTrace layered_bp(const Vec& y, const ModelStack& stack,
                        const BpSchedule& schedule,
                        std::vector<BpTape>* tapes = nullptr);

struct Classification {
  int label = 0;                // +1/-1 for binary, class index for multi
  std::vector<double> scores;  // single score, or one per class
};

// sign(w' code + bias); an exact zero resolves to +1.
Classification classify(const SparseCode& code, const LinearClassifier& clf);
// argmax_u f_u(code); ties resolve to the lowest class index.
Classification classify(const SparseCode& code, const MultiClassifier& clf);

Classification classify(const PursuitTrace& trace, const LinearClassifier& clf);
Classification classify(const PursuitTrace& trace, const MultiClassifier& clf);

}  // namespace sparseshield
