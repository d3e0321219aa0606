#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sparseshield {

// Inputs that violate a certificate's stated premises (non-positive margin,
// coherence outside [0,1), ...). Distinct from an infeasible result: a
// report with feasible=false is a valid answer, a premise violation is not.
class premise_violation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class BoundKind {
  Thm5Srip,   // direct SRIP form (reported via the mu surrogate only)
  Thm5Mu,
  Thm7Mu,
  Thm10Lthr,
  Thm11Lbp,
  Cor1Thr,
  Cor2Bp,
};

// Which norm the certificate's eps refers to. Single-layer corollaries
// budget the global l2 energy; the layered theorems budget the maximal
// patch energy. No implicit conversion is applied between the two.
enum class EpsNorm { GlobalL2, PatchL2Inf };

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool empty() const { return !(lo < hi); }
  double width() const { return hi - lo; }
};

struct BoundReport {
  BoundKind kind = BoundKind::Thm5Mu;
  bool feasible = false;
  // a structurally meaningless bound (zero classifier scale), never
  // reported as numeric infinity
  bool degenerate = false;
  double eps_max = 0.0;
  EpsNorm eps_norm = EpsNorm::GlobalL2;
  std::optional<int> k_max;
  std::vector<Interval> beta_windows;  // THR family, per layer
  std::vector<double> betas;           // selected or validated thresholds
  std::vector<double> xi_schedule;     // BP family, xi_i = 4 eps_{i-1}
  std::vector<double> eps_chain;       // eps_0 .. eps_K
  std::optional<int> infeasible_layer;
  std::map<std::string, double> inputs;
};

// Binary CSC stability via the coherence surrogate delta_2k <= (2k-1) mu:
// admissible eps_max = margin/(2||w||) sqrt(1 - (2k-1) mu), collapsed when
// (2k-1) mu >= 1. When `eps` is given, also reports the sparsity ceiling
// k_max = 1/2 (1 + [1 - (2||w|| eps / margin)^2] / mu) as the largest
// admissible integer (omitted when mu = 0, where no finite ceiling exists).
BoundReport thm5_binary(double mu, int k, double w_norm, double margin_star,
                        std::optional<double> eps = std::nullopt);

// Multi-class variant: identical algebra with ||w|| -> phi(W) and the
// multi-class margin. phi_w = 0 reports a degenerate bound.
BoundReport thm7_multiclass(double mu, int k, double phi_w, double margin_star,
                            std::optional<double> eps = std::nullopt);

struct LthrLayerParams {
  double mu = 0.0;
  int stripe_k = 1;   // ||Gamma_i||_{0,inf} over stripes
  int patch_k = 1;    // ||Gamma_i||_{0,inf} over patches
  double gamma_min = 1.0;
  double gamma_max = 1.0;
};

// Layered-thresholding certificate. Checks, for the given eps0 (patch-l2
// noise level), the per-layer sparsity ceiling, the threshold window
// K_i + eps_{i-1} < beta_i < |G_min| - C_i - eps_{i-1} with
// C_i = (k_i - 1) mu |G_max| and K_i = k_i mu |G_max|, the error chain
// eps_i = sqrt(patch_k_i) (eps_{i-1} + C_i + beta_i), and the margin
// condition. Also solves (bisection) the largest eps0 for which everything
// holds. When `betas` is empty each beta_i is set to the window's lower
// edge plus 10% of its width.
BoundReport thm10_lthr(const std::vector<LthrLayerParams>& layers,
                       const std::vector<double>& betas, double eps0,
                       double w_norm, int gammaK_l0, double margin_star);

struct LbpLayerParams {
  double mu = 0.0;
  int stripe_k = 1;
  int patch_k = 1;
};

// Layered-BP certificate: per-layer k_i <= (1 + 1/mu_i)/3, schedule
// xi_i = 4 eps_{i-1}, chain eps_i = eps_local 7.5^i prod sqrt(patch_k_j),
// margin condition margin > ||w|| sqrt(gammaK_l0) eps_K.
BoundReport thm11_lbp(const std::vector<LbpLayerParams>& layers,
                      double eps_local, double w_norm, int gammaK_l0,
                      double margin_star);

// One-hidden-layer thresholding certificate (global l2 noise). With beta
// omitted, picks beta at the window's lower edge + 10% of the width and
// solves the coupled eps/beta inequalities in closed form.
BoundReport cor1_thr(double mu, int k, double gamma_min, double gamma_max,
                     double w_norm, double margin,
                     std::optional<double> beta = std::nullopt);

// One-hidden-layer BP certificate: eps_max = margin / (7.5 k ||w||) when
// k <= (1 + 1/mu)/3, with the xi = 4 eps rule echoed in the schedule.
BoundReport cor2_bp(double mu, int k, double w_norm, double margin);

const char* to_string(BoundKind kind);
const char* to_string(EpsNorm norm);

}  // namespace sparseshield
