#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "sparseshield/attack.hpp"
#include "sparseshield/pursuit.hpp"
#include "sparseshield/synth.hpp"

namespace sparseshield {

class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PursuitConfig {
  // derive beta from the THR certificate's selection rule and xi from the
  // BP certificate's 4-eps rule; explicit betas/xis override
  bool auto_from_bounds = true;
  std::vector<double> betas;
  std::vector<double> xis;
  SolverOptions solver{.max_iters = 10000, .tol = 1e-10, .kkt_tol = 1e-8,
                       .acceleration = true};
};

struct AttackConfig {
  AttackKind kind = AttackKind::GradAscentL2;
  AttackLoss loss = AttackLoss::NegMargin;
  std::vector<double> eps_grid;  // strictly increasing, starts >= 0
};

struct ExperimentConfig {
  SynthConfig synth;
  PursuitConfig pursuit;
  AttackConfig attack;
  std::string output_dir = "out";
  bool emit_plot = true;
  int jobs = 1;
};

// Parses and validates the experiment JSON; throws config_error on any
// schema or invariant violation.
ExperimentConfig parse_experiment_config(const std::string& json_text);

std::string experiment_config_to_json(const ExperimentConfig& config);

}  // namespace sparseshield
