#pragma once

#include "pstrat/data_model.hpp"
#include "pstrat/estimands.hpp"
#include "pstrat/executor.hpp"

#include <array>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pstrat {

/// A numerical failure inside the chain, tagged with the iteration.
class ChainFailure : public NumericalError {
public:
  ChainFailure(int iteration, const std::string& what)
      : NumericalError("iteration " + std::to_string(iteration) + ": " + what), iteration_(iteration) {}
  int iteration() const { return iteration_; }

private:
  int iteration_;
};

/// One full Gibbs iteration, in order:
///   1. impute missing post-treatment values
///   2. cluster allocation V
///   3. augmentation Z and stick coefficients eps
///   4. cluster parameters eta / sigma2_y, then beta / sigma2_p per arm
///   5. impute missing outcomes
void gibbs_sweep(ChainState& state, const ModelData& data, const PriorConfig& prior,
                 RandomStream& rng, Executor& exec = serial_executor());

/// Draw potentials and labels for every unit from the model given the
/// parameters in `state` (forward simulation; no data used except Xp).
void simulate_potentials(ChainState& state, const ModelData& data, RandomStream& rng);

/// Copy the T-selected potentials into data.P / data.Y.
void observe(const ChainState& state, ModelData& data);

struct SplitHalf {
  std::string name;
  double first = 0.0;
  double second = 0.0;
};

struct ChainDiagnostics {
  std::array<double, 2> mean_occupied{0.0, 0.0};     // per arm: mean non-empty clusters
  std::vector<std::pair<int, double>> running_ate_y; // (draws so far, running mean)
  std::vector<std::pair<int, double>> running_ate_p;
  std::vector<SplitHalf> split_half;
};

struct ChainResult {
  PosteriorDraws draws;
  ChainState final_state;
  ChainDiagnostics diagnostics;
};

/// Run the chain described by `config` from its seed. Throws ChainFailure on
/// numerical failure.
ChainResult run_chain(const ModelData& data, const FitConfig& config,
                      Executor& exec = serial_executor());

std::string format_diagnostics(const ChainDiagnostics& diag);

} // namespace pstrat
