#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "epiplan/config.hpp"
#include "epiplan/errors.hpp"

namespace epiplan::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitSolver = 3;

int exit_code(ErrorCategory category);

/// Planning problem shared by solve, simulate and voi: the (optionally
/// parameter-augmented) base chain, its surveillance augmentation and the
/// initial belief over the augmented states.
struct Problem {
  AugmentationInputs inputs;
  AugmentedSpace space;
  Belief base_initial;  // over inputs' base states
  Belief initial;       // over space.model states
  std::size_t param_points = 1;
};

Problem assemble_problem(const ModelFile& model, const RunConfig& config, bool surveillance,
                         bool parameter_augmentation);

SolveSettings solve_settings(const RunConfig& config);

/// Entry point behind the `epiplan` binary. `args` excludes the program name.
/// Errors print `error[<category>]: <message>` on `err` and map to exit codes
/// 1 (config), 2 (data), 3 (solver).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace epiplan::cli
