#pragma once

#include <cstdint>
#include <ostream>

#include "esc_dag_cli/config.hpp"

namespace esc_dag::cli {

/// Seeds used by simulate (and by each replicate) for the truth and the data.
std::uint64_t truth_seed(std::uint64_t seed);
std::uint64_t data_seed(std::uint64_t seed);
/// Chain seed a replicate uses for its fit.
std::uint64_t replicate_chain_seed(std::uint64_t seed);
/// Seed of replicate `r` in grid cell `cell`.
std::uint64_t replicate_seed(std::uint64_t seed, std::size_t cell, int r);

// Each command writes into config.out and returns the process exit code.
// Invalid input throws; replicate records per-cell failures and returns 1.
int cmd_simulate(const RunConfig& config, std::ostream& log);
int cmd_fit(const RunConfig& config, std::ostream& log);
int cmd_evaluate(const RunConfig& config, std::ostream& log);
int cmd_replicate(const RunConfig& config, std::ostream& log);
int cmd_rate_probe(const RunConfig& config, std::ostream& log);

}  // namespace esc_dag::cli
