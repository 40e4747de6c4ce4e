#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "esc_dag/posterior.hpp"
#include "esc_dag/sampler.hpp"
#include "esc_dag/simulate.hpp"

namespace esc_dag::cli {

struct IoConfig {
  std::string data;       // fit: observations CSV
  std::string truth;      // evaluate: directory holding truth_A.csv and truth_D.csv
  std::string inclusion;  // evaluate: inclusion triplets CSV
  bool standardize = false;
  int draws = 0;  // fit: posterior (A, D, Omega) draws to write
};

struct ReplicateGrid {
  std::vector<int> n{100};
  std::vector<int> p{300};
  std::vector<double> sparsity{0.03};
  std::vector<double> alpha{0.999};
  std::vector<DataLaw> data_law{DataLaw::Gaussian};
  int replicates = 5;
};

struct RateSettings {
  std::vector<int> n_grid{100, 200, 400};
  int p = 100;
  double sparsity = 0.03;
  int replicates = 5;
  int draws = 20;
  MatrixNorm norm = MatrixNorm::Frobenius;
  RateTarget target = RateTarget::CholeskyFactor;
  DataLaw data_law = DataLaw::Gaussian;
};

/// Every parameter of every command. Seeds inside `truth` and `chain` are
/// derived from `seed` by the commands and are not serialized.
struct RunConfig {
  std::uint64_t seed = 0;
  int workers = 0;  // 0: ESC_DAG_WORKERS, else hardware concurrency
  std::string out = "out";
  IoConfig io;
  int n = 100;
  DataLaw data_law = DataLaw::Gaussian;
  TruthSpec truth{50, 0.03};
  Hyperparams hyper;
  ChainConfig chain;
  ReplicateGrid replicate;
  RateSettings rate;
};

std::string to_string(DataLaw law);
DataLaw parse_data_law(const std::string& text);
std::string to_string(MatrixNorm norm);
MatrixNorm parse_norm(const std::string& text);
std::string to_string(RateTarget target);
RateTarget parse_rate_target(const std::string& text);
std::string to_string(InitKind init);
InitKind parse_init(const std::string& text);

/// Pretty-printed JSON with a fixed key order and a trailing newline.
std::string emit_config(const RunConfig& config);
/// Missing keys keep their defaults; unknown keys and bad values throw InvalidArgument.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Worker count after applying the ESC_DAG_WORKERS fallback.
int resolve_workers(int requested);

}  // namespace esc_dag::cli
