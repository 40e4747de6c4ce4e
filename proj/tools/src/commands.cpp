#include "esc_dag_cli/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "esc_dag/errors.hpp"
#include "esc_dag/gram_kernel.hpp"
#include "esc_dag/mcd.hpp"
#include "esc_dag/rng.hpp"
#include "esc_dag/sampler.hpp"
#include "esc_dag/simulate.hpp"
#include "esc_dag_cli/csv.hpp"
#include "json.hpp"

namespace esc_dag::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kDrawStream = std::uint64_t{1} << 40;

void prepare_out(const RunConfig& config) {
  std::error_code ec;
  fs::create_directories(config.out, ec);
  if (ec || !fs::is_directory(config.out)) throw Error("cannot create output directory " + config.out);
}

void write_json(const fs::path& path, const json& value) { write_text(path, value.dump(2) + "\n"); }

json config_json(const RunConfig& config) { return json::parse(emit_config(config)); }

void warn_hyper(const Hyperparams& hyper, std::ostream& log) {
  for (const auto& w : hyper.validate()) log << "warning: " << w << '\n';
}

json metrics_json(const SelectionMetrics& m) {
  return json{{"errors", m.errors},
              {"true_positives", m.true_positives},
              {"false_positives", m.false_positives},
              {"false_negatives", m.false_negatives},
              {"fdr", m.fdr},
              {"tpr", m.tpr},
              {"p_bar_0", m.p_bar_0},
              {"p_bar_1", m.p_bar_1},
              {"degenerate_truth", m.degenerate_truth}};
}

std::string metrics_table(const SelectionMetrics& m) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%-8s %-8s %-8s %-8s %-8s %-8s %-8s\n%-8ld %-8.4f %-8.4f %-8.4f %-8.4f %-8ld %-8ld\n", "errors",
                "FDR", "TPR", "p0", "p1", "FP", "FN", m.errors, m.fdr, m.tpr, m.p_bar_0, m.p_bar_1,
                m.false_positives, m.false_negatives);
  return buf;
}

TruthSpec cell_truth(const RunConfig& config, int p, double sparsity) {
  TruthSpec spec = config.truth;
  spec.p = p;
  spec.sparsity = sparsity;
  return spec;
}

}  // namespace

std::uint64_t truth_seed(std::uint64_t seed) { return derive_seed(seed, 1); }
std::uint64_t data_seed(std::uint64_t seed) { return derive_seed(seed, 2); }
std::uint64_t replicate_chain_seed(std::uint64_t seed) { return derive_seed(seed, 3); }
std::uint64_t replicate_seed(std::uint64_t seed, std::size_t cell, int r) {
  return derive_seed(seed, static_cast<std::uint64_t>(cell), static_cast<std::uint64_t>(r));
}

int cmd_simulate(const RunConfig& config, std::ostream& log) {
  TruthSpec spec = config.truth;
  spec.seed = truth_seed(config.seed);
  const CholeskyModel truth = generate_truth(spec);
  Rng rng(data_seed(config.seed));
  const DataMatrix data = sample_data(config.data_law, config.n, truth, rng);

  prepare_out(config);
  const fs::path out(config.out);
  write_triplets(out / "truth_A.csv", truth.factor, "value", false);
  write_vector_csv(out / "truth_D.csv", truth.variances, "d");
  write_matrix_csv(out / "data.csv", data.values());
  write_json(out / "provenance.json", json{{"seed", config.seed},
                                           {"truth_seed", spec.seed},
                                           {"data_seed", data_seed(config.seed)},
                                           {"nonzero", support_pairs(truth.factor).size()},
                                           {"config", config_json(config)}});
  log << "simulate: n=" << data.n() << " p=" << data.p() << " nonzero=" << support_pairs(truth.factor).size()
      << " -> " << config.out << '\n';
  return 0;
}

int cmd_fit(const RunConfig& config, std::ostream& log) {
  if (config.io.data.empty()) throw InvalidArgument("fit needs a data file (--data)");
  DataMatrix data(read_matrix_csv(config.io.data));
  if (config.io.standardize) data = data.standardized();
  warn_hyper(config.hyper, log);
  if (config.io.draws < 0) throw InvalidArgument("draws must be nonnegative");
  ChainConfig chain = config.chain;
  chain.seed = config.seed;
  const int workers = resolve_workers(config.workers);
  const DagFit fit = fit_dag(data, config.hyper, chain, workers);

  prepare_out(config);
  const fs::path out(config.out);
  write_triplets(out / "inclusion.csv", fit.inclusion, "prob", true);
  {
    std::ostringstream selected;
    selected << "j,l\n";
    long count = 0;
    for (const auto& support : fit.selected) {
      for (int l : support.indices()) {
        selected << support.column() + 1 << ',' << l + 1 << '\n';
        ++count;
      }
    }
    write_text(out / "selected.csv", selected.str());
    log << "fit: n=" << data.n() << " p=" << data.p() << " selected=" << count << '\n';
  }

  long accepted = 0, proposed = 0;
  json columns = json::array();
  for (std::size_t j = 1; j < fit.traces.size(); ++j) {
    const ChainTrace& trace = fit.traces[j];
    accepted += trace.accept_count;
    proposed += trace.proposal_count;
    columns.push_back(json{{"j", j + 1},
                           {"acceptance_rate", trace.acceptance_rate()},
                           {"selected", fit.selected[j - 1].size()}});
  }
  const double rate = proposed == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(proposed);
  write_json(out / "summary.json", json{{"n", data.n()},
                                        {"p", data.p()},
                                        {"iterations", chain.iterations},
                                        {"burn_in", chain.burn_in},
                                        {"seed", config.seed},
                                        {"threshold", chain.threshold},
                                        {"acceptance_rate", rate},
                                        {"hyper", config_json(config)["hyper"]},
                                        {"chain", config_json(config)["chain"]},
                                        {"columns", columns}});

  if (config.io.draws > 0) {
    const GramKernel kernel(data);
    Rng rng(derive_seed(config.seed, kDrawStream));
    for (int k = 0; k < config.io.draws; ++k) {
      const auto supports = sample_trace_supports(fit, rng);
      const CholeskyModel model = sample_posterior_model(kernel, supports, config.hyper, rng);
      const std::string tag = std::to_string(k + 1);
      write_triplets(out / "draws" / ("A_" + tag + ".csv"), model.factor, "value", false);
      write_vector_csv(out / "draws" / ("D_" + tag + ".csv"), model.variances, "d");
      write_matrix_csv(out / "draws" / ("Omega_" + tag + ".csv"), compose(model));
    }
    log << "fit: wrote " << config.io.draws << " posterior draws\n";
  }
  return 0;
}

int cmd_evaluate(const RunConfig& config, std::ostream& log) {
  if (config.io.truth.empty() || config.io.inclusion.empty()) {
    throw InvalidArgument("evaluate needs --truth <dir> and --inclusion <file>");
  }
  const fs::path truth_dir(config.io.truth);
  const Eigen::VectorXd d = read_vector_csv(truth_dir / "truth_D.csv", "d");
  const int p = static_cast<int>(d.size());
  const Eigen::MatrixXd truth = read_triplets(truth_dir / "truth_A.csv", "value", p);

  const auto rows = read_numeric_rows(config.io.inclusion, "j,l,prob");
  double max_j = 0.0;
  for (const auto& row : rows) max_j = std::max(max_j, row.cells.empty() ? 0.0 : row.cells[0]);
  const long expected = static_cast<long>(p) * (p - 1) / 2;
  if (static_cast<int>(max_j) != p || static_cast<long>(rows.size()) != expected) {
    throw InvalidArgument("dimension mismatch: truth has p=" + std::to_string(p) + ", inclusion file has " +
                          std::to_string(rows.size()) + " pairs up to j=" + format_real(max_j));
  }
  const Eigen::MatrixXd inclusion = read_triplets(config.io.inclusion, "prob", p);
  const SelectionMetrics m = selection_metrics(truth, inclusion, config.chain.threshold);

  prepare_out(config);
  const fs::path out(config.out);
  json doc = metrics_json(m);
  doc["threshold"] = config.chain.threshold;
  write_json(out / "metrics.json", doc);
  const std::string table = metrics_table(m);
  write_text(out / "metrics.txt", table);
  log << table;
  return 0;
}

int cmd_replicate(const RunConfig& config, std::ostream& log) {
  const ReplicateGrid& g = config.replicate;
  if (g.replicates < 1) throw InvalidArgument("replicates must be >= 1");
  if (g.n.empty() || g.p.empty() || g.sparsity.empty() || g.alpha.empty() || g.data_law.empty()) {
    throw InvalidArgument("replicate grid has an empty axis");
  }
  warn_hyper(config.hyper, log);
  const int workers = resolve_workers(config.workers);
  prepare_out(config);
  const fs::path out(config.out);

  std::ostringstream table, detail;
  table << "n,p,sparsity,alpha,data_law,replicates,completed,errors,fdr,tpr,p_bar_0,p_bar_1,acceptance_rate,status\n";
  detail << "cell,replicate,seed,errors,true_positives,false_positives,false_negatives,fdr,tpr,p_bar_0,p_bar_1,"
            "acceptance_rate,status\n";
  bool any_failure = false;
  std::size_t cell = 0;
  for (int n : g.n) {
    for (int p : g.p) {
      for (double sparsity : g.sparsity) {
        for (double alpha : g.alpha) {
          for (DataLaw law : g.data_law) {
            Hyperparams hyper = config.hyper;
            hyper.alpha = alpha;
            const TruthSpec spec = cell_truth(config, p, sparsity);
            std::vector<SelectionMetrics> done;
            double acceptance = 0.0;
            std::string status = "ok";
            for (int r = 0; r < g.replicates; ++r) {
              const std::uint64_t seed = replicate_seed(config.seed, cell, r);
              detail << cell + 1 << ',' << r + 1 << ',' << seed << ',';
              try {
                const ReplicateResult res = run_replicate(n, spec, law, hyper, config.chain, seed, workers);
                done.push_back(res.metrics);
                acceptance += res.acceptance_rate;
                const SelectionMetrics& m = res.metrics;
                detail << m.errors << ',' << m.true_positives << ',' << m.false_positives << ','
                       << m.false_negatives << ',' << format_real(m.fdr) << ',' << format_real(m.tpr) << ','
                       << format_real(m.p_bar_0) << ',' << format_real(m.p_bar_1) << ','
                       << format_real(res.acceptance_rate) << ",ok\n";
              } catch (const std::exception& e) {
                any_failure = true;
                status = "failed";
                detail << ",,,,,,,,,failed\n";
                log << "replicate: cell " << cell + 1 << " replicate " << r + 1 << " failed: " << e.what() << '\n';
              }
            }
            const MetricsSummary s = average(done);
            const double nan = std::nan("");
            const bool empty = done.empty();
            table << n << ',' << p << ',' << format_real(sparsity) << ',' << format_real(alpha) << ','
                  << to_string(law) << ',' << g.replicates << ',' << done.size() << ','
                  << format_real(empty ? nan : s.errors) << ',' << format_real(empty ? nan : s.fdr) << ','
                  << format_real(empty ? nan : s.tpr) << ',' << format_real(empty ? nan : s.p_bar_0) << ','
                  << format_real(empty ? nan : s.p_bar_1) << ','
                  << format_real(empty ? nan : acceptance / static_cast<double>(done.size())) << ',' << status
                  << '\n';
            log << "replicate: cell " << cell + 1 << " n=" << n << " p=" << p << " alpha=" << alpha
                << " law=" << to_string(law) << " fdr=" << s.fdr << " tpr=" << s.tpr << '\n';
            ++cell;
          }
        }
      }
    }
  }
  write_text(out / "table.csv", table.str());
  write_text(out / "replicates.csv", detail.str());
  return any_failure ? 1 : 0;
}

int cmd_rate_probe(const RunConfig& config, std::ostream& log) {
  RateProbeConfig cfg;
  cfg.n_grid = config.rate.n_grid;
  cfg.truth = cell_truth(config, config.rate.p, config.rate.sparsity);
  cfg.replicates = config.rate.replicates;
  cfg.draws = config.rate.draws;
  cfg.norm = config.rate.norm;
  cfg.target = config.rate.target;
  cfg.law = config.rate.data_law;
  cfg.seed = config.seed;
  cfg.workers = resolve_workers(config.workers);
  warn_hyper(config.hyper, log);
  const auto rows = rate_probe(cfg, config.hyper, config.chain);

  prepare_out(config);
  std::ostringstream csv;
  csv << "n,mean_error,sd_error,ratio\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    csv << rows[i].n << ',' << format_real(rows[i].mean_error) << ',' << format_real(rows[i].sd_error) << ',';
    if (i > 0) csv << format_real(rows[i].mean_error / rows[i - 1].mean_error);
    csv << '\n';
    log << "rate-probe: n=" << rows[i].n << " mean_error=" << rows[i].mean_error << '\n';
  }
  write_text(fs::path(config.out) / "rate.csv", csv.str());
  return 0;
}

}  // namespace esc_dag::cli
