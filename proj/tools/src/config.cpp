#include "esc_dag_cli/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "esc_dag/errors.hpp"
#include "esc_dag/parallel.hpp"
#include "json.hpp"

namespace esc_dag::cli {

using json = nlohmann::ordered_json;

std::string to_string(DataLaw law) { return law == DataLaw::Gaussian ? "gaussian" : "laplace"; }

DataLaw parse_data_law(const std::string& text) {
  if (text == "gaussian") return DataLaw::Gaussian;
  if (text == "laplace") return DataLaw::Laplace;
  throw InvalidArgument("unknown data law '" + text + "' (expected gaussian or laplace)");
}

std::string to_string(MatrixNorm norm) {
  switch (norm) {
    case MatrixNorm::Spectral: return "spectral";
    case MatrixNorm::L1: return "l1";
    case MatrixNorm::Linf: return "linf";
    case MatrixNorm::Frobenius: return "frobenius";
  }
  return "frobenius";
}

MatrixNorm parse_norm(const std::string& text) {
  if (text == "spectral") return MatrixNorm::Spectral;
  if (text == "l1") return MatrixNorm::L1;
  if (text == "linf") return MatrixNorm::Linf;
  if (text == "frobenius") return MatrixNorm::Frobenius;
  throw InvalidArgument("unknown norm '" + text + "'");
}

std::string to_string(RateTarget target) { return target == RateTarget::CholeskyFactor ? "cholesky_factor" : "precision"; }

RateTarget parse_rate_target(const std::string& text) {
  if (text == "cholesky_factor") return RateTarget::CholeskyFactor;
  if (text == "precision") return RateTarget::Precision;
  throw InvalidArgument("unknown rate target '" + text + "'");
}

std::string to_string(InitKind init) {
  switch (init) {
    case InitKind::Empty: return "empty";
    case InitKind::Screening: return "screening";
    case InitKind::Explicit: return "explicit";
  }
  return "screening";
}

InitKind parse_init(const std::string& text) {
  if (text == "empty") return InitKind::Empty;
  if (text == "screening") return InitKind::Screening;
  if (text == "explicit") return InitKind::Explicit;
  throw InvalidArgument("unknown init '" + text + "'");
}

namespace {

json to_json(const RunConfig& c) {
  json laws = json::array();
  for (DataLaw law : c.replicate.data_law) laws.push_back(to_string(law));
  return json{
      {"seed", c.seed},
      {"workers", c.workers},
      {"out", c.out},
      {"io",
       {{"data", c.io.data},
        {"truth", c.io.truth},
        {"inclusion", c.io.inclusion},
        {"standardize", c.io.standardize},
        {"draws", c.io.draws}}},
      {"n", c.n},
      {"data_law", to_string(c.data_law)},
      {"truth",
       {{"p", c.truth.p},
        {"sparsity", c.truth.sparsity},
        {"coef_low", c.truth.coef_low},
        {"coef_high", c.truth.coef_high},
        {"d_low", c.truth.d_low},
        {"d_high", c.truth.d_high}}},
      {"hyper",
       {{"alpha", c.hyper.alpha},
        {"gamma", c.hyper.gamma},
        {"nu0", c.hyper.nu0},
        {"nu0_prime", c.hyper.nu0_prime},
        {"c1", c.hyper.c1},
        {"c2", c.hyper.c2},
        {"c3", c.hyper.c3},
        {"r_rule", esc_dag::to_string(c.hyper.r_rule)},
        {"r_explicit", c.hyper.r_explicit},
        {"variant", esc_dag::to_string(c.hyper.variant)}}},
      {"chain",
       {{"iterations", c.chain.iterations},
        {"burn_in", c.chain.burn_in},
        {"init", to_string(c.chain.init)},
        {"screening_k", c.chain.screening_k},
        {"explicit_init", c.chain.explicit_init},
        {"threshold", c.chain.threshold}}},
      {"replicate",
       {{"n", c.replicate.n},
        {"p", c.replicate.p},
        {"sparsity", c.replicate.sparsity},
        {"alpha", c.replicate.alpha},
        {"data_law", laws},
        {"replicates", c.replicate.replicates}}},
      {"rate",
       {{"n_grid", c.rate.n_grid},
        {"p", c.rate.p},
        {"sparsity", c.rate.sparsity},
        {"replicates", c.rate.replicates},
        {"draws", c.rate.draws},
        {"norm", to_string(c.rate.norm)},
        {"target", to_string(c.rate.target)},
        {"data_law", to_string(c.rate.data_law)}}},
  };
}

// Reads `key` into `out` when present; rejects keys not listed in `known`.
class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw InvalidArgument(path_ + " must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.push_back(key);
    const auto it = node_.find(key);
    if (it == node_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception& e) {
      throw InvalidArgument(path_ + "." + key + ": " + e.what());
    }
  }

  template <typename T, typename Parse>
  void get_parsed(const char* key, T& out, Parse parse) {
    std::string text;
    const auto it = node_.find(key);
    if (it == node_.end()) {
      seen_.push_back(key);
      return;
    }
    get(key, text);
    out = parse(text);
  }

  Reader child(const char* key) {
    seen_.push_back(key);
    const auto it = node_.find(key);
    return Reader(it == node_.end() ? empty() : *it, path_ + "." + key);
  }

  void finish() const {
    for (const auto& [key, value] : node_.items()) {
      if (std::find(seen_.begin(), seen_.end(), key) == seen_.end()) {
        throw InvalidArgument("unknown config key " + path_ + "." + key);
      }
    }
  }

 private:
  static const json& empty() {
    static const json e = json::object();
    return e;
  }

  const json& node_;
  std::string path_;
  std::vector<std::string> seen_;
};

}  // namespace

std::string emit_config(const RunConfig& config) { return to_json(config).dump(2) + "\n"; }

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  Reader r(root, "config");
  r.get("seed", c.seed);
  r.get("workers", c.workers);
  r.get("out", c.out);
  {
    Reader io = r.child("io");
    io.get("data", c.io.data);
    io.get("truth", c.io.truth);
    io.get("inclusion", c.io.inclusion);
    io.get("standardize", c.io.standardize);
    io.get("draws", c.io.draws);
    io.finish();
  }
  r.get("n", c.n);
  r.get_parsed("data_law", c.data_law, parse_data_law);
  {
    Reader t = r.child("truth");
    t.get("p", c.truth.p);
    t.get("sparsity", c.truth.sparsity);
    t.get("coef_low", c.truth.coef_low);
    t.get("coef_high", c.truth.coef_high);
    t.get("d_low", c.truth.d_low);
    t.get("d_high", c.truth.d_high);
    t.finish();
  }
  {
    Reader h = r.child("hyper");
    h.get("alpha", c.hyper.alpha);
    h.get("gamma", c.hyper.gamma);
    h.get("nu0", c.hyper.nu0);
    h.get("nu0_prime", c.hyper.nu0_prime);
    h.get("c1", c.hyper.c1);
    h.get("c2", c.hyper.c2);
    h.get("c3", c.hyper.c3);
    h.get_parsed("r_rule", c.hyper.r_rule, parse_r_rule);
    h.get("r_explicit", c.hyper.r_explicit);
    h.get_parsed("variant", c.hyper.variant, parse_variant);
    h.finish();
  }
  {
    Reader ch = r.child("chain");
    ch.get("iterations", c.chain.iterations);
    ch.get("burn_in", c.chain.burn_in);
    ch.get_parsed("init", c.chain.init, parse_init);
    ch.get("screening_k", c.chain.screening_k);
    ch.get("explicit_init", c.chain.explicit_init);
    ch.get("threshold", c.chain.threshold);
    ch.finish();
  }
  {
    Reader g = r.child("replicate");
    g.get("n", c.replicate.n);
    g.get("p", c.replicate.p);
    g.get("sparsity", c.replicate.sparsity);
    g.get("alpha", c.replicate.alpha);
    std::vector<std::string> laws;
    g.get("data_law", laws);
    if (!laws.empty()) {
      c.replicate.data_law.clear();
      for (const auto& law : laws) c.replicate.data_law.push_back(parse_data_law(law));
    }
    g.get("replicates", c.replicate.replicates);
    g.finish();
  }
  {
    Reader rt = r.child("rate");
    rt.get("n_grid", c.rate.n_grid);
    rt.get("p", c.rate.p);
    rt.get("sparsity", c.rate.sparsity);
    rt.get("replicates", c.rate.replicates);
    rt.get("draws", c.rate.draws);
    rt.get_parsed("norm", c.rate.norm, parse_norm);
    rt.get_parsed("target", c.rate.target, parse_rate_target);
    rt.get_parsed("data_law", c.rate.data_law, parse_data_law);
    rt.finish();
  }
  r.finish();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read config " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("ESC_DAG_WORKERS")) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && value > 0) return static_cast<int>(value);
    throw InvalidArgument(std::string("ESC_DAG_WORKERS must be a positive integer, got '") + env + "'");
  }
  return hardware_workers();
}

}  // namespace esc_dag::cli
