#include "lsp/experiment.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lsp/energy.hpp"
#include "lsp/exponents.hpp"
#include "lsp/laws.hpp"
#include "lsp/models.hpp"
#include "lsp/profile.hpp"
#include "lsp/prox.hpp"
#include "lsp/rng.hpp"
#include "lsp/sgdlab.hpp"

namespace lsp {

using nlohmann::json;

namespace {

constexpr const char* kToolName = "stability-profiler";
constexpr const char* kVersion = "0.1.0";

const std::set<std::string> kCommands = {
    "profile",        "exponents",    "spectral-law",  "cfl",
    "sgd-recursion",  "sgd-forgetting", "sgd-temporal", "sgd-decreasing",
    "energy-equivalence", "prox-lab"};

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string to_hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, v);
  return buf;
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Schema validation
// ---------------------------------------------------------------------------

using Diags = std::vector<std::string>;

void complain(Diags& d, const std::string& path, const std::string& msg) {
  d.push_back(path + ": " + msg);
}

bool is_uint(const json& j) { return j.is_number_unsigned() || (j.is_number_integer() && j.get<long long>() >= 0); }

bool check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed,
                Diags& d) {
  bool ok = true;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) {
      complain(d, path, "unknown key '" + it.key() + "'");
      ok = false;
    }
  }
  return ok;
}

bool check_vector(const json& j, const std::string& path, Diags& d) {
  if (!j.is_array() || j.empty()) {
    complain(d, path, "must be a nonempty numeric array");
    return false;
  }
  for (const auto& v : j) {
    if (!v.is_number()) {
      complain(d, path, "must contain only numbers");
      return false;
    }
  }
  return true;
}

// Returns {rows, cols} or {0,0} on failure.
std::pair<std::size_t, std::size_t> check_matrix_literal(const json& j, const std::string& path,
                                                         Diags& d) {
  if (!j.is_array() || j.empty()) {
    complain(d, path, "must be a nonempty array of rows");
    return {0, 0};
  }
  std::size_t cols = 0;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!check_vector(j[i], path + "[" + std::to_string(i) + "]", d)) return {0, 0};
    if (i == 0) {
      cols = j[i].size();
    } else if (j[i].size() != cols) {
      complain(d, path, "rows have inconsistent lengths");
      return {0, 0};
    }
  }
  return {j.size(), cols};
}

// Validates a weight entry and reports its shape.
std::pair<std::size_t, std::size_t> check_weight(const json& j, const std::string& path,
                                                 Diags& d) {
  if (j.is_array()) return check_matrix_literal(j, path, d);
  if (!j.is_object()) {
    complain(d, path, "must be a matrix literal or a {random: ...} object");
    return {0, 0};
  }
  if (!check_keys(j, path, {"random", "normalize_spectral"}, d)) return {0, 0};
  if (!j.contains("random") || !j["random"].is_object()) {
    complain(d, path, "object form requires a 'random' object");
    return {0, 0};
  }
  const json& r = j["random"];
  const std::string rpath = path + ".random";
  check_keys(r, rpath, {"rows", "cols", "dist", "scale", "seed"}, d);
  std::size_t rows = 0, cols = 0;
  for (const char* key : {"rows", "cols"}) {
    if (!r.contains(key) || !is_uint(r[key]) || r[key].get<std::uint64_t>() == 0) {
      complain(d, rpath, std::string("'") + key + "' must be a positive integer");
    } else {
      (key == std::string("rows") ? rows : cols) = r[key].get<std::size_t>();
    }
  }
  if (r.contains("dist")) {
    if (!r["dist"].is_string() ||
        (r["dist"] != "gaussian" && r["dist"] != "uniform")) {
      complain(d, rpath + ".dist", "must be 'gaussian' or 'uniform'");
    }
  }
  if (r.contains("scale") && (!r["scale"].is_number() || r["scale"].get<double>() <= 0.0)) {
    complain(d, rpath + ".scale", "must be a positive number");
  }
  if (r.contains("seed") && !is_uint(r["seed"])) {
    complain(d, rpath + ".seed", "must be a nonnegative integer");
  }
  if (j.contains("normalize_spectral")) {
    if (!j["normalize_spectral"].is_number() || j["normalize_spectral"].get<double>() <= 0.0) {
      complain(d, path + ".normalize_spectral", "must be a positive number");
    }
  }
  return {rows, cols};
}

bool check_activation(const json& j, const std::string& path, Diags& d) {
  static const std::set<std::string> names = {"identity", "relu", "hard_tanh"};
  if (j.is_string()) {
    if (!names.count(j.get<std::string>())) {
      complain(d, path, "must be one of identity, relu, hard_tanh, or {kind: leaky_relu, slope}");
      return false;
    }
    return true;
  }
  if (!j.is_object()) {
    complain(d, path, "must be a string or an object");
    return false;
  }
  check_keys(j, path, {"kind", "slope"}, d);
  if (!j.contains("kind") || !j["kind"].is_string()) {
    complain(d, path, "object form requires a string 'kind'");
    return false;
  }
  const std::string kind = j["kind"];
  if (kind == "leaky_relu") {
    if (!j.contains("slope") || !j["slope"].is_number()) {
      complain(d, path, "leaky_relu requires a numeric 'slope'");
      return false;
    }
    const double s = j["slope"].get<double>();
    if (s < 0.0 || s > 1.0) {
      complain(d, path + ".slope", "must lie in [0,1]");
      return false;
    }
    return true;
  }
  if (!names.count(kind)) {
    complain(d, path + ".kind", "unknown activation kind '" + kind + "'");
    return false;
  }
  return true;
}

void check_network_system(const json& sys, Diags& d) {
  const std::string path = "system";
  check_keys(sys, path, {"type", "input_dim", "layers"}, d);
  if (!sys.contains("input_dim") || !is_uint(sys["input_dim"]) ||
      sys["input_dim"].get<std::uint64_t>() == 0) {
    complain(d, path + ".input_dim", "must be a positive integer");
    return;
  }
  if (!sys.contains("layers") || !sys["layers"].is_array() || sys["layers"].empty()) {
    complain(d, path + ".layers", "must be a nonempty array");
    return;
  }
  std::size_t dim = sys["input_dim"].get<std::size_t>();
  for (std::size_t k = 0; k < sys["layers"].size(); ++k) {
    const std::string lpath = path + ".layers[" + std::to_string(k) + "]";
    const json& layer = sys["layers"][k];
    if (!layer.is_object()) {
      complain(d, lpath, "must be an object");
      return;
    }
    check_keys(layer, lpath, {"weight", "bias", "activation", "residual_step"}, d);
    if (!layer.contains("weight")) {
      complain(d, lpath, "missing required key 'weight'");
      return;
    }
    auto [rows, cols] = check_weight(layer["weight"], lpath + ".weight", d);
    if (rows == 0 || cols == 0) return;

    const bool residual = layer.contains("residual_step");
    if (residual) {
      if (!layer["residual_step"].is_number() || layer["residual_step"].get<double>() <= 0.0) {
        complain(d, lpath + ".residual_step", "must be a positive number");
      }
      if (rows != cols) {
        complain(d, lpath, "residual layer " + std::to_string(k) +
                               " requires a square weight, got " + std::to_string(rows) + "x" +
                               std::to_string(cols));
      }
    }
    if (layer.contains("bias") && !(layer["bias"].is_string() && layer["bias"] == "zero")) {
      if (!check_vector(layer["bias"], lpath + ".bias", d)) return;
      if (layer["bias"].size() != rows) {
        complain(d, lpath + ".bias", "length must equal weight rows");
      }
    }
    if (layer.contains("activation")) check_activation(layer["activation"], lpath + ".activation", d);

    if (cols != dim) {
      complain(d, lpath, "layer " + std::to_string(k) + " expects input dim " +
                             std::to_string(cols) + " but receives " + std::to_string(dim));
    }
    dim = residual ? cols : rows;
  }
}

void check_sgd_system(const json& sys, Diags& d) {
  const std::string path = "system";
  check_keys(sys, path, {"type", "hessian", "minimizer", "sigma0", "sigma1", "noise"}, d);
  std::size_t dim = 0;
  if (!sys.contains("hessian")) {
    complain(d, path, "missing required key 'hessian'");
  } else if (sys["hessian"].is_object()) {
    check_keys(sys["hessian"], path + ".hessian", {"diag"}, d);
    if (!sys["hessian"].contains("diag") ||
        !check_vector(sys["hessian"]["diag"], path + ".hessian.diag", d)) {
      return;
    }
    dim = sys["hessian"]["diag"].size();
  } else {
    auto [rows, cols] = check_matrix_literal(sys["hessian"], path + ".hessian", d);
    if (rows != cols) complain(d, path + ".hessian", "must be square");
    dim = rows;
  }
  if (!sys.contains("minimizer") || !check_vector(sys["minimizer"], path + ".minimizer", d)) {
    return;
  }
  if (dim != 0 && sys["minimizer"].size() != dim) {
    complain(d, path + ".minimizer", "length must match hessian dimension");
  }
  for (const char* key : {"sigma0", "sigma1"}) {
    if (sys.contains(key)) {
      if (!sys[key].is_number() || sys[key].get<double>() < 0.0) {
        complain(d, path + "." + key, "must be a nonnegative number");
      }
    }
  }
  if (sys.contains("noise")) {
    if (!sys["noise"].is_string() ||
        (sys["noise"] != "gaussian" && sys["noise"] != "rademacher")) {
      complain(d, path + ".noise", "must be 'gaussian' or 'rademacher'");
    }
  }
}

void check_positive_if_present(const json& p, const std::string& path, const char* key,
                               Diags& d) {
  if (p.contains(key) && (!p[key].is_number() || p[key].get<double>() <= 0.0)) {
    complain(d, path + "." + key, std::string(key) + " must be positive");
  }
}

void check_uint_if_present(const json& p, const std::string& path, const char* key, Diags& d,
                           std::uint64_t min_value = 1) {
  if (p.contains(key) && (!is_uint(p[key]) || p[key].get<std::uint64_t>() < min_value)) {
    complain(d, path + "." + key,
             std::string(key) + " must be an integer >= " + std::to_string(min_value));
  }
}

void check_parameters(const std::string& command, const json& p, const json* sys, Diags& d) {
  const std::string path = "parameters";
  auto require_key = [&](const char* key) {
    if (!p.contains(key)) complain(d, path, std::string("missing required key '") + key + "'");
  };
  auto require_eta = [&]() {
    if (!p.contains("eta")) {
      complain(d, path, "missing required key 'eta'");
    } else if (!p["eta"].is_number() || p["eta"].get<double>() <= 0.0) {
      complain(d, path + ".eta", "eta must be positive");
    }
  };
  auto require_system = [&](const char* type) {
    if (sys == nullptr) {
      complain(d, "system", std::string("command '") + command + "' requires a '" + type +
                                "' system");
      return false;
    }
    const std::string actual = (*sys).value("type", "");
    if (actual != type) {
      complain(d, "system.type", std::string("command '") + command + "' requires type '" +
                                     type + "', got '" + actual + "'");
      return false;
    }
    return true;
  };

  if (command == "profile") {
    check_keys(p, path, {"input", "generalized", "norm"}, d);
    require_key("input");
    if (p.contains("input")) check_vector(p["input"], path + ".input", d);
    if (p.contains("generalized") && !p["generalized"].is_boolean()) {
      complain(d, path + ".generalized", "must be a boolean");
    }
    if (p.contains("norm") && !(p["norm"] == "op2" || p["norm"] == "op_inf")) {
      complain(d, path + ".norm", "must be 'op2' or 'op_inf'");
    }
    require_system("network");
  } else if (command == "exponents") {
    check_keys(p, path, {"input", "horizons", "generalized", "norm", "margin"}, d);
    require_key("input");
    if (p.contains("input")) check_vector(p["input"], path + ".input", d);
    require_key("horizons");
    if (p.contains("horizons")) {
      if (!p["horizons"].is_array() || p["horizons"].empty()) {
        complain(d, path + ".horizons", "must be a nonempty array of positive integers");
      } else {
        for (const auto& h : p["horizons"]) {
          if (!is_uint(h) || h.get<std::uint64_t>() == 0) {
            complain(d, path + ".horizons", "must contain positive integers");
            break;
          }
        }
      }
    }
    if (p.contains("margin") && (!p["margin"].is_number() || p["margin"].get<double>() < 0.0)) {
      complain(d, path + ".margin", "must be nonnegative");
    }
    require_system("network");
  } else if (command == "spectral-law") {
    check_keys(p, path, {"input", "rho"}, d);
    require_key("input");
    if (p.contains("input")) check_vector(p["input"], path + ".input", d);
    require_key("rho");
    if (p.contains("rho") && !p["rho"].is_number()) {
      complain(d, path + ".rho", "must be a number");
    }
    require_system("network");
  } else if (command == "cfl") {
    check_keys(p, path, {"h", "m", "m_g", "probe_center", "probe_count", "probe_radius"}, d);
    if (!p.contains("h") || !p["h"].is_number() || p["h"].get<double>() < 0.0) {
      complain(d, path + ".h", "h must be a nonnegative number");
    }
    const bool explicit_constants = p.contains("m") || p.contains("m_g");
    if (explicit_constants) {
      if (!p.contains("m") || !p.contains("m_g")) {
        complain(d, path, "m and m_g must be given together");
      }
      if (p.contains("m") && !p["m"].is_number()) complain(d, path + ".m", "must be a number");
      check_positive_if_present(p, path, "m_g", d);
    } else {
      if (sys == nullptr) {
        complain(d, "system", "cfl without explicit (m, m_g) requires a network system");
      } else if ((*sys).value("type", "") != "network") {
        complain(d, "system.type", "cfl estimation requires a network system");
      }
      if (p.contains("probe_center")) check_vector(p["probe_center"], path + ".probe_center", d);
      check_uint_if_present(p, path, "probe_count", d);
      check_positive_if_present(p, path, "probe_radius", d);
    }
  } else if (command == "sgd-recursion") {
    check_keys(p, path, {"eta", "theta0", "trials", "steps"}, d);
    require_eta();
    require_key("theta0");
    if (p.contains("theta0")) check_vector(p["theta0"], path + ".theta0", d);
    check_uint_if_present(p, path, "trials", d, 100);
    check_uint_if_present(p, path, "steps", d);
    require_system("sgd");
  } else if (command == "sgd-forgetting") {
    check_keys(p, path, {"eta", "theta0", "theta0_alt", "trials", "steps"}, d);
    require_eta();
    for (const char* key : {"theta0", "theta0_alt"}) {
      require_key(key);
      if (p.contains(key)) check_vector(p[key], path + "." + key, d);
    }
    check_uint_if_present(p, path, "trials", d);
    check_uint_if_present(p, path, "steps", d);
    require_system("sgd");
  } else if (command == "sgd-temporal") {
    check_keys(p, path, {"eta", "theta0", "perturb_step", "delta_u", "steps"}, d);
    require_eta();
    require_key("theta0");
    if (p.contains("theta0")) check_vector(p["theta0"], path + ".theta0", d);
    require_key("delta_u");
    if (p.contains("delta_u")) check_vector(p["delta_u"], path + ".delta_u", d);
    if (!p.contains("perturb_step") || !is_uint(p["perturb_step"])) {
      complain(d, path + ".perturb_step", "must be a nonnegative integer");
    }
    check_uint_if_present(p, path, "steps", d);
    require_system("sgd");
  } else if (command == "sgd-decreasing") {
    check_keys(p, path, {"a", "p", "theta0", "trials", "steps"}, d);
    check_positive_if_present(p, path, "a", d);
    if (!p.contains("a")) complain(d, path, "missing required key 'a'");
    if (!p.contains("p") || !p["p"].is_number() || p["p"].get<double>() <= 0.0) {
      complain(d, path + ".p", "p must be a positive number");
    }
    require_key("theta0");
    if (p.contains("theta0")) check_vector(p["theta0"], path + ".theta0", d);
    check_uint_if_present(p, path, "trials", d);
    check_uint_if_present(p, path, "steps", d);
    require_system("sgd");
  } else if (command == "energy-equivalence") {
    check_keys(p, path, {"direction", "trajectories", "steps", "lambda", "horizon", "eta"}, d);
    if (!p.contains("direction") ||
        !(p["direction"] == "1to2" || p["direction"] == "2to1")) {
      complain(d, path + ".direction", "must be '1to2' or '2to1'");
    }
    check_uint_if_present(p, path, "trajectories", d);
    check_uint_if_present(p, path, "steps", d);
    check_uint_if_present(p, path, "horizon", d);
    if (p.contains("lambda")) {
      if (!p["lambda"].is_number() || p["lambda"].get<double>() <= 0.0 ||
          p["lambda"].get<double>() >= 1.0) {
        complain(d, path + ".lambda", "must lie in (0,1)");
      }
    }
    if (sys == nullptr) {
      complain(d, "system", "energy-equivalence requires a system");
    } else {
      const std::string type = (*sys).value("type", "");
      if (type != "network" && type != "sgd") {
        complain(d, "system.type", "must be 'network' or 'sgd'");
      }
      if (type == "sgd") check_positive_if_present(p, path, "eta", d);
    }
  } else if (command == "prox-lab") {
    check_keys(p, path, {"regularizer", "eta", "theta0", "pairs", "steps"}, d);
    require_eta();
    require_key("regularizer");
    if (p.contains("regularizer")) {
      const json& r = p["regularizer"];
      const std::string rpath = path + ".regularizer";
      if (!r.is_object() || !r.contains("kind") || !r["kind"].is_string()) {
        complain(d, rpath, "must be an object with a string 'kind'");
      } else {
        const std::string kind = r["kind"];
        if (kind == "zero") {
          check_keys(r, rpath, {"kind"}, d);
        } else if (kind == "l1") {
          check_keys(r, rpath, {"kind", "tau"}, d);
          if (!r.contains("tau") || !r["tau"].is_number() || r["tau"].get<double>() < 0.0) {
            complain(d, rpath + ".tau", "must be a nonnegative number");
          }
        } else if (kind == "box") {
          check_keys(r, rpath, {"kind", "lo", "hi"}, d);
          for (const char* key : {"lo", "hi"}) {
            if (!r.contains(key) || !check_vector(r[key], rpath + "." + key, d)) return;
          }
        } else if (kind == "ball") {
          check_keys(r, rpath, {"kind", "radius"}, d);
          if (!r.contains("radius") || !r["radius"].is_number() ||
              r["radius"].get<double>() <= 0.0) {
            complain(d, rpath + ".radius", "must be a positive number");
          }
        } else {
          complain(d, rpath + ".kind", "must be zero, l1, box or ball");
        }
      }
    }
    require_key("theta0");
    if (p.contains("theta0")) check_vector(p["theta0"], path + ".theta0", d);
    check_uint_if_present(p, path, "pairs", d);
    check_uint_if_present(p, path, "steps", d);
    require_system("sgd");
  }
}

Diags validate_json(const json& cfg) {
  Diags d;
  if (!cfg.is_object()) {
    complain(d, "config", "top level must be a JSON object");
    return d;
  }
  check_keys(cfg, "config", {"command", "seed", "output", "system", "parameters"}, d);
  if (!cfg.contains("command") || !cfg["command"].is_string() ||
      !kCommands.count(cfg["command"].get<std::string>())) {
    complain(d, "config.command", "must be one of the supported command names");
    return d;
  }
  if (!cfg.contains("seed") || !is_uint(cfg["seed"])) {
    complain(d, "config.seed", "must be a nonnegative integer");
  }
  if (!cfg.contains("output") || !cfg["output"].is_string() ||
      cfg["output"].get<std::string>().empty()) {
    complain(d, "config.output", "must be a nonempty path prefix");
  }
  const json* sys = nullptr;
  if (cfg.contains("system")) {
    if (!cfg["system"].is_object()) {
      complain(d, "system", "must be an object");
    } else {
      sys = &cfg["system"];
      const std::string type = cfg["system"].value("type", "");
      if (type == "network") {
        check_network_system(cfg["system"], d);
      } else if (type == "sgd") {
        check_sgd_system(cfg["system"], d);
      } else {
        complain(d, "system.type", "must be 'network' or 'sgd'");
      }
    }
  }
  if (!cfg.contains("parameters") || !cfg["parameters"].is_object()) {
    complain(d, "config.parameters", "must be an object");
    return d;
  }
  check_parameters(cfg["command"].get<std::string>(), cfg["parameters"], sys, d);
  return d;
}

// ---------------------------------------------------------------------------
// Builders (assume a validated config)
// ---------------------------------------------------------------------------

Matrix matrix_from_literal(const json& j) {
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].size();
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t k = 0; k < cols; ++k) m(i, k) = j[i][k].get<double>();
  return m;
}

Matrix build_weight(const json& j) {
  if (j.is_array()) return matrix_from_literal(j);
  const json& r = j["random"];
  const std::size_t rows = r["rows"].get<std::size_t>();
  const std::size_t cols = r["cols"].get<std::size_t>();
  const std::string dist = r.value("dist", "gaussian");
  const double scale = r.value("scale", 1.0);
  const std::uint64_t seed = r.value("seed", std::uint64_t{1});
  CounterRng rng(seed);
  Matrix w(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t k = 0; k < cols; ++k) {
      w(i, k) = dist == "gaussian" ? scale * rng.normal(i, k, 0)
                                   : scale * (2.0 * rng.uniform01(i, k, 0) - 1.0);
    }
  }
  if (j.contains("normalize_spectral")) {
    const double rho = j["normalize_spectral"].get<double>();
    for (int pass = 0; pass < 2; ++pass) {  // second pass cancels estimator bias
      const double n = spectral_norm_value(w);
      if (n == 0.0) throw UsageError("cannot rescale a zero random weight");
      w = w.scaled(rho / n);
    }
  }
  return w;
}

Activation build_activation(const json& j) {
  if (j.is_string()) {
    const std::string name = j.get<std::string>();
    if (name == "identity") return Activation::identity();
    if (name == "relu") return Activation::relu();
    return Activation::hard_tanh();
  }
  const std::string kind = j["kind"];
  if (kind == "leaky_relu") return Activation::leaky_relu(j["slope"].get<double>());
  if (kind == "identity") return Activation::identity();
  if (kind == "relu") return Activation::relu();
  return Activation::hard_tanh();
}

NetworkSpec build_network(const json& sys) {
  std::vector<LayerSpec> layers;
  for (const json& lj : sys["layers"]) {
    LayerSpec layer;
    layer.weight = build_weight(lj["weight"]);
    layer.bias = Vec(layer.weight.rows(), 0.0);
    if (lj.contains("bias") && lj["bias"].is_array()) {
      layer.bias = lj["bias"].get<Vec>();
    }
    layer.activation =
        lj.contains("activation") ? build_activation(lj["activation"]) : Activation::identity();
    if (lj.contains("residual_step")) layer.residual_step = lj["residual_step"].get<double>();
    layers.push_back(std::move(layer));
  }
  return NetworkSpec(std::move(layers), sys["input_dim"].get<std::size_t>());
}

struct SgdSetup {
  QuadraticObjective objective;
  NoiseModel noise;
};

SgdSetup build_sgd(const json& sys) {
  Matrix hessian;
  if (sys["hessian"].is_object()) {
    hessian = Matrix::diagonal(sys["hessian"]["diag"].get<Vec>());
  } else {
    hessian = matrix_from_literal(sys["hessian"]);
  }
  NoiseModel noise;
  noise.sigma0 = sys.value("sigma0", 0.0);
  noise.sigma1 = sys.value("sigma1", 0.0);
  noise.kind = sys.value("noise", "gaussian") == std::string("rademacher")
                   ? NoiseKind::rademacher_scaled
                   : NoiseKind::gaussian;
  return SgdSetup{QuadraticObjective(hessian, sys["minimizer"].get<Vec>()), noise};
}

Regularizer build_regularizer(const json& r) {
  const std::string kind = r["kind"];
  if (kind == "zero") return Regularizer::zero();
  if (kind == "l1") return Regularizer::l1(r["tau"].get<double>());
  if (kind == "box") return Regularizer::box(r["lo"].get<Vec>(), r["hi"].get<Vec>());
  return Regularizer::ball(r["radius"].get<double>());
}

// ---------------------------------------------------------------------------
// Report assembly
// ---------------------------------------------------------------------------

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> data;  // column-major

  void add_row(std::initializer_list<double> row) {
    if (data.empty()) data.resize(columns.size());
    std::size_t i = 0;
    for (double v : row) data[i++].push_back(v);
  }
};

struct Verdict {
  std::string name;
  bool passed = false;
  double margin = 0.0;
};

struct Report {
  std::string command;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::vector<std::pair<std::string, Table>> tables;
  std::vector<Verdict> verdicts;

  void add_verdict(const std::string& name, bool passed, double margin) {
    verdicts.push_back({name, passed, margin});
  }
  bool all_passed() const {
    return std::all_of(verdicts.begin(), verdicts.end(),
                       [](const Verdict& v) { return v.passed; });
  }
};

json report_to_json(const Report& r) {
  json meta;
  meta["command"] = r.command;
  meta["config_hash"] = r.config_hash;
  meta["seed"] = r.seed;
  meta["tool"] = kToolName;
  meta["version"] = kVersion;

  json tables = json::object();
  for (const auto& [name, table] : r.tables) {
    json t;
    t["columns"] = table.columns;
    t["data"] = table.data;
    tables[name] = t;
  }
  json verdicts = json::array();
  for (const auto& v : r.verdicts) {
    verdicts.push_back({{"name", v.name}, {"passed", v.passed}, {"margin", v.margin}});
  }
  return json{{"metadata", meta}, {"tables", tables}, {"verdicts", verdicts}};
}

void write_text_file(const std::string& path, const std::string& content,
                     std::vector<std::string>& written) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw UsageError("cannot open output file " + path);
  out << content;
  written.push_back(path);
}

std::string table_to_csv(const Table& t) {
  std::string csv;
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    if (c) csv += ',';
    csv += t.columns[c];
  }
  csv += '\n';
  const std::size_t rows = t.data.empty() ? 0 : t.data[0].size();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < t.data.size(); ++c) {
      if (c) csv += ',';
      csv += fmt17(t.data[c][r]);
    }
    csv += '\n';
  }
  return csv;
}

// ---------------------------------------------------------------------------
// Command runners
// ---------------------------------------------------------------------------

NormKind norm_from(const json& p) {
  return p.value("norm", "op2") == std::string("op_inf") ? NormKind::op_inf : NormKind::op2;
}

void run_profile(const json& cfg, Report& rep) {
  const NetworkSpec net = build_network(cfg["system"]);
  const json& p = cfg["parameters"];
  const StabilityProfile profile =
      profile_network(net, p["input"].get<Vec>(), p.value("generalized", false), norm_from(p));

  Table t;
  t.columns = {"depth", "sigma_x", "sigma_theta", "sigma_u", "exact"};
  bool finite = true;
  for (const auto& e : profile.entries) {
    t.add_row({static_cast<double>(e.index.depth), e.sigma_x, e.sigma_theta, e.sigma_u,
               e.exact ? 1.0 : 0.0});
    finite = finite && std::isfinite(e.sigma_x) && std::isfinite(e.sigma_theta);
  }
  rep.tables.emplace_back("profile", std::move(t));
  rep.add_verdict("finite", finite, 0.0);
}

void run_exponents(const json& cfg, Report& rep) {
  const NetworkSpec net = build_network(cfg["system"]);
  const json& p = cfg["parameters"];
  const std::vector<std::size_t> horizons = p["horizons"].get<std::vector<std::size_t>>();
  const auto estimates = exponent_sequence(net, p["input"].get<Vec>(), horizons,
                                           norm_from(p), p.value("generalized", false));

  Table t;
  t.columns = {"depth", "time", "alpha_x", "alpha_theta", "alpha_u",
               "sup_x", "sup_theta", "sup_u"};
  for (const auto& e : estimates) {
    t.add_row({static_cast<double>(e.horizon.depth), static_cast<double>(e.horizon.time),
               e.alpha_x, e.alpha_theta, e.alpha_u, e.sup_signatures[0], e.sup_signatures[1],
               e.sup_signatures[2]});
  }
  rep.tables.emplace_back("estimates", std::move(t));

  const double margin = p.value("margin", 1e-6);
  const StabilityVerdict verdict = classify(estimates.back(), margin);
  Table c;
  c.columns = {"stable", "strict", "margin", "trend_slope_x"};
  c.add_row({verdict.stable ? 1.0 : 0.0, verdict.strict ? 1.0 : 0.0, margin,
             estimates.size() >= 2 ? trend_slope(estimates, 0)
                                   : std::numeric_limits<double>::quiet_NaN()});
  rep.tables.emplace_back("classification", std::move(c));
  rep.add_verdict("stable", verdict.stable, -estimates.back().alpha_x);
}

void run_spectral_law(const json& cfg, Report& rep) {
  const NetworkSpec net = build_network(cfg["system"]);
  const json& p = cfg["parameters"];
  const SpectralLawReport law = spectral_law_check(net, p["rho"].get<double>(),
                                                   p["input"].get<Vec>());
  Table t;
  t.columns = {"depth", "measured", "bound", "satisfied"};
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < law.measured.size(); ++k) {
    t.add_row({static_cast<double>(k + 1), law.measured[k], law.bound[k],
               law.satisfied[k] ? 1.0 : 0.0});
    worst = std::min(worst, law.bound[k] - law.measured[k]);
  }
  rep.tables.emplace_back("spectral_law", std::move(t));
  rep.add_verdict("applicable", law.applicable, 0.0);
  rep.add_verdict("bound-satisfied", law.applicable && law.all_satisfied,
                  std::isfinite(worst) ? worst : 0.0);
}

void run_cfl(const json& cfg, Report& rep) {
  const json& p = cfg["parameters"];
  DissipativityEstimate est;
  if (p.contains("m")) {
    est = certified_dissipativity(p["m"].get<double>(), p["m_g"].get<double>());
  } else {
    const NetworkSpec net = build_network(cfg["system"]);
    const LayerSpec* block = nullptr;
    for (std::size_t k = 0; k < net.depth(); ++k) {
      if (net.layer(k).residual()) {
        block = &net.layer(k);
        break;
      }
    }
    if (block == nullptr) throw UsageError("cfl: network has no residual layer");
    const Vec center = p.contains("probe_center") ? p["probe_center"].get<Vec>()
                                                  : Vec(block->in_dim(), 0.0);
    const auto probes = sample_probes(center, p.value("probe_count", std::size_t{64}),
                                      0x70726f6265ULL, p.value("probe_radius", 1.0));
    est = estimate_dissipativity(*block, probes);
  }
  const CflReport cflr = cfl_report(est, p["h"].get<double>());

  Table t;
  t.columns = {"h", "h_max", "c_x", "m", "m_g", "admissible", "alpha_x_bound"};
  t.add_row({cflr.h, cflr.h_max, cflr.c_x, cflr.m, cflr.m_g, cflr.admissible ? 1.0 : 0.0,
             cflr.alpha_x_bound.value_or(std::numeric_limits<double>::quiet_NaN())});
  rep.tables.emplace_back("cfl", std::move(t));
  rep.add_verdict("dissipative", cflr.m > 0.0, cflr.m);
  rep.add_verdict("admissible", cflr.admissible, cflr.h_max - cflr.h);
}

void run_sgd_recursion(const json& cfg, Report& rep, unsigned threads, std::uint64_t seed) {
  const SgdSetup setup = build_sgd(cfg["system"]);
  const json& p = cfg["parameters"];
  const double eta = p["eta"].get<double>();
  const SgdRegime regime = SgdRegime::from(setup.objective, setup.noise);
  const RecursionReport r = verify_recursion(
      setup.objective, setup.noise, StepSchedule::constant(eta), p["theta0"].get<Vec>(),
      p.value("trials", std::size_t{10000}), p.value("steps", std::size_t{100}), seed, threads);

  Table t;
  t.columns = {"t", "empirical_next", "bound", "standard_error", "satisfied"};
  for (const auto& s : r.steps) {
    t.add_row({static_cast<double>(s.t), s.empirical_next, s.bound, s.standard_error,
               s.satisfied ? 1.0 : 0.0});
  }
  rep.tables.emplace_back("recursion", std::move(t));

  Table e;
  e.columns = {"t", "mean_energy"};
  for (std::size_t i = 0; i < r.energy.times.size(); ++i) {
    e.add_row({r.energy.times[i], r.energy.energies[i]});
  }
  rep.tables.emplace_back("energy", std::move(e));

  const double q = regime.q_factor(eta);
  rep.add_verdict("admissible-step", q < 1.0, 1.0 - q);
  rep.add_verdict("recursion-bound", r.admissible_step && r.all_satisfied, 0.0);
  if (r.stationary_bound > 0.0) {
    const double slack =
        r.stationary_bound + 3.0 * r.final_standard_error - r.final_second_moment;
    rep.add_verdict("stationary-floor", slack >= 0.0, slack);
  }
}

void run_sgd_forgetting(const json& cfg, Report& rep, unsigned threads, std::uint64_t seed) {
  const SgdSetup setup = build_sgd(cfg["system"]);
  const json& p = cfg["parameters"];
  const ForgettingReport r = coupled_forgetting(
      setup.objective, setup.noise, p["eta"].get<double>(), p["theta0"].get<Vec>(),
      p["theta0_alt"].get<Vec>(), p.value("trials", std::size_t{10000}),
      p.value("steps", std::size_t{200}), seed, threads);

  Table t;
  t.columns = {"t", "empirical_sq", "bound_sq", "sigma_theta"};
  for (const auto& s : r.steps) {
    t.add_row({static_cast<double>(s.t), s.empirical_sq, s.bound_sq, s.sigma_theta});
  }
  rep.tables.emplace_back("forgetting", std::move(t));

  rep.add_verdict("decay-within-bound", r.all_within_bound, 0.0);
  const double handoff_slack =
      r.alpha_theta_bound_derived + 0.02 - r.alpha_theta_estimate;
  rep.add_verdict("exponent-handoff", handoff_slack >= 0.0, handoff_slack);
}

void run_sgd_temporal(const json& cfg, Report& rep, std::uint64_t seed) {
  const SgdSetup setup = build_sgd(cfg["system"]);
  const json& p = cfg["parameters"];
  const TemporalGainReport r = temporal_gain(
      setup.objective, setup.noise, p["eta"].get<double>(),
      p["perturb_step"].get<std::size_t>(), p["delta_u"].get<Vec>(), p["theta0"].get<Vec>(),
      p.value("steps", std::size_t{500}), seed);

  Table t;
  t.columns = {"t", "delta_norm", "cumulative_bound"};
  for (std::size_t i = 0; i < r.delta_norm.size(); ++i) {
    t.add_row({static_cast<double>(i), r.delta_norm[i], r.cumulative_bound[i]});
  }
  rep.tables.emplace_back("temporal", std::move(t));

  const double fs_slack = r.first_step_bound - r.first_step_value;
  rep.add_verdict("first-step-within-bound", fs_slack >= -1e-12, fs_slack);
  const double growth_slack = r.first_step_value * (1.0 + 1e-9) + 1e-15 - r.sup_delta;
  rep.add_verdict("no-growth", growth_slack >= 0.0, growth_slack);
}

void run_sgd_decreasing(const json& cfg, Report& rep, unsigned threads, std::uint64_t seed) {
  const SgdSetup setup = build_sgd(cfg["system"]);
  const json& p = cfg["parameters"];
  const DecreasingRunReport r = decreasing_step_run(
      setup.objective, setup.noise, p["a"].get<double>(), p["p"].get<double>(),
      p["theta0"].get<Vec>(), p.value("trials", std::size_t{1000}),
      p.value("steps", std::size_t{10000}), seed, threads);

  Table t;
  t.columns = {"t", "median_sq_error"};
  for (std::size_t i = 0; i < r.median_trace.times.size(); ++i) {
    t.add_row({r.median_trace.times[i], r.median_trace.energies[i]});
  }
  rep.tables.emplace_back("decreasing", std::move(t));

  rep.add_verdict("schedule-admissible", r.schedule_admissible, 0.0);
  const double first = r.median_trace.energies.front();
  const double last = r.median_trace.energies.back();
  rep.add_verdict("converging", last < first, first - last);
}

void run_energy_equivalence(const json& cfg, Report& rep, std::uint64_t seed) {
  const json& p = cfg["parameters"];
  const std::string type = cfg["system"]["type"];
  SystemUnderStudy sys = type == "network"
                             ? make_network_system(build_network(cfg["system"]))
                             : make_sgd_mean_system(build_sgd(cfg["system"]).objective,
                                                    p.value("eta", 0.1));
  const EquivalenceDirection dir = p["direction"] == "1to2"
                                       ? EquivalenceDirection::signatures_to_energy
                                       : EquivalenceDirection::energy_to_signatures;
  std::optional<double> lambda;
  if (p.contains("lambda")) lambda = p["lambda"].get<double>();
  const EquivalenceReport r = equivalence_experiment(
      sys, dir, p.value("trajectories", std::size_t{50}), p.value("steps", std::size_t{30}),
      seed, lambda, p.value("horizon", std::size_t{64}));

  Table t;
  t.columns = {"contraction", "lambda", "gamma", "measured_exponent",
               "exponent_to_gamma_ratio", "signature_sup", "construction_accepted"};
  t.add_row({r.measured_contraction, r.lambda, r.gamma, r.measured_exponent,
             r.exponent_to_gamma_ratio, r.measured_signature_sup,
             r.construction_accepted ? 1.0 : 0.0});
  rep.tables.emplace_back("equivalence", std::move(t));
  rep.add_verdict("equivalence-consistent", r.succeeded, 0.0);
}

void run_prox_lab(const json& cfg, Report& rep, std::uint64_t seed) {
  const SgdSetup setup = build_sgd(cfg["system"]);
  const json& p = cfg["parameters"];
  const Regularizer reg = build_regularizer(p["regularizer"]);
  const double eta = p["eta"].get<double>();

  const NonexpansivenessReport ne = nonexpansiveness_check(
      reg, &setup.objective, eta, p.value("pairs", std::size_t{10000}),
      setup.objective.dim(), seed);
  Table nt;
  nt.columns = {"pairs", "max_firm_violation", "max_composite_lipschitz"};
  nt.add_row({static_cast<double>(ne.pairs), ne.max_firm_violation,
              ne.max_composite_lipschitz});
  rep.tables.emplace_back("nonexpansiveness", std::move(nt));

  const auto trajectory = prox_gradient_run(setup.objective, reg, eta, p["theta0"].get<Vec>(),
                                            p.value("steps", std::size_t{100}));
  const ProxDescentReport descent = prox_descent_check(setup.objective, reg, trajectory, eta);
  Table dt;
  dt.columns = {"t", "delta_phi", "required"};
  for (const auto& s : descent.report.steps) {
    dt.add_row({static_cast<double>(s.t), s.delta_e, s.required});
  }
  rep.tables.emplace_back("descent", std::move(dt));

  rep.add_verdict("firmly-nonexpansive", ne.firm_ok,
                  ne.tolerance - ne.max_firm_violation);
  rep.add_verdict("composite-nonexpansive", ne.composite_ok,
                  1.0 + ne.tolerance - ne.max_composite_lipschitz);
  rep.add_verdict("descent", descent.report.all_satisfied, descent.c_eta);
}

}  // namespace

// ---------------------------------------------------------------------------
// Public entry points
// ---------------------------------------------------------------------------

ValidationResult validate_config_text(const std::string& config_text) {
  ValidationResult result;
  json cfg = json::parse(config_text, nullptr, /*allow_exceptions=*/false);
  if (cfg.is_discarded()) {
    result.diagnostics.push_back("config: not valid JSON");
    return result;
  }
  result.diagnostics = validate_json(cfg);
  return result;
}

std::string config_hash_hex(const std::string& config_text) {
  json cfg = json::parse(config_text, nullptr, /*allow_exceptions=*/false);
  if (cfg.is_discarded()) return to_hex(fnv1a64(config_text));
  return to_hex(fnv1a64(cfg.dump()));
}

std::string tool_version() { return kVersion; }

RunResult run_experiment_text(const std::string& config_text, const RunOptions& opts) {
  RunResult result;
  const ValidationResult validation = validate_config_text(config_text);
  if (!validation.ok()) {
    std::ostringstream out;
    out << "config error:\n";
    for (const auto& diag : validation.diagnostics) out << "  " << diag << "\n";
    result.summary = out.str();
    result.exit_code = 2;
    return result;
  }

  const json cfg = json::parse(config_text);
  Report rep;
  rep.command = cfg["command"];
  rep.seed = opts.seed_override.value_or(cfg["seed"].get<std::uint64_t>());
  rep.config_hash = config_hash_hex(config_text);
  const std::string prefix =
      opts.output_override.empty() ? cfg["output"].get<std::string>() : opts.output_override;

  bool estimation_failed = false;
  std::string failure_note;
  try {
    const std::string& command = rep.command;
    if (command == "profile") {
      run_profile(cfg, rep);
    } else if (command == "exponents") {
      run_exponents(cfg, rep);
    } else if (command == "spectral-law") {
      run_spectral_law(cfg, rep);
    } else if (command == "cfl") {
      run_cfl(cfg, rep);
    } else if (command == "sgd-recursion") {
      run_sgd_recursion(cfg, rep, opts.threads, rep.seed);
    } else if (command == "sgd-forgetting") {
      run_sgd_forgetting(cfg, rep, opts.threads, rep.seed);
    } else if (command == "sgd-temporal") {
      run_sgd_temporal(cfg, rep, rep.seed);
    } else if (command == "sgd-decreasing") {
      run_sgd_decreasing(cfg, rep, opts.threads, rep.seed);
    } else if (command == "energy-equivalence") {
      run_energy_equivalence(cfg, rep, rep.seed);
    } else if (command == "prox-lab") {
      run_prox_lab(cfg, rep, rep.seed);
    }
  } catch (const SpectralConvergenceError& e) {
    estimation_failed = true;
    failure_note = e.what();
  } catch (const EvaluationError& e) {
    estimation_failed = true;
    failure_note = e.what();
  } catch (const DimensionError& e) {
    result.summary = std::string("config error: ") + e.what() + "\n";
    result.exit_code = 2;
    return result;
  } catch (const UsageError& e) {
    result.summary = std::string("config error: ") + e.what() + "\n";
    result.exit_code = 2;
    return result;
  }
  if (estimation_failed) {
    rep.add_verdict("estimation-failure", false, 0.0);
  }

  // Write the machine report: structured JSON plus one CSV per table.
  const std::string report_path = prefix + ".report.json";
  write_text_file(report_path, report_to_json(rep).dump(2) + "\n", result.written_files);
  for (const auto& [name, table] : rep.tables) {
    write_text_file(prefix + "." + name + ".csv", table_to_csv(table), result.written_files);
  }

  std::ostringstream out;
  out << "command: " << rep.command << "\n";
  out << "seed: " << rep.seed << "\n";
  out << "config hash: " << rep.config_hash << "\n";
  for (const auto& v : rep.verdicts) {
    out << "verdict " << v.name << ": " << (v.passed ? "PASS" : "FAIL") << " (margin "
        << fmt17(v.margin) << ")\n";
  }
  if (estimation_failed) out << "estimation failure: " << failure_note << "\n";
  out << "report: " << report_path << "\n";
  result.summary = out.str();
  result.exit_code = rep.all_passed() && !estimation_failed ? 0 : 1;
  return result;
}

}  // namespace lsp
