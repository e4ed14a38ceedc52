#include <fstream>
#include <set>
#include <sstream>

#include "onlinefwer/cli.hpp"
#include "onlinefwer/rng.hpp"

namespace onlinefwer::cli {

namespace {

using nlohmann::json;

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void expect_object(const json& value, const std::string& path) {
  if (!value.is_object()) throw ConfigError(path, "expected an object");
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& path) {
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) throw ConfigError(join(path, item.key()), "unknown field");
  }
}

const json& require(const json& obj, const char* key, const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(join(path, key), "required field is missing");
  return *it;
}

double get_number(const json& value, const std::string& path) {
  if (!value.is_number()) throw ConfigError(path, "expected a number");
  return value.get<double>();
}

double get_number_in(const json& obj, const char* key, const std::string& path, double fallback) {
  const auto it = obj.find(key);
  return it == obj.end() ? fallback : get_number(*it, join(path, key));
}

std::uint64_t get_uint(const json& value, const std::string& path) {
  if (!value.is_number_unsigned() && !(value.is_number_integer() && value.get<std::int64_t>() >= 0)) {
    throw ConfigError(path, "expected a non-negative integer");
  }
  return value.get<std::uint64_t>();
}

std::uint32_t get_uint32(const json& value, const std::string& path) {
  const std::uint64_t v = get_uint(value, path);
  if (v > 0xFFFFFFFFull) throw ConfigError(path, "value is too large");
  return static_cast<std::uint32_t>(v);
}

std::string get_string(const json& value, const std::string& path) {
  if (!value.is_string()) throw ConfigError(path, "expected a string");
  return value.get<std::string>();
}

bool get_bool_in(const json& obj, const char* key, const std::string& path, bool fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_boolean()) throw ConfigError(join(path, key), "expected a boolean");
  return it->get<bool>();
}

ResamplePlan parse_resample(const json& obj, const std::string& path, json& resolved) {
  if (obj.is_null()) {
    resolved = json{{"rule", "sqrt"}};
    return ResamplePlan::sqrt_rule();
  }
  expect_object(obj, path);
  check_keys(obj, {"rule", "m"}, path);
  const std::string rule = get_string(require(obj, "rule", path), join(path, "rule"));
  if (rule == "sqrt") {
    resolved = json{{"rule", "sqrt"}};
    return ResamplePlan::sqrt_rule();
  }
  if (rule == "fixed") {
    const std::uint32_t m = get_uint32(require(obj, "m", path), join(path, "m"));
    if (m < 1) throw ConfigError(join(path, "m"), "must be >= 1");
    resolved = json{{"rule", "fixed"}, {"m", m}};
    return ResamplePlan::fixed(m);
  }
  throw ConfigError(join(path, "rule"), "expected \"sqrt\" or \"fixed\"");
}

Scenario parse_scenario(const json& obj, const std::string& path, json& resolved) {
  expect_object(obj, path);
  const std::string type = get_string(require(obj, "type", path), join(path, "type"));
  const json resample_in = obj.contains("resample") ? obj.at("resample") : json();
  json resample_out;

  if (type == "autocorr") {
    check_keys(obj, {"type", "N", "n", "pi1", "rho", "effect", "effect_scale_c", "lambda", "resample"}, path);
    AutocorrScenario s;
    s.hypotheses = get_uint32(require(obj, "N", path), join(path, "N"));
    s.sample_size = get_uint32(require(obj, "n", path), join(path, "n"));
    s.pi1 = get_number_in(obj, "pi1", path, s.pi1);
    s.rho = get_number_in(obj, "rho", path, s.rho);
    s.effect = get_number_in(obj, "effect", path, s.effect);
    if (obj.contains("effect_scale_c")) {
      s.effect_scale_c = get_number(obj.at("effect_scale_c"), join(path, "effect_scale_c"));
    }
    s.lambda = get_number_in(obj, "lambda", path, s.lambda);
    s.resample = parse_resample(resample_in, join(path, "resample"), resample_out);
    try {
      s.validate();
    } catch (const std::exception& e) {
      throw ConfigError(path, e.what());
    }
    resolved = json{{"type", "autocorr"}, {"N", s.hypotheses},  {"n", s.sample_size},
                    {"pi1", s.pi1},       {"rho", s.rho},       {"effect", s.effect},
                    {"lambda", s.lambda}, {"resample", resample_out}};
    if (s.effect_scale_c) resolved["effect_scale_c"] = *s.effect_scale_c;
    return s;
  }

  if (type == "platform") {
    check_keys(obj, {"type", "N", "n", "sigma", "rate", "entry_spacing", "pi1", "effect", "lambda", "resample"},
               path);
    PlatformScenario s;
    s.treatments = get_uint32(require(obj, "N", path), join(path, "N"));
    s.sample_size = get_uint32(require(obj, "n", path), join(path, "n"));
    s.sigma = get_number_in(obj, "sigma", path, s.sigma);
    s.rate = get_number_in(obj, "rate", path, s.rate);
    s.entry_spacing = get_number_in(obj, "entry_spacing", path, s.entry_spacing);
    s.pi1 = get_number_in(obj, "pi1", path, s.pi1);
    s.effect = get_number_in(obj, "effect", path, s.effect);
    s.lambda = get_number_in(obj, "lambda", path, s.lambda);
    s.resample = parse_resample(resample_in, join(path, "resample"), resample_out);
    try {
      s.validate();
    } catch (const std::exception& e) {
      throw ConfigError(path, e.what());
    }
    resolved = json{{"type", "platform"},
                    {"N", s.treatments},
                    {"n", s.sample_size},
                    {"sigma", s.sigma},
                    {"rate", s.rate},
                    {"entry_spacing", s.entry_spacing},
                    {"pi1", s.pi1},
                    {"effect", s.effect},
                    {"lambda", s.lambda},
                    {"resample", resample_out}};
    return s;
  }

  throw ConfigError(join(path, "type"), "expected \"autocorr\" or \"platform\"");
}

SpendingSequence parse_gamma(const json& obj, const std::string& path, json& resolved) {
  if (obj.is_null()) {
    resolved = json{{"type", "inverse-square"}};
    return SpendingSequence::inverse_square();
  }
  expect_object(obj, path);
  check_keys(obj, {"type", "pi"}, path);
  const std::string type = get_string(require(obj, "type", path), join(path, "type"));
  if (type == "inverse-square") {
    resolved = json{{"type", "inverse-square"}};
    return SpendingSequence::inverse_square();
  }
  if (type == "geometric") {
    const double pi = get_number(require(obj, "pi", path), join(path, "pi"));
    if (!(pi > 0.0 && pi < 1.0)) throw ConfigError(join(path, "pi"), "must lie in (0, 1)");
    resolved = json{{"type", "geometric"}, {"pi", pi}};
    return SpendingSequence::geometric(pi);
  }
  throw ConfigError(join(path, "type"), "expected \"inverse-square\" or \"geometric\"");
}

SpendingFunction parse_spending_function(const json& obj, const std::string& path, double lambda, json& resolved) {
  if (obj.is_null()) {
    resolved = json{{"type", "interpolation"}, {"gamma", json{{"type", "inverse-square"}}}};
    return make_interpolation_function(SpendingSequence::inverse_square(), lambda);
  }
  expect_object(obj, path);
  check_keys(obj, {"type", "gamma", "coefficient", "exponent"}, path);
  const std::string type = get_string(require(obj, "type", path), join(path, "type"));
  if (type == "interpolation") {
    json gamma_out;
    const json gamma_in = obj.contains("gamma") ? obj.at("gamma") : json();
    const SpendingSequence gamma = parse_gamma(gamma_in, join(path, "gamma"), gamma_out);
    resolved = json{{"type", "interpolation"}, {"gamma", gamma_out}};
    try {
      return make_interpolation_function(gamma, lambda);
    } catch (const std::exception& e) {
      throw ConfigError(path, e.what());
    }
  }
  if (type == "power") {
    const double coef = get_number(require(obj, "coefficient", path), join(path, "coefficient"));
    const double expo = get_number(require(obj, "exponent", path), join(path, "exponent"));
    resolved = json{{"type", "power"}, {"coefficient", coef}, {"exponent", expo}};
    try {
      return make_power_function(coef, expo, lambda);
    } catch (const std::exception& e) {
      throw ConfigError(path, e.what());
    }
  }
  throw ConfigError(join(path, "type"), "expected \"interpolation\" or \"power\"");
}

double scenario_lambda(const Scenario& scenario) {
  return std::visit([](const auto& s) { return s.lambda; }, scenario);
}

void parse_procedure(const json& obj, const std::string& path, double alpha, double default_lambda,
                     RunConfig& out) {
  expect_object(obj, path);
  const std::string id = get_string(require(obj, "id", path), join(path, "id"));
  const auto kind = procedure_kind_from_string(id);
  if (!kind) throw ConfigError(join(path, "id"), "unknown procedure \"" + id + "\"");
  const bool closed = get_bool_in(obj, "closed", path, false);
  const double lambda = get_number_in(obj, "lambda", path, default_lambda);

  json resolved{{"id", id}, {"closed", closed}};
  ProcedureConfig cfg;
  try {
    switch (*kind) {
      case ProcedureKind::AlphaSpending: {
        check_keys(obj, {"id", "closed", "gamma"}, path);
        json gamma_out;
        const SpendingSequence gamma =
            parse_gamma(obj.contains("gamma") ? obj.at("gamma") : json(), join(path, "gamma"), gamma_out);
        cfg = ProcedureConfig::alpha_spending(alpha, gamma);
        resolved["gamma"] = gamma_out;
        break;
      }
      case ProcedureKind::AdaptiveSpending: {
        check_keys(obj, {"id", "closed", "lambda", "gamma"}, path);
        json gamma_out;
        const SpendingSequence gamma =
            parse_gamma(obj.contains("gamma") ? obj.at("gamma") : json(), join(path, "gamma"), gamma_out);
        cfg = ProcedureConfig::adaptive_spending(alpha, ParamSequence::constant(lambda), gamma);
        resolved["lambda"] = lambda;
        resolved["gamma"] = gamma_out;
        break;
      }
      case ProcedureKind::OnlineFallback: {
        check_keys(obj, {"id", "closed", "gamma"}, path);
        json gamma_out;
        const SpendingSequence gamma =
            parse_gamma(obj.contains("gamma") ? obj.at("gamma") : json(), join(path, "gamma"), gamma_out);
        cfg = ProcedureConfig::online_fallback(alpha, gamma);
        resolved["gamma"] = gamma_out;
        break;
      }
      case ProcedureKind::Geometric: {
        check_keys(obj, {"id", "closed", "lambda", "pi"}, path);
        const double pi = get_number(require(obj, "pi", path), join(path, "pi"));
        cfg = ProcedureConfig::geometric(alpha, ParamSequence::constant(pi), ParamSequence::constant(lambda));
        resolved["lambda"] = lambda;
        resolved["pi"] = pi;
        break;
      }
      case ProcedureKind::ContinuousGraph: {
        check_keys(obj, {"id", "closed", "lambda", "gamma"}, path);
        json gamma_out;
        const SpendingSequence gamma =
            parse_gamma(obj.contains("gamma") ? obj.at("gamma") : json(), join(path, "gamma"), gamma_out);
        cfg = ProcedureConfig::continuous_graph(alpha, ParamSequence::constant(lambda), gamma, closed);
        resolved["lambda"] = lambda;
        resolved["gamma"] = gamma_out;
        break;
      }
      case ProcedureKind::ContinuousSpending: {
        check_keys(obj, {"id", "closed", "lambda", "f"}, path);
        json f_out;
        const SpendingFunction f = parse_spending_function(obj.contains("f") ? obj.at("f") : json(),
                                                           join(path, "f"), lambda, f_out);
        cfg = ProcedureConfig::continuous_spending(alpha, f, closed);
        resolved["lambda"] = lambda;
        resolved["f"] = f_out;
        break;
      }
    }
    cfg.closed = closed;
    cfg.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(path, e.what());
  }

  out.procedures.push_back(std::move(cfg));
  out.procedure_ids.push_back(id);
  out.procedure_closed.push_back(closed);
  out.resolved["procedures"].push_back(std::move(resolved));
}

void parse_sweep(const json& obj, const std::string& path, bool is_platform, RunConfig& out) {
  std::vector<std::optional<std::uint32_t>> ns{std::nullopt}, nn{std::nullopt};
  std::vector<std::optional<double>> rhos{std::nullopt}, pi1s{std::nullopt};
  if (!obj.is_null()) {
    expect_object(obj, path);
    check_keys(obj, {"N", "n", "rho", "pi1"}, path);
    const auto parse_axis = [&](const char* key, auto& target, auto convert) {
      const auto it = obj.find(key);
      if (it == obj.end()) return;
      const std::string axis_path = join(path, key);
      if (!it->is_array() || it->empty()) throw ConfigError(axis_path, "expected a non-empty array");
      target.clear();
      for (std::size_t k = 0; k < it->size(); ++k) {
        target.push_back(convert(it->at(k), axis_path + "[" + std::to_string(k) + "]"));
      }
      out.resolved["sweep"][key] = *it;
    };
    parse_axis("N", ns, [](const json& v, const std::string& p) {
      return std::optional<std::uint32_t>(get_uint32(v, p));
    });
    parse_axis("n", nn, [](const json& v, const std::string& p) {
      return std::optional<std::uint32_t>(get_uint32(v, p));
    });
    if (obj.contains("rho") && is_platform) {
      throw ConfigError(join(path, "rho"), "not applicable to the platform scenario");
    }
    parse_axis("rho", rhos,
               [](const json& v, const std::string& p) { return std::optional<double>(get_number(v, p)); });
    parse_axis("pi1", pi1s,
               [](const json& v, const std::string& p) { return std::optional<double>(get_number(v, p)); });
  }
  for (const auto& N : ns) {
    for (const auto& n : nn) {
      for (const auto& rho : rhos) {
        for (const auto& pi1 : pi1s) {
          out.sweep.push_back(SweepPoint{N, n, rho, pi1});
        }
      }
    }
  }
}

}  // namespace

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("$", "cannot open config file \"" + path + "\"");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("$", std::string("invalid JSON: ") + e.what());
  }
}

RunConfig parse_run_config(const nlohmann::json& root, const Overrides& overrides) {
  expect_object(root, "$");
  // A manifest written by a previous run carries the config under "config".
  const bool is_manifest = root.contains("config");
  const nlohmann::json& top = is_manifest ? root.at("config") : root;
  expect_object(top, is_manifest ? "config" : "$");
  check_keys(top, {"scenario", "procedures", "alpha", "sweep", "replications", "seed", "out", "parallelism"}, "");

  RunConfig out;
  out.resolved = nlohmann::json::object();
  out.resolved["procedures"] = nlohmann::json::array();

  json scenario_resolved;
  out.scenario = parse_scenario(require(top, "scenario", ""), "scenario", scenario_resolved);

  const double alpha = get_number_in(top, "alpha", "", 0.05);
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha", "must lie in (0, 1)");

  const json& procs = require(top, "procedures", "");
  if (!procs.is_array() || procs.empty()) throw ConfigError("procedures", "expected a non-empty array");
  for (std::size_t i = 0; i < procs.size(); ++i) {
    parse_procedure(procs.at(i), "procedures[" + std::to_string(i) + "]", alpha,
                    scenario_lambda(out.scenario), out);
  }

  out.replications = overrides.replications
                         ? *overrides.replications
                         : get_uint32(require(top, "replications", ""), "replications");
  if (out.replications < 1) throw ConfigError("replications", "must be >= 1");
  out.seed = overrides.seed ? *overrides.seed : get_uint(require(top, "seed", ""), "seed");
  out.out = overrides.out ? *overrides.out : get_string(require(top, "out", ""), "out");
  if (top.contains("parallelism")) {
    out.parallelism = get_uint32(top.at("parallelism"), "parallelism");
  }

  parse_sweep(top.contains("sweep") ? top.at("sweep") : json(), "sweep",
              std::holds_alternative<PlatformScenario>(out.scenario), out);

  out.resolved["scenario"] = std::move(scenario_resolved);
  out.resolved["alpha"] = alpha;
  out.resolved["replications"] = out.replications;
  out.resolved["seed"] = out.seed;
  out.resolved["out"] = out.out;
  out.resolved["parallelism"] = out.parallelism;
  return out;
}

Scenario scenario_at_point(const Scenario& base, const SweepPoint& point, std::uint64_t point_seed) {
  Scenario result = base;
  std::visit(
      [&](auto& s) {
        using T = std::decay_t<decltype(s)>;
        if (point.sample_size) s.sample_size = *point.sample_size;
        if (point.pi1) s.pi1 = *point.pi1;
        if constexpr (std::is_same_v<T, AutocorrScenario>) {
          if (point.hypotheses) s.hypotheses = *point.hypotheses;
          if (point.rho) s.rho = *point.rho;
        } else {
          if (point.hypotheses) s.treatments = *point.hypotheses;
        }
        s.seed = point_seed;
        s.validate();
      },
      result);
  return result;
}

}  // namespace onlinefwer::cli
