#include "ipwkit/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ipwkit/error.hpp"

namespace ipwkit {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json(std::string_view text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string(what) + ": " + e.what());
  }
}

void reject_unknown(const json& obj, std::initializer_list<const char*> known,
                    const std::string& where) {
  if (!obj.is_object()) throw DataError(where + " must be an object");
  const std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key)) throw DataError("unknown key '" + key + "' in " + where);
}

template <class T>
T get(const json& obj, const char* key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw DataError(where + "." + key + ": " + e.what());
  }
}

Covariate covariate_or_throw(const std::string& key) {
  auto c = covariate_from_key(key);
  if (!c) throw DataError("unknown covariate '" + key + "'");
  return *c;
}

Family family_or_throw(const std::string& name) {
  auto f = family_from_string(name);
  if (!f) throw DataError("unknown family '" + name + "'");
  return *f;
}

char single_char(const std::string& s, const char* key) {
  if (s.size() != 1) throw DataError(std::string(key) + " must be one character");
  return s[0];
}

std::string resolve(const std::string& base_dir, const std::string& p) {
  if (p.empty()) return p;
  const fs::path path(p);
  if (path.is_absolute()) return path.lexically_normal().string();
  return (fs::path(base_dir) / path).lexically_normal().string();
}

Distribution distribution_or_throw(const std::string& s) {
  if (s == "poisson") return Distribution::kPoisson;
  if (s == "negbin") return Distribution::kNegBin;
  if (s == "bernoulli") return Distribution::kBernoulli;
  if (s == "lognormal") return Distribution::kLogNormal;
  throw DataError("unknown distribution '" + s + "'");
}

std::string_view to_string(Distribution d) {
  switch (d) {
    case Distribution::kPoisson: return "poisson";
    case Distribution::kNegBin: return "negbin";
    case Distribution::kBernoulli: return "bernoulli";
    case Distribution::kLogNormal: return "lognormal";
  }
  return "?";
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> from_vector(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

}  // namespace

PipelineConfig parse_pipeline_config(std::string_view json_text,
                                     const std::string& base_dir) {
  const json j = parse_json(json_text, "pipeline config");
  const std::string where = "config";
  reject_unknown(j,
                 {"input", "columns", "delimiter", "category_delimiter", "scheme",
                  "scheme_file", "aggregate", "interactions", "ridge", "tol",
                  "max_iter", "clip", "seed", "out", "balance_families",
                  "single_category_only"},
                 where);
  PipelineConfig c;
  if (!j.contains("input")) throw DataError("config: 'input' is required");
  c.input = resolve(base_dir, get<std::string>(j, "input", where));

  if (j.contains("columns")) {
    const auto& cols = j["columns"];
    reject_unknown(cols, {"id", "year", "citations", "categories", "covariates"},
                   "config.columns");
    if (cols.contains("id")) c.schema.id = get<std::string>(cols, "id", "columns");
    if (cols.contains("year")) c.schema.year = get<std::string>(cols, "year", "columns");
    if (cols.contains("citations"))
      c.schema.citations = get<std::string>(cols, "citations", "columns");
    if (cols.contains("categories"))
      c.schema.categories = get<std::string>(cols, "categories", "columns");
    if (cols.contains("covariates")) {
      const auto& cov = cols["covariates"];
      if (!cov.is_object()) throw DataError("config.columns.covariates must be an object");
      c.schema.covariates.clear();
      for (const auto& [key, value] : cov.items()) {
        if (!value.is_string())
          throw DataError("config.columns.covariates." + key + " must be a string");
        c.schema.covariates[covariate_or_throw(key)] = value.get<std::string>();
      }
    }
  }
  if (j.contains("delimiter"))
    c.schema.delimiter = single_char(get<std::string>(j, "delimiter", where), "delimiter");
  if (j.contains("category_delimiter"))
    c.schema.category_delimiter = single_char(
        get<std::string>(j, "category_delimiter", where), "category_delimiter");
  if (j.contains("scheme"))
    c.scheme = get<std::vector<std::string>>(j, "scheme", where);
  if (j.contains("scheme_file"))
    c.scheme_path = resolve(base_dir, get<std::string>(j, "scheme_file", where));
  if (!c.scheme.empty() && !c.scheme_path.empty())
    throw DataError("config: give either 'scheme' or 'scheme_file', not both");
  if (j.contains("aggregate"))
    c.aggregate_path = resolve(base_dir, get<std::string>(j, "aggregate", where));

  if (j.contains("interactions")) {
    const auto& inter = j["interactions"];
    if (inter.is_string()) {
      const auto mode = inter.get<std::string>();
      if (mode == "all_pairs")
        c.interactions.mode = InteractionPolicy::Mode::kAllMainPairs;
      else if (mode == "none")
        c.interactions.mode = InteractionPolicy::Mode::kNone;
      else
        throw DataError("config.interactions: expected 'all_pairs', 'none' or a list");
    } else if (inter.is_array()) {
      c.interactions.mode = InteractionPolicy::Mode::kExplicit;
      for (const auto& pair : inter) {
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() ||
            !pair[1].is_string())
          throw DataError("config.interactions: each entry must be [name, name]");
        c.interactions.pairs.emplace_back(pair[0].get<std::string>(),
                                          pair[1].get<std::string>());
      }
    } else {
      throw DataError("config.interactions: expected a string or a list");
    }
  }
  if (j.contains("ridge")) c.fit.ridge = get<double>(j, "ridge", where);
  if (j.contains("tol")) c.fit.tol = get<double>(j, "tol", where);
  if (j.contains("max_iter")) c.fit.max_iter = get<int>(j, "max_iter", where);
  if (c.fit.ridge < 0 || !(c.fit.tol > 0) || c.fit.max_iter < 1)
    throw DataError("config: need ridge >= 0, tol > 0, max_iter >= 1");
  if (j.contains("clip")) {
    const auto& clip = j["clip"];
    reject_unknown(clip, {"lo", "hi"}, "config.clip");
    if (clip.contains("lo")) c.clip.lo = get<double>(clip, "lo", "clip");
    if (clip.contains("hi")) c.clip.hi = get<double>(clip, "hi", "clip");
  }
  if (!(c.clip.lo > 0.0 && c.clip.lo < c.clip.hi && c.clip.hi < 1.0))
    throw DataError("config.clip: need 0 < lo < hi < 1");
  if (j.contains("seed")) c.seed = get<std::uint64_t>(j, "seed", where);
  if (j.contains("out")) c.out_dir = resolve(base_dir, get<std::string>(j, "out", where));
  if (j.contains("balance_families")) {
    const auto& fam = j["balance_families"];
    if (!fam.is_object()) throw DataError("config.balance_families must be an object");
    for (const auto& [key, value] : fam.items()) {
      if (!value.is_string())
        throw DataError("config.balance_families." + key + " must be a string");
      c.families[covariate_or_throw(key)] = family_or_throw(value.get<std::string>());
    }
  }
  if (j.contains("single_category_only"))
    c.single_category_only = get<bool>(j, "single_category_only", where);
  return c;
}

PipelineConfig load_pipeline_config(const std::string& path) {
  const auto dir = fs::path(path).parent_path();
  return parse_pipeline_config(read_file(path), dir.empty() ? "." : dir.string());
}

std::string canonical_json(const PipelineConfig& c) {
  json j;
  j["input"] = c.input;
  json cols;
  cols["id"] = c.schema.id;
  cols["year"] = c.schema.year;
  cols["citations"] = c.schema.citations;
  cols["categories"] = c.schema.categories;
  json cov = json::object();
  for (const auto& [k, v] : c.schema.covariates) cov[std::string(info(k).key)] = v;
  cols["covariates"] = cov;
  j["columns"] = cols;
  j["delimiter"] = std::string(1, c.schema.delimiter);
  j["category_delimiter"] = std::string(1, c.schema.category_delimiter);
  j["scheme"] = c.scheme;
  j["scheme_file"] = c.scheme_path;
  j["aggregate"] = c.aggregate_path;
  switch (c.interactions.mode) {
    case InteractionPolicy::Mode::kAllMainPairs: j["interactions"] = "all_pairs"; break;
    case InteractionPolicy::Mode::kNone: j["interactions"] = "none"; break;
    case InteractionPolicy::Mode::kExplicit: {
      json pairs = json::array();
      for (const auto& [a, b] : c.interactions.pairs) pairs.push_back({a, b});
      j["interactions"] = pairs;
      break;
    }
  }
  j["ridge"] = c.fit.ridge;
  j["tol"] = c.fit.tol;
  j["max_iter"] = c.fit.max_iter;
  j["clip"] = {{"lo", c.clip.lo}, {"hi", c.clip.hi}};
  j["seed"] = c.seed;
  j["out"] = c.out_dir;
  json fam = json::object();
  for (const auto& [k, f] : c.families) fam[std::string(info(k).key)] = std::string(to_string(f));
  j["balance_families"] = fam;
  j["single_category_only"] = c.single_category_only;
  return j.dump();
}

GeneratorConfig parse_generator_config(std::string_view json_text) {
  const json j = parse_json(json_text, "generator config");
  const std::string where = "generator";
  reject_unknown(j, {"mode", "n", "categories", "covariates", "assignment", "outcome"},
                 where);
  const std::string mode = j.value("mode", std::string("standard"));
  if (mode == "ten_papers") {
    GeneratorConfig c = GeneratorConfig::ten_papers();
    if (j.contains("categories"))
      c.categories = get<std::vector<std::string>>(j, "categories", where);
    c.validate();
    return c;
  }
  if (mode != "standard") throw DataError("generator.mode: expected 'standard' or 'ten_papers'");

  GeneratorConfig c;
  c.n = get<std::size_t>(j, "n", where);
  c.categories = get<std::vector<std::string>>(j, "categories", where);
  const auto k = static_cast<Eigen::Index>(c.categories.size());
  if (!j.contains("covariates") || !j["covariates"].is_array())
    throw DataError("generator.covariates must be a list");
  std::vector<std::string> names;
  for (const auto& spec : j["covariates"]) {
    reject_unknown(spec, {"name", "distribution", "mean", "dispersion", "offset", "missing_rate"},
                   "generator.covariates[]");
    CovariateSpec s;
    const auto name = get<std::string>(spec, "name", "covariate");
    s.covariate = covariate_or_throw(name);
    s.distribution = distribution_or_throw(get<std::string>(spec, "distribution", name));
    s.mean = get<double>(spec, "mean", name);
    s.dispersion = spec.value("dispersion", 0.0);
    s.offset = spec.value("offset", 0.0);
    s.missing_rate = spec.value("missing_rate", 0.0);
    c.covariates.push_back(s);
    names.push_back(name);
  }
  const auto jn = static_cast<Eigen::Index>(c.covariates.size());
  auto index_of = [&](const std::string& name) {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return static_cast<Eigen::Index>(i);
    throw DataError("generator: coefficient for unlisted covariate '" + name + "'");
  };

  c.assignment_intercepts = Eigen::VectorXd::Zero(k);
  c.assignment_coefficients = Eigen::MatrixXd::Zero(k, jn);
  if (j.contains("assignment")) {
    const auto& a = j["assignment"];
    reject_unknown(a, {"intercepts", "coefficients"}, "generator.assignment");
    if (a.contains("intercepts"))
      c.assignment_intercepts = to_vector(get<std::vector<double>>(a, "intercepts", "assignment"));
    if (a.contains("coefficients")) {
      for (const auto& [name, vals] : a["coefficients"].items()) {
        const auto v = vals.get<std::vector<double>>();
        if (static_cast<Eigen::Index>(v.size()) != k)
          throw DataError("generator.assignment.coefficients." + name + ": need K values");
        c.assignment_coefficients.col(index_of(name)) = to_vector(v);
      }
    }
  }
  c.outcome_base = Eigen::VectorXd::Constant(k, std::log(30.0));
  c.outcome_coefficients = Eigen::VectorXd::Zero(jn);
  if (j.contains("outcome")) {
    const auto& o = j["outcome"];
    reject_unknown(o, {"base", "coefficients", "dispersion"}, "generator.outcome");
    if (o.contains("base"))
      c.outcome_base = to_vector(get<std::vector<double>>(o, "base", "outcome"));
    if (o.contains("coefficients"))
      for (const auto& [name, val] : o["coefficients"].items())
        c.outcome_coefficients[index_of(name)] = val.get<double>();
    if (o.contains("dispersion")) c.outcome_dispersion = get<double>(o, "dispersion", "outcome");
  }
  c.validate();
  return c;
}

GeneratorConfig load_generator_config(const std::string& path) {
  return parse_generator_config(read_file(path));
}

std::string canonical_json(const GeneratorConfig& c) {
  json j;
  j["categories"] = c.categories;
  if (c.mode == GeneratorConfig::Mode::kTenPapers) {
    j["mode"] = "ten_papers";
    return j.dump();
  }
  j["mode"] = "standard";
  j["n"] = c.n;
  json covs = json::array();
  json assign_coef = json::object();
  json outcome_coef = json::object();
  for (std::size_t i = 0; i < c.covariates.size(); ++i) {
    const auto& s = c.covariates[i];
    const std::string name(info(s.covariate).key);
    covs.push_back({{"name", name},
                    {"distribution", std::string(to_string(s.distribution))},
                    {"mean", s.mean},
                    {"dispersion", s.dispersion},
                    {"offset", s.offset},
                    {"missing_rate", s.missing_rate}});
    assign_coef[name] =
        from_vector(c.assignment_coefficients.col(static_cast<Eigen::Index>(i)));
    outcome_coef[name] = c.outcome_coefficients[static_cast<Eigen::Index>(i)];
  }
  j["covariates"] = covs;
  j["assignment"] = {{"intercepts", from_vector(c.assignment_intercepts)},
                     {"coefficients", assign_coef}};
  j["outcome"] = {{"base", from_vector(c.outcome_base)},
                  {"coefficients", outcome_coef},
                  {"dispersion", c.outcome_dispersion}};
  return j.dump();
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace ipwkit
