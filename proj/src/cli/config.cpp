#include "manibo/cli/config.hpp"

#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "manibo/error.hpp"
#include "manibo/trace_io.hpp"

namespace manibo::cli {
namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& expected) {
  throw Error(ErrorCode::Config,
              "invalid value '" + value + "' for " + key + " (expected " + expected + ")");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(trim(item));
  return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& raw, const char* expected) {
  const std::string value = trim(raw);
  T out{};
  const auto* first = value.data();
  const auto* last = first + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (value.empty() || ec != std::errc() || ptr != last) bad_value(key, raw, expected);
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(out)) bad_value(key, raw, expected);
  }
  return out;
}

int parse_int(const std::string& key, const std::string& v) {
  return parse_number<int>(key, v, "an integer");
}
double parse_double(const std::string& key, const std::string& v) {
  return parse_number<double>(key, v, "a finite number");
}
std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  return parse_number<std::uint64_t>(key, v, "a non-negative integer");
}

bool parse_bool(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, raw, "true or false");
}

Experiment parse_experiment(const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "frechet-sphere") return Experiment::FrechetSphere;
  if (v == "grassmann-approx") return Experiment::GrassmannApprox;
  if (v == "spd-regression") return Experiment::SpdRegression;
  if (v == "custom") return Experiment::Custom;
  bad_value("experiment", raw,
            "frechet-sphere, grassmann-approx, spd-regression or custom");
}

std::string level_name(log::Level l) {
  switch (l) {
    case log::Level::Debug: return "debug";
    case log::Level::Info: return "info";
    case log::Level::Warn: return "warn";
    case log::Level::Off: return "off";
  }
  return "warn";
}

log::Level parse_level(const std::string& raw) {
  const std::string v = trim(raw);
  for (auto l : {log::Level::Debug, log::Level::Info, log::Level::Warn, log::Level::Off}) {
    if (v == level_name(l)) return l;
  }
  bad_value("log-level", raw, "debug, info, warn or off");
}

template <class T>
std::string show(const std::optional<T>& v) {
  if (!v) return "";
  if constexpr (std::is_floating_point_v<T>) return format_double(*v);
  else return std::to_string(*v);
}

using Cfg = ExperimentConfig;

std::vector<ConfigField> make_fields() {
  std::vector<ConfigField> f;
  auto add = [&](std::string section, std::string key, std::string help,
                 std::function<void(Cfg&, const std::string&)> set,
                 std::function<std::string(const Cfg&)> get, bool is_flag = false) {
    f.push_back({std::move(section), std::move(key), std::move(help), is_flag,
                 std::move(set), std::move(get)});
  };
  auto num = [](double v) { return format_double(v); };

  // [run]
  add("run", "experiment", "frechet-sphere | grassmann-approx | spd-regression | custom",
      [](Cfg& c, const std::string& v) { c.experiment = parse_experiment(v); },
      [](const Cfg& c) { return to_string(c.experiment); });
  add("run", "seed", "master seed (required unless seeds is given)",
      [](Cfg& c, const std::string& v) { c.seed = parse_u64("seed", v); },
      [](const Cfg& c) { return show(c.seed); });
  add("run", "seeds", "comma-separated seeds; one output subdirectory per seed",
      [](Cfg& c, const std::string& v) {
        c.seeds.clear();
        for (const auto& s : split(v, ',')) c.seeds.push_back(parse_u64("seeds", s));
      },
      [](const Cfg& c) {
        std::string out;
        for (auto s : c.seeds) out += (out.empty() ? "" : ",") + std::to_string(s);
        return out;
      });
  add("run", "out", "output directory (MANIBO_OUT overrides)",
      [](Cfg& c, const std::string& v) { c.out = trim(v); },
      [](const Cfg& c) { return c.out; });
  add("run", "timing", "fill the wall_ms CSV column (breaks byte-identical reruns)",
      [](Cfg& c, const std::string& v) { c.timing = parse_bool("timing", v); },
      [](const Cfg& c) { return std::string(c.timing ? "true" : "false"); }, true);
  add("run", "log-level", "debug | info | warn | off",
      [](Cfg& c, const std::string& v) { c.log_level = parse_level(v); },
      [](const Cfg& c) { return level_name(c.log_level); });
  add("run", "baselines", "comma-separated subset of gd, nelder-mead (or none)",
      [](Cfg& c, const std::string& v) {
        c.gd = c.nelder_mead = false;
        for (const auto& b : split(v, ',')) {
          if (b == "gd") c.gd = true;
          else if (b == "nelder-mead") c.nelder_mead = true;
          else if (b != "none" && !b.empty()) bad_value("baselines", v, "gd, nelder-mead or none");
        }
      },
      [](const Cfg& c) {
        std::string out = c.gd ? "gd" : "";
        if (c.nelder_mead) out += out.empty() ? "nelder-mead" : ",nelder-mead";
        return out.empty() ? std::string("none") : out;
      });

  // [bo]
  add("bo", "init", "initial design size k",
      [](Cfg& c, const std::string& v) { c.init = parse_int("init", v); },
      [](const Cfg& c) { return show(c.init); });
  add("bo", "iters", "number of BO iterations T",
      [](Cfg& c, const std::string& v) { c.iters = parse_int("iters", v); },
      [](const Cfg& c) { return show(c.iters); });
  add("bo", "refit-every", "hyperparameter refit cadence (0 = never)",
      [](Cfg& c, const std::string& v) { c.refit_every = parse_int("refit-every", v); },
      [](const Cfg& c) { return std::to_string(c.refit_every); });
  add("bo", "kernel", "auto (median heuristic + fitting) | fixed",
      [](Cfg& c, const std::string& v) {
        const std::string t = trim(v);
        if (t != "auto" && t != "fixed") bad_value("kernel", v, "auto or fixed");
        c.fixed_kernel = t == "fixed";
      },
      [](const Cfg& c) { return std::string(c.fixed_kernel ? "fixed" : "auto"); });
  add("bo", "lengthscale", "kernel lengthscale when kernel = fixed",
      [](Cfg& c, const std::string& v) { c.lengthscale = parse_double("lengthscale", v); },
      [num](const Cfg& c) { return num(c.lengthscale); });
  add("bo", "amplitude", "kernel amplitude sigma_f^2 when kernel = fixed",
      [](Cfg& c, const std::string& v) { c.amplitude = parse_double("amplitude", v); },
      [num](const Cfg& c) { return num(c.amplitude); });
  add("bo", "noise", "kernel noise sigma_n^2 when kernel = fixed",
      [](Cfg& c, const std::string& v) { c.noise = parse_double("noise", v); },
      [num](const Cfg& c) { return num(c.noise); });

  // [ascent]
  add("ascent", "ascent-step", "initial ascent step (default 0.1 x lengthscale)",
      [](Cfg& c, const std::string& v) {
        if (trim(v) == "auto") c.ascent_step.reset();
        else c.ascent_step = parse_double("ascent-step", v);
      },
      [](const Cfg& c) { return c.ascent_step ? show(c.ascent_step) : std::string("auto"); });
  add("ascent", "ascent-max-steps", "ascent iterations per start",
      [](Cfg& c, const std::string& v) { c.ascent_max_steps = parse_int("ascent-max-steps", v); },
      [](const Cfg& c) { return std::to_string(c.ascent_max_steps); });
  add("ascent", "ascent-starts", "multistart count",
      [](Cfg& c, const std::string& v) { c.ascent_starts = parse_int("ascent-starts", v); },
      [](const Cfg& c) { return std::to_string(c.ascent_starts); });
  add("ascent", "grad-tol", "stop when the projected gradient is smaller",
      [](Cfg& c, const std::string& v) { c.grad_tol = parse_double("grad-tol", v); },
      [num](const Cfg& c) { return num(c.grad_tol); });

  // [problem]
  add("problem", "points", "frechet-sphere: number of data points",
      [](Cfg& c, const std::string& v) { c.points = parse_int("points", v); },
      [](const Cfg& c) { return std::to_string(c.points); });
  add("problem", "latitude", "frechet-sphere: height z of the data circle",
      [](Cfg& c, const std::string& v) { c.latitude = parse_double("latitude", v); },
      [num](const Cfg& c) { return num(c.latitude); });
  add("problem", "rows", "grassmann-approx: rows n of F",
      [](Cfg& c, const std::string& v) { c.rows = parse_int("rows", v); },
      [](const Cfg& c) { return std::to_string(c.rows); });
  add("problem", "cols", "grassmann-approx: columns m of F",
      [](Cfg& c, const std::string& v) { c.cols = parse_int("cols", v); },
      [](const Cfg& c) { return std::to_string(c.cols); });
  add("problem", "rank", "grassmann-approx: subspace dimension p",
      [](Cfg& c, const std::string& v) { c.rank = parse_int("rank", v); },
      [](const Cfg& c) { return std::to_string(c.rank); });
  add("problem", "design", "grassmann-approx initial design: random | svd-shift",
      [](Cfg& c, const std::string& v) {
        const std::string t = trim(v);
        if (t != "random" && t != "svd-shift") bad_value("design", v, "random or svd-shift");
        c.design = t;
      },
      [](const Cfg& c) { return c.design; });
  add("problem", "locations", "spd-regression: number of covariate locations",
      [](Cfg& c, const std::string& v) { c.locations = parse_int("locations", v); },
      [](const Cfg& c) { return std::to_string(c.locations); });
  add("problem", "data-noise", "spd-regression: noise level of the synthetic tensors",
      [](Cfg& c, const std::string& v) { c.data_noise = parse_double("data-noise", v); },
      [num](const Cfg& c) { return num(c.data_noise); });
  add("problem", "data-seed", "seed of the generated problem data",
      [](Cfg& c, const std::string& v) { c.data_seed = parse_u64("data-seed", v); },
      [](const Cfg& c) { return std::to_string(c.data_seed); });
  add("problem", "bandwidth", "spd-regression: kernel bandwidth h",
      [](Cfg& c, const std::string& v) { c.bandwidth = parse_double("bandwidth", v); },
      [num](const Cfg& c) { return num(c.bandwidth); });
  add("problem", "query", "spd-regression: covariate z at which to estimate",
      [](Cfg& c, const std::string& v) { c.query = parse_double("query", v); },
      [num](const Cfg& c) { return num(c.query); });
  add("problem", "manifold", "custom: sphere:N | grassmann:P,N | spd:P",
      [](Cfg& c, const std::string& v) { c.manifold = trim(v); },
      [](const Cfg& c) { return c.manifold; });

  // [baselines]
  add("baselines", "gd-step", "gradient descent initial step",
      [](Cfg& c, const std::string& v) { c.gd_step = parse_double("gd-step", v); },
      [num](const Cfg& c) { return num(c.gd_step); });
  add("baselines", "gd-budget", "gradient descent cost budget (default iters)",
      [](Cfg& c, const std::string& v) { c.gd_budget = parse_int("gd-budget", v); },
      [](const Cfg& c) { return show(c.gd_budget); });
  add("baselines", "nm-max-evals", "Nelder-Mead evaluation budget (default init + iters)",
      [](Cfg& c, const std::string& v) { c.nm_max_evals = parse_int("nm-max-evals", v); },
      [](const Cfg& c) { return show(c.nm_max_evals); });
  add("baselines", "nm-size", "Nelder-Mead initial simplex edge",
      [](Cfg& c, const std::string& v) { c.nm_size = parse_double("nm-size", v); },
      [num](const Cfg& c) { return num(c.nm_size); });
  return f;
}

}  // namespace

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::FrechetSphere: return "frechet-sphere";
    case Experiment::GrassmannApprox: return "grassmann-approx";
    case Experiment::SpdRegression: return "spd-regression";
    case Experiment::Custom: return "custom";
  }
  return "unknown";
}

const std::vector<ConfigField>& config_fields() {
  static const std::vector<ConfigField> fields = make_fields();
  return fields;
}

void apply_setting(ExperimentConfig& config, const std::string& key,
                   const std::string& value) {
  for (const auto& f : config_fields()) {
    if (f.key == key) {
      f.set(config, value);
      return;
    }
  }
  throw Error(ErrorCode::Config, "unknown key '" + key + "'");
}

void apply_config_file(ExperimentConfig& config, const std::string& path) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(path, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::Config, "cannot read config: " + std::string(e.what()));
  }
  std::set<std::string> sections;
  for (const auto& f : config_fields()) sections.insert(f.section);

  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw Error(ErrorCode::Config, "key '" + section + "' outside a section in " + path);
    }
    if (!sections.count(section)) {
      throw Error(ErrorCode::Config, "unknown section [" + section + "] in " + path);
    }
    for (const auto& [key, node] : body) {
      const auto it = std::find_if(config_fields().begin(), config_fields().end(),
                                   [&](const ConfigField& f) { return f.key == key; });
      if (it == config_fields().end()) {
        throw Error(ErrorCode::Config,
                    "unknown key '" + key + "' in [" + section + "] of " + path);
      }
      if (it->section != section) {
        throw Error(ErrorCode::Config, "key '" + key + "' belongs in [" + it->section +
                                           "], found in [" + section + "]");
      }
      it->set(config, node.get_value<std::string>());
    }
  }
}

void resolve(ExperimentConfig& c) {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::Config, msg); };
  if (!c.seed && c.seeds.empty()) fail("a seed is required (seed or seeds)");

  const bool spd = c.experiment == Experiment::SpdRegression;
  const bool sphere = c.experiment == Experiment::FrechetSphere ||
                      c.experiment == Experiment::Custom;
  if (!c.init) c.init = spd ? 50 : 5;
  if (!c.iters) c.iters = sphere ? 25 : 30;
  if (!c.gd_budget) c.gd_budget = *c.iters;
  if (!c.nm_max_evals) c.nm_max_evals = *c.init + *c.iters;

  if (*c.init < 1) fail("init must be >= 1");
  if (*c.iters < 0) fail("iters must be >= 0");
  if (c.refit_every < 0) fail("refit-every must be >= 0");
  if (c.fixed_kernel &&
      !(c.lengthscale > 0 && c.amplitude > 0 && c.noise >= 0)) {
    fail("fixed kernel needs lengthscale > 0, amplitude > 0, noise >= 0");
  }
  if (c.ascent_step && !(*c.ascent_step > 0)) fail("ascent-step must be positive");
  if (c.ascent_max_steps < 1) fail("ascent-max-steps must be >= 1");
  if (c.ascent_starts < 1) fail("ascent-starts must be >= 1");
  if (!(c.grad_tol >= 0)) fail("grad-tol must be >= 0");
  if (c.points < 1) fail("points must be >= 1");
  if (!(std::abs(c.latitude) < 1)) fail("latitude must lie in (-1, 1)");
  if (c.rank < 1 || c.rank >= c.rows || c.rank >= c.cols) {
    fail("grassmann-approx needs 1 <= rank < rows and rank < cols");
  }
  if (c.rows > c.cols) fail("grassmann-approx needs rows <= cols for a full-rank F");
  if (c.locations < 1) fail("locations must be >= 1");
  if (!(c.data_noise >= 0)) fail("data-noise must be >= 0");
  if (!(c.bandwidth > 0)) fail("bandwidth must be positive");
  if (!(c.gd_step > 0)) fail("gd-step must be positive");
  if (*c.gd_budget < 1) fail("gd-budget must be >= 1");
  if (*c.nm_max_evals < 1) fail("nm-max-evals must be >= 1");
  if (!(c.nm_size > 0)) fail("nm-size must be positive");
  if (c.gd && c.experiment == Experiment::GrassmannApprox) {
    fail("baseline gd needs an analytic gradient; grassmann-approx has none");
  }
  if (c.experiment == Experiment::Custom) parse_manifold(c.manifold);
}

namespace {
[[noreturn]] void bad_manifold(const std::string& spec) {
  throw Error(ErrorCode::Config,
              "manifold must be sphere:N, grassmann:P,N or spd:P, got '" + spec + "'");
}
}  // namespace

ManifoldKind parse_manifold(const std::string& spec) {
  auto fail = [&] { bad_manifold(spec); };
  const auto colon = spec.find(':');
  if (colon == std::string::npos) fail();
  const std::string name = trim(spec.substr(0, colon));
  const auto args = split(spec.substr(colon + 1), ',');
  std::vector<int> dims;
  try {
    for (const auto& a : args) dims.push_back(parse_int("manifold", a));
    if (name == "sphere" && dims.size() == 1) return ManifoldKind::sphere(dims[0]);
    if (name == "grassmann" && dims.size() == 2) return ManifoldKind::grassmann(dims[0], dims[1]);
    if (name == "spd" && dims.size() == 1) return ManifoldKind::spd(dims[0]);
  } catch (const Error&) {
  }
  bad_manifold(spec);
}

std::vector<std::uint64_t> run_seeds(const ExperimentConfig& config) {
  if (!config.seeds.empty()) return config.seeds;
  if (config.seed) return {*config.seed};
  return {};
}

std::string to_ini(const ExperimentConfig& config) {
  std::ostringstream os;
  std::string section;
  for (const auto& f : config_fields()) {
    if (f.section != section) {
      if (!section.empty()) os << '\n';
      section = f.section;
      os << '[' << section << "]\n";
    }
    const std::string v = f.get(config);
    if (v.empty()) os << "; " << f.key << " unset\n";
    else os << f.key << " = " << v << '\n';
  }
  return os.str();
}

}  // namespace manibo::cli
