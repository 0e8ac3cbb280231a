#include "gfl/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <tuple>

#include "json.hpp"

#include "gfl/errors.hpp"

namespace gfl {

using nlohmann::json;

namespace {

const std::vector<std::pair<ExperimentKind, std::string>>& experiment_names() {
  static const std::vector<std::pair<ExperimentKind, std::string>> names = {
      {ExperimentKind::Poly1d, "poly1d"},   {ExperimentKind::Poly2d, "poly2d"},
      {ExperimentKind::Poly4d, "poly4d"},   {ExperimentKind::Flow, "flow"},
      {ExperimentKind::TheoremC, "theoremC"}, {ExperimentKind::Heat, "heat"},
      {ExperimentKind::BlackScholes, "black_scholes"}, {ExperimentKind::Mnist, "mnist"},
  };
  return names;
}

// GFL_MNIST_DIR overrides the subset shipped in the source tree.
std::filesystem::path mnist_data_dir() {
  if (const char* env = std::getenv("GFL_MNIST_DIR"); env != nullptr && *env != '\0') return env;
  return GFL_DATA_DIR "/mnist-subset";
}

std::vector<std::uint64_t> seed_range(std::uint64_t n) {
  std::vector<std::uint64_t> s(n);
  for (std::uint64_t i = 0; i < n; ++i) s[i] = i;
  return s;
}

[[noreturn]] void bad(const std::string& path, const std::string& why) {
  throw ConfigError(path + ": " + why);
}

double as_real(const json& v, const std::string& path) {
  if (!v.is_number()) bad(path, "expected a number, got " + v.dump());
  return v.get<double>();
}

double as_positive(const json& v, const std::string& path) {
  const double x = as_real(v, path);
  if (!(x > 0.0)) bad(path, "must be positive");
  return x;
}

std::uint64_t as_count(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    bad(path, "expected a nonnegative integer, got " + v.dump());
  }
  return v.get<std::uint64_t>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) bad(path, "expected a quoted string, got " + v.dump());
  return v.get<std::string>();
}

template <typename T, typename Fn>
std::vector<T> as_array(const json& v, const std::string& path, Fn&& element) {
  if (!v.is_array()) bad(path, "expected an array, got " + v.dump());
  std::vector<T> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(element(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

template <typename Fn>
auto wrap(const std::string& path, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    bad(path, e.what());
  }
}

using Setter = std::function<void(ExperimentConfig&, const json&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"experiment", [](ExperimentConfig& c, const json& v, const std::string& p) {
         if (parse_experiment(as_string(v, p)) != c.experiment) {
           bad(p, "names experiment '" + v.get<std::string>() + "' but '" +
                      experiment_name(c.experiment) + "' was requested");
         }
       }},
      {"widths", [](ExperimentConfig& c, const json& v, const std::string& p) {
         c.widths = as_array<std::size_t>(v, p, [](const json& e, const std::string& ep) {
           const auto w = as_count(e, ep);
           if (w == 0) bad(ep, "widths must be positive");
           return static_cast<std::size_t>(w);
         });
       }},
      {"activation", [](ExperimentConfig& c, const json& v, const std::string& p) {
         auto one = [](const json& e, const std::string& ep) {
           return wrap(ep, [&] { return Activation::parse(as_string(e, ep)); });
         };
         c.activations = v.is_array() ? as_array<Activation>(v, p, one) : std::vector<Activation>{one(v, p)};
       }},
      {"loss", [](ExperimentConfig& c, const json& v, const std::string& p) {
         c.loss = wrap(p, [&] { return LossKind::parse(as_string(v, p)); });
       }},
      {"optimizer", [](ExperimentConfig& c, const json& v, const std::string& p) {
         const auto name = as_string(v, p);
         const double lr = std::visit([](const auto& k) { return k.lr; }, c.optimizer);
         if (name == "sgd") {
           c.optimizer = SgdConfig{lr};
         } else if (name == "adam") {
           if (!std::holds_alternative<AdamConfig>(c.optimizer)) c.optimizer = AdamConfig{lr};
         } else {
           bad(p, "expected \"sgd\" or \"adam\", got \"" + name + "\"");
         }
       }},
      {"lr", [](ExperimentConfig& c, const json& v, const std::string& p) {
         const double lr = as_positive(v, p);
         std::visit([lr](auto& k) { k.lr = lr; }, c.optimizer);
       }},
      {"beta1", [](ExperimentConfig& c, const json& v, const std::string& p) {
         auto* a = std::get_if<AdamConfig>(&c.optimizer);
         if (a == nullptr) bad(p, "only applies to optimizer = \"adam\"");
         a->beta1 = as_real(v, p);
       }},
      {"beta2", [](ExperimentConfig& c, const json& v, const std::string& p) {
         auto* a = std::get_if<AdamConfig>(&c.optimizer);
         if (a == nullptr) bad(p, "only applies to optimizer = \"adam\"");
         a->beta2 = as_real(v, p);
       }},
      {"eps", [](ExperimentConfig& c, const json& v, const std::string& p) {
         auto* a = std::get_if<AdamConfig>(&c.optimizer);
         if (a == nullptr) bad(p, "only applies to optimizer = \"adam\"");
         a->eps = as_positive(v, p);
       }},
      {"steps", [](ExperimentConfig& c, const json& v, const std::string& p) { c.steps = as_count(v, p); }},
      {"batch", [](ExperimentConfig& c, const json& v, const std::string& p) { c.batch = as_count(v, p); }},
      {"dataset_size", [](ExperimentConfig& c, const json& v, const std::string& p) { c.dataset_size = as_count(v, p); }},
      {"seeds", [](ExperimentConfig& c, const json& v, const std::string& p) {
         // an integer n means seeds 0..n-1
         c.seeds = v.is_array() ? as_array<std::uint64_t>(v, p, as_count) : seed_range(as_count(v, p));
       }},
      {"ema_alpha", [](ExperimentConfig& c, const json& v, const std::string& p) { c.ema_alpha = as_real(v, p); }},
      {"log_every", [](ExperimentConfig& c, const json& v, const std::string& p) { c.log_every = as_count(v, p); }},
      {"workers", [](ExperimentConfig& c, const json& v, const std::string& p) { c.workers = as_count(v, p); }},
      {"output_dir", [](ExperimentConfig& c, const json& v, const std::string& p) { c.output_dir = as_string(v, p); }},
      {"target", [](ExperimentConfig& c, const json& v, const std::string& p) {
         c.target = v.is_array() ? as_array<std::string>(v, p, as_string) : std::vector<std::string>{as_string(v, p)};
       }},
      {"integrator", [](ExperimentConfig& c, const json& v, const std::string& p) { c.integrator = as_string(v, p); }},
      {"horizon", [](ExperimentConfig& c, const json& v, const std::string& p) { c.horizon = as_real(v, p); }},
      {"h", [](ExperimentConfig& c, const json& v, const std::string& p) { c.step = as_positive(v, p); }},
      {"rel_tol", [](ExperimentConfig& c, const json& v, const std::string& p) { c.rel_tol = as_positive(v, p); }},
      {"abs_tol", [](ExperimentConfig& c, const json& v, const std::string& p) { c.abs_tol = as_positive(v, p); }},
      {"h_init", [](ExperimentConfig& c, const json& v, const std::string& p) { c.h_init = as_positive(v, p); }},
      {"h_min", [](ExperimentConfig& c, const json& v, const std::string& p) { c.h_min = as_positive(v, p); }},
      {"h_max", [](ExperimentConfig& c, const json& v, const std::string& p) { c.h_max = as_positive(v, p); }},
      {"record_every", [](ExperimentConfig& c, const json& v, const std::string& p) { c.record_every = as_count(v, p); }},
      {"points", [](ExperimentConfig& c, const json& v, const std::string& p) { c.points = as_count(v, p); }},
      {"init", [](ExperimentConfig& c, const json& v, const std::string& p) { c.init = as_string(v, p); }},
      {"j", [](ExperimentConfig& c, const json& v, const std::string& p) { c.j = as_positive(v, p); }},
      {"grad_eps", [](ExperimentConfig& c, const json& v, const std::string& p) { c.grad_eps = as_positive(v, p); }},
      {"norm_growth_factor", [](ExperimentConfig& c, const json& v, const std::string& p) { c.norm_growth_factor = as_positive(v, p); }},
      {"tail_fraction", [](ExperimentConfig& c, const json& v, const std::string& p) { c.tail_fraction = as_positive(v, p); }},
      {"j_values", [](ExperimentConfig& c, const json& v, const std::string& p) {
         c.j_values = as_array<double>(v, p, as_positive);
       }},
      {"grid_points", [](ExperimentConfig& c, const json& v, const std::string& p) { c.grid_points = as_count(v, p); }},
      {"radius", [](ExperimentConfig& c, const json& v, const std::string& p) { c.radius = as_positive(v, p); }},
      {"pde", [](ExperimentConfig& c, const json& v, const std::string& p) {
         const auto name = as_string(v, p);
         const auto kind = name == "heat" ? ExperimentKind::Heat
                           : name == "black_scholes" ? ExperimentKind::BlackScholes
                                                     : ExperimentKind::Poly1d;
         if (kind == ExperimentKind::Poly1d) bad(p, "expected \"heat\" or \"black_scholes\"");
         if (kind != c.experiment) bad(p, "does not match the requested experiment");
       }},
      {"dim", [](ExperimentConfig& c, const json& v, const std::string& p) { c.dim = as_count(v, p); }},
      {"r", [](ExperimentConfig& c, const json& v, const std::string& p) { c.rate = as_real(v, p); }},
      {"c", [](ExperimentConfig& c, const json& v, const std::string& p) { c.carry = as_real(v, p); }},
      {"strike", [](ExperimentConfig& c, const json& v, const std::string& p) { c.strike = as_positive(v, p); }},
      {"sigma", [](ExperimentConfig& c, const json& v, const std::string& p) { c.sigma = as_array<double>(v, p, as_positive); }},
      {"box", [](ExperimentConfig& c, const json& v, const std::string& p) {
         c.box = as_array<std::pair<double, double>>(v, p, [](const json& e, const std::string& ep) {
           if (!e.is_array() || e.size() != 2) bad(ep, "expected [lo, hi]");
           const double lo = as_real(e[0], ep + "[0]");
           const double hi = as_real(e[1], ep + "[1]");
           if (!(lo < hi)) bad(ep, "needs lo < hi");
           return std::pair{lo, hi};
         });
       }},
      {"rounds", [](ExperimentConfig& c, const json& v, const std::string& p) { c.rounds = as_count(v, p); }},
      {"paths", [](ExperimentConfig& c, const json& v, const std::string& p) { c.paths = as_count(v, p); }},
      {"test_points", [](ExperimentConfig& c, const json& v, const std::string& p) { c.test_points = as_count(v, p); }},
      {"train_images", [](ExperimentConfig& c, const json& v, const std::string& p) { c.train_images = as_string(v, p); }},
      {"train_labels", [](ExperimentConfig& c, const json& v, const std::string& p) { c.train_labels = as_string(v, p); }},
      {"test_images", [](ExperimentConfig& c, const json& v, const std::string& p) { c.test_images = as_string(v, p); }},
      {"test_labels", [](ExperimentConfig& c, const json& v, const std::string& p) { c.test_labels = as_string(v, p); }},
      {"subsample", [](ExperimentConfig& c, const json& v, const std::string& p) { c.subsample = as_count(v, p); }},
      {"eval_every", [](ExperimentConfig& c, const json& v, const std::string& p) { c.eval_every = as_count(v, p); }},
  };
  return table;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Drops a trailing `# comment` that is not inside a string.
std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

}  // namespace

ExperimentKind parse_experiment(std::string_view name) {
  for (const auto& [k, n] : experiment_names()) {
    if (n == name) return k;
  }
  throw ConfigError("unknown experiment '" + std::string(name) +
                    "' (expected poly1d, poly2d, poly4d, flow, theoremC, heat, black_scholes or mnist)");
}

std::string experiment_name(ExperimentKind kind) {
  for (const auto& [k, n] : experiment_names()) {
    if (k == kind) return n;
  }
  return "unknown";
}

ExperimentConfig ExperimentConfig::with_defaults(ExperimentKind kind) {
  ExperimentConfig c;
  c.experiment = kind;
  c.loss = LossKind(LossTag::SquaredError);
  switch (kind) {
    case ExperimentKind::Poly1d:
    case ExperimentKind::Poly2d:
    case ExperimentKind::Poly4d: {
      const std::size_t d0 = kind == ExperimentKind::Poly1d ? 1 : kind == ExperimentKind::Poly2d ? 2 : 4;
      c.widths = d0 == 1 ? std::vector<std::size_t>{1, 10, 20, 10, 1}
                         : std::vector<std::size_t>{d0, 20, 40, 20, 1};
      c.activations = default_sweep_activations();
      c.optimizer = AdamConfig{0.005};
      c.steps = 20000;
      c.batch = 100;
      c.dataset_size = 10000;
      c.seeds = seed_range(20);
      c.log_every = 10;
      c.target = {reference_target(d0).to_string()};
      break;
    }
    case ExperimentKind::Flow:
      c.widths = {1, 4, 1};
      c.activations = {Activation(ActivationKind::Tanh)};
      c.target = {"x0^2"};
      c.horizon = 1000.0;
      c.integrator = "rosenbrock23";
      c.rel_tol = 1e-9;
      c.h_max = 100.0;
      c.points = 32;
      c.seeds = {0};
      c.record_every = 1;
      break;
    case ExperimentKind::TheoremC:
      c.activations = {Activation(ActivationKind::Tanh)};
      c.target = {"x0^2"};
      c.j_values = {10.0, 100.0, 1000.0};
      c.seeds = {0};
      break;
    case ExperimentKind::Heat:
    case ExperimentKind::BlackScholes:
      c.dim = 2;
      c.widths = {2, 32, 32, 32, 1};
      c.activations = {Activation(ActivationKind::Gelu)};
      c.optimizer = AdamConfig{0.005};
      c.steps = 5000;
      c.batch = 256;
      c.seeds = {0};
      c.log_every = 10;
      c.horizon = 1.0;
      c.test_points = kind == ExperimentKind::Heat ? 1024 : 256;
      c.eval_every = 1000;
      break;
    case ExperimentKind::Mnist:
      c.widths = {784, 64, 64, 10};
      c.activations = {Activation(ActivationKind::Gelu)};
      c.loss = LossKind(LossTag::CrossEntropySoftmax);
      c.optimizer = AdamConfig{0.001};
      c.steps = 3000;
      c.batch = 128;
      c.seeds = {0};
      c.log_every = 10;
      c.subsample = 2000;
      c.train_images = mnist_data_dir() / "train-images-idx3-ubyte";
      c.train_labels = mnist_data_dir() / "train-labels-idx1-ubyte";
      c.test_images = mnist_data_dir() / "t10k-images-idx3-ubyte";
      c.test_labels = mnist_data_dir() / "t10k-labels-idx1-ubyte";
      break;
  }
  c.output_dir = std::filesystem::path("runs") / experiment_name(kind);
  return c;
}

void ExperimentConfig::validate() const {
  const bool needs_net = experiment != ExperimentKind::TheoremC;
  if (needs_net && widths.size() < 2) bad("widths", "need at least input and output widths");
  if (activations.empty()) bad("activation", "at least one activation is required");
  if (seeds.empty()) bad("seeds", "at least one seed is required");
  if (!(ema_alpha > 0.0 && ema_alpha < 1.0)) bad("ema_alpha", "must lie in (0, 1)");
  if (log_every == 0) bad("log_every", "must be positive");
  switch (experiment) {
    case ExperimentKind::Poly1d:
    case ExperimentKind::Poly2d:
    case ExperimentKind::Poly4d:
      if (batch == 0) bad("batch", "must be positive");
      if (dataset_size < batch) bad("dataset_size", "must be at least batch");
      if (target.size() != widths.back()) bad("target", "needs one polynomial per output");
      break;
    case ExperimentKind::Flow:
      if (!(horizon > 0.0)) bad("horizon", "must be positive");
      if (points == 0) bad("points", "must be positive");
      if (record_every == 0) bad("record_every", "must be positive");
      if (integrator != "rkf45" && integrator != "rosenbrock23" && integrator != "rk4" && integrator != "euler") {
        bad("integrator", "expected \"rosenbrock23\", \"rkf45\", \"rk4\" or \"euler\"");
      }
      if (init != "builder" && init != "glorot" && init != "realizable") {
        bad("init", "expected \"builder\", \"glorot\" or \"realizable\"");
      }
      if (!(h_min <= h_init && h_init <= h_max)) bad("h_init", "needs h_min <= h_init <= h_max");
      if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) bad("tail_fraction", "must lie in (0, 1]");
      if (target.size() != widths.back()) bad("target", "needs one polynomial per output");
      break;
    case ExperimentKind::TheoremC:
      if (j_values.empty()) bad("j_values", "at least one scale is required");
      if (target.empty()) bad("target", "at least one polynomial is required");
      if (grid_points < 2) bad("grid_points", "must be at least 2");
      break;
    case ExperimentKind::Heat:
    case ExperimentKind::BlackScholes:
      if (dim == 0) bad("dim", "must be positive");
      if (widths.front() != dim || widths.back() != 1) bad("widths", "must start at dim and end at 1");
      if (batch == 0) bad("batch", "must be positive");
      if (!(horizon > 0.0)) bad("horizon", "must be positive");
      if (!box.empty() && box.size() != dim) bad("box", "needs one [lo, hi] pair per dimension");
      if (experiment == ExperimentKind::BlackScholes && !sigma.empty() && sigma.size() != dim) {
        bad("sigma", "needs one volatility per dimension");
      }
      if (rounds == 0 || paths == 0) bad("rounds", "rounds and paths must be positive");
      if (test_points == 0) bad("test_points", "must be positive");
      break;
    case ExperimentKind::Mnist:
      if (widths.front() != 784 || widths.back() != 10) bad("widths", "must start at 784 and end at 10");
      if (loss.tag != LossTag::CrossEntropySoftmax) bad("loss", "MNIST trains with cross_entropy");
      if (batch == 0) bad("batch", "must be positive");
      if (eval_every == 0) bad("eval_every", "must be positive");
      break;
  }
}

namespace {

json to_json_object(const ExperimentConfig& c) {
  json j;
  j["experiment"] = experiment_name(c.experiment);
  j["widths"] = c.widths;
  json acts = json::array();
  for (const auto& a : c.activations) acts.push_back(a.name());
  j["activation"] = acts;
  j["loss"] = c.loss.name();
  j["optimizer"] = optimizer_name(c.optimizer);
  std::visit([&j](const auto& k) { j["lr"] = k.lr; }, c.optimizer);
  if (const auto* a = std::get_if<AdamConfig>(&c.optimizer)) {
    j["beta1"] = a->beta1;
    j["beta2"] = a->beta2;
    j["eps"] = a->eps;
  }
  j["steps"] = c.steps;
  j["batch"] = c.batch;
  j["dataset_size"] = c.dataset_size;
  j["seeds"] = c.seeds;
  j["ema_alpha"] = c.ema_alpha;
  j["log_every"] = c.log_every;
  j["workers"] = c.workers;
  j["output_dir"] = c.output_dir.string();
  j["target"] = c.target;
  j["integrator"] = c.integrator;
  j["horizon"] = c.horizon;
  j["h"] = c.step;
  j["rel_tol"] = c.rel_tol;
  j["abs_tol"] = c.abs_tol;
  j["h_init"] = c.h_init;
  j["h_min"] = c.h_min;
  j["h_max"] = c.h_max;
  j["record_every"] = c.record_every;
  j["points"] = c.points;
  j["init"] = c.init;
  j["j"] = c.j;
  j["grad_eps"] = c.grad_eps;
  j["norm_growth_factor"] = c.norm_growth_factor;
  j["tail_fraction"] = c.tail_fraction;
  j["j_values"] = c.j_values;
  j["grid_points"] = c.grid_points;
  j["radius"] = c.radius;
  j["dim"] = c.dim;
  j["r"] = c.rate;
  j["c"] = c.carry;
  j["strike"] = c.strike;
  j["sigma"] = c.sigma;
  json box = json::array();
  for (const auto& [lo, hi] : c.box) box.push_back({lo, hi});
  j["box"] = box;
  j["rounds"] = c.rounds;
  j["paths"] = c.paths;
  j["test_points"] = c.test_points;
  j["train_images"] = c.train_images.string();
  j["train_labels"] = c.train_labels.string();
  j["test_images"] = c.test_images.string();
  j["test_labels"] = c.test_labels.string();
  j["subsample"] = c.subsample;
  j["eval_every"] = c.eval_every;
  return j;
}

}  // namespace

std::string ExperimentConfig::to_json() const { return to_json_object(*this).dump(2); }

std::string ExperimentConfig::to_text() const {
  std::ostringstream os;
  const json fields = to_json_object(*this);
  for (const auto& [key, value] : fields.items()) {
    if (key == "beta1" || key == "beta2" || key == "eps") continue;  // written after optimizer
    os << key << " = " << value.dump() << '\n';
    if (key == "optimizer" && std::holds_alternative<AdamConfig>(optimizer)) {
      const auto& a = std::get<AdamConfig>(optimizer);
      os << "beta1 = " << json(a.beta1).dump() << "\nbeta2 = " << json(a.beta2).dump()
         << "\neps = " << json(a.eps).dump() << '\n';
    }
  }
  return os.str();
}

ExperimentConfig parse_config(std::string_view text, ExperimentKind kind) {
  ExperimentConfig c = ExperimentConfig::with_defaults(kind);
  // optimizer must be applied before its hyperparameters, whatever the file order
  std::vector<std::tuple<std::string, json, std::string>> assignments;
  std::istringstream is{std::string(text)};
  std::string raw;
  std::size_t lineno = 0;
  std::map<std::string, std::size_t> seen;
  while (std::getline(is, raw)) {
    ++lineno;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno);
    if (line.front() == '[') throw ConfigError(where + ": tables are not supported; use flat keys");
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected `key = value`");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": missing key");
    if (!setters().contains(key)) throw ConfigError(where + ": " + key + ": unknown key");
    if (const auto it = seen.find(key); it != seen.end()) {
      throw ConfigError(where + ": " + key + ": already set on line " + std::to_string(it->second));
    }
    seen[key] = lineno;
    json parsed = json::parse(value, nullptr, false);
    if (parsed.is_discarded()) throw ConfigError(where + ": " + key + ": cannot parse value `" + value + "`");
    assignments.emplace_back(key, std::move(parsed), where);
  }
  std::stable_partition(assignments.begin(), assignments.end(),
                        [](const auto& a) { return std::get<0>(a) == "optimizer"; });
  for (const auto& [key, value, where] : assignments) {
    try {
      setters().at(key)(c, value, key);
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentKind kind) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str(), kind);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace gfl
