#include "paraqnd/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

namespace paraqnd {

namespace {

const std::vector<std::pair<Experiment, std::string>> kExperiments{
    {Experiment::qnd_protocol, "qnd-protocol"},
    {Experiment::povm_purity, "povm-purity"},
    {Experiment::gkp_generate, "gkp-generate"},
    {Experiment::opo_trajectories, "opo-trajectories"},
    {Experiment::validate, "validate"}};

const std::vector<std::pair<HamiltonianVariant, std::string>> kVariants{
    {HamiltonianVariant::effective, "effective"},
    {HamiltonianVariant::displaced, "displaced"},
    {HamiltonianVariant::lab, "lab"},
    {HamiltonianVariant::bogoliubov_form, "bogoliubov-form"}};

const char* kRequired =
    "required keys: experiment (qnd-protocol | povm-purity | gkp-generate | opo-trajectories | validate); "
    "system.Delta and system.g_tilde (or system.delta and system.r) for qnd-protocol, gkp-generate and "
    "opo-trajectories; system.kappa_a and system.kappa_b for opo-trajectories";

// Reads one JSON object; every key must be consumed before finish().
class Section {
 public:
  Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where("") + "must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  std::optional<Section> child(const std::string& key) {
    if (!has(key)) return std::nullopt;
    used_.insert(key);
    return Section(j_.at(key), where(key));
  }

  Section require_child(const std::string& key) {
    auto c = child(key);
    if (!c) throw ConfigError("missing required key " + where(key) + "; " + kRequired);
    return *c;
  }

  void number(const std::string& key, double& out) {
    if (!has(key)) return;
    const Json& v = take(key);
    if (!v.is_number()) throw ConfigError(where(key) + " must be a number");
    out = v.get<double>();
    if (!std::isfinite(out)) throw ConfigError(where(key) + " must be finite");
  }

  double require_number(const std::string& key) {
    if (!has(key)) throw ConfigError("missing required key " + where(key) + "; " + kRequired);
    double v = 0.0;
    number(key, v);
    return v;
  }

  template <class Int>
  void integer(const std::string& key, Int& out) {
    if (!has(key)) return;
    const Json& v = take(key);
    if (!v.is_number_integer()) throw ConfigError(where(key) + " must be an integer");
    const auto x = v.get<long long>();
    if (x < 0) throw ConfigError(where(key) + " must be non-negative");
    out = static_cast<Int>(x);
  }

  void boolean(const std::string& key, bool& out) {
    if (!has(key)) return;
    const Json& v = take(key);
    if (!v.is_boolean()) throw ConfigError(where(key) + " must be true or false");
    out = v.get<bool>();
  }

  void string(const std::string& key, std::string& out) {
    if (!has(key)) return;
    const Json& v = take(key);
    if (!v.is_string()) throw ConfigError(where(key) + " must be a string");
    out = v.get<std::string>();
  }

  void numbers(const std::string& key, std::vector<double>& out) {
    if (!has(key)) return;
    const Json& v = take(key);
    if (!v.is_array()) throw ConfigError(where(key) + " must be an array of numbers");
    out.clear();
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError(where(key) + " must be an array of numbers");
      out.push_back(e.get<double>());
    }
  }

  void integers(const std::string& key, std::vector<int>& out) {
    if (!has(key)) return;
    const Json& v = take(key);
    if (!v.is_array()) throw ConfigError(where(key) + " must be an array of integers");
    out.clear();
    for (const auto& e : v) {
      if (!e.is_number_integer()) throw ConfigError(where(key) + " must be an array of integers");
      out.push_back(e.get<int>());
    }
  }

  // A number or [re, im].
  bool complex(const std::string& key, Complex& out) {
    if (!has(key)) return false;
    const Json& v = take(key);
    if (v.is_number()) {
      out = Complex(v.get<double>(), 0.0);
    } else if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
      out = Complex(v[0].get<double>(), v[1].get<double>());
    } else {
      throw ConfigError(where(key) + " must be a number or [re, im]");
    }
    return true;
  }

  void finish() const {
    std::vector<std::string> unknown;
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) unknown.push_back(where(it.key()));
    if (unknown.empty()) return;
    std::string msg = "unknown key";
    msg += unknown.size() > 1 ? "s: " : ": ";
    for (std::size_t k = 0; k < unknown.size(); ++k) msg += (k ? ", " : "") + unknown[k];
    throw ConfigError(msg);
  }

  std::string where(const std::string& key) const {
    if (key.empty()) return path_.empty() ? "configuration " : path_ + " ";
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  const Json& take(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  const Json& j_;
  std::string path_;
  std::set<std::string> used_;
};

void positive(const Section& s, const std::string& key, double v) {
  if (!(v > 0.0)) throw ConfigError(s.where(key) + " must be positive");
}

void at_least(const Section& s, const std::string& key, Index v, Index lo) {
  if (v < lo) throw ConfigError(s.where(key) + " must be at least " + std::to_string(lo));
}

struct SystemInput {
  double Delta = 0.0, g_tilde = 0.0, kappa_a = 0.0, kappa_b = 0.0;
};

SystemInput read_system(Section& parent, bool with_losses) {
  Section s = parent.require_child("system");
  SystemInput out;
  const bool targets = s.has("Delta") || s.has("g_tilde");
  const bool mismatch = s.has("delta") || s.has("r");
  if (targets && mismatch) throw ConfigError("system: give either (Delta, g_tilde) or (delta, r), not both");
  if (mismatch) {
    const double delta = s.require_number("delta");
    const double r = s.require_number("r");
    if (r < 0.0) throw ConfigError("system.r must be non-negative");
    if (!(delta > r))
      throw ConfigError("system: delta = " + format_number(delta) + " must exceed r = " + format_number(r) +
                        " (the Bogoliubov transform needs delta > r >= 0)");
    const BogoliubovParams b = bogoliubov_params(delta, r);
    out.Delta = b.Delta;
    out.g_tilde = b.g_tilde;
  } else {
    out.Delta = s.require_number("Delta");
    out.g_tilde = s.require_number("g_tilde");
    positive(s, "Delta", out.Delta);
    if (out.g_tilde < 0.0) throw ConfigError("system.g_tilde must be non-negative");
  }
  if (with_losses) {
    out.kappa_a = s.require_number("kappa_a");
    out.kappa_b = s.require_number("kappa_b");
    if (out.kappa_a < 0.0) throw ConfigError("system.kappa_a must be non-negative");
    positive(s, "kappa_b", out.kappa_b);
  }
  s.finish();
  return out;
}

void read_hamiltonian(Section& s, HamiltonianVariant& out) {
  std::string name;
  s.string("hamiltonian", name);
  if (name.empty()) return;
  try {
    out = hamiltonian_from_name(name);
  } catch (const ConfigError& e) {
    throw ConfigError(s.where("hamiltonian") + ": " + e.what());
  }
}

void read_qnd(Section& root, QNDConfig& c) {
  const SystemInput sys = read_system(root, false);
  c.Delta = sys.Delta;
  c.g_tilde = sys.g_tilde;
  if (auto p = root.child("protocol")) {
    p->number("t", c.t);
    p->complex("alpha", c.alpha);
    p->number("w", c.w);
    read_hamiltonian(*p, c.hamiltonian);
    p->integer("bins", c.bins);
    positive(*p, "t", c.t);
    positive(*p, "w", c.w);
    at_least(*p, "bins", c.bins, 1);
    p->finish();
  }
  if (auto t = root.child("truncation")) {
    t->integer("n_signal", c.n_signal);
    t->integer("n_pump", c.n_pump);
    t->number("health_tolerance", c.health_tolerance);
    t->number("evolved_tolerance", c.evolved_tolerance);
    at_least(*t, "n_signal", c.n_signal, 2);
    at_least(*t, "n_pump", c.n_pump, 2);
    positive(*t, "health_tolerance", c.health_tolerance);
    positive(*t, "evolved_tolerance", c.evolved_tolerance);
    t->finish();
  }
  if (auto w = root.child("wigner")) {
    w->integer("points", c.wigner_points);
    w->number("extent", c.wigner_extent);
    positive(*w, "extent", c.wigner_extent);
    w->finish();
  }
}

void read_povm(Section& root, PovmConfig& c) {
  if (auto p = root.child("povm")) {
    p->number("d", c.d);
    p->numbers("widths", c.widths);
    p->integer("n_max", c.n_max);
    positive(*p, "d", c.d);
    if (c.widths.empty()) throw ConfigError("povm.widths must not be empty");
    for (double w : c.widths)
      if (!(w > 0.0)) throw ConfigError("povm.widths must be positive");
    at_least(*p, "n_max", c.n_max, 1);
    p->finish();
  }
}

void read_gkp(Section& root, GKPConfig& c) {
  const SystemInput sys = read_system(root, false);
  c.Delta = sys.Delta;
  c.g_tilde = sys.g_tilde;
  if (!(c.g_tilde > 0.0)) throw ConfigError("system.g_tilde must be positive");
  if (auto p = root.child("protocol")) {
    p->number("t", c.t);
    if (p->has("w") && p->has("squeezing_db"))
      throw ConfigError("protocol: give either w or squeezing_db, not both");
    p->number("w", c.w);
    if (p->has("squeezing_db")) {
      double db = 0.0;
      p->number("squeezing_db", db);
      if (!(db > 0.0)) throw ConfigError("protocol.squeezing_db must be positive");
      c.w = width_from_db(db);
    }
    p->number("A0", c.A0);
    p->number("epsilon", c.epsilon);
    p->number("phi", c.phi);
    p->boolean("zero_point_correction", c.zero_point_correction);
    if (c.t < 0.0) throw ConfigError("protocol.t must be positive (omit it for g_tilde t = sqrt(pi/2))");
    if (c.w < 0.0) throw ConfigError("protocol.w must be positive");
    if (c.A0 < 0.0) throw ConfigError("protocol.A0 must be positive");
    p->finish();
  }
  if (c.meter_amplitude() + c.epsilon < 0.0) throw ConfigError("protocol: A0 + epsilon must be non-negative");
  if (auto t = root.child("truncation")) {
    t->integer("n_signal", c.n_signal);
    t->number("health_tolerance", c.health_tolerance);
    at_least(*t, "n_signal", c.n_signal, 2);
    positive(*t, "health_tolerance", c.health_tolerance);
    t->finish();
  }
  if (auto g = root.child("grid")) {
    g->number("extent", c.grid_extent);
    g->number("dx", c.grid_dx);
    positive(*g, "extent", c.grid_extent);
    positive(*g, "dx", c.grid_dx);
    if (c.grid_dx >= c.grid_extent) throw ConfigError("grid.dx must be smaller than grid.extent");
    g->finish();
  }
  if (auto w = root.child("wigner")) {
    w->integer("points", c.wigner_points);
    w->number("extent", c.wigner_extent);
    w->integer("signal_stride", c.signal_wigner_stride);
    positive(*w, "extent", c.wigner_extent);
    at_least(*w, "signal_stride", c.signal_wigner_stride, 1);
    w->finish();
  }
}

void read_opo(Section& root, ExperimentConfig& e) {
  OPOConfig& c = e.opo;
  const SystemInput sys = read_system(root, true);
  c.Delta = sys.Delta;
  c.g_tilde = sys.g_tilde;
  c.kappa_a = sys.kappa_a;
  c.kappa_b = sys.kappa_b;
  if (auto t = root.child("trajectories")) {
    t->integer("count", c.trajectories);
    t->number("duration", c.duration);
    t->number("dt", c.dt);
    t->integer("record_every", c.record_every);
    t->integer("initial_N", c.initial_N);
    t->numbers("initial_weights", c.initial_weights);
    Complex pump;
    if (t->complex("initial_pump", pump)) c.initial_pump = pump;
    read_hamiltonian(*t, e.opo_hamiltonian);
    at_least(*t, "count", c.trajectories, 1);
    positive(*t, "duration", c.duration);
    positive(*t, "dt", c.dt);
    at_least(*t, "record_every", c.record_every, 1);
    for (double w : c.initial_weights)
      if (w < 0.0) throw ConfigError("trajectories.initial_weights must be non-negative");
    t->finish();
  }
  if (auto t = root.child("truncation")) {
    t->integer("n_blocks", c.n_blocks);
    t->integer("n_pump", c.n_pump);
    t->integer("n_signal", e.opo_n_signal);
    t->integer("transfer_every", c.transfer_every);
    t->number("health_tolerance", c.health_tolerance);
    at_least(*t, "n_blocks", c.n_blocks, 1);
    at_least(*t, "n_pump", c.n_pump, 4);
    at_least(*t, "n_signal", e.opo_n_signal, 2);
    at_least(*t, "transfer_every", c.transfer_every, 1);
    positive(*t, "health_tolerance", c.health_tolerance);
    t->finish();
  }
  if (c.initial_weights.empty() ? c.initial_N >= c.n_blocks
                                : static_cast<Index>(c.initial_weights.size()) > c.n_blocks)
    throw ConfigError("trajectories: initial signal state needs more levels than truncation.n_blocks");
  if (auto p = root.child("plateau")) {
    p->integer("window", c.plateau.window);
    p->number("variance_threshold", c.plateau.variance_threshold);
    p->number("jump_threshold", c.plateau.jump_threshold);
    p->integer("min_length", c.plateau.min_length);
    at_least(*p, "window", c.plateau.window, 2);
    positive(*p, "variance_threshold", c.plateau.variance_threshold);
    positive(*p, "jump_threshold", c.plateau.jump_threshold);
    at_least(*p, "min_length", c.plateau.min_length, 1);
    p->finish();
  }
}

void read_validation(Section& root, ValidationConfig& c) {
  if (auto v = root.child("validation")) {
    v->integers("criteria", c.criteria);
    v->integer("qnd_n_signal", c.qnd_n_signal);
    v->integer("qnd_n_pump", c.qnd_n_pump);
    v->integer("qnd_hd_n_pump", c.qnd_hd_n_pump);
    v->integer("oracle_outcomes", c.oracle_outcomes);
    v->integer("opo_trajectories", c.opo_trajectories);
    v->number("opo_duration", c.opo_duration);
    v->integer("ensemble_members", c.ensemble_members);
    for (int id : c.criteria)
      if (id < 1 || id > 7) throw ConfigError("validation.criteria: ids run from 1 to 7");
    at_least(*v, "opo_trajectories", c.opo_trajectories, 1);
    at_least(*v, "ensemble_members", c.ensemble_members, 1);
    positive(*v, "opo_duration", c.opo_duration);
    v->finish();
  }
}

Json complex_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Json system_json(double Delta, double g_tilde) { return Json{{"Delta", Delta}, {"g_tilde", g_tilde}}; }

}  // namespace

std::string experiment_name(Experiment e) {
  for (const auto& [k, name] : kExperiments)
    if (k == e) return name;
  return "unknown";
}

Experiment experiment_from_name(const std::string& name) {
  for (const auto& [k, n] : kExperiments)
    if (n == name) return k;
  throw ConfigError("unknown experiment '" + name +
                    "' (expected qnd-protocol, povm-purity, gkp-generate, opo-trajectories or validate)");
}

std::string hamiltonian_name(HamiltonianVariant v) {
  for (const auto& [k, name] : kVariants)
    if (k == v) return name;
  return "unknown";
}

HamiltonianVariant hamiltonian_from_name(const std::string& name) {
  for (const auto& [k, n] : kVariants)
    if (n == name) return k;
  throw ConfigError("unknown Hamiltonian '" + name + "' (expected effective, displaced, lab or bogoliubov-form)");
}

ExperimentConfig parse_config(const std::string& text) {
  if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); }))
    throw ConfigError(std::string("empty configuration; ") + kRequired);
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  Section root(j, "");
  if (!root.has("experiment")) throw ConfigError(std::string("missing required key experiment; ") + kRequired);

  ExperimentConfig c;
  std::string name;
  root.string("experiment", name);
  c.experiment = experiment_from_name(name);
  root.integer("seed", c.seed);
  root.integer("threads", c.threads);
  root.string("output", c.output);
  at_least(root, "threads", c.threads, 1);
  if (c.output.empty()) throw ConfigError("output must not be empty");

  try {
    switch (c.experiment) {
      case Experiment::qnd_protocol: read_qnd(root, c.qnd); break;
      case Experiment::povm_purity: read_povm(root, c.povm); break;
      case Experiment::gkp_generate: read_gkp(root, c.gkp); break;
      case Experiment::opo_trajectories: read_opo(root, c); break;
      case Experiment::validate: read_validation(root, c.validation); break;
    }
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  root.finish();

  c.opo.seed = c.validation.seed = c.seed;
  c.opo.threads = c.validation.threads = c.threads;
  return c;
}

Json config_to_json(const ExperimentConfig& c) {
  Json j;
  j["experiment"] = experiment_name(c.experiment);
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["output"] = c.output;
  switch (c.experiment) {
    case Experiment::qnd_protocol: {
      const QNDConfig& q = c.qnd;
      j["system"] = system_json(q.Delta, q.g_tilde);
      j["protocol"] = {{"t", q.t},
                       {"alpha", complex_json(q.alpha)},
                       {"w", q.w},
                       {"hamiltonian", hamiltonian_name(q.hamiltonian)},
                       {"bins", q.bins}};
      j["truncation"] = {{"n_signal", q.n_signal},
                         {"n_pump", q.n_pump},
                         {"health_tolerance", q.health_tolerance},
                         {"evolved_tolerance", q.evolved_tolerance}};
      j["wigner"] = {{"points", q.wigner_points}, {"extent", q.wigner_extent}};
      break;
    }
    case Experiment::povm_purity:
      j["povm"] = {{"d", c.povm.d}, {"widths", c.povm.widths}, {"n_max", c.povm.n_max}};
      break;
    case Experiment::gkp_generate: {
      const GKPConfig& g = c.gkp;
      j["system"] = system_json(g.Delta, g.g_tilde);
      Json p;
      if (g.t > 0.0) p["t"] = g.t;
      if (g.w > 0.0) p["w"] = g.w;
      if (g.A0 > 0.0) p["A0"] = g.A0;
      p["epsilon"] = g.epsilon;
      p["phi"] = g.phi;
      p["zero_point_correction"] = g.zero_point_correction;
      j["protocol"] = p;
      j["truncation"] = {{"n_signal", g.n_signal}, {"health_tolerance", g.health_tolerance}};
      j["grid"] = {{"extent", g.grid_extent}, {"dx", g.grid_dx}};
      j["wigner"] = {
          {"points", g.wigner_points}, {"extent", g.wigner_extent}, {"signal_stride", g.signal_wigner_stride}};
      break;
    }
    case Experiment::opo_trajectories: {
      const OPOConfig& o = c.opo;
      j["system"] = system_json(o.Delta, o.g_tilde);
      j["system"]["kappa_a"] = o.kappa_a;
      j["system"]["kappa_b"] = o.kappa_b;
      Json t{{"count", o.trajectories},
             {"duration", o.duration},
             {"dt", o.dt},
             {"record_every", o.record_every},
             {"initial_N", o.initial_N}};
      if (!o.initial_weights.empty()) t["initial_weights"] = o.initial_weights;
      if (o.initial_pump) t["initial_pump"] = complex_json(*o.initial_pump);
      t["hamiltonian"] = hamiltonian_name(c.opo_hamiltonian);
      j["trajectories"] = t;
      j["truncation"] = {{"n_blocks", o.n_blocks},
                         {"n_pump", o.n_pump},
                         {"n_signal", c.opo_n_signal},
                         {"transfer_every", o.transfer_every},
                         {"health_tolerance", o.health_tolerance}};
      j["plateau"] = {{"window", o.plateau.window},
                      {"variance_threshold", o.plateau.variance_threshold},
                      {"jump_threshold", o.plateau.jump_threshold},
                      {"min_length", o.plateau.min_length}};
      break;
    }
    case Experiment::validate: {
      const ValidationConfig& v = c.validation;
      j["validation"] = {{"criteria", v.criteria},
                         {"qnd_n_signal", v.qnd_n_signal},
                         {"qnd_n_pump", v.qnd_n_pump},
                         {"qnd_hd_n_pump", v.qnd_hd_n_pump},
                         {"oracle_outcomes", v.oracle_outcomes},
                         {"opo_trajectories", v.opo_trajectories},
                         {"opo_duration", v.opo_duration},
                         {"ensemble_members", v.ensemble_members}};
      break;
    }
  }
  return j;
}

std::string config_hash(const ExperimentConfig& config) { return sha256_hex(config_to_json(config).dump()); }

}  // namespace paraqnd
