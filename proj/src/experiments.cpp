#include "paraqnd/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <sstream>

#include "paraqnd/metrics.hpp"

#ifndef PARAQND_VERSION
#define PARAQND_VERSION "unknown"
#endif

namespace paraqnd {

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::vector<double> to_std(const RVector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Json check_json(const CheckResult& c) {
  return Json{{"name", c.name}, {"value", c.value}, {"relation", c.relation}, {"limit", c.limit}, {"pass", c.pass}};
}

// config_to_json without the run-local keys, so the stored config and its
// hash do not depend on where or on how many threads a run happened.
Json run_config_json(const ExperimentConfig& c) {
  Json j = config_to_json(c);
  j.erase("output");
  j.erase("threads");
  return j;
}

std::string params_line(double Delta, double g_tilde) {
  const SystemParams p = SystemParams::from_targets(Delta, g_tilde);
  return "Delta=" + format_number(Delta) + " g_tilde=" + format_number(g_tilde) + " u=" + format_number(p.u()) +
         " delta=" + format_number(p.delta) + " r=" + format_number(p.r()) + " (units g=1)";
}

Json system_json(double Delta, double g_tilde) {
  const SystemParams p = SystemParams::from_targets(Delta, g_tilde);
  return Json{{"Delta", Delta}, {"g_tilde", g_tilde}, {"u", p.u()}, {"delta", p.delta}, {"r", p.r()}};
}

// ---------------------------------------------------------------- qnd-protocol

void run_qnd(const ExperimentConfig& e, ArtifactWriter& out, RunManifest& m, const Logger& log) {
  const QNDConfig& c = e.qnd;
  log("qnd-protocol: evolving |alpha> (x) |w> on " + std::to_string(c.n_signal) + " x " +
      std::to_string(c.n_pump) + " levels");
  const QNDDataset d = run_qnd_protocol(c);
  const Index G = d.grid.size();
  const Index n_states = d.family.n_max + 1;
  const CMatrix V = squeeze_operator(c.n_signal, d.u).leftCols(n_states);

  std::vector<double> purity(G), nearest(G), fid(G);
  for (Index i = 0; i < G; ++i) {
    try {
      purity[i] = povm_purity(d.grid[i], d.family);
    } catch (const DomainError&) {
      purity[i] = std::nan("");
    }
    const double norm = d.conditional[i].norm();
    if (norm < 1e-150) {
      nearest[i] = fid[i] = std::nan("");
      continue;
    }
    const RVector w = (V.adjoint() * (d.conditional[i] / norm)).cwiseAbs2();
    Index k = 0;
    fid[i] = w.maxCoeff(&k);
    nearest[i] = static_cast<double>(k);
  }
  const std::vector<std::string> head{
      "qnd-protocol: pump p-homodyne outcome distribution and conditional signal states",
      params_line(c.Delta, c.g_tilde),
      "t=" + format_number(c.t) + " d=g_tilde*t=" + format_number(d.family.d) + " w=" + format_number(c.w) +
          " alpha=" + format_number(c.alpha.real()) + (c.alpha.imag() < 0 ? "" : "+") +
          format_number(c.alpha.imag()) + "i hamiltonian=" + hamiltonian_name(c.hamiltonian),
      "quadratures x=(a+a^dag)/2, p=(a-a^dag)/2i; vacuum std 1/2"};
  out.write_csv("qnd_outcomes.csv", head,
                {{"p", "1", "homodyne outcome grid, spacing w/10", to_std(d.grid)},
                 {"P_joint", "1/p", "pump projection of the evolved joint state", to_std(d.probability)},
                 {"P_kraus", "1/p", "kraus-amplitude: sum_N |C_N(p)|^2 |<N_a|alpha>|^2", to_std(d.kraus_probability)},
                 {"purity", "1", "povm-purity: sum|C_N|^4/(sum|C_N|^2)^2", purity},
                 {"nearest_N", "quanta", "argmax_N |<N_a|psi_p>|^2", nearest},
                 {"fidelity_nearest", "1", "max_N |<N_a|psi_p>|^2 of the conditional state", fid}});

  std::vector<double> bn, blo, bhi, bp, bf;
  Json bins = Json::array();
  for (const QNDBin& b : d.bins) {
    bn.push_back(static_cast<double>(b.N));
    blo.push_back(b.p_lo);
    bhi.push_back(b.p_hi);
    bp.push_back(b.probability);
    bf.push_back(b.fidelity);
    bins.push_back({{"N", b.N}, {"p_lo", b.p_lo}, {"p_hi", b.p_hi}, {"probability", b.probability},
                    {"fidelity", b.fidelity}});
  }
  out.write_csv("qnd_bins.csv", head,
                {{"N", "quanta", "bin index, window [d N, d (N+1)]", bn},
                 {"p_lo", "1", "window lower edge", blo},
                 {"p_hi", "1", "window upper edge", bhi},
                 {"probability", "1", "integral of P_joint over the window", bp},
                 {"fidelity", "1", "<N_a| rho_bin |N_a> of the window-averaged conditional state", bf}});

  for (const auto& [name, grid] : d.wigner) out.write_wigner("qnd_wigner_" + name, grid, {head[0], head[1]});

  const double norm = d.probability.sum() * d.dp;
  const double kraus_dev = (d.probability - d.kraus_probability).cwiseAbs().maxCoeff();
  const OracleComparison oracle = compare_with_kraus(d, 25);
  Json summary{{"experiment", "qnd-protocol"},
               {"system", system_json(c.Delta, c.g_tilde)},
               {"protocol",
                {{"t", c.t},
                 {"d", d.family.d},
                 {"w", c.w},
                 {"alpha", Json::array({c.alpha.real(), c.alpha.imag()})},
                 {"hamiltonian", hamiltonian_name(c.hamiltonian)},
                 {"n_max", d.family.n_max}}},
               {"truncation",
                {{"n_signal", c.n_signal},
                 {"n_pump", c.n_pump},
                 {"pump_top_population", d.pump_top_population},
                 {"signal_top_population", d.signal_top_population}}},
               {"probability_normalization", norm},
               {"kraus_max_deviation", kraus_dev},
               {"bins", bins},
               {"oracle", {{"outcomes", oracle.outcomes}, {"fidelities", oracle.fidelities},
                           {"min_fidelity", oracle.min_fidelity}}}};
  out.write_json("qnd_summary.json", summary);

  m.checks.push_back(make_check("P(p) normalization |sum P dp - 1|", std::abs(norm - 1.0), "<", 1e-3));
  if (c.hamiltonian == HamiltonianVariant::effective) {
    m.checks.push_back(make_check("max |P_joint - P_kraus|", kraus_dev, "<", 1e-3));
    m.checks.push_back(make_check("conditional state vs Kraus prediction, min fidelity", oracle.min_fidelity, ">", 0.999));
  }
}

// ---------------------------------------------------------------- povm-purity

void run_povm(const ExperimentConfig& e, ArtifactWriter& out, RunManifest& m, const Logger& log) {
  const PovmConfig& c = e.povm;
  log("povm-purity: " + std::to_string(c.widths.size()) + " pump widths at d=" + format_number(c.d));
  const auto scans = run_povm_scan(c);
  std::vector<double> ws, ps, pur;
  Json widths = Json::array();
  for (const auto& s : scans) {
    for (Index i = 0; i < s.grid.size(); ++i) {
      ws.push_back(s.w);
      ps.push_back(s.grid[i]);
      pur.push_back(s.purity[i]);
    }
    widths.push_back({{"w", s.w},
                      {"dp", s.dp},
                      {"completeness_error", s.completeness_error},
                      {"completeness_error_half_dp", s.completeness_error_half},
                      {"formula_vs_matrix", s.formula_vs_matrix},
                      {"peak_purity", to_std(s.peak_purity)},
                      {"midpoint_purity", to_std(s.midpoint_purity)}});
    const std::string tag = " (w=" + format_number(s.w) + ")";
    m.checks.push_back(make_check("completeness on N_a <= n_max" + tag, s.completeness_error, "<", 1e-3));
    m.checks.push_back(make_check("completeness does not grow when dp halves (floor 1e-8)" + tag,
                                  s.completeness_error_half - std::max(s.completeness_error, 1e-8), "<=", 0.0));
    m.checks.push_back(make_check("purity formula vs Tr(F^2)/Tr(F)^2" + tag, s.formula_vs_matrix, "<", 1e-10));
  }
  // Narrower pumps give purer POVMs at every peak centre.
  double violations = 0.0;
  for (std::size_t a = 0; a < scans.size(); ++a)
    for (std::size_t b = 0; b < scans.size(); ++b)
      if (scans[a].w < scans[b].w)
        for (Index N = 0; N < scans[a].peak_purity.size(); ++N)
          if (!(scans[a].peak_purity[N] > scans[b].peak_purity[N])) violations += 1.0;
  m.checks.push_back(make_check("peak-centre purity ordering violations", violations, "==", 0.0));

  out.write_csv("povm_purity.csv",
                {"povm-purity: purity of the POVM element F(p) against the homodyne outcome",
                 "d=g_tilde*t=" + format_number(c.d) + " n_max=" + std::to_string(c.n_max) +
                     "; reference pump width w0=0.5 (vacuum)"},
                {{"w", "1", "pump p width", ws},
                 {"p", "1", "homodyne outcome grid, spacing w/10", ps},
                 {"purity", "1", "povm-purity: sum|C_N|^4/(sum|C_N|^2)^2", pur}});
  out.write_json("povm_summary.json", Json{{"experiment", "povm-purity"},
                                           {"d", c.d},
                                           {"n_max", c.n_max},
                                           {"reference_width", kVacuumWidth},
                                           {"widths", widths}});
}

// ---------------------------------------------------------------- gkp-generate

Json optional_db(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

void run_gkp(const ExperimentConfig& e, ArtifactWriter& out, RunManifest& m, const Logger& log) {
  const GKPConfig& c = e.gkp;
  log("gkp-generate: w=" + format_number(c.width()) + " A0=" + format_number(c.meter_amplitude()) +
      " g_tilde*t=" + format_number(c.g_tilde_t()));
  const GKPReport r = run_gkp_protocol(c);
  const std::vector<std::string> head{
      "gkp-generate: pump state after the general-dyne readout and feedforward",
      params_line(c.Delta, c.g_tilde),
      "g_tilde*t=" + format_number(c.g_tilde_t()) + " w=" + format_number(r.target.w) +
          " A0=" + format_number(r.target.A0) + " epsilon=" + format_number(r.outcome.epsilon) +
          " phi=" + format_number(r.outcome.phi) + " x_phi=" + format_number(r.outcome.x_phi)};

  auto density = [](const GridState& s) { return to_std(s.psi.cwiseAbs2()); };
  out.write_csv("gkp_x_marginal.csv", head,
                {{"x", "1", "periodic pump x grid", to_std(r.final_state.x)},
                 {"P_final", "1/x", "|psi(x)|^2 after feedforward", density(r.final_state)},
                 {"P_post_measurement", "1/x", "|psi(x)|^2 after the general-dyne Kraus operator",
                  density(r.post_measurement)},
                 {"P_analytic", "1/x", "analytic grid state |0~>", density(r.analytic)}});
  const RVector ps = linspace(-10.0, 10.0, 2001);
  out.write_csv("gkp_p_marginal.csv", head,
                {{"p", "1", "pump p points", to_std(ps)},
                 {"P_final", "1/p", "|<p|psi>|^2 after feedforward",
                  to_std(momentum_amplitudes(r.final_state, ps).cwiseAbs2())},
                 {"P_analytic", "1/p", "analytic grid state |0~>",
                  to_std(momentum_amplitudes(r.analytic, ps).cwiseAbs2())}});
  for (const auto& [name, grid] : r.wigner) out.write_wigner("gkp_wigner_" + name, grid, {head[0], head[1]});

  Json spacing = nullptr;
  double spacing_value = std::nan("");
  try {
    spacing_value = tooth_spacing(r.final_state);
    spacing = spacing_value;
  } catch (const GridError&) {
  }
  const SqueezingReport& q = r.squeezing;
  out.write_json(
      "gkp_report.json",
      Json{{"experiment", "gkp-generate"},
           {"system", system_json(c.Delta, c.g_tilde)},
           {"g_tilde_t", c.g_tilde_t()},
           {"outcome", {{"epsilon", r.outcome.epsilon}, {"phi", r.outcome.phi}, {"x_phi", r.outcome.x_phi},
                        {"mu", r.outcome.mu}, {"density", r.outcome_density}}},
           {"target", {{"w", r.target.w}, {"kappa", r.target.kappa}, {"A0", r.target.A0},
                       {"spacing", r.target.spacing}, {"symmetric", r.target.symmetric()}}},
           {"fidelity", r.fidelity},
           {"tooth_spacing", spacing},
           {"squeezing",
            {{"modular_x_db", optional_db(q.modular_x_db)},
             {"modular_p_db", optional_db(q.modular_p_db)},
             {"stabilizer_x", q.stabilizer_x},
             {"stabilizer_p", q.stabilizer_p},
             {"tooth_x_db", q.tooth_x_db},
             {"tooth_p_db", q.tooth_p_db},
             {"tooth_x_width", q.tooth_x.width},
             {"tooth_p_width", q.tooth_p.width}}},
           {"amplitude_residual", r.amplitude_residual},
           {"signal_top_population", r.signal_top_population},
           {"zero_point_correction", c.zero_point_correction}});

  m.checks.push_back(make_check("signal amplitude vs closed form (relative)", r.amplitude_residual, "<", 1e-8));
  m.checks.push_back(make_check("fidelity to |0~> within [0, 1]", std::abs(r.fidelity - 0.5), "<=", 0.5));
  if (!std::isnan(spacing_value))
    m.checks.push_back(
        make_check("tooth spacing relative to pi/(g_tilde t)", std::abs(spacing_value / r.outcome.mu - 1.0), "<", 0.01));
}

// ---------------------------------------------------------------- opo-trajectories

Json plateau_json(const Plateau& p) {
  return Json{{"t_begin", p.t_begin}, {"t_end", p.t_end}, {"level", p.level},   {"mean_N", p.mean_N},
              {"mean_p", p.mean_p},   {"median_p", p.median_p}, {"mean_db", p.mean_db}, {"min_db", p.min_db}};
}

void run_opo(const ExperimentConfig& e, ArtifactWriter& out, RunManifest& m, const Logger& log) {
  const OPOConfig& c = e.opo;
  log("opo-trajectories: " + std::to_string(c.trajectories) + " trajectories of length " +
      format_number(c.duration) + " on " + std::to_string(c.threads) + " thread(s), " +
      hamiltonian_name(e.opo_hamiltonian) + " Hamiltonian");
  const bool block = e.opo_hamiltonian == HamiltonianVariant::effective;
  const OPOResult res = block ? run_opo_trajectories(c)
                              : run_opo_trajectories_generic(c, e.opo_hamiltonian, ModeSpace(e.opo_n_signal, c.n_pump));
  const std::string pline = params_line(c.Delta, c.g_tilde) + " kappa_a=" + format_number(c.kappa_a) +
                            " kappa_b=" + format_number(c.kappa_b);
  Json trajectories = Json::array();
  for (std::size_t k = 0; k < res.trajectories.size(); ++k) {
    const OPOTrajectory& tr = res.trajectories[k];
    const TrajectoryRecord& rec = tr.record;
    std::ostringstream name;
    name << "opo_trajectory_" << std::setw(3) << std::setfill('0') << k << ".csv";
    out.write_csv(name.str(),
                  {"opo-trajectories: conditional expectations along one pump-homodyne record", pline,
                   "seed base=" + std::to_string(rec.seed.base) + " index=" + std::to_string(rec.seed.index) +
                       " dt=" + format_number(rec.dt) + " hamiltonian=" + hamiltonian_name(e.opo_hamiltonian)},
                  {{"t", "1/g", "record time", rec.times},
                   {"N_a", "quanta", "sme conditional state <A^dag A>", rec["N_a"]},
                   {"p_b", "1", "sme conditional state <p_b>", rec["p_b"]},
                   {"dB", "dB", "10 log10(Var(x_a)/(1/4)) of the conditional signal", rec["x_var_db"]},
                   {"current", "1", "homodyne current dY/dt averaged over the record interval", rec.current}});
    Json plateaus = Json::array(), jumps = Json::array();
    for (const Plateau& p : tr.plateaus) plateaus.push_back(plateau_json(p));
    for (const Jump& j : tr.jumps)
      jumps.push_back({{"time", j.time}, {"from", j.from}, {"to", j.to}, {"delta_p", j.delta_p}});
    trajectories.push_back({{"index", k},
                            {"file", name.str()},
                            {"seed", {{"base", rec.seed.base}, {"index", rec.seed.index}}},
                            {"plateaus", plateaus},
                            {"jumps", jumps},
                            {"max_plateau_p_error", tr.max_plateau_p_error},
                            {"max_plateau_mean_p_error", tr.max_plateau_mean_p_error},
                            {"squeezing_below_3db", tr.squeezing_below_3db},
                            {"leaked_weight", tr.leaked_weight},
                            {"max_pump_top", tr.max_pump_top}});
  }
  Json levels = Json::array();
  for (Index N = 0; N < c.n_blocks; ++N)
    levels.push_back({{"N", N}, {"p_b", stationary_pump_amplitude(N, c.g_tilde, c.kappa_b).imag()}});
  const OPOSummary& s = res.summary;
  out.write_json("opo_summary.json",
                 Json{{"experiment", "opo-trajectories"},
                      {"system", system_json(c.Delta, c.g_tilde)},
                      {"kappa_a", c.kappa_a},
                      {"kappa_b", c.kappa_b},
                      {"hamiltonian", hamiltonian_name(e.opo_hamiltonian)},
                      {"duration", c.duration},
                      {"dt", c.dt},
                      {"plateau_levels", levels},
                      {"squeezing_reference_db", -3.0},
                      {"plateau_detector",
                       {{"window", c.plateau.window},
                        {"variance_threshold", c.plateau.variance_threshold},
                        {"jump_threshold", c.plateau.jump_threshold},
                        {"min_length", c.plateau.min_length}}},
                      {"summary",
                       {{"trajectories", s.trajectories},
                        {"total_jumps", s.total_jumps},
                        {"min_jumps", s.min_jumps},
                        {"trajectories_with_jump", s.trajectories_with_jump},
                        {"correlated_jumps", s.correlated_jumps},
                        {"max_plateau_p_error", s.max_plateau_p_error},
                        {"max_plateau_mean_p_error", s.max_plateau_mean_p_error},
                        {"zero_plateaus", s.zero_plateaus},
                        {"min_zero_plateau_db", s.min_zero_plateau_db},
                        {"squeezing_below_3db", s.squeezing_below_3db},
                        {"max_leaked_weight", s.max_leaked_weight}}},
                      {"trajectories", trajectories}});

  m.checks.push_back(make_check("plateau <p_b> (median) relative to Im beta_N", s.max_plateau_p_error, "<", 0.05));
  m.checks.push_back(make_check("jumps with a matching <p_b> step", static_cast<double>(s.correlated_jumps), "==",
                                static_cast<double>(s.total_jumps)));
  if (block) m.checks.push_back(make_check("weight lost above the top N_a block", s.max_leaked_weight, "<", 1e-3));
}

// ---------------------------------------------------------------- validate

void run_validate(const ExperimentConfig& e, ArtifactWriter& out, RunManifest& m, const Logger& log) {
  m.criteria = run_validation(e.validation, [&](const CriterionResult& r) { log(r.summary_line()); });
  Json criteria = Json::array();
  for (const auto& r : m.criteria) {
    criteria.push_back(criterion_json(r));
    for (const auto& c : r.checks) {
      CheckResult prefixed = c;
      prefixed.name = "criterion " + std::to_string(r.id) + ": " + c.name;
      m.checks.push_back(prefixed);
    }
    if (!r.error.empty())
      m.checks.push_back(make_check("criterion " + std::to_string(r.id) + " ran without error", 0.0, ">", 0.0));
  }
  out.write_json("validation_report.json", Json{{"experiment", "validate"}, {"criteria", criteria}});
}

}  // namespace

std::string code_version() { return PARAQND_VERSION; }

bool RunManifest::pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  for (const auto& c : criteria)
    if (!c.pass()) return false;
  return true;
}

Json criterion_json(const CriterionResult& r) {
  Json checks = Json::array();
  for (const auto& c : r.checks) checks.push_back(check_json(c));
  Json info = Json::object();
  for (const auto& [k, v] : r.info) info[k] = v;
  Json j{{"id", r.id}, {"title", r.title}, {"pass", r.pass()}, {"seconds", r.seconds}, {"checks", checks},
         {"info", info}};
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

Json manifest_json(const RunManifest& m) {
  Json files = Json::array();
  for (const auto& f : m.files) files.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  Json checks = Json::array();
  for (const auto& c : m.checks) checks.push_back(check_json(c));
  Json j{{"experiment", m.experiment},
         {"config_hash", m.config_hash},
         {"code_version", m.code_version},
         {"started", m.started},
         {"finished", m.finished},
         {"seed", m.seed},
         {"seed_policy", m.seed_policy},
         {"pass", m.pass()},
         {"files", files},
         {"checks", checks}};
  return j;
}

RunManifest run_experiment(const ExperimentConfig& config, std::filesystem::path directory, const Logger& log) {
  const Logger say = log ? log : [](const std::string&) {};
  if (directory.empty()) directory = config.output;
  RunManifest m;
  m.experiment = experiment_name(config.experiment);
  m.config_hash = sha256_hex(run_config_json(config).dump());
  m.code_version = code_version();
  m.started = utc_now();
  m.seed = config.seed;
  m.seed_policy =
      "trajectory k draws from std::mt19937_64 seeded through std::seed_seq with the 32-bit words of "
      "(seed, k); distinct (seed, k) give distinct streams";

  ArtifactWriter out(directory);
  out.write_json("config.json", run_config_json(config));
  try {
    switch (config.experiment) {
      case Experiment::qnd_protocol: run_qnd(config, out, m, say); break;
      case Experiment::povm_purity: run_povm(config, out, m, say); break;
      case Experiment::gkp_generate: run_gkp(config, out, m, say); break;
      case Experiment::opo_trajectories: run_opo(config, out, m, say); break;
      case Experiment::validate: run_validate(config, out, m, say); break;
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const DomainError& err) {
    throw ConfigError(m.experiment + ": " + err.what());
  } catch (const std::exception& err) {
    throw ExperimentError(m.experiment + ": " + err.what());
  }
  m.files = out.files();
  m.finished = utc_now();
  out.write_json("manifest.json", manifest_json(m));
  return m;
}

}  // namespace paraqnd
