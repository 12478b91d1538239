#include "polsar/cli.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "polsar/error.hpp"
#include "polsar/physics.hpp"

namespace polsar::cli {
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kToolName = "polsar_mcbench";
constexpr const char* kThreadsEnv = "POLSAR_MCBENCH_THREADS";
constexpr int kDefaultBins = 50;
constexpr int kDefaultSweepPoints = 20;
constexpr double kDefaultSweepVolumeShare = 0.9;

// ---------------------------------------------------------------------------
// Scenario parsing

class ScenarioParser {
 public:
  ScenarioParser(const std::string& text, std::string source)
      : text_(text), source_(std::move(source)) {}

  RunConfig parse() {
    json doc;
    try {
      doc = json::parse(text_);
    } catch (const json::parse_error& e) {
      throw ValidationError(source_ + ": " + e.what());
    }
    if (!doc.is_object()) fail("", "top level must be a JSON object");

    check_keys(doc, "", {"epsilon_soil", "theta_deg", "psi_d_deg", "psi_s_deg", "alpha",
                         "fractions", "span", "looks", "trials", "seed", "fit"});
    RunConfig cfg;
    Scenario& s = cfg.scenario;
    s.epsilon_soil = number(doc, "epsilon_soil");
    s.theta_deg = number(doc, "theta_deg");
    s.psi_d_deg = number(doc, "psi_d_deg");
    s.psi_s_deg = number(doc, "psi_s_deg");
    s.span = doc.contains("span") ? number(doc, "span") : 1.0;

    const json& fr = object(doc, "fractions");
    check_keys(fr, "fractions", {"volume", "surface", "double"});
    s.fractions.volume = number(fr, "volume", "fractions");
    s.fractions.surface = number(fr, "surface", "fractions");
    s.fractions.double_bounce = number(fr, "double", "fractions");

    if (doc.contains("alpha")) {
      const json& a = object(doc, "alpha");
      const bool explicit_form = a.contains("re") || a.contains("im");
      if (explicit_form) {
        check_keys(a, "alpha", {"re", "im"});
        s.alpha = cdouble{number(a, "re", "alpha"), a.contains("im") ? number(a, "im", "alpha") : 0.0};
      } else {
        check_keys(a, "alpha", {"epsilon_trunk", "phase_deg"});
        DihedralSpec d;
        d.epsilon_trunk =
            a.contains("epsilon_trunk") ? number(a, "epsilon_trunk", "alpha") : s.epsilon_soil;
        d.phase_deg = a.contains("phase_deg") ? number(a, "phase_deg", "alpha") : 180.0;
        s.alpha = d;
      }
    } else {
      s.alpha = DihedralSpec{s.epsilon_soil, 180.0};
      cfg.notices.push_back(
          "alpha not given: using dihedral with epsilon_trunk = epsilon_soil and phase 180 deg");
    }

    if (doc.contains("looks")) cfg.looks = integer(doc, "looks");
    if (doc.contains("trials")) cfg.trials = integer(doc, "trials");
    if (doc.contains("seed")) cfg.seed = unsigned_integer(doc, "seed");

    if (doc.contains("fit")) {
      const json& f = object(doc, "fit");
      check_keys(f, "fit", {"n_random_starts", "max_iterations", "cost_tolerance",
                            "step_tolerance", "start_seed", "fix_imag_alpha"});
      if (f.contains("n_random_starts")) cfg.fit.n_random_starts = integer(f, "n_random_starts", "fit");
      if (f.contains("max_iterations")) cfg.fit.max_iterations = integer(f, "max_iterations", "fit");
      if (f.contains("cost_tolerance")) cfg.fit.cost_tolerance = number(f, "cost_tolerance", "fit");
      if (f.contains("step_tolerance")) cfg.fit.step_tolerance = number(f, "step_tolerance", "fit");
      if (f.contains("start_seed")) {
        cfg.fit.start_seed = unsigned_integer(f, "start_seed", "fit");
        cfg.start_seed_given = true;
      }
      if (f.contains("fix_imag_alpha")) {
        const json& v = f.at("fix_imag_alpha");
        if (!v.is_boolean()) fail("fit.fix_imag_alpha", "must be true or false");
        cfg.fit.fix_imag_alpha = v.get<bool>();
      }
    }

    try {
      s.validate();
      cfg.fit.validate();
    } catch (const ValidationError& e) {
      const std::string msg = e.what();
      const auto colon = msg.find(':');
      const std::string field = colon == std::string::npos ? "" : msg.substr(0, colon);
      const std::string what = colon == std::string::npos ? msg : msg.substr(colon + 2);
      fail(field, what);
    }
    if (cfg.looks < 1) fail("looks", "must be at least 1");
    if (cfg.trials < 1) fail("trials", "must be at least 1");
    return cfg;
  }

 private:
  [[noreturn]] void fail(const std::string& path, const std::string& what) const {
    std::string where = source_;
    if (const auto line = locate(path)) where += ":" + std::to_string(*line);
    throw ValidationError(where + ": " + (path.empty() ? "" : path + ": ") + what);
  }

  /// Line of the (possibly nested, dot-separated) key in the source text.
  [[nodiscard]] std::optional<int> locate(const std::string& path) const {
    if (path.empty()) return std::nullopt;
    std::size_t pos = 0;
    std::stringstream parts(path);
    std::string part;
    while (std::getline(parts, part, '.')) {
      pos = text_.find("\"" + part + "\"", pos);
      if (pos == std::string::npos) return std::nullopt;
    }
    return 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + static_cast<long>(pos), '\n'));
  }

  static std::string join(const std::string& parent, const std::string& key) {
    return parent.empty() ? key : parent + "." + key;
  }

  void check_keys(const json& obj, const std::string& parent,
                  std::initializer_list<const char*> allowed) const {
    for (const auto& [key, value] : obj.items()) {
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
        fail(join(parent, key), "unknown key");
      }
    }
  }

  const json& object(const json& obj, const char* key, const std::string& parent = "") const {
    if (!obj.contains(key)) fail(join(parent, key), "missing required key");
    const json& v = obj.at(key);
    if (!v.is_object()) fail(join(parent, key), "must be an object");
    return v;
  }

  double number(const json& obj, const char* key, const std::string& parent = "") const {
    if (!obj.contains(key)) fail(join(parent, key), "missing required key");
    const json& v = obj.at(key);
    if (!v.is_number()) fail(join(parent, key), "must be a number");
    return v.get<double>();
  }

  int integer(const json& obj, const char* key, const std::string& parent = "") const {
    const json& v = obj.at(key);
    if (!v.is_number_integer()) fail(join(parent, key), "must be an integer");
    const auto i = v.get<long long>();
    if (i < 0 || i > 1'000'000'000) fail(join(parent, key), "out of range");
    return static_cast<int>(i);
  }

  std::uint64_t unsigned_integer(const json& obj, const char* key,
                                 const std::string& parent = "") const {
    const json& v = obj.at(key);
    if (!v.is_number_unsigned()) fail(join(parent, key), "must be a nonnegative integer");
    return v.get<std::uint64_t>();
  }

  const std::string& text_;
  std::string source_;
};

// ---------------------------------------------------------------------------
// Output handling

/// Output directory whose files are removed again unless `commit` is called.
class OutputDir {
 public:
  explicit OutputDir(const fs::path& root) : root_(root) {
    std::error_code ec;
    if (fs::exists(root_, ec)) {
      if (!fs::is_directory(root_, ec)) throw IoError(root_.string() + ": not a directory");
    } else {
      ensure_dir(root_);
    }
  }
  OutputDir(const OutputDir&) = delete;
  OutputDir& operator=(const OutputDir&) = delete;

  ~OutputDir() {
    if (committed_) return;
    std::error_code ec;
    for (auto it = files_.rbegin(); it != files_.rend(); ++it) fs::remove(*it, ec);
    for (auto it = dirs_.rbegin(); it != dirs_.rend(); ++it) fs::remove(*it, ec);
  }

  void write(const fs::path& relative, const std::string& content) {
    const fs::path path = root_ / relative;
    ensure_dir(path.parent_path());
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError(path.string() + ": cannot open for writing");
    files_.push_back(path);
    os << content;
    os.flush();
    if (!os) throw IoError(path.string() + ": write failed");
  }

  void commit() { committed_ = true; }

 private:
  void ensure_dir(const fs::path& dir) {
    if (dir.empty()) return;
    std::error_code ec;
    if (fs::exists(dir, ec)) return;
    ensure_dir(dir.parent_path());
    if (!fs::create_directory(dir, ec) && !fs::is_directory(dir)) {
      throw IoError(dir.string() + ": cannot create directory");
    }
    dirs_.push_back(dir);
  }

  fs::path root_;
  std::vector<fs::path> files_;
  std::vector<fs::path> dirs_;
  bool committed_ = false;
};

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json params_json(const ModelParams& p) {
  return {{"f_v", p.f_v},
          {"f_d", p.f_d},
          {"f_s", p.f_s},
          {"alpha_re", p.alpha.real()},
          {"alpha_im", p.alpha.imag()},
          {"beta", p.beta},
          {"psi_d_deg", rad_to_deg(p.psi_d)},
          {"psi_s_deg", rad_to_deg(p.psi_s)}};
}

json matrix_json(const CoherencyMatrix& t) {
  return {{"t11", t.t11},          {"t22", t.t22},          {"t33", t.t33},
          {"t12_re", t.t12.real()}, {"t12_im", t.t12.imag()}, {"t13_re", t.t13.real()},
          {"t13_im", t.t13.imag()}, {"t23_re", t.t23.real()}, {"t23_im", t.t23.imag()}};
}

json powers_json(const MechanismPowers& m) {
  return {{"p_v", m.p_v},
          {"p_s", m.p_s},
          {"p_d", m.p_d},
          {"span", m.span},
          {"pv_span", m.volume_fraction()},
          {"ps_span", m.surface_fraction()},
          {"pd_span", m.double_fraction()}};
}

json scenario_json(const Scenario& s) {
  json j = {{"epsilon_soil", s.epsilon_soil},
            {"theta_deg", s.theta_deg},
            {"psi_d_deg", s.psi_d_deg},
            {"psi_s_deg", s.psi_s_deg},
            {"fractions",
             {{"volume", s.fractions.volume},
              {"surface", s.fractions.surface},
              {"double", s.fractions.double_bounce}}},
            {"span", s.span}};
  if (const auto* a = std::get_if<cdouble>(&s.alpha)) {
    j["alpha"] = {{"re", a->real()}, {"im", a->imag()}};
  } else {
    const auto& d = std::get<DihedralSpec>(s.alpha);
    j["alpha"] = {{"epsilon_trunk", d.epsilon_trunk}, {"phase_deg", d.phase_deg}};
  }
  return j;
}

json fit_options_json(const FitOptions& f) {
  return {{"n_random_starts", f.n_random_starts}, {"max_iterations", f.max_iterations},
          {"cost_tolerance", f.cost_tolerance},   {"step_tolerance", f.step_tolerance},
          {"start_seed", f.start_seed},           {"fix_imag_alpha", f.fix_imag_alpha}};
}

const char* stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::CostTolerance: return "cost_tolerance";
    case StopReason::StepTolerance: return "step_tolerance";
    case StopReason::Stationary: return "stationary";
    case StopReason::MaxIterations: return "max_iterations";
  }
  return "unknown";
}

const char* unit_name(StatUnit u) {
  switch (u) {
    case StatUnit::Power: return "power";
    case StatUnit::Unitless: return "unitless";
    case StatUnit::Degrees: return "deg";
    case StatUnit::Fraction: return "fraction";
  }
  return "unknown";
}

json base_meta(const std::string& command, const RunConfig& cfg) {
  const ModelParams truth = scenario_to_params(cfg.scenario);
  const CoherencyMatrix t = assemble(truth);
  const cdouble alpha = resolve_alpha(cfg.scenario);
  return {{"tool", kToolName},
          {"command", command},
          {"scenario", scenario_json(cfg.scenario)},
          {"resolved",
           {{"alpha_re", alpha.real()},
            {"alpha_im", alpha.imag()},
            {"beta", truth.beta},
            {"epsilon_from_beta", epsilon_from_beta(truth.beta, deg_to_rad(cfg.scenario.theta_deg))}}},
          {"looks", cfg.looks},
          {"trials", cfg.trials},
          {"seed", cfg.seed},
          {"fit", fit_options_json(cfg.fit)},
          {"truth", params_json(truth)},
          {"t_true", matrix_json(t)},
          {"entropy", entropy(t)},
          {"true_powers", powers_json(mechanism_powers(truth))},
          {"notices", cfg.notices},
          {"conventions",
           {{"angles", "degrees, canonical cell (-45, 45]"},
            {"fraction_std", "percentage points"},
            {"fraction_error", "rel_error_pct = 100 |mean - truth| / truth; abs_error in percentage points"},
            {"std", "sample standard deviation (n - 1)"}}}};
}

std::string records_csv(const std::vector<TrialRecord>& records) {
  std::string out =
      "trial,f_v,f_d,f_s,alpha_re,alpha_im,beta,psi_d_deg,psi_s_deg,pv_span,ps_span,pd_span,"
      "cost,converged,alpha_identifiable,beta_identifiable,observed_span\n";
  for (const auto& r : records) {
    const auto& p = r.params;
    const double row[] = {p.f_v, p.f_d, p.f_s, p.alpha.real(), p.alpha.imag(), p.beta,
                          rad_to_deg(p.psi_d), rad_to_deg(p.psi_s), r.frac_v, r.frac_s, r.frac_d,
                          r.cost};
    out += std::to_string(r.trial_index);
    for (double v : row) out += "," + format_number(v);
    out += r.converged ? ",1" : ",0";
    out += r.identifiable.alpha ? ",1" : ",0";
    out += r.identifiable.beta ? ",1" : ",0";
    out += "," + format_number(r.observed_span) + "\n";
  }
  return out;
}

std::string stats_row(const ParamStats& s) {
  return s.name + "," + unit_name(s.unit) + "," + format_number(s.truth) + "," +
         format_number(s.mean) + "," + format_number(s.bias) + "," + format_number(s.abs_error) +
         "," + format_number(s.rel_error_pct) + "," + format_number(s.std) + "," +
         std::to_string(s.n_effective);
}

constexpr const char* kStatsHeader =
    "name,unit,truth,mean,bias,abs_error,rel_error_pct,std,n_effective";

std::string summary_csv(const std::vector<ParamStats>& stats) {
  std::string out = std::string(kStatsHeader) + "\n";
  for (const auto& s : stats) out += stats_row(s) + "\n";
  return out;
}

std::string histogram_csv(const Histogram& h) {
  std::string out = "bin_left,bin_right,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    out += format_number(h.edges[i]) + "," + format_number(h.edges[i + 1]) + "," +
           std::to_string(h.counts[i]) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Commands

struct CommonFlags {
  std::string scenario;
  std::string out;
  std::optional<int> trials;
  std::optional<int> looks;
  std::optional<std::uint64_t> seed;
  std::optional<int> starts;
  std::optional<std::uint64_t> start_seed;
  bool fix_imag_alpha = false;
};

RunConfig load_config(const CommonFlags& f) {
  RunConfig cfg = parse_scenario(f.scenario);
  if (f.trials) cfg.trials = *f.trials;
  if (f.looks) cfg.looks = *f.looks;
  if (f.seed) cfg.seed = *f.seed;
  if (f.starts) cfg.fit.n_random_starts = *f.starts;
  if (f.start_seed) {
    cfg.fit.start_seed = *f.start_seed;
    cfg.start_seed_given = true;
  }
  if (f.fix_imag_alpha) cfg.fit.fix_imag_alpha = true;
  if (!cfg.start_seed_given) cfg.fit.start_seed = mix_seed(cfg.seed);
  if (cfg.trials < 1) throw ValidationError("trials: must be at least 1");
  if (cfg.looks < 1) throw ValidationError("looks: must be at least 1");
  cfg.fit.validate();
  return cfg;
}

SpeckleConfig speckle_of(const RunConfig& cfg) {
  SpeckleConfig sp;
  sp.n_looks = cfg.looks;
  sp.seed = cfg.seed;
  return sp;
}

void cmd_simulate(const CommonFlags& f, std::ostream& out) {
  const RunConfig cfg = load_config(f);
  const json meta = base_meta("simulate", cfg);
  OutputDir dir(f.out);
  dir.write("meta.json", dump(meta));
  dir.write("matrix.json", dump(matrix_json(assemble(scenario_to_params(cfg.scenario)))));
  dir.commit();
  out << "entropy " << format_number(meta["entropy"].get<double>()) << "\n";
  out << "wrote " << (fs::path(f.out) / "matrix.json").string() << "\n";
}

void cmd_sample(const CommonFlags& f, std::ostream& out) {
  const RunConfig cfg = load_config(f);
  const CoherencyMatrix t = assemble(scenario_to_params(cfg.scenario));
  const auto samples = batch_samples(t, cfg.trials, speckle_of(cfg));
  std::string csv = "trial,t11,t22,t33,t12_re,t12_im,t13_re,t13_im,t23_re,t23_im\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    csv += std::to_string(i);
    for (double v : samples[i].components()) csv += "," + format_number(v);
    csv += "\n";
  }
  OutputDir dir(f.out);
  dir.write("meta.json", dump(base_meta("sample", cfg)));
  dir.write("samples.csv", csv);
  dir.commit();
  out << "wrote " << samples.size() << " samples to " << f.out << "\n";
}

void cmd_bench(const CommonFlags& f, int bins, std::ostream& out) {
  const RunConfig cfg = load_config(f);
  if (bins < 1) throw ValidationError("bins: must be at least 1");
  const TrialSet set = run_trials(cfg.scenario, cfg.trials, speckle_of(cfg), cfg.fit);
  const auto stats = summarize(set.records, set.info.truth);

  json meta = base_meta("bench", cfg);
  meta["n_converged"] = set.n_converged();
  meta["histogram_bins"] = bins;
  json hist_meta = json::object();

  OutputDir dir(f.out);
  for (const auto& s : stats) {
    const auto values = effective_values(set.records, set.info.truth, s.name);
    if (values.empty()) continue;
    Histogram h = histogram(values, bins);
    h.parameter = s.name;
    h.truth = s.truth;
    hist_meta[s.name] = {{"truth", h.truth},
                         {"n", static_cast<int>(values.size())},
                         {"underflow", h.underflow},
                         {"overflow", h.overflow},
                         {"unit", s.unit == StatUnit::Degrees ? "deg" : unit_name(s.unit)}};
    dir.write(fs::path("histograms") / (s.name + ".csv"), histogram_csv(h));
  }
  meta["histograms"] = hist_meta;
  dir.write("records.csv", records_csv(set.records));
  dir.write("summary.csv", summary_csv(stats));
  dir.write("meta.json", dump(meta));
  dir.commit();

  out << "entropy " << format_number(set.info.entropy) << ", converged " << set.n_converged()
      << "/" << set.records.size() << "\n";
  for (const auto& s : stats) {
    if (s.unit != StatUnit::Fraction) continue;
    out << s.name << ": rel_error_pct " << format_number(s.rel_error_pct) << ", std_pp "
        << format_number(s.std) << "\n";
  }
}

void cmd_sweep(const CommonFlags& f, const std::string& grid_spec, int points, std::ostream& out) {
  const RunConfig cfg = load_config(f);
  std::vector<double> grid;
  if (!grid_spec.empty()) {
    grid = parse_grid(grid_spec);
  } else {
    if (points < 2) throw ValidationError("fv-points: must be at least 2");
    const double p_d = cfg.scenario.span * cfg.scenario.fractions.double_bounce;
    const double f_max = p_d * kDefaultSweepVolumeShare / (1.0 - kDefaultSweepVolumeShare);
    for (int k = 0; k < points; ++k) grid.push_back(f_max * k / (points - 1));
  }
  const auto sweep = entropy_sweep(cfg.scenario, grid, cfg.trials, speckle_of(cfg), cfg.fit);

  std::string csv =
      "f_v,entropy,n_converged,pv_span_truth,pv_rel_error_pct,pv_abs_error_pp,pv_std_pp,"
      "pd_span_truth,pd_rel_error_pct,pd_abs_error_pp,pd_std_pp,ps_abs_error_pp,ps_std_pp,"
      "fv_rel_error_pct,fv_std,fd_rel_error_pct,fd_std\n";
  std::string long_csv = "f_v,entropy," + std::string(kStatsHeader) + "\n";
  json meta = base_meta("sweep", cfg);
  meta["fv_grid"] = grid;
  json entropies = json::array();
  for (const auto& p : sweep) {
    const auto& pv = p.stat("pv_span");
    const auto& pd = p.stat("pd_span");
    const auto& ps = p.stat("ps_span");
    const auto& fv = p.stat("f_v");
    const auto& fd = p.stat("f_d");
    const double row[] = {pv.truth, pv.rel_error_pct, pv.abs_error, pv.std,
                          pd.truth, pd.rel_error_pct, pd.abs_error, pd.std,
                          ps.abs_error, ps.std, fv.rel_error_pct, fv.std,
                          fd.rel_error_pct, fd.std};
    csv += format_number(p.f_v) + "," + format_number(p.entropy) + "," +
           std::to_string(p.n_converged);
    for (double v : row) csv += "," + format_number(v);
    csv += "\n";
    for (const auto& s : p.stats) {
      long_csv += format_number(p.f_v) + "," + format_number(p.entropy) + "," + stats_row(s) + "\n";
    }
    entropies.push_back(p.entropy);
  }
  meta["sweep_entropy"] = entropies;

  OutputDir dir(f.out);
  dir.write("sweep.csv", csv);
  dir.write("sweep_stats.csv", long_csv);
  dir.write("meta.json", dump(meta));
  dir.commit();
  out << "swept " << sweep.size() << " points, entropy " << format_number(sweep.front().entropy)
      << " .. " << format_number(sweep.back().entropy) << "\n";
}

void cmd_invert(const std::string& matrix_path, const std::string& out_dir, const FitOptions& opts,
                std::ostream& out) {
  const CoherencyMatrix t = read_matrix(matrix_path);
  const FitResult r = fit(t, opts);
  json j = {{"params", params_json(r.params)},
            {"cost", r.cost},
            {"converged", r.converged},
            {"stop_reason", stop_reason_name(r.stop_reason)},
            {"n_starts_used", r.n_starts_used},
            {"n_iterations", r.n_iterations},
            {"start_index_of_winner", r.start_index_of_winner},
            {"identifiable",
             {{"alpha", r.identifiable.alpha},
              {"beta", r.identifiable.beta},
              {"psi_d", r.identifiable.psi_d},
              {"psi_s", r.identifiable.psi_s}}},
            {"powers", powers_json(mechanism_powers(r.params))},
            {"t_residual", matrix_json(r.t_residual)},
            {"fit", fit_options_json(opts)}};
  try {
    j["input_entropy"] = entropy(t);
  } catch (const DomainError&) {
    j["input_entropy"] = nullptr;
  }
  if (!out_dir.empty()) {
    OutputDir dir(out_dir);
    dir.write("fit.json", dump(j));
    dir.commit();
  }
  out << dump(j);
}

int configure_threads(std::optional<int> flag) {
  int threads = 0;
  if (flag) {
    threads = *flag;
  } else if (const char* env = std::getenv(kThreadsEnv); env && *env) {
    try {
      threads = std::stoi(env);
    } catch (const std::exception&) {
      throw ValidationError(std::string(kThreadsEnv) + ": not an integer");
    }
  } else {
    threads = omp_get_num_procs();
  }
  if (threads < 1) throw ValidationError("threads: must be at least 1");
  omp_set_num_threads(threads);
  return threads;
}

}  // namespace

RunConfig parse_scenario_text(const std::string& text, const std::string& source) {
  return ScenarioParser(text, source).parse();
}

RunConfig parse_scenario(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError(path.string() + ": cannot open scenario file");
  std::stringstream buffer;
  buffer << is.rdbuf();
  return parse_scenario_text(buffer.str(), path.string());
}

CoherencyMatrix read_matrix(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError(path.string() + ": cannot open matrix file");
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw ValidationError(path.string() + ": matrix must be a JSON object");
  static const char* keys[] = {"t11",    "t22",    "t33",    "t12_re", "t12_im",
                               "t13_re", "t13_im", "t23_re", "t23_im"};
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(std::begin(keys), std::end(keys), [&](const char* k) { return key == k; })) {
      throw ValidationError(path.string() + ": " + key + ": unknown key");
    }
  }
  std::array<double, kObservables> c{};
  for (int i = 0; i < kObservables; ++i) {
    if (!j.contains(keys[i]) || !j.at(keys[i]).is_number()) {
      throw ValidationError(path.string() + ": " + keys[i] + ": missing or not a number");
    }
    c[i] = j.at(keys[i]).get<double>();
  }
  const CoherencyMatrix t = CoherencyMatrix::from_components(c);
  if (!(t.trace() > 0.0)) throw ValidationError(path.string() + ": trace must be positive");
  return t;
}

void write_matrix(const fs::path& path, const CoherencyMatrix& t) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError(path.string() + ": cannot open for writing");
  os << dump(matrix_json(t));
  if (!os) throw IoError(path.string() + ": write failed");
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::vector<double> parse_grid(const std::string& spec) {
  double lo = 0.0, hi = 0.0, step = 0.0;
  char c1 = 0, c2 = 0;
  std::istringstream is(spec);
  is.imbue(std::locale::classic());
  if (!(is >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' || !(is >> std::ws).eof()) {
    throw ValidationError("fv-grid: expected start:stop:step, got '" + spec + "'");
  }
  if (!(step > 0.0) || !(hi >= lo) || lo < 0.0) {
    throw ValidationError("fv-grid: need 0 <= start <= stop and step > 0");
  }
  const auto n = static_cast<long long>(std::floor((hi - lo) / step + 1e-9)) + 1;
  if (n > 100000) throw ValidationError("fv-grid: too many points");
  std::vector<double> grid;
  for (long long k = 0; k < n; ++k) grid.push_back(lo + step * static_cast<double>(k));
  return grid;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Monte Carlo benchmark for three-component PolSAR model-based decomposition"};
  app.name(kToolName);
  app.require_subcommand(1);

  std::optional<int> threads;
  app.add_option("--threads", threads,
                 "worker threads (default: $POLSAR_MCBENCH_THREADS or all cores)");

  CommonFlags flags;
  auto add_common = [&](CLI::App* sub, bool monte_carlo) {
    sub->add_option("--scenario", flags.scenario, "scenario JSON file")->required();
    sub->add_option("--out", flags.out, "output directory")->required();
    if (monte_carlo) {
      sub->add_option("--trials", flags.trials, "Monte Carlo trials");
      sub->add_option("--looks", flags.looks, "looks per speckled sample");
      sub->add_option("--seed", flags.seed, "master seed");
    }
    sub->add_option("--starts", flags.starts, "random starts per fit");
    sub->add_option("--start-seed", flags.start_seed, "seed of the random starts");
    sub->add_flag("--fix-imag-alpha", flags.fix_imag_alpha, "pin Im(alpha) to zero");
  };
  // threads accepted after the subcommand too
  auto add_threads = [&](CLI::App* sub) {
    sub->add_option("--threads", threads, "worker threads");
  };

  auto* simulate = app.add_subcommand("simulate", "noise-free T, entropy and powers");
  add_common(simulate, false);
  add_threads(simulate);
  auto* sample = app.add_subcommand("sample", "speckled multilook samples");
  add_common(sample, true);
  add_threads(sample);
  int bins = kDefaultBins;
  auto* bench = app.add_subcommand("bench", "full Monte Carlo: records, statistics, histograms");
  add_common(bench, true);
  add_threads(bench);
  bench->add_option("--bins", bins, "histogram bins");
  std::string grid_spec;
  int points = kDefaultSweepPoints;
  auto* sweep = app.add_subcommand("sweep", "volume sweep at fixed double bounce");
  add_common(sweep, true);
  add_threads(sweep);
  sweep->add_option("--fv-grid", grid_spec, "f_v grid start:stop:step (power units)");
  sweep->add_option("--fv-points", points,
                    "points of the default grid (0 to 90% volume share)");

  std::string matrix_path;
  std::string invert_out;
  FitOptions invert_opts;
  std::optional<int> invert_starts;
  std::optional<std::uint64_t> invert_seed;
  bool invert_fix = false;
  auto* invert = app.add_subcommand("invert", "fit one matrix file");
  invert->add_option("--matrix", matrix_path, "matrix JSON file")->required();
  invert->add_option("--out", invert_out, "optional output directory for fit.json");
  invert->add_option("--starts", invert_starts, "random starts");
  invert->add_option("--start-seed", invert_seed, "seed of the random starts");
  invert->add_flag("--fix-imag-alpha", invert_fix, "pin Im(alpha) to zero");
  add_threads(invert);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    configure_threads(threads);
    if (simulate->parsed()) {
      cmd_simulate(flags, out);
    } else if (sample->parsed()) {
      cmd_sample(flags, out);
    } else if (bench->parsed()) {
      cmd_bench(flags, bins, out);
    } else if (sweep->parsed()) {
      cmd_sweep(flags, grid_spec, points, out);
    } else if (invert->parsed()) {
      if (invert_starts) invert_opts.n_random_starts = *invert_starts;
      if (invert_seed) invert_opts.start_seed = *invert_seed;
      invert_opts.fix_imag_alpha = invert_fix;
      cmd_invert(matrix_path, invert_out, invert_opts, out);
    }
  } catch (const IoError& e) {
    err << kToolName << ": I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << kToolName << ": I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << kToolName << ": error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}

}  // namespace polsar::cli
