#include "tankseis/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "tankseis/beamtank.hpp"
#include "tankseis/config.hpp"
#include "tankseis/gmproc.hpp"
#include "tankseis/mechmodel.hpp"
#include "tankseis/model.hpp"
#include "tankseis/simulate.hpp"
#include "tankseis/sloshfem.hpp"
#include "tankseis/uplift.hpp"

namespace tankseis::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct Common {
  std::string out;
  int jobs = 1;
  unsigned seed = 0;  // reserved; every algorithm is deterministic
  bool validate_only = false;
};

std::string default_out_dir() {
  const char* env = std::getenv("TANKSEIS_OUT");
  return (env && *env) ? env : "tankseis_out";
}

std::string data_dir() {
  const char* env = std::getenv("TANKSEIS_DATA_DIR");
  return (env && *env) ? env : TANKSEIS_DATA_DIR;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct SpecSource {
  TankSpec spec;
  std::string origin;
};

SpecSource resolve_spec(const std::string& name) {
  SpecSource s;
  if (name == "slender") {
    s.spec = slender_tank();
    s.origin = "bundled:slender";
  } else if (name == "broad") {
    s.spec = broad_tank();
    s.origin = "bundled:broad";
  } else {
    s.spec = load_spec(name);
    s.origin = name;
  }
  require_valid(s.spec);
  return s;
}

GroundMotion resolve_record(const std::string& path, const std::string& format) {
  if (path.empty()) throw ConfigError("a record path is required (--record)");
  if (!fs::exists(path)) throw ConfigError("record '" + path + "' does not exist");
  return load_record(path, format.empty() ? format_from_path(path) : parse_format(format));
}

json spec_json(const SpecSource& s) {
  return json{{"origin", s.origin}, {"resolved", format_spec(s.spec)}};
}

/// Writes artifacts under the output directory, each with a JSON sidecar
/// carrying the resolved configuration.
class Output {
 public:
  Output(std::string dir, json config) : dir_(std::move(dir)), config_(std::move(config)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir_ + "': " + ec.message());
  }

  void write(const std::string& name, const std::string& content, const json& extra = json::object()) {
    put(name, content);
    json side{{"artifact", name}, {"config", config_}};
    for (const auto& [k, v] : extra.items()) side[k] = v;
    put(name + ".meta.json", side.dump(2) + "\n");
  }

  std::string path(const std::string& name) const { return (fs::path(dir_) / name).string(); }

 private:
  void put(const std::string& name, const std::string& content) {
    std::ofstream o(path(name), std::ios::binary | std::ios::trunc);
    if (!o) throw ConfigError("cannot write '" + path(name) + "'");
    o << content;
    if (!o) throw ConfigError("write failed for '" + path(name) + "'");
  }

  std::string dir_;
  json config_;
};

std::optional<json> reference_values() {
  const fs::path p = fs::path(data_dir()) / "reference_values.json";
  if (!fs::exists(p)) return std::nullopt;
  return json::parse(read_text(p.string()));
}

std::optional<double> reference(const std::optional<json>& ref, const std::string& tank, const std::string& row,
                                const std::string& column) {
  if (!ref) return std::nullopt;
  const auto& t = (*ref)["modal_periods_s"];
  if (!t.contains(tank) || !t[tank].contains(row) || !t[tank][row].contains(column)) return std::nullopt;
  return t[tank][row][column].get<double>();
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::string cell(const std::optional<double>& v, int digits = 3) { return v ? fixed(*v, digits) : "-"; }

void check_range(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

// ---------------------------------------------------------------- modal

struct ModalOptions {
  std::string spec = "broad";
  std::string method = "all";
  double mesh = 0.02;
  int modes = 3;
  int dump_mode = 0;
  std::string grading = "uniform";
  bool compressible = false;
  int stations = 100;
  bool no_timoshenko = false;
};

struct ModalTable {
  std::vector<std::string> rows;
  std::vector<std::optional<double>> en, fe, ref_fe, ref_code;
};

std::string material_line(const TankSpec& s) {
  std::ostringstream os;
  os << "shell " << s.shell.grade << ": E = " << format_double(s.shell.elastic_modulus)
     << " Pa, nu = " << format_double(s.shell.poisson_ratio) << ", density = " << format_double(s.shell.density)
     << " kg/m3; wall thickness " << format_double(s.geometry.shell_thickness) << " m";
  return os.str();
}

std::string render_table(const std::string& title, const ModalTable& t) {
  std::ostringstream os;
  os << title << "\n";
  os << std::left << std::setw(28) << "Vibration mode" << std::right << std::setw(12) << "EN formula" << std::setw(12)
     << "FE/beam" << std::setw(14) << "Reference FE" << std::setw(16) << "Reference code" << std::setw(12)
     << "dev FE %" << "\n";
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    std::string dev = "-";
    if (t.fe[i] && t.ref_fe[i]) dev = fixed(100.0 * (*t.fe[i] / *t.ref_fe[i] - 1.0), 1);
    os << std::left << std::setw(28) << t.rows[i] << std::right << std::setw(12) << cell(t.en[i]) << std::setw(12)
       << cell(t.fe[i]) << std::setw(14) << cell(t.ref_fe[i]) << std::setw(16) << cell(t.ref_code[i]) << std::setw(12)
       << dev << "\n";
  }
  return os.str();
}

struct ModalResult {
  ModalTable table;
  std::optional<EigenSolution> fe;
  std::optional<ImpulsiveMode> beam;
};

ModalResult compute_modal(const TankSpec& spec, const ModalOptions& o) {
  const bool en = o.method == "all" || o.method == "en";
  const bool fe = o.method == "all" || o.method == "fe";
  const bool beam = o.method == "all" || o.method == "beam";
  ModalResult r;
  const auto ref = reference_values();
  const std::string tank = spec.name;
  r.table.rows.push_back("First impulsive, T_i (s)");
  std::vector<std::string> keys{"impulsive"};
  const char* ordinal[] = {"First", "Second", "Third"};
  for (int k = 1; k <= o.modes; ++k) {
    r.table.rows.push_back((k <= 3 ? std::string(ordinal[k - 1]) : "Mode " + std::to_string(k)) +
                           " convective, T_c" + std::to_string(k) + " (s)");
    keys.push_back("convective_" + std::to_string(k));
  }
  const std::size_t n = r.table.rows.size();
  r.table.en.assign(n, std::nullopt);
  r.table.fe.assign(n, std::nullopt);
  for (const auto& k : keys) {
    r.table.ref_fe.push_back(reference(ref, tank, k, "fe"));
    r.table.ref_code.push_back(reference(ref, tank, k, "code"));
  }
  if (en) {
    r.table.en[0] = impulsive_params(spec).period;
    const auto cm = convective_params(spec, o.modes);
    for (int k = 0; k < o.modes; ++k) r.table.en[static_cast<std::size_t>(k) + 1] = cm[static_cast<std::size_t>(k)].period;
  }
  if (fe) {
    const MeshGrading g = o.grading == "surface_refined" ? MeshGrading::surface_refined : MeshGrading::uniform;
    r.fe = solve_sloshing(spec.geometry, spec.liquid, spec.gravity, o.mesh, 1, o.modes, o.compressible, g);
    for (int k = 0; k < o.modes; ++k) r.table.fe[static_cast<std::size_t>(k) + 1] = r.fe->period(k);
  }
  if (beam) {
    BeamOptions bo;
    bo.stations = o.stations;
    bo.timoshenko = !o.no_timoshenko;
    r.beam = impulsive_mode(spec, bo);
    r.table.fe[0] = r.beam->period;
  }
  return r;
}

int cmd_modal(const Common& c, const ModalOptions& o) {
  const SpecSource s = resolve_spec(o.spec);
  check_range(o.method == "all" || o.method == "fe" || o.method == "beam" || o.method == "en",
              "--method must be one of all, fe, beam, en");
  check_range(o.modes >= 1 && o.modes <= 50, "--modes must lie in [1, 50]");
  check_range(o.mesh > 0.0 && o.mesh <= std::min(s.spec.geometry.radius, s.spec.geometry.fill_height),
              "--mesh must lie in (0, min(R, H)]");
  check_range(o.grading == "uniform" || o.grading == "surface_refined", "--grading must be uniform or surface_refined");
  check_range(o.stations >= 3 && o.stations <= 2000, "--stations must lie in [3, 2000]");
  check_range(o.dump_mode >= 0 && o.dump_mode <= o.modes, "--dump-mode must lie in [0, --modes]");
  if (c.validate_only) return kExitOk;

  json cfg{{"command", "modal"}, {"spec", spec_json(s)}, {"method", o.method}, {"mesh_m", o.mesh},
           {"modes", o.modes}, {"grading", o.grading}, {"compressible", o.compressible},
           {"stations", o.stations}, {"timoshenko", !o.no_timoshenko}};
  Output out(c.out, cfg);
  const ModalResult r = compute_modal(s.spec, o);
  const std::string text = render_table("Natural periods, " + s.spec.name + " tank", r.table) +
                           "Assumed " + material_line(s.spec) + "\n";
  std::cout << text;

  std::ostringstream csv;
  csv << "mode,en_s,fe_beam_s,reference_fe_s,reference_code_s\n";
  json rows = json::array();
  for (std::size_t i = 0; i < r.table.rows.size(); ++i) {
    auto f = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    csv << '"' << r.table.rows[i] << "\"," << f(r.table.en[i]) << ',' << f(r.table.fe[i]) << ','
        << f(r.table.ref_fe[i]) << ',' << f(r.table.ref_code[i]) << '\n';
    auto jv = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    rows.push_back({{"mode", r.table.rows[i]}, {"en_s", jv(r.table.en[i])}, {"fe_beam_s", jv(r.table.fe[i])},
                    {"reference_fe_s", jv(r.table.ref_fe[i])}, {"reference_code_s", jv(r.table.ref_code[i])}});
  }
  out.write("modal.csv", csv.str());
  json summary{{"tank", s.spec.name}, {"material", material_line(s.spec)}, {"rows", rows}};
  if (r.fe) {
    summary["fe_lanczos_steps"] = r.fe->lanczos_steps;
    summary["fe_max_residual"] = r.fe->residuals.maxCoeff();
  }
  if (r.beam) {
    summary["beam_iterations"] = r.beam->iterations;
    summary["beam_trajectory_s"] = r.beam->trajectory;
  }
  out.write("modal.json", summary.dump(2) + "\n");
  out.write("modal.txt", text);
  if (o.dump_mode > 0 && r.fe) {
    out.write("mesh_nodes.csv", mesh_nodes_csv(*r.fe->mesh));
    out.write("mesh_elements.csv", mesh_elements_csv(*r.fe->mesh));
    out.write("mode_" + std::to_string(o.dump_mode) + ".csv", mode_csv(*r.fe, o.dump_mode - 1));
  }
  if (o.dump_mode > 0 && r.beam) out.write("impulsive_shape.csv", mode_shape_csv(*r.beam, 101));
  return kExitOk;
}

// ---------------------------------------------------------------- spectrum

struct SpectrumOptions {
  std::string record, format;
  double damping = 0.05;
  double tmin = 0.02, tmax = 5.0;
  int count = 100;
};

int cmd_spectrum(const Common& c, const SpectrumOptions& o) {
  const GroundMotion gm = resolve_record(o.record, o.format);
  check_range(o.damping >= 0.0 && o.damping < 1.0, "--damping must lie in [0, 1)");
  check_range(o.tmin > 0.0 && o.tmax > o.tmin, "--tmin and --tmax must satisfy 0 < tmin < tmax");
  check_range(o.count >= 2 && o.count <= 10000, "--count must lie in [2, 10000]");
  if (c.validate_only) return kExitOk;

  json cfg{{"command", "spectrum"}, {"record", o.record}, {"format", to_string(gm.format)},
           {"damping", o.damping}, {"tmin_s", o.tmin}, {"tmax_s", o.tmax}, {"count", o.count}};
  Output out(c.out, cfg);
  std::vector<double> periods(static_cast<std::size_t>(o.count));
  for (int k = 0; k < o.count; ++k)
    periods[static_cast<std::size_t>(k)] = o.tmin * std::pow(o.tmax / o.tmin, static_cast<double>(k) / (o.count - 1));
  const auto sa = response_spectrum(gm, o.damping, periods, c.jobs);
  std::ostringstream csv;
  csv << "period_s,psa_m_s2\n";
  for (std::size_t k = 0; k < periods.size(); ++k) csv << format_double(periods[k]) << ',' << format_double(sa[k]) << '\n';
  out.write("spectrum.csv", csv.str());
  const PeakValues pk = peaks(gm);
  json summary{{"record", gm.name}, {"dt_s", gm.dt}, {"samples", gm.size()},
               {"pga_m_s2", pk.pga}, {"pgv_m_s", pk.pgv}, {"pgd_m", pk.pgd}};
  summary["baseline_correction"] = "linear_velocity_detrend";
  out.write("spectrum_summary.json", summary.dump(2) + "\n");
  std::cout << "PGA " << format_double(pk.pga) << " m/s2, PGD " << format_double(pk.pgd) << " m; "
            << periods.size() << " spectral ordinates written\n";
  return kExitOk;
}

// ---------------------------------------------------------------- pressure profile

struct ProfileOptions {
  std::string spec = "broad";
  int points = 101;
  int modes = 3;
  double impulsive_accel = 1.0;
  double convective_accel = 1.0;
  int stations = 100;
  bool no_flexible = false;
};

int cmd_profile(const Common& c, const ProfileOptions& o) {
  const SpecSource s = resolve_spec(o.spec);
  check_range(o.points >= 2 && o.points <= 100001, "--points must lie in [2, 100001]");
  check_range(o.modes >= 1 && o.modes <= 50, "--modes must lie in [1, 50]");
  check_range(o.stations >= 3 && o.stations <= 2000, "--stations must lie in [3, 2000]");
  if (c.validate_only) return kExitOk;

  json cfg{{"command", "pressure-profile"}, {"spec", spec_json(s)}, {"points", o.points}, {"modes", o.modes},
           {"impulsive_accel_m_s2", o.impulsive_accel}, {"convective_accel_m_s2", o.convective_accel},
           {"stations", o.stations}, {"flexible", !o.no_flexible}};
  Output out(c.out, cfg);
  const auto grid = uniform_grid(o.points);
  std::vector<PressureProfile> parts{rigid_impulsive_pressure_profile(s.spec, grid)};
  std::vector<double> accels{o.impulsive_accel};
  for (const auto& m : convective_params(s.spec, o.modes)) {
    parts.push_back(convective_pressure_profile(m, s.spec, grid));
    accels.push_back(o.convective_accel);
  }
  const PressureProfile srss = combine_srss(parts, accels);
  const PressureProfile absolute = combine_absolute(parts, accels);
  std::optional<PressureProfile> flexible;
  if (!o.no_flexible) {
    BeamOptions bo;
    bo.stations = o.stations;
    const ImpulsiveMode im = impulsive_mode(s.spec, bo);
    flexible = flexible_impulsive_pressure_profile(s.spec, im.shape, grid);
  }
  std::ostringstream csv;
  csv << "zeta,rigid_impulsive_Pa";
  for (int k = 1; k <= o.modes; ++k) csv << ",convective_" << k << "_Pa";
  if (flexible) csv << ",flexible_impulsive_Pa";
  csv << ",srss_Pa,absolute_Pa\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    csv << format_double(grid[i]) << ',' << format_double(parts[0].pressure[k] * accels[0]);
    for (std::size_t j = 1; j < parts.size(); ++j) csv << ',' << format_double(parts[j].pressure[k] * accels[j]);
    if (flexible) csv << ',' << format_double(flexible->pressure[k] * o.impulsive_accel);
    csv << ',' << format_double(srss.pressure[k]) << ',' << format_double(absolute.pressure[k]) << '\n';
  }
  out.write("pressure_profile.csv", csv.str());
  json summary{{"tank", s.spec.name},
               {"rigid_impulsive_resultant_kg", wall_resultant(parts[0], s.spec)},
               {"impulsive_mass_kg", impulsive_params(s.spec).mass},
               {"rigid_series_terms", parts[0].terms}};
  if (flexible) summary["flexible_series_terms"] = flexible->terms;
  out.write("pressure_profile.json", summary.dump(2) + "\n");
  std::cout << "wall resultant " << format_double(summary["rigid_impulsive_resultant_kg"].get<double>())
            << " kg vs impulsive mass " << format_double(summary["impulsive_mass_kg"].get<double>()) << " kg\n";
  return kExitOk;
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
  std::string spec = "broad";
  std::string record, format;
  bool froude = false;
  int modes = 3;
  bool uplift = false;
  double convective_damping = 0.005;
  double structural_damping = 0.02;
  double impulsive_period = 0.0;
  double dt_sub = 0.0;
  double theta_max = 0.02;
  int sectors = 72;
  std::string end = "rotation_spring";
};

std::vector<double> rotation_grid(double theta_max, int count) {
  std::vector<double> th{0.0};
  for (int k = 0; k < count; ++k) th.push_back(theta_max * std::pow(10.0, -6.0 + 6.0 * k / (count - 1)));
  return th;
}

struct SimulationRun {
  ResponseHistory history;
  PeakReport peaks;
};

SimulationRun run_simulation(const TankSpec& spec, const GroundMotion& gm, const SimulateOptions& o, int jobs) {
  SystemOptions so;
  so.convective_modes = o.modes;
  so.convective_damping = o.convective_damping;
  so.structural_damping = o.structural_damping;
  so.impulsive_period = o.impulsive_period;
  std::optional<MomentRotationCurve> mr;
  if (o.uplift) {
    MomentRotationOptions mo;
    mo.sectors = o.sectors;
    mo.end = parse_end_restraint(o.end);
    mo.jobs = jobs;
    mr = moment_rotation(spec, rotation_grid(o.theta_max, 61), mo);
  }
  const ReducedSystem sys = assemble_system(spec, so, mr ? &*mr : nullptr);
  NewmarkParams np;
  np.dt_sub = o.dt_sub;
  SimulationRun r;
  r.history = newmark(sys, gm, np);
  r.peaks = peak_report(r.history, spec);
  return r;
}

json peaks_json(const PeakReport& p, const ResponseHistory& h) {
  json probes = json::array();
  for (std::size_t i = 0; i < p.probes.size(); ++i)
    probes.push_back({{"zeta", p.probes[i]}, {"peak_Pa", p.wall_pressure[i].value}, {"time_s", p.wall_pressure[i].time}});
  return json{{"Sloshing wave height", {{"eta_max_m", p.wave_height.value}, {"time_s", p.wave_height.time}}},
              {"Uplift displacement", {{"w_max_m", p.uplift.value}, {"time_s", p.uplift.time}}},
              {"base_shear_N", {{"peak", p.base_shear.value}, {"time_s", p.base_shear.time}}},
              {"overturning_moment_Nm", {{"peak", p.moment.value}, {"time_s", p.moment.time}}},
              {"base_edge_pressure_Pa", {{"peak", p.base_edge_pressure.value}, {"time_s", p.base_edge_pressure.time}}},
              {"wall_pressure", probes},
              {"freeboard_m", p.freeboard},
              {"freeboard_exceeded", p.freeboard_exceeded},
              {"energy_residual", h.energy_residual()},
              {"dt_sub_s", h.dt},
              {"steps", h.steps()}};
}

void check_simulate(const SpecSource& s, const SimulateOptions& o) {
  check_range(o.modes >= 1 && o.modes <= 50, "--modes must lie in [1, 50]");
  check_range(o.convective_damping >= 0.0 && o.convective_damping < 1.0, "--conv-damping must lie in [0, 1)");
  check_range(o.structural_damping >= 0.0 && o.structural_damping < 1.0, "--damping must lie in [0, 1)");
  check_range(o.impulsive_period >= 0.0, "--impulsive-period must be >= 0");
  check_range(o.dt_sub >= 0.0, "--dt-sub must be >= 0");
  check_range(o.theta_max > 0.0 && o.theta_max < 0.5, "--theta-max must lie in (0, 0.5)");
  check_range(o.sectors >= 72, "--sectors must be >= 72");
  parse_end_restraint(o.end);
  if (o.uplift && s.spec.geometry.anchorage == Anchorage::anchored)
    throw ConfigError("--uplift requires an unanchored tank");
}

int cmd_simulate(const Common& c, const SimulateOptions& o) {
  const SpecSource s = resolve_spec(o.spec);
  GroundMotion gm = resolve_record(o.record, o.format);
  check_simulate(s, o);
  if (o.froude) gm = froude_scale(gm, s.spec.scale);
  if (o.dt_sub > gm.dt) throw ConfigError("--dt-sub must not exceed the record step");
  if (c.validate_only) return kExitOk;

  json cfg{{"command", "simulate"}, {"spec", spec_json(s)}, {"record", o.record}, {"format", to_string(gm.format)},
           {"froude", o.froude}, {"modes", o.modes}, {"uplift", o.uplift},
           {"convective_damping", o.convective_damping}, {"structural_damping", o.structural_damping},
           {"impulsive_period_s", o.impulsive_period}, {"dt_sub_s", o.dt_sub}, {"theta_max_rad", o.theta_max},
           {"sectors", o.sectors}, {"end_restraint", o.end}};
  Output out(c.out, cfg);
  const SimulationRun r = run_simulation(s.spec, gm, o, c.jobs);
  out.write("response.csv", response_csv(r.history));
  out.write("peaks.json", peaks_json(r.peaks, r.history).dump(2) + "\n");
  std::cout << "eta_max " << format_double(r.peaks.wave_height.value) << " m, w_max "
            << format_double(r.peaks.uplift.value) << " m, base shear " << format_double(r.peaks.base_shear.value)
            << " N" << (r.peaks.freeboard_exceeded ? " (freeboard exceeded)" : "") << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- uplift curve

struct UpliftOptions {
  std::string spec = "broad";
  int samples = 60;
  int nodes = 200;
  std::string end = "rotation_spring";
  double theta_max = 0.01;
  int rotations = 41;
  int sectors = 72;
  double bearing = 0.0;
};

int cmd_uplift(const Common& c, const UpliftOptions& o) {
  const SpecSource s = resolve_spec(o.spec);
  check_range(o.samples >= 2 && o.samples <= 10000, "--samples must lie in [2, 10000]");
  check_range(o.nodes >= 10 && o.nodes <= 20000, "--nodes must lie in [10, 20000]");
  check_range(o.theta_max > 0.0 && o.theta_max < 0.5, "--theta-max must lie in (0, 0.5)");
  check_range(o.rotations >= 2 && o.rotations <= 10000, "--rotations must lie in [2, 10000]");
  check_range(o.sectors >= 72, "--sectors must be >= 72");
  check_range(o.bearing >= 0.0, "--bearing-stiffness must be >= 0");
  const EndRestraint end = parse_end_restraint(o.end);
  if (s.spec.geometry.anchorage == Anchorage::anchored)
    throw ConfigError("uplift-curve requires an unanchored tank");
  if (c.validate_only) return kExitOk;

  json cfg{{"command", "uplift-curve"}, {"spec", spec_json(s)}, {"samples", o.samples}, {"nodes", o.nodes},
           {"end_restraint", o.end}, {"theta_max_rad", o.theta_max}, {"rotations", o.rotations},
           {"sectors", o.sectors}, {"bearing_stiffness", o.bearing}};
  Output out(c.out, cfg);
  std::vector<double> th(static_cast<std::size_t>(o.rotations));
  for (int k = 0; k < o.rotations; ++k) th[static_cast<std::size_t>(k)] = o.theta_max * k / (o.rotations - 1);
  MomentRotationOptions mo;
  mo.sectors = o.sectors;
  mo.nodes = o.nodes;
  mo.curve_samples = o.samples;
  mo.end = end;
  mo.bearing_stiffness = o.bearing;
  mo.jobs = c.jobs;
  const MomentRotationCurve mr = moment_rotation(s.spec, th, mo);
  out.write("uplift_curve.csv", uplift_curve_csv(mr.strip_curve));
  out.write("moment_rotation.csv", moment_rotation_csv(mr));
  json summary{{"strip_rigidity_Nm", mr.strip.rigidity}, {"strip_load_Pa", mr.strip.load},
               {"strip_length_m", mr.strip.length}, {"junction_spring_Nm_per_rad", mr.strip.spring},
               {"bearing_stiffness_N_per_m2", mr.bearing_stiffness},
               {"plastic_hinge_moment_Nm_per_m", mr.plastic.hinge_moment},
               {"first_yield_uplift_m",
                mr.plastic.first_yield_uplift ? json(*mr.plastic.first_yield_uplift) : json(nullptr)}};
  out.write("uplift_summary.json", summary.dump(2) + "\n");
  std::cout << "moment at " << format_double(o.theta_max) << " rad: " << format_double(mr.samples.back().moment)
            << " N m; first yield uplift "
            << (mr.plastic.first_yield_uplift ? format_double(*mr.plastic.first_yield_uplift) + " m"
                                              : std::string("not reached"))
            << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- scale record

struct ScaleOptions {
  std::string record, format, spec;
  double lambda = 0.0;
};

int cmd_scale(const Common& c, const ScaleOptions& o) {
  const GroundMotion gm = resolve_record(o.record, o.format);
  double lambda = o.lambda;
  std::string origin = "--lambda";
  if (lambda == 0.0) {
    if (o.spec.empty()) throw ConfigError("scale-record needs --lambda or --spec");
    lambda = resolve_spec(o.spec).spec.scale.length_ratio;
    origin = "spec " + o.spec;
  }
  check_range(lambda > 0.0 && lambda <= 1e3, "length ratio must lie in (0, 1000]");
  if (c.validate_only) return kExitOk;

  json cfg{{"command", "scale-record"}, {"record", o.record}, {"format", to_string(gm.format)},
           {"length_ratio", lambda}, {"length_ratio_from", origin}};
  Output out(c.out, cfg);
  ScaleModel sm;
  sm.length_ratio = lambda;
  const GroundMotion scaled = froude_scale(gm, sm);
  const fs::path p(o.record);
  const std::string name = p.stem().string() + "_froude" + p.extension().string();
  const PeakValues pk = peaks(scaled);
  const json extra{{"peaks", {{"pga_m_s2", pk.pga}, {"pgv_m_s", pk.pgv}, {"pgd_m", pk.pgd}}},
                   {"baseline_correction", "linear_velocity_detrend"}};
  out.write(name, format_record(scaled), extra);
  std::cout << "dt " << format_double(gm.dt) << " s -> " << format_double(scaled.dt) << " s (x"
            << format_double(scaled.dt / gm.dt) << ")\n";
  return kExitOk;
}

// ---------------------------------------------------------------- report

struct ReportOptions {
  std::vector<std::string> specs{"slender", "broad"};
  std::string chichi, northridge, format;
  double mesh = 0.02;
  int stations = 100;
};

int cmd_report(const Common& c, const ReportOptions& o) {
  std::vector<SpecSource> specs;
  for (const auto& s : o.specs) specs.push_back(resolve_spec(s));
  std::optional<GroundMotion> chichi, northridge;
  if (!o.chichi.empty()) chichi = resolve_record(o.chichi, o.format);
  if (!o.northridge.empty()) northridge = resolve_record(o.northridge, o.format);
  for (const auto& s : specs)
    check_range(o.mesh > 0.0 && o.mesh <= std::min(s.spec.geometry.radius, s.spec.geometry.fill_height),
                "--mesh must lie in (0, min(R, H)] for every tank");
  if (c.validate_only) return kExitOk;

  json cfg{{"command", "report"}, {"mesh_m", o.mesh}, {"stations", o.stations}, {"chichi", o.chichi},
           {"northridge", o.northridge}};
  json jspecs = json::array();
  for (const auto& s : specs) jspecs.push_back(spec_json(s));
  cfg["specs"] = jspecs;
  Output out(c.out, cfg);

  std::ostringstream text;
  json doc{{"modal", json::array()}};
  ModalOptions mo;
  mo.mesh = o.mesh;
  mo.stations = o.stations;
  for (const auto& s : specs) {
    const ModalResult r = compute_modal(s.spec, mo);
    text << render_table("Natural periods, " + s.spec.name + " tank", r.table);
    text << "  assumed " << material_line(s.spec) << "\n";
    text << "  total mass " << fixed(total_mass(s.spec), 1) << " kg, impulsive mass "
         << fixed(impulsive_params(s.spec).mass, 1) << " kg\n\n";
    json rows = json::array();
    for (std::size_t i = 0; i < r.table.rows.size(); ++i) {
      auto jv = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
      rows.push_back({{"mode", r.table.rows[i]}, {"en_s", jv(r.table.en[i])}, {"fe_beam_s", jv(r.table.fe[i])},
                      {"reference_fe_s", jv(r.table.ref_fe[i])}, {"reference_code_s", jv(r.table.ref_code[i])}});
    }
    doc["modal"].push_back({{"tank", s.spec.name}, {"rows", rows}});
  }

  const auto ref = reference_values();
  auto refv = [&](const char* row, const char* col) -> std::optional<double> {
    if (!ref) return std::nullopt;
    return (*ref)["broad_peak_response"][row][col].get<double>();
  };
  text << "Peak response, broad tank\n";
  text << std::left << std::setw(34) << "Demand" << std::right << std::setw(14) << "xi_c = 0.5%" << std::setw(14)
       << "xi_c = 2%" << std::setw(16) << "Ref spring-mass" << std::setw(10) << "Ref FE" << std::setw(10)
       << "Ref test" << "\n";
  const SpecSource* broad = nullptr;
  for (const auto& s : specs)
    if (s.spec.name == "broad") broad = &s;
  json peaks = json::object();
  auto row = [&](const std::string& label, const char* key, const std::optional<GroundMotion>& gm, bool uplift) {
    std::optional<double> v05, v2;
    if (gm && broad) {
      for (double xi : {0.005, 0.02}) {
        SimulateOptions so;
        so.convective_damping = xi;
        so.uplift = uplift && broad->spec.geometry.anchorage == Anchorage::unanchored;
        const SimulationRun r = run_simulation(broad->spec, *gm, so, c.jobs);
        const double v = uplift ? r.peaks.uplift.value : r.peaks.wave_height.value;
        (xi < 0.01 ? v05 : v2) = v;
      }
    }
    text << std::left << std::setw(34) << label << std::right << std::setw(14) << cell(v05) << std::setw(14)
         << cell(v2) << std::setw(16) << cell(refv(key, "spring_mass")) << std::setw(10) << cell(refv(key, "fe"))
         << std::setw(10) << cell(refv(key, "test")) << "\n";
    peaks[key] = {{"xi_c_0.005", v05 ? json(*v05) : json(nullptr)}, {"xi_c_0.02", v2 ? json(*v2) : json(nullptr)}};
  };
  row("Sloshing wave height, eta_max (m)", "wave_height_m", chichi, false);
  row("Uplift displacement, w (m)", "uplift_m", northridge, true);
  if (!chichi || !northridge) text << "  (rows without a supplied record are left blank)\n";
  doc["broad_peak_response"] = peaks;

  std::cout << text.str();
  out.write("report.txt", text.str());
  out.write("report.json", doc.dump(2) + "\n");
  return kExitOk;
}

}  // namespace

int run(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args);
}

int run(const std::vector<std::string>& args_in) {
  CLI::App app{"Seismic response of cylindrical liquid-storage tanks"};
  app.require_subcommand(1);
  app.fallthrough();
  Common c;
  c.out = default_out_dir();
  app.add_option("--out", c.out, "Output directory (default: $TANKSEIS_OUT or ./tankseis_out)");
  app.add_option("--jobs", c.jobs, "Worker threads for parallel loops")->check(CLI::Range(1, 256));
  app.add_option("--seed", c.seed, "Reserved; all algorithms are deterministic");
  app.add_flag("--validate-only", c.validate_only, "Check inputs and exit without computing");

  ModalOptions mo;
  auto* modal = app.add_subcommand("modal", "Natural periods: code formulas, sloshing FE, flexible-wall beam");
  modal->add_option("--spec", mo.spec, "Tank spec file or bundled name (slender, broad)");
  modal->add_option("--method", mo.method, "all | en | fe | beam");
  modal->add_option("--mesh", mo.mesh, "FE element size, m");
  modal->add_option("--modes", mo.modes, "Convective modes");
  modal->add_option("--dump-mode", mo.dump_mode, "Write mesh and this mode (1-based) to CSV");
  modal->add_option("--grading", mo.grading, "uniform | surface_refined");
  modal->add_flag("--compressible", mo.compressible, "Include liquid compressibility");
  modal->add_option("--stations", mo.stations, "Beam stations");
  modal->add_flag("--no-timoshenko", mo.no_timoshenko, "Euler-Bernoulli beam");

  SpectrumOptions so;
  auto* spectrum = app.add_subcommand("spectrum", "Pseudo-acceleration response spectrum of a record");
  spectrum->add_option("--record", so.record, "Record file")->required();
  spectrum->add_option("--format", so.format, "csv | single | peer (default from extension)");
  spectrum->add_option("--damping", so.damping, "Damping ratio");
  spectrum->add_option("--tmin", so.tmin, "Shortest period, s");
  spectrum->add_option("--tmax", so.tmax, "Longest period, s");
  spectrum->add_option("--count", so.count, "Number of periods (log spaced)");

  ProfileOptions po;
  auto* profile = app.add_subcommand("pressure-profile", "Wall pressure profiles per unit acceleration");
  profile->add_option("--spec", po.spec, "Tank spec file or bundled name");
  profile->add_option("--points", po.points, "Grid points on [0, 1]");
  profile->add_option("--modes", po.modes, "Convective modes");
  profile->add_option("--impulsive-accel", po.impulsive_accel, "Impulsive demand for combined columns, m/s2");
  profile->add_option("--convective-accel", po.convective_accel, "Convective demand per mode, m/s2");
  profile->add_option("--stations", po.stations, "Beam stations for the flexible profile");
  profile->add_flag("--no-flexible", po.no_flexible, "Skip the flexible-wall profile");

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Time-history response of the spring-mass model");
  simulate->add_option("--spec", sim.spec, "Tank spec file or bundled name");
  simulate->add_option("--record", sim.record, "Record file")->required();
  simulate->add_option("--format", sim.format, "csv | single | peer");
  simulate->add_flag("--froude", sim.froude, "Froude-scale the record to the tank's length ratio first");
  simulate->add_option("--modes", sim.modes, "Convective modes");
  simulate->add_flag("--uplift", sim.uplift, "Add the base rocking DOF with the uplift spring");
  simulate->add_option("--conv-damping", sim.convective_damping, "Convective damping ratio");
  simulate->add_option("--damping", sim.structural_damping, "Structural damping ratio");
  simulate->add_option("--impulsive-period", sim.impulsive_period, "Override T_i, s (0: code formula)");
  simulate->add_option("--dt-sub", sim.dt_sub, "Integration sub-step, s (0: min(dt, T_i/20))");
  simulate->add_option("--theta-max", sim.theta_max, "Largest rotation tabulated for the uplift spring, rad");
  simulate->add_option("--sectors", sim.sectors, "Circumferential sectors for the uplift spring");
  simulate->add_option("--end", sim.end, "Plate end restraint: pinned | rotation_spring | fixed");

  UpliftOptions uo;
  auto* uplift = app.add_subcommand("uplift-curve", "Bottom-plate uplift and base moment-rotation curves");
  uplift->add_option("--spec", uo.spec, "Tank spec file or bundled name");
  uplift->add_option("--samples", uo.samples, "Strip curve samples");
  uplift->add_option("--nodes", uo.nodes, "Strip nodes");
  uplift->add_option("--end", uo.end, "pinned | rotation_spring | fixed");
  uplift->add_option("--theta-max", uo.theta_max, "Largest base rotation, rad");
  uplift->add_option("--rotations", uo.rotations, "Rotation samples");
  uplift->add_option("--sectors", uo.sectors, "Circumferential sectors");
  uplift->add_option("--bearing-stiffness", uo.bearing, "Wall-edge bearing stiffness, N/m2 (0: default)");

  ScaleOptions sco;
  auto* scale = app.add_subcommand("scale-record", "Froude time scaling of a record");
  scale->add_option("--record", sco.record, "Record file")->required();
  scale->add_option("--format", sco.format, "csv | single | peer");
  scale->add_option("--lambda", sco.lambda, "Length ratio model/prototype");
  scale->add_option("--spec", sco.spec, "Take the length ratio from this spec");

  ReportOptions ro;
  auto* report = app.add_subcommand("report", "Combined period and peak-response tables");
  report->add_option("--spec", ro.specs, "Tank specs (default: slender broad)");
  report->add_option("--chichi", ro.chichi, "Scaled Chi-Chi record for the wave-height row");
  report->add_option("--northridge", ro.northridge, "Scaled Northridge record for the uplift row");
  report->add_option("--format", ro.format, "Record format for both records");
  report->add_option("--mesh", ro.mesh, "FE element size, m");
  report->add_option("--stations", ro.stations, "Beam stations");

  std::vector<std::string> args(args_in.rbegin(), args_in.rend());
  if (!args.empty()) args.pop_back();  // program name
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    int rc = kExitOk;
    if (modal->parsed()) rc = cmd_modal(c, mo);
    else if (spectrum->parsed()) rc = cmd_spectrum(c, so);
    else if (profile->parsed()) rc = cmd_profile(c, po);
    else if (simulate->parsed()) rc = cmd_simulate(c, sim);
    else if (uplift->parsed()) rc = cmd_uplift(c, uo);
    else if (scale->parsed()) rc = cmd_scale(c, sco);
    else if (report->parsed()) rc = cmd_report(c, ro);
    if (c.validate_only) std::cout << "configuration valid\n";
    return rc;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumeric;
  }
}

}  // namespace tankseis::cli
