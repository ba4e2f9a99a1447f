#include "tankseis/gmproc.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <regex>
#include <sstream>

#include "tankseis/config.hpp"
#include "tankseis/parallel.hpp"

namespace tankseis {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool try_number(const std::string& s, double& out) {
  try {
    out = parse_double(s);
    return std::isfinite(out);
  } catch (const ConfigError&) {
    return false;
  }
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',' || c == ';' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

AccelUnits parse_units(const std::string& raw, int lineno) {
  const std::string u = lower(trim(raw));
  if (u == "g") return AccelUnits::g;
  if (u == "m/s2" || u == "m/s^2" || u == "m/s**2" || u == "mps2") return AccelUnits::m_per_s2;
  throw ConfigError("line " + std::to_string(lineno) + ": unknown acceleration units '" + raw + "'");
}

// Header metadata such as "# units: g", "dt = 0.01", "name: ChiChi".
bool parse_meta(const std::string& line, std::string& key, std::string& value) {
  std::string s = trim(line);
  while (!s.empty() && s.front() == '#') s = trim(s.substr(1));
  const auto pos = s.find_first_of(":=");
  if (pos == std::string::npos) return false;
  key = lower(trim(s.substr(0, pos)));
  value = trim(s.substr(pos + 1));
  return !key.empty() && std::all_of(key.begin(), key.end(), [](unsigned char c) {
    return std::isalpha(c) || c == '_';
  });
}

double unit_factor(AccelUnits u) { return u == AccelUnits::g ? kRecordGravity : 1.0; }

void check_finite(const GroundMotion& gm) {
  if (gm.accel.size() == 0) throw ConfigError("empty record");
  if (!(gm.dt > 0.0) || !std::isfinite(gm.dt)) throw ConfigError("record time step must be positive");
  for (Eigen::Index k = 0; k < gm.accel.size(); ++k)
    if (!std::isfinite(gm.accel[k]))
      throw ConfigError("non-finite sample at index " + std::to_string(k));
}

GroundMotion parse_csv(const std::string& text) {
  GroundMotion gm;
  gm.format = RecordFormat::two_column_csv;
  gm.units = AccelUnits::m_per_s2;
  std::vector<double> t, a;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty()) continue;
    if (s.front() == '#') {
      std::string key, value;
      if (parse_meta(s, key, value)) {
        if (key == "units") gm.units = parse_units(value, lineno);
        if (key == "name") gm.name = value;
      }
      continue;
    }
    const auto fields = split_fields(s);
    double tv = 0.0, av = 0.0;
    if (fields.size() != 2 || !try_number(fields[0], tv) || !try_number(fields[1], av)) {
      // one column-title row is tolerated before the data
      const bool textual = std::any_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isalpha(c) && c != 'e' && c != 'E';
      });
      if (t.empty() && !header_seen && textual) {
        header_seen = true;
        continue;
      }
      throw ConfigError("malformed record line " + std::to_string(lineno) + ": '" + s + "'");
    }
    t.push_back(tv);
    a.push_back(av);
  }
  if (a.empty()) throw ConfigError("empty record");
  if (a.size() < 2) throw ConfigError("two-column record needs at least two samples to define dt");
  gm.dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
  for (std::size_t k = 1; k < t.size(); ++k) {
    if (std::abs((t[k] - t[k - 1]) - gm.dt) > 1e-6)
      throw ConfigError("inconsistent time step at data row " + std::to_string(k + 1));
  }
  const double f = unit_factor(gm.units);
  gm.accel.resize(static_cast<Eigen::Index>(a.size()));
  for (std::size_t k = 0; k < a.size(); ++k) gm.accel[static_cast<Eigen::Index>(k)] = a[k] * f;
  return gm;
}

GroundMotion parse_single_column(const std::string& text) {
  GroundMotion gm;
  gm.format = RecordFormat::single_column_with_dt_header;
  gm.units = AccelUnits::m_per_s2;
  std::vector<double> a;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool have_dt = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty()) continue;
    double v = 0.0;
    if (s.front() != '#' && try_number(s, v)) {
      a.push_back(v);
      continue;
    }
    std::string key, value;
    if (parse_meta(s, key, value)) {
      if (key == "dt") {
        if (!try_number(value, gm.dt))
          throw ConfigError("line " + std::to_string(lineno) + ": bad dt '" + value + "'");
        have_dt = true;
      } else if (key == "units") {
        gm.units = parse_units(value, lineno);
      } else if (key == "name") {
        gm.name = value;
      }
      continue;
    }
    if (s.front() == '#') continue;
    throw ConfigError("malformed record line " + std::to_string(lineno) + ": '" + s + "'");
  }
  if (a.empty()) throw ConfigError("empty record");
  if (!have_dt) throw ConfigError("missing dt header");
  const double f = unit_factor(gm.units);
  gm.accel.resize(static_cast<Eigen::Index>(a.size()));
  for (std::size_t k = 0; k < a.size(); ++k) gm.accel[static_cast<Eigen::Index>(k)] = a[k] * f;
  return gm;
}

// PEER NGA .AT2: three text lines, an NPTS/DT line, then values in rows.
GroundMotion parse_peer(const std::string& text) {
  GroundMotion gm;
  gm.format = RecordFormat::peer_fixed_width;
  gm.units = AccelUnits::g;
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> header;
  for (int k = 0; k < 4; ++k) {
    if (!std::getline(in, line)) throw ConfigError("PEER record: truncated header at line " + std::to_string(k + 1));
    header.push_back(trim(line));
  }
  gm.name = header[1];
  const std::string units_line = lower(header[2]);
  double factor = kRecordGravity;
  if (units_line.find("m/s") != std::string::npos && units_line.find("cm/s") == std::string::npos) {
    gm.units = AccelUnits::m_per_s2;
    factor = 1.0;
  } else if (units_line.find("cm/s") != std::string::npos) {
    gm.units = AccelUnits::m_per_s2;
    factor = 0.01;
  }

  long npts = -1;
  const std::string nl = lower(header[3]);
  std::smatch m;
  static const std::regex npts_re(R"(npts\s*=\s*([0-9]+))");
  static const std::regex dt_re(R"(dt\s*=\s*([-+0-9.eE]+))");
  if (std::regex_search(nl, m, npts_re)) npts = std::stol(m[1].str());
  if (std::regex_search(nl, m, dt_re)) {
    if (!try_number(m[1].str(), gm.dt)) throw ConfigError("PEER record line 4: bad DT");
  }
  if (npts < 0) {
    // older layout: "4000   0.0050   NPTS, DT"
    const auto fields = split_fields(header[3]);
    if (fields.size() < 2 || !try_number(fields[1], gm.dt))
      throw ConfigError("PEER record line 4: cannot read NPTS and DT");
    double n = 0.0;
    if (!try_number(fields[0], n)) throw ConfigError("PEER record line 4: cannot read NPTS");
    npts = static_cast<long>(n);
  }

  std::vector<double> a;
  int lineno = 4;
  while (std::getline(in, line)) {
    ++lineno;
    for (const auto& f : split_fields(trim(line))) {
      double v = 0.0;
      if (!try_number(f, v))
        throw ConfigError("malformed record line " + std::to_string(lineno) + ": '" + f + "'");
      a.push_back(v);
    }
  }
  if (a.empty()) throw ConfigError("empty record");
  if (static_cast<long>(a.size()) != npts)
    throw ConfigError("PEER record: NPTS=" + std::to_string(npts) + " but " +
                      std::to_string(a.size()) + " samples found");
  gm.accel.resize(static_cast<Eigen::Index>(a.size()));
  for (std::size_t k = 0; k < a.size(); ++k) gm.accel[static_cast<Eigen::Index>(k)] = a[k] * factor;
  return gm;
}

const char* units_label(AccelUnits u) { return u == AccelUnits::g ? "g" : "m/s2"; }

}  // namespace

RecordFormat parse_format(const std::string& name) {
  if (name == "two_column_csv" || name == "csv") return RecordFormat::two_column_csv;
  if (name == "single_column_with_dt_header" || name == "single") return RecordFormat::single_column_with_dt_header;
  if (name == "peer_fixed_width" || name == "peer" || name == "at2") return RecordFormat::peer_fixed_width;
  throw ConfigError("unknown record format '" + name + "'");
}

const char* to_string(RecordFormat f) {
  switch (f) {
    case RecordFormat::two_column_csv: return "two_column_csv";
    case RecordFormat::single_column_with_dt_header: return "single_column_with_dt_header";
    case RecordFormat::peer_fixed_width: return "peer_fixed_width";
  }
  return "?";
}

RecordFormat format_from_path(const std::string& path) {
  const std::string p = lower(path);
  auto ends = [&p](const std::string& ext) {
    return p.size() >= ext.size() && p.compare(p.size() - ext.size(), ext.size(), ext) == 0;
  };
  if (ends(".csv")) return RecordFormat::two_column_csv;
  if (ends(".at2")) return RecordFormat::peer_fixed_width;
  return RecordFormat::single_column_with_dt_header;
}

GroundMotion parse_record(const std::string& text, RecordFormat format) {
  GroundMotion gm;
  switch (format) {
    case RecordFormat::two_column_csv: gm = parse_csv(text); break;
    case RecordFormat::single_column_with_dt_header: gm = parse_single_column(text); break;
    case RecordFormat::peer_fixed_width: gm = parse_peer(text); break;
  }
  check_finite(gm);
  return gm;
}

GroundMotion load_record(const std::string& path, RecordFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open record: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  GroundMotion gm = parse_record(ss.str(), format);
  if (gm.name.empty()) gm.name = path.substr(path.find_last_of('/') + 1);
  return gm;
}

std::string format_record(const GroundMotion& gm) {
  std::ostringstream out;
  const double f = unit_factor(gm.units);
  switch (gm.format) {
    case RecordFormat::two_column_csv:
      out << "# name: " << gm.name << "\n# units: " << units_label(gm.units) << "\ntime,accel\n";
      for (Eigen::Index k = 0; k < gm.accel.size(); ++k)
        out << format_double(static_cast<double>(k) * gm.dt) << ',' << format_double(gm.accel[k] / f) << '\n';
      break;
    case RecordFormat::single_column_with_dt_header:
      out << "# name: " << gm.name << "\n# units: " << units_label(gm.units)
          << "\n# dt: " << format_double(gm.dt) << '\n';
      for (Eigen::Index k = 0; k < gm.accel.size(); ++k) out << format_double(gm.accel[k] / f) << '\n';
      break;
    case RecordFormat::peer_fixed_width:
      out << "PEER STRONG MOTION RECORD\n" << gm.name << '\n'
          << "ACCELERATION TIME SERIES IN UNITS OF " << (gm.units == AccelUnits::g ? "G" : "M/S2") << '\n'
          << "NPTS= " << gm.accel.size() << ", DT= " << format_double(gm.dt) << " SEC\n";
      for (Eigen::Index k = 0; k < gm.accel.size(); ++k) {
        out << format_double(gm.accel[k] / f);
        out << (((k + 1) % 5 == 0 || k + 1 == gm.accel.size()) ? '\n' : ' ');
      }
      break;
  }
  return out.str();
}

GroundMotion froude_scale(const GroundMotion& gm, const ScaleModel& scale) {
  GroundMotion out = gm;
  out.dt = gm.dt * scale.time_ratio();
  return out;
}

Kinematics integrate(const GroundMotion& gm, Baseline baseline) {
  const Eigen::Index n = gm.accel.size();
  Kinematics k;
  k.velocity = Eigen::VectorXd::Zero(n);
  k.displacement = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 1; i < n; ++i)
    k.velocity[i] = k.velocity[i - 1] + 0.5 * gm.dt * (gm.accel[i - 1] + gm.accel[i]);
  if (baseline == Baseline::linear_velocity_detrend && n >= 2) {
    const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(n, 0.0, gm.dt * static_cast<double>(n - 1));
    const double tm = t.mean();
    const double vm = k.velocity.mean();
    const double stt = (t.array() - tm).square().sum();
    const double stv = ((t.array() - tm) * (k.velocity.array() - vm)).sum();
    const double slope = stt > 0.0 ? stv / stt : 0.0;
    k.velocity.array() -= vm + slope * (t.array() - tm);
  }
  for (Eigen::Index i = 1; i < n; ++i)
    k.displacement[i] = k.displacement[i - 1] + 0.5 * gm.dt * (k.velocity[i - 1] + k.velocity[i]);
  return k;
}

PeakValues peaks(const GroundMotion& gm, Baseline baseline) {
  if (gm.accel.size() < 3) throw ConfigError("peaks: record shorter than 3 samples");
  const Kinematics k = integrate(gm, baseline);
  return {gm.accel.cwiseAbs().maxCoeff(), k.velocity.cwiseAbs().maxCoeff(),
          k.displacement.cwiseAbs().maxCoeff()};
}

double sample_at(const GroundMotion& gm, double t) {
  if (t < 0.0) return 0.0;
  const double x = t / gm.dt;
  const auto i = static_cast<Eigen::Index>(std::floor(x));
  if (i >= gm.accel.size() - 1) return i == gm.accel.size() - 1 ? gm.accel[i] : 0.0;
  const double w = x - static_cast<double>(i);
  return (1.0 - w) * gm.accel[i] + w * gm.accel[i + 1];
}

namespace {

double sdof_peak_displacement(const GroundMotion& gm, double damping, double period) {
  const double omega = 2.0 * std::numbers::pi / period;
  const int sub = std::max(1, static_cast<int>(std::ceil(gm.dt / (period / 20.0) - 1e-12)));
  const double h = gm.dt / sub;
  constexpr double beta = 0.25, gamma = 0.5;
  const double c = 2.0 * damping * omega;
  const double k = omega * omega;
  const double keff = k + gamma * c / (beta * h) + 1.0 / (beta * h * h);
  double u = 0.0, v = 0.0, a = -gm.accel[0];
  double peak = 0.0;
  const Eigen::Index n = gm.accel.size();
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const double a0 = gm.accel[i], a1 = gm.accel[i + 1];
    for (int s = 1; s <= sub; ++s) {
      const double w = static_cast<double>(s) / sub;
      const double p = -((1.0 - w) * a0 + w * a1);
      const double rhs = p + (u / (beta * h * h) + v / (beta * h) + (0.5 / beta - 1.0) * a) +
                         c * (gamma * u / (beta * h) + (gamma / beta - 1.0) * v +
                              0.5 * h * (gamma / beta - 2.0) * a);
      const double un = rhs / keff;
      const double an = (un - u) / (beta * h * h) - v / (beta * h) - (0.5 / beta - 1.0) * a;
      v += h * ((1.0 - gamma) * a + gamma * an);
      u = un;
      a = an;
      peak = std::max(peak, std::abs(u));
    }
  }
  return peak;
}

}  // namespace

std::vector<double> response_spectrum(const GroundMotion& gm, double damping,
                                      const std::vector<double>& periods, int jobs) {
  if (!(damping >= 0.0 && damping < 1.0)) throw ConfigError("spectrum damping must lie in [0, 1)");
  for (double T : periods)
    if (!(T > 0.0)) throw ConfigError("spectrum periods must be positive");
  std::vector<double> sa(periods.size(), 0.0);
  parallel_for(periods.size(), jobs, [&](std::size_t j) {
    const double omega = 2.0 * std::numbers::pi / periods[j];
    sa[j] = omega * omega * sdof_peak_displacement(gm, damping, periods[j]);
  });
  return sa;
}

}  // namespace tankseis
