#include "tankseis/model.hpp"

#include <fstream>
#include <numbers>
#include <sstream>

#include "tankseis/config.hpp"

namespace tankseis {

const char* to_string(Anchorage a) {
  return a == Anchorage::anchored ? "anchored" : "unanchored";
}

std::vector<Violation> validate(const TankSpec& spec) {
  std::vector<Violation> out;
  auto check = [&out](bool ok, const char* field, const std::string& msg) {
    if (!ok) out.push_back({field, msg});
  };
  const auto& g = spec.geometry;
  check(g.radius > 0.0, "radius", "radius must be positive");
  check(g.shell_thickness > 0.0, "shell_thickness", "shell thickness must be positive");
  check(g.bottom_thickness > 0.0, "bottom_thickness", "bottom thickness must be positive");
  check(g.fill_height > 0.0, "fill_height", "fill height must be positive");
  check(!(g.fill_height > g.total_height), "total_height",
        "fill height exceeds total shell height");
  check(std::isfinite(g.fill_height / g.radius), "slenderness", "H/R is not finite");

  const auto& s = spec.shell;
  check(s.density > 0.0, "shell_density", "shell density must be positive");
  check(s.elastic_modulus > 0.0, "elastic_modulus", "elastic modulus must be positive");
  check(s.poisson_ratio >= 0.0 && s.poisson_ratio < 0.5, "poisson_ratio",
        "Poisson ratio must lie in [0, 0.5)");
  check(s.yield_stress >= 0.0, "yield_stress", "yield stress must be non-negative");

  check(spec.liquid.density > 0.0, "liquid_density", "liquid density must be positive");
  check(spec.liquid.bulk_modulus > 0.0, "bulk_modulus", "bulk modulus must be positive");

  check(spec.scale.length_ratio > 0.0 && spec.scale.length_ratio <= 1.0, "length_ratio",
        "length ratio must lie in (0, 1]");
  check(spec.empty_mass >= 0.0, "empty_mass", "empty mass must be non-negative");
  check(spec.top_ring_mass >= 0.0, "top_ring_mass", "ring mass must be non-negative");
  check(spec.gravity > 0.0, "gravity", "gravity must be positive");
  return out;
}

void require_valid(const TankSpec& spec) {
  const auto v = validate(spec);
  if (v.empty()) return;
  std::string msg = "invalid tank spec:";
  for (const auto& x : v) msg += " [" + x.field + "] " + x.message + ";";
  throw ConfigError(msg);
}

double liquid_mass(const TankSpec& spec) {
  const auto& g = spec.geometry;
  return spec.liquid.density * std::numbers::pi * g.radius * g.radius * g.fill_height;
}

double total_mass(const TankSpec& spec) { return spec.empty_mass + liquid_mass(spec); }

TankSpec scaled_geometry(const TankSpec& spec, double lambda) {
  TankSpec out = spec;
  auto& g = out.geometry;
  g.radius *= lambda;
  g.fill_height *= lambda;
  g.total_height *= lambda;
  g.shell_thickness *= lambda;
  g.bottom_thickness *= lambda;
  const double vol = lambda * lambda * lambda;
  out.empty_mass *= vol;
  out.top_ring_mass *= vol;
  out.scale.length_ratio *= lambda;
  return out;
}

namespace {

Liquid water() { return Liquid{998.21, 2.15e9}; }

}  // namespace

// Handbook elastic constants; the grades are named but their constants are
// not published with the test campaign.
TankSpec slender_tank() {
  TankSpec t;
  t.name = "slender";
  t.geometry = {1.0, 4.5, 5.0, 0.0015, 0.0015, Anchorage::anchored};
  t.shell = {"S355JR", 7850.0, 210e9, 0.3, 355e6};
  t.liquid = water();
  t.scale.length_ratio = 0.25;
  t.empty_mass = 2300.0;
  return t;
}

TankSpec broad_tank() {
  TankSpec t;
  t.name = "broad";
  t.geometry = {1.5, 0.781, 0.868, 0.001, 0.001, Anchorage::unanchored};
  t.shell = {"SS304", 7900.0, 193e9, 0.29, 215e6};
  t.liquid = water();
  t.scale.length_ratio = 1.0 / 18.0;
  t.empty_mass = 123.0;
  return t;
}

TankSpec parse_spec(const std::string& text) {
  const KeyValueDoc doc = KeyValueDoc::parse(text);
  auto need = [&doc](const char* section, const char* key) {
    auto v = doc.get_number(section, key);
    if (!v) throw ConfigError(std::string("missing [") + section + "] " + key);
    return *v;
  };
  TankSpec t;
  t.name = doc.get_string("tank", "name").value_or("");
  t.empty_mass = need("tank", "empty_mass");
  t.gravity = doc.number_or("tank", "gravity", 9.81);
  t.top_ring_mass = doc.number_or("tank", "top_ring_mass", 0.0);

  auto& g = t.geometry;
  g.radius = need("geometry", "radius");
  g.fill_height = need("geometry", "fill_height");
  g.total_height = need("geometry", "total_height");
  g.shell_thickness = need("geometry", "shell_thickness");
  g.bottom_thickness = need("geometry", "bottom_thickness");
  const std::string anch = doc.get_string("geometry", "anchorage").value_or("anchored");
  if (anch == "anchored")
    g.anchorage = Anchorage::anchored;
  else if (anch == "unanchored")
    g.anchorage = Anchorage::unanchored;
  else
    throw ConfigError("[geometry] anchorage: expected anchored or unanchored, got '" + anch + "'");

  t.shell.grade = doc.get_string("shell", "grade").value_or("");
  t.shell.density = need("shell", "density");
  t.shell.elastic_modulus = need("shell", "elastic_modulus");
  t.shell.poisson_ratio = need("shell", "poisson_ratio");
  t.shell.yield_stress = doc.number_or("shell", "yield_stress", 0.0);

  t.liquid.density = need("liquid", "density");
  t.liquid.bulk_modulus = need("liquid", "bulk_modulus");

  t.scale.length_ratio = doc.number_or("scale", "length_ratio", 1.0);
  return t;
}

TankSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open spec file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_spec(ss.str());
}

std::string format_spec(const TankSpec& t) {
  KeyValueDoc doc;
  doc.set_string("tank", "name", t.name);
  doc.set_number("tank", "empty_mass", t.empty_mass);
  doc.set_number("tank", "top_ring_mass", t.top_ring_mass);
  doc.set_number("tank", "gravity", t.gravity);
  const auto& g = t.geometry;
  doc.set_number("geometry", "radius", g.radius);
  doc.set_number("geometry", "fill_height", g.fill_height);
  doc.set_number("geometry", "total_height", g.total_height);
  doc.set_number("geometry", "shell_thickness", g.shell_thickness);
  doc.set_number("geometry", "bottom_thickness", g.bottom_thickness);
  doc.set_string("geometry", "anchorage", to_string(g.anchorage));
  doc.set_string("shell", "grade", t.shell.grade);
  doc.set_number("shell", "density", t.shell.density);
  doc.set_number("shell", "elastic_modulus", t.shell.elastic_modulus);
  doc.set_number("shell", "poisson_ratio", t.shell.poisson_ratio);
  doc.set_number("shell", "yield_stress", t.shell.yield_stress);
  doc.set_number("liquid", "density", t.liquid.density);
  doc.set_number("liquid", "bulk_modulus", t.liquid.bulk_modulus);
  doc.set_number("scale", "length_ratio", t.scale.length_ratio);
  return doc.format();
}

}  // namespace tankseis
