#include "stressnav/io.hpp"

#include "stressnav/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace stressnav::io {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& file) {
  if (file.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(file.parent_path(), ec);
  }
  std::ofstream out(file, std::ios::binary);
  if (!out) throw FormatError("cannot write " + file.string());
  return out;
}

std::ifstream open_in(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw FormatError("cannot read " + file.string());
  return in;
}

void check_header(const json& h, const std::string& kind, const fs::path& file) {
  if (!h.is_object() || !h.contains("format_version"))
    throw FormatError(file.string() + ": missing format_version");
  if (h.at("format_version") != kFormatVersion) {
    std::ostringstream os;
    os << file.string() << ": format_version " << h.at("format_version").dump() << " is not supported (expected "
       << kFormatVersion << ")";
    throw FormatError(os.str());
  }
  if (h.value("kind", std::string()) != kind)
    throw FormatError(file.string() + ": expected a '" + kind + "' file");
}

json parse_line(const std::string& line, const fs::path& file, std::size_t lineno) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    std::ostringstream os;
    os << file.string() << ":" << lineno << ": " << e.what();
    throw FormatError(os.str());
  }
}

json opt_number(double v, bool present) { return present ? json(v) : json(nullptr); }

double number_or(const json& j, const char* key, double dflt) {
  return j.contains(key) && !j.at(key).is_null() ? j.at(key).get<double>() : dflt;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

json to_json(const vessel::VesselSpec& v) {
  using vessel::Variant;
  const bool br = v.variant == Variant::Branch, cu = v.variant == Variant::Curve;
  json j;
  j["variant"] = vessel::to_string(v.variant);
  j["d"] = v.d;
  j["d1"] = opt_number(v.d1, br);
  j["d2"] = opt_number(v.d2, br);
  j["bend_deg"] = opt_number(rad2deg(v.bend), cu);
  j["alpha1_deg"] = opt_number(rad2deg(v.alpha1), br);
  j["alpha2_deg"] = opt_number(rad2deg(v.alpha2), br);
  j["arm_um"] = v.arm_length;
  j["seed"] = v.seed ? json(*v.seed) : json(nullptr);
  // Exact radians so records round-trip bit for bit.
  j["bend_rad"] = opt_number(v.bend, cu);
  j["alpha1_rad"] = opt_number(v.alpha1, br);
  j["alpha2_rad"] = opt_number(v.alpha2, br);
  return j;
}

vessel::VesselSpec vessel_from_json(const json& j) {
  try {
    vessel::VesselSpec v;
    v.variant = vessel::variant_from_string(j.at("variant").get<std::string>());
    v.d = j.at("d").get<double>();
    v.d1 = number_or(j, "d1", 0.0);
    v.d2 = number_or(j, "d2", 0.0);
    v.bend = j.contains("bend_rad") && !j["bend_rad"].is_null() ? j["bend_rad"].get<double>()
                                                               : deg2rad(number_or(j, "bend_deg", 0.0));
    v.alpha1 = j.contains("alpha1_rad") && !j["alpha1_rad"].is_null() ? j["alpha1_rad"].get<double>()
                                                                     : deg2rad(number_or(j, "alpha1_deg", 0.0));
    v.alpha2 = j.contains("alpha2_rad") && !j["alpha2_rad"].is_null() ? j["alpha2_rad"].get<double>()
                                                                     : deg2rad(number_or(j, "alpha2_deg", 0.0));
    v.arm_length = number_or(j, "arm_um", 30.0);
    if (j.contains("seed") && !j["seed"].is_null()) v.seed = j["seed"].get<std::uint64_t>();
    return v;
  } catch (const json::exception& e) {
    throw FormatError(std::string("vessel record: ") + e.what());
  }
}

json to_json(const path::ScenarioSpec& s) {
  json j;
  j["vessel"] = to_json(s.vessel);
  j["u_max"] = s.u_max;
  j["initial_y_c"] = s.initial_y_c;
  j["initial_orientation"] = s.initial_orientation;
  j["seed"] = s.seed;
  j["direction"] = path::to_string(s.direction);
  return j;
}

path::ScenarioSpec scenario_from_json(const json& j) {
  try {
    path::ScenarioSpec s;
    s.vessel = vessel_from_json(j.at("vessel"));
    s.u_max = j.at("u_max").get<double>();
    s.initial_y_c = j.at("initial_y_c").get<double>();
    s.initial_orientation = j.at("initial_orientation").get<double>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.direction = path::direction_from_string(j.at("direction").get<std::string>());
    return s;
  } catch (const json::exception& e) {
    throw FormatError(std::string("scenario record: ") + e.what());
  }
}

void write_path(const fs::path& file, const path::PathRecord& rec) {
  auto out = open_out(file);
  json h;
  h["format_version"] = kFormatVersion;
  h["kind"] = "path";
  h["id"] = rec.id;
  h["scenario"] = to_json(rec.scenario);
  h["label"] = path::to_string(rec.label);
  h["terminal_reason"] = path::to_string(rec.terminal_reason);
  h["outlet"] = rec.outlet;
  h["sample_interval_ms"] = rec.sample_interval;
  h["failure"] = rec.failure;
  h["columns"] = "t_ms,x_um,y_um,theta_rad,vx,vy,omega,c0..c25,contact";
  out << h.dump() << '\n';
  for (const auto& s : rec.samples) {
    json row = json::array({s.t, s.robot.center.x(), s.robot.center.y(), s.robot.orientation,
                            s.motion.velocity.x(), s.motion.velocity.y(), s.motion.angular_velocity});
    for (double c : s.pattern.c) row.push_back(c);
    row.push_back(s.contact ? 1 : 0);
    out << row.dump() << '\n';
  }
  if (!out) throw FormatError("failed writing " + file.string());
}

path::PathRecord read_path(const fs::path& file) {
  auto in = open_in(file);
  std::string line;
  if (!std::getline(in, line)) throw FormatError(file.string() + ": empty file");
  const json h = parse_line(line, file, 1);
  check_header(h, "path", file);
  path::PathRecord rec;
  try {
    rec.id = h.at("id").get<std::string>();
    rec.scenario = scenario_from_json(h.at("scenario"));
    rec.label = path::label_from_string(h.at("label").get<std::string>());
    rec.terminal_reason = path::terminal_reason_from_string(h.at("terminal_reason").get<std::string>());
    rec.outlet = h.at("outlet").get<int>();
    rec.sample_interval = h.at("sample_interval_ms").get<double>();
    rec.failure = h.value("failure", std::string());
  } catch (const json::exception& e) {
    throw FormatError(file.string() + ": " + e.what());
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const json row = parse_line(line, file, lineno);
    if (!row.is_array() || row.size() != 7 + features::kCoefficients + 1) {
      std::ostringstream os;
      os << file.string() << ":" << lineno << ": expected " << 8 + features::kCoefficients << " numbers per sample";
      throw FormatError(os.str());
    }
    path::TimedSample s;
    s.t = row[0].get<double>();
    s.robot.center = Vec2(row[1].get<double>(), row[2].get<double>());
    s.robot.orientation = row[3].get<double>();
    s.motion.velocity = Vec2(row[4].get<double>(), row[5].get<double>());
    s.motion.angular_velocity = row[6].get<double>();
    for (int k = 0; k < features::kCoefficients; ++k) s.pattern.c[k] = row[7 + k].get<double>();
    s.contact = row[7 + features::kCoefficients].get<int>() != 0;
    rec.samples.push_back(std::move(s));
  }
  return rec;
}

void write_manifest(const fs::path& file, const Manifest& m) {
  auto out = open_out(file);
  json h;
  h["format_version"] = kFormatVersion;
  h["kind"] = "manifest";
  h["config"] = m.config;
  h["paths"] = m.entries.size();
  out << h.dump() << '\n';
  for (const auto& e : m.entries) {
    json j;
    j["id"] = e.id;
    j["file"] = e.file;
    j["label"] = path::to_string(e.label);
    j["split"] = e.split;
    j["seed"] = e.seed;
    j["terminal_reason"] = path::to_string(e.terminal_reason);
    j["transit_ms"] = e.transit_ms;
    out << j.dump() << '\n';
  }
  if (!out) throw FormatError("failed writing " + file.string());
}

Manifest read_manifest(const fs::path& file) {
  auto in = open_in(file);
  std::string line;
  if (!std::getline(in, line)) throw FormatError(file.string() + ": empty file");
  const json h = parse_line(line, file, 1);
  check_header(h, "manifest", file);
  Manifest m;
  m.config = h.value("config", json::object());
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const json j = parse_line(line, file, lineno);
    try {
      ManifestEntry e;
      e.id = j.at("id").get<std::string>();
      e.file = j.at("file").get<std::string>();
      e.label = path::label_from_string(j.at("label").get<std::string>());
      e.split = j.at("split").get<std::string>();
      e.seed = j.at("seed").get<std::uint64_t>();
      e.terminal_reason = path::terminal_reason_from_string(j.at("terminal_reason").get<std::string>());
      e.transit_ms = j.at("transit_ms").get<double>();
      m.entries.push_back(std::move(e));
    } catch (const json::exception& ex) {
      std::ostringstream os;
      os << file.string() << ":" << lineno << ": " << ex.what();
      throw FormatError(os.str());
    }
  }
  return m;
}

void write_pca(const fs::path& file, const features::PcaModel& m) {
  auto out = open_out(file);
  json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "pca";
  j["mean"] = m.mean;
  j["pc1"] = m.pc1;
  j["sign_flipped"] = m.sign_flipped;
  j["eigenvalue"] = m.eigenvalue;
  j["samples"] = m.samples;
  out << j.dump() << '\n';
}

features::PcaModel read_pca(const fs::path& file) {
  auto in = open_in(file);
  std::string line;
  if (!std::getline(in, line)) throw FormatError(file.string() + ": empty file");
  const json j = parse_line(line, file, 1);
  check_header(j, "pca", file);
  try {
    features::PcaModel m;
    m.mean = j.at("mean").get<std::array<double, features::kCoefficients>>();
    m.pc1 = j.at("pc1").get<std::array<double, features::kCoefficients>>();
    m.sign_flipped = j.at("sign_flipped").get<bool>();
    m.eigenvalue = j.at("eigenvalue").get<double>();
    m.samples = j.at("samples").get<std::size_t>();
    return m;
  } catch (const json::exception& e) {
    throw FormatError(file.string() + ": " + e.what());
  }
}

void write_params(const fs::path& file, const classifier::RegressionParams& p, double dt_corr) {
  auto out = open_out(file);
  json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "regression";
  j["dt_corr_ms"] = dt_corr;
  j["parameters"] = json::array();
  for (int k = 0; k < classifier::kParams; ++k)
    j["parameters"].push_back({{"name", classifier::kParamNames[k]}, {"value", p.beta[k]},
                               {"standard_error", p.standard_error[k]}});
  j["separation_warning"] = p.separation_warning;
  j["iterations"] = p.iterations;
  j["log_likelihood"] = p.log_likelihood;
  j["null_log_likelihood"] = p.null_log_likelihood;
  out << j.dump() << '\n';
}

classifier::RegressionParams read_params(const fs::path& file, double* dt_corr) {
  auto in = open_in(file);
  std::string line;
  if (!std::getline(in, line)) throw FormatError(file.string() + ": empty file");
  const json j = parse_line(line, file, 1);
  check_header(j, "regression", file);
  try {
    classifier::RegressionParams p;
    const auto& ps = j.at("parameters");
    if (ps.size() != classifier::kParams) throw FormatError(file.string() + ": expected 6 parameters");
    for (int k = 0; k < classifier::kParams; ++k) {
      if (ps[k].at("name").get<std::string>() != classifier::kParamNames[k])
        throw FormatError(file.string() + ": unexpected parameter order");
      p.beta[k] = ps[k].at("value").get<double>();
      p.standard_error[k] = ps[k].at("standard_error").get<double>();
    }
    p.separation_warning = j.at("separation_warning").get<bool>();
    p.iterations = j.at("iterations").get<int>();
    p.log_likelihood = j.at("log_likelihood").get<double>();
    p.null_log_likelihood = j.at("null_log_likelihood").get<double>();
    if (dt_corr) *dt_corr = j.at("dt_corr_ms").get<double>();
    return p;
  } catch (const json::exception& e) {
    throw FormatError(file.string() + ": " + e.what());
  }
}

void write_table(const fs::path& file, const std::vector<std::string>& columns,
                 const std::vector<std::vector<double>>& rows) {
  for (const auto& r : rows)
    if (r.size() != columns.size()) throw InvalidParameter("table row width differs from the column count");
  auto out = open_out(file);
  out << "# format_version " << kFormatVersion << '\n';
  for (std::size_t k = 0; k < columns.size(); ++k) out << (k ? "\t" : "") << columns[k];
  out << '\n';
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < r.size(); ++k) out << (k ? "\t" : "") << format_number(r[k]);
    out << '\n';
  }
  if (!out) throw FormatError("failed writing " + file.string());
}

std::vector<std::vector<double>> read_table(const fs::path& file, std::vector<std::string>* columns) {
  auto in = open_in(file);
  std::string line;
  if (!std::getline(in, line) || line != "# format_version " + std::to_string(kFormatVersion))
    throw FormatError(file.string() + ": missing or unsupported format_version");
  if (!std::getline(in, line)) throw FormatError(file.string() + ": missing header row");
  if (columns) {
    columns->clear();
    std::istringstream hs(line);
    for (std::string c; std::getline(hs, c, '\t');) columns->push_back(c);
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> r;
    std::istringstream ls(line);
    for (std::string c; std::getline(ls, c, '\t');)
      r.push_back(c == "nan" ? std::nan("") : std::stod(c));
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace stressnav::io
