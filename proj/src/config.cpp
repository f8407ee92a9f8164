#include "csim/config.hpp"

#include <fmt/format.h>

#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace csim::config {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_plain(std::string_view s) {
  s = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ConfigError(fmt::format("'{}' is not a number", s));
  return v;
}

struct Entry {
  int line;
  std::string key;
  std::string value;
};

struct Section {
  std::string name;
  int line;
  std::vector<Entry> entries;
};

std::vector<Section> split_sections(std::string_view text) {
  std::vector<Section> out;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(fmt::format("line {}: unterminated section header", line_no));
      out.push_back({std::string(trim(line.substr(1, line.size() - 2))), line_no, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(fmt::format("line {}: expected 'key = value', got '{}'", line_no, line));
    if (out.empty()) throw ConfigError(fmt::format("line {}: key outside of any [section]", line_no));
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError(fmt::format("line {}: empty key", line_no));
    for (const auto& e : out.back().entries)
      if (e.key == key) throw ConfigError(fmt::format("line {}: key '{}' repeated in section", line_no, key));
    out.back().entries.push_back({line_no, key, value});
  }
  return out;
}

using Setter = std::function<void(const std::string&)>;

void apply(const Section& sec, const std::map<std::string, Setter>& setters) {
  for (const auto& e : sec.entries) {
    const auto it = setters.find(e.key);
    if (it == setters.end()) {
      throw ConfigError(fmt::format("line {}: unknown key '{}' in [{}]", e.line, e.key, sec.name));
    }
    try {
      it->second(e.value);
    } catch (const ConfigError& err) {
      throw ConfigError(fmt::format("line {}: key '{}': {}", e.line, e.key, err.what()));
    }
  }
}

Frame parse_frame(const std::string& v) {
  if (v == "t") return Frame::T;
  if (v == "eta") return Frame::Eta;
  throw ConfigError(fmt::format("frame must be 't' or 'eta', got '{}'", v));
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(fmt::format("expected true/false, got '{}'", v));
}

int parse_int(const std::string& v) {
  const double d = parse_number(v);
  if (d != static_cast<double>(static_cast<int>(d))) throw ConfigError(fmt::format("'{}' is not an integer", v));
  return static_cast<int>(d);
}

}  // namespace

double parse_number(std::string_view text) {
  text = trim(text);
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    const double den = parse_plain(text.substr(slash + 1));
    if (den == 0.0) throw ConfigError("division by zero");
    return parse_plain(text.substr(0, slash)) / den;
  }
  return parse_plain(text);
}

scenarios::ScenarioConfig parse_scenario(std::string_view text) {
  scenarios::ScenarioConfig cfg;
  struct PendingMeasurement {
    int line;
    std::string detector;
    scenarios::MeasurementEvent ev;
    bool has_time = false;
  };
  std::vector<PendingMeasurement> pending;

  for (const auto& sec : split_sections(text)) {
    if (sec.name == "scenario") {
      apply(sec, {
          {"name", [&](const std::string& v) { cfg.name = v; }},
          {"chart_amplitude", [&](const std::string& v) {
             cfg.amplitude = geometry::ChartParams(parse_number(v)).amplitude();
           }},
          {"box_half_width_in_pi", [&](const std::string& v) { cfg.box_half_width_in_pi = parse_int(v); }},
          {"target_dx", [&](const std::string& v) { cfg.target_dx = parse_number(v); }},
          {"target_dx_in_pi", [&](const std::string& v) { cfg.target_dx = parse_number(v) * kPi; }},
          {"comparison_time_in_pi", [&](const std::string& v) { cfg.comparison_time_in_pi = parse_number(v); }},
          {"expect", [&](const std::string& v) {
             if (v == "spacelike") cfg.expect = scenarios::Separation::Spacelike;
             else if (v == "timelike") cfg.expect = scenarios::Separation::Timelike;
             else if (v == "none") cfg.expect = scenarios::Separation::Unspecified;
             else throw ConfigError("expected spacelike | timelike | none");
           }},
      });
    } else if (sec.name == "initial_state") {
      apply(sec, {
          {"kernel", [&](const std::string& v) {
             if (v != "box_vacuum" && v != "squeezed")
               throw ConfigError(fmt::format("unknown kernel '{}' (box_vacuum | squeezed)", v));
             cfg.kernel = v;
           }},
          {"squeeze_r", [&](const std::string& v) { cfg.squeeze_r = parse_number(v); }},
          {"vacuum_band_fraction", [&](const std::string& v) { cfg.band_fraction = parse_number(v); }},
          {"detector_state", [&](const std::string& v) {
             if (v != "detector_ground") throw ConfigError("only 'detector_ground' is supported");
           }},
      });
    } else if (sec.name == "detector") {
      gaussian::DetectorSpec d;
      d.name = fmt::format("D{}", cfg.detectors.size());
      apply(sec, {
          {"name", [&](const std::string& v) { d.name = v; }},
          {"omega", [&](const std::string& v) {
             d.omega = parse_number(v);
             if (!(d.omega > 0.0)) throw ConfigError("omega must be positive");
           }},
          {"coupling", [&](const std::string& v) { d.coupling = parse_number(v); }},
          {"position_in_pi", [&](const std::string& v) { d.position = parse_number(v) * kPi; }},
      });
      for (const auto& other : cfg.detectors)
        if (other.name == d.name)
          throw ConfigError(fmt::format("line {}: detector name '{}' used twice", sec.line, d.name));
      cfg.detectors.push_back(d);
    } else if (sec.name == "measurement") {
      PendingMeasurement m;
      m.line = sec.line;
      apply(sec, {
          {"detector", [&](const std::string& v) { m.detector = v; }},
          {"g", [&](const std::string& v) {
             m.ev.g = parse_number(v);
             if (!(m.ev.g > 0.0)) throw ConfigError("g must be positive");
           }},
          {"frame", [&](const std::string& v) { m.ev.frame = parse_frame(v); }},
          {"time", [&](const std::string& v) { m.ev.time = parse_number(v); m.has_time = true; }},
          {"time_in_pi", [&](const std::string& v) { m.ev.time = parse_number(v) * kPi; m.has_time = true; }},
      });
      pending.push_back(std::move(m));
    } else if (sec.name == "windows") {
      auto& w = cfg.windows;
      apply(sec, {
          {"count", [&](const std::string& v) { w.count = parse_int(v); }},
          {"first_center_in_pi", [&](const std::string& v) { w.first_center_in_pi = parse_number(v); }},
          {"last_center_in_pi", [&](const std::string& v) { w.last_center_in_pi = parse_number(v); }},
          {"width_in_pi", [&](const std::string& v) { w.width_in_pi = parse_number(v); }},
      });
    } else if (sec.name == "integrator") {
      auto& s = cfg.integrator;
      apply(sec, {
          {"dt_factor", [&](const std::string& v) {
             s.dt_factor = parse_number(v);
             if (!(s.dt_factor > 0.0 && s.dt_factor < 1.0))
               throw ConfigError("must satisfy 0 < dt_factor < 1 (CFL bound)");
           }},
          {"symplectic_tol", [&](const std::string& v) { s.symplectic_tol = parse_number(v); }},
          {"check_symplectic", [&](const std::string& v) { s.check_symplectic = parse_bool(v); }},
      });
    } else if (sec.name == "tolerances") {
      auto& t = cfg.tolerances;
      apply(sec, {
          {"consistency", [&](const std::string& v) { t.consistency = parse_number(v); }},
          {"decomposition", [&](const std::string& v) { t.decomposition = parse_number(v); }},
          {"commutation", [&](const std::string& v) { t.commutation = parse_number(v); }},
          {"reduced_factor", [&](const std::string& v) { t.reduced_factor = parse_number(v); }},
      });
    } else {
      throw ConfigError(fmt::format("line {}: unknown section [{}]", sec.line, sec.name));
    }
  }

  for (auto& m : pending) {
    if (!m.has_time) throw ConfigError(fmt::format("line {}: measurement needs 'time' or 'time_in_pi'", m.line));
    int idx = -1;
    for (size_t d = 0; d < cfg.detectors.size(); ++d)
      if (cfg.detectors[d].name == m.detector) idx = static_cast<int>(d);
    if (idx < 0) {
      throw ConfigError(fmt::format("line {}: key 'detector': no detector named '{}'", m.line, m.detector));
    }
    m.ev.detector = idx;
    cfg.measurements.push_back(m.ev);
  }
  cfg.validate();
  return cfg;
}

scenarios::ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) { return fmt::format("{:016x}", v); }

std::string version_string() { return "collapse_sim 1.0.0"; }

}  // namespace csim::config
