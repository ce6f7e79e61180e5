#include "demailly/config.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace demailly {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ConfigError("invalid value for " + std::string(key) + ": '" + std::string(text) + "'");
  }
  return value;
}

std::vector<int> parse_int_list(std::string_view key, std::string_view text) {
  std::vector<int> out;
  for (auto item : split(text, ',')) out.push_back(parse_number<int>(key, item));
  return out;
}

PerturbationConfig parse_perturbation(std::string_view text) {
  std::istringstream in{std::string(text)};
  PerturbationConfig p;
  in >> p.preset;
  if (p.preset == "none") {
    std::string extra;
    if (in >> extra) throw ConfigError("bundle.perturbation: 'none' takes no arguments");
    return p;
  }
  if (p.preset != "cosine") {
    throw ConfigError("bundle.perturbation: unknown preset '" + p.preset + "'");
  }
  std::string amplitude, modes, extra;
  if (!(in >> amplitude)) throw ConfigError("bundle.perturbation: cosine needs an amplitude");
  p.amplitude = parse_number<double>("bundle.perturbation", amplitude);
  if (in >> modes) {
    for (auto item : split(modes, ',')) {
      const auto parts = split(item, ':');
      if (parts.size() != 2) throw ConfigError("bundle.perturbation: mode must be kx:ky");
      const int kx = parse_number<int>("bundle.perturbation", parts[0]);
      const int ky = parse_number<int>("bundle.perturbation", parts[1]);
      if (kx == 0 && ky == 0) throw ConfigError("bundle.perturbation: mode 0:0 is not allowed");
      p.modes.emplace_back(kx, ky);
    }
  } else {
    p.modes = {{1, 1}};
  }
  if (in >> extra) throw ConfigError("bundle.perturbation: unexpected '" + extra + "'");
  return p;
}

std::string format_double(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

}  // namespace

int RunConfig::total_degree() const noexcept {
  return std::accumulate(degrees.begin(), degrees.end(), 0);
}

BundleSpec RunConfig::bundle_spec() const {
  if (perturbation.preset == "cosine") {
    return BundleSpec::cosine_pair(degrees, perturbation.amplitude, perturbation.modes);
  }
  BundleSpec spec;
  spec.degrees = degrees;
  spec.perturbations.assign(degrees.size(), {});
  return spec;
}

ParamsRequest RunConfig::params_request() const {
  ParamsRequest req;
  req.lambda = lambda;
  req.alpha0 = alpha0;
  req.mu = mu;
  req.tol.newton_tol = newton_tol;
  req.tol.cone_floor = cone_floor;
  req.tol.dt0 = dt0;
  req.tol.dt_floor = dt_floor;
  return req;
}

void validate_config(const RunConfig& c) {
  if (c.n < 8 || (c.n & (c.n - 1)) != 0) {
    throw ConfigError("grid.n must be a power of two >= 8, got " + std::to_string(c.n));
  }
  if (c.r < 1) throw ConfigError("bundle.r must be >= 1");
  if (static_cast<int>(c.degrees.size()) != c.r) {
    throw ConfigError("bundle.degrees has " + std::to_string(c.degrees.size()) +
                      " entries but bundle.r = " + std::to_string(c.r));
  }
  if (c.total_degree() <= 0) throw ConfigError("bundle.degrees must have a positive sum");
  if (c.lambda && !(*c.lambda > c.r)) throw ConfigError("params.lambda must exceed bundle.r");
  if (c.alpha0 && !(*c.alpha0 > 0.0)) throw ConfigError("params.alpha0 must be positive");
  if (c.perturbation.preset == "cosine" && c.perturbation.amplitude != 0.0 && c.r < 2) {
    throw ConfigError("bundle.perturbation: cosine perturbations need bundle.r >= 2");
  }
  if (!(c.dt0 > 0.0) || !(c.dt_floor > 0.0) || c.dt_floor > c.dt0) {
    throw ConfigError("march.dt0 and march.dt_floor must satisfy 0 < dt_floor <= dt0");
  }
  if (!(c.newton_tol > 0.0)) throw ConfigError("tol.newton must be positive");
  if (c.cone_floor && !(*c.cone_floor > 0.0)) throw ConfigError("tol.cone_floor must be positive");
}

RunConfig parse_config(std::string_view text) {
  RunConfig c;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  for (auto raw : split(text, '\n')) {
    ++line_no;
    const auto hash = raw.find('#');
    const auto line = trim(hash == std::string_view::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (!seen.emplace(key).second) throw ConfigError("duplicate key " + std::string(key));

    if (key == "grid.n") {
      c.n = parse_number<int>(key, value);
    } else if (key == "bundle.r") {
      c.r = parse_number<int>(key, value);
    } else if (key == "bundle.degrees") {
      c.degrees = parse_int_list(key, value);
    } else if (key == "bundle.perturbation") {
      c.perturbation = parse_perturbation(value);
    } else if (key == "params.lambda") {
      c.lambda = parse_number<double>(key, value);
    } else if (key == "params.alpha0") {
      c.alpha0 = parse_number<double>(key, value);
    } else if (key == "params.mu") {
      c.mu = parse_number<double>(key, value);
    } else if (key == "march.dt0") {
      c.dt0 = parse_number<double>(key, value);
    } else if (key == "march.dt_floor") {
      c.dt_floor = parse_number<double>(key, value);
    } else if (key == "tol.newton") {
      c.newton_tol = parse_number<double>(key, value);
    } else if (key == "tol.cone_floor") {
      c.cone_floor = parse_number<double>(key, value);
    } else if (key == "output.dir") {
      c.output_dir = std::string(value);
    } else if (key == "seed") {
      c.seed = parse_number<std::uint64_t>(key, value);
    } else {
      throw ConfigError("unknown key " + std::string(key));
    }
  }
  for (const char* required : {"grid.n", "bundle.r", "bundle.degrees"}) {
    if (!seen.contains(std::string_view(required))) {
      throw ConfigError(std::string("missing required key ") + required);
    }
  }
  validate_config(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string format_config(const RunConfig& c) {
  std::ostringstream out;
  out << "grid.n = " << c.n << "\n";
  out << "bundle.r = " << c.r << "\n";
  out << "bundle.degrees = ";
  for (std::size_t i = 0; i < c.degrees.size(); ++i) out << (i ? "," : "") << c.degrees[i];
  out << "\n";
  out << "bundle.perturbation = " << c.perturbation.preset;
  if (c.perturbation.preset == "cosine") {
    out << " " << format_double(c.perturbation.amplitude) << " ";
    for (std::size_t i = 0; i < c.perturbation.modes.size(); ++i) {
      out << (i ? "," : "") << c.perturbation.modes[i].first << ":" << c.perturbation.modes[i].second;
    }
  }
  out << "\n";
  if (c.lambda) out << "params.lambda = " << format_double(*c.lambda) << "\n";
  if (c.alpha0) out << "params.alpha0 = " << format_double(*c.alpha0) << "\n";
  out << "params.mu = " << format_double(c.mu) << "\n";
  out << "march.dt0 = " << format_double(c.dt0) << "\n";
  out << "march.dt_floor = " << format_double(c.dt_floor) << "\n";
  out << "tol.newton = " << format_double(c.newton_tol) << "\n";
  if (c.cone_floor) out << "tol.cone_floor = " << format_double(*c.cone_floor) << "\n";
  if (!c.output_dir.empty()) out << "output.dir = " << c.output_dir << "\n";
  out << "seed = " << c.seed << "\n";
  return out.str();
}

}  // namespace demailly
