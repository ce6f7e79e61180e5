#include "demailly/snapshot.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace demailly {

namespace {

using Kind = SnapshotError::Kind;

void append_value(std::string& out, double v) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
  out.append(buf, static_cast<std::size_t>(len));
}

void append_block(std::string& out, const ScalarField& field) {
  const int n = field.grid().n();
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      if (k > 0) out.push_back(' ');
      append_value(out, field(j, k));
    }
    out.push_back('\n');
  }
}

template <class T>
T parse_value(std::string_view token, std::string_view what) {
  T value{};
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end || token.empty()) {
    throw SnapshotError(Kind::Parse, "snapshot: cannot parse " + std::string(what) + " '" +
                                         std::string(token) + "'");
  }
  return value;
}

std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::string_view field_value(std::string_view token, std::string_view key) {
  if (token.size() <= key.size() || token.substr(0, key.size()) != key ||
      token[key.size()] != '=') {
    throw SnapshotError(Kind::Parse, "snapshot header: expected " + std::string(key) + "=..., got '" +
                                         std::string(token) + "'");
  }
  return token.substr(key.size() + 1);
}

SnapshotMeta parse_header(std::string_view line) {
  const auto tok = tokens(line);
  if (tok.empty() || tok[0] != "DEMAILLY-FIELD") {
    throw SnapshotError(Kind::Parse, "snapshot: missing DEMAILLY-FIELD header");
  }
  if (tok.size() < 2 || tok[1].size() < 2 || tok[1][0] != 'v') {
    throw SnapshotError(Kind::Parse, "snapshot: missing format version");
  }
  const int version = parse_value<int>(tok[1].substr(1), "version");
  if (version != kSnapshotVersion) {
    throw SnapshotError(Kind::Version, "snapshot: unsupported format version " +
                                           std::to_string(version) + " (reader supports v" +
                                           std::to_string(kSnapshotVersion) + ")");
  }
  if (tok.size() != 8) throw SnapshotError(Kind::Parse, "snapshot: malformed header");

  SnapshotMeta meta;
  meta.n = parse_value<int>(field_value(tok[2], "n"), "n");
  meta.r = parse_value<int>(field_value(tok[3], "r"), "r");
  meta.t = parse_value<double>(field_value(tok[4], "t"), "t");
  meta.lambda = parse_value<double>(field_value(tok[5], "lambda"), "lambda");
  meta.alpha0 = parse_value<double>(field_value(tok[6], "alpha0"), "alpha0");
  const auto degrees = field_value(tok[7], "degrees");
  std::size_t start = 0;
  while (start <= degrees.size()) {
    const auto comma = degrees.find(',', start);
    const auto item = degrees.substr(start, comma == std::string_view::npos ? comma : comma - start);
    meta.degrees.push_back(parse_value<int>(item, "degree"));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (meta.r < 1 || static_cast<int>(meta.degrees.size()) != meta.r) {
    throw SnapshotError(Kind::Dimension, "snapshot: degrees list does not match r");
  }
  return meta;
}

}  // namespace

std::string format_snapshot(const State& state, double lambda, double alpha0,
                            const std::vector<int>& degrees) {
  std::string out = "DEMAILLY-FIELD v" + std::to_string(kSnapshotVersion) +
                    " n=" + std::to_string(state.grid().n()) +
                    " r=" + std::to_string(state.rank()) + " t=";
  append_value(out, state.t);
  out += " lambda=";
  append_value(out, lambda);
  out += " alpha0=";
  append_value(out, alpha0);
  out += " degrees=";
  for (std::size_t i = 0; i < degrees.size(); ++i) {
    if (i > 0) out.push_back(',');
    out += std::to_string(degrees[i]);
  }
  out.push_back('\n');
  append_block(out, state.f);
  for (const auto& ui : state.u) append_block(out, ui);
  return out;
}

Snapshot parse_snapshot(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto nl = text.find('\n', start);
    const auto line = text.substr(start, nl == std::string_view::npos ? nl : nl - start);
    if (!tokens(line).empty() || lines.empty()) lines.push_back(line);
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  if (lines.empty()) throw SnapshotError(Kind::Parse, "snapshot: empty file");

  SnapshotMeta meta = parse_header(lines[0]);
  const int n = meta.n;
  const int r = meta.r;
  const int total = std::accumulate(meta.degrees.begin(), meta.degrees.end(), 0);
  if (n < 8 || (n & (n - 1)) != 0 || total <= 0) {
    throw SnapshotError(Kind::Dimension, "snapshot: invalid grid size or degrees in header");
  }
  const std::size_t expected_rows = static_cast<std::size_t>(r + 1) * n;
  if (lines.size() - 1 != expected_rows) {
    throw SnapshotError(Kind::Dimension, "snapshot: expected " + std::to_string(expected_rows) +
                                             " payload rows for n=" + std::to_string(n) +
                                             ", r=" + std::to_string(r) + ", found " +
                                             std::to_string(lines.size() - 1));
  }

  const Grid grid = make_grid(n, static_cast<double>(total));
  std::vector<ScalarField> blocks;
  for (int b = 0; b <= r; ++b) {
    ScalarField field(grid, 0.0);
    for (int j = 0; j < n; ++j) {
      const std::size_t row = 1 + static_cast<std::size_t>(b) * n + j;
      const auto tok = tokens(lines[row]);
      if (static_cast<int>(tok.size()) != n) {
        throw SnapshotError(Kind::Dimension, "snapshot: row " + std::to_string(row + 1) + " has " +
                                                 std::to_string(tok.size()) + " values, expected " +
                                                 std::to_string(n));
      }
      for (int k = 0; k < n; ++k) field(j, k) = parse_value<double>(tok[k], "value");
    }
    blocks.push_back(std::move(field));
  }
  const double t = meta.t;
  ScalarField f = std::move(blocks.front());
  std::vector<ScalarField> u(std::make_move_iterator(blocks.begin() + 1),
                             std::make_move_iterator(blocks.end()));
  return Snapshot{std::move(meta), State{std::move(f), std::move(u), t}};
}

void save_snapshot(const std::filesystem::path& path, const State& state, double lambda,
                   double alpha0, const std::vector<int>& degrees) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SnapshotError(Kind::Io, "cannot write snapshot " + path.string());
  out << format_snapshot(state, lambda, alpha0, degrees);
  if (!out) throw SnapshotError(Kind::Io, "failed writing snapshot " + path.string());
}

Snapshot load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SnapshotError(Kind::Io, "cannot read snapshot " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_snapshot(text.str());
}

}  // namespace demailly
