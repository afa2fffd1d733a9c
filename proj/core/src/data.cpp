#include "sknn/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "sknn/error.hpp"
#include "sknn/random.hpp"

namespace sknn {

const char* kind_name(FeatureKind k) {
  switch (k) {
    case FeatureKind::Continuous: return "continuous";
    case FeatureKind::Nominal: return "nominal";
    case FeatureKind::Ordinal: return "ordinal";
    case FeatureKind::Cyclic: return "cyclic";
  }
  return "?";
}

const char* origin_name(Origin o) {
  switch (o) {
    case Origin::Observed: return "observed";
    case Origin::Imputed: return "imputed";
    case Origin::Synthesized: return "synthesized";
  }
  return "?";
}

int FeatureSchema::intern(const std::string& symbol) {
  for (std::size_t i = 0; i < symbols.size(); ++i)
    if (symbols[i] == symbol) return static_cast<int>(i);
  symbols.push_back(symbol);
  return static_cast<int>(symbols.size() - 1);
}

int FeatureSchema::code_of(const std::string& symbol) const {
  for (std::size_t i = 0; i < symbols.size(); ++i)
    if (symbols[i] == symbol) return static_cast<int>(i);
  return -1;
}

const std::string& FeatureSchema::symbol_of(int code) const {
  return symbols.at(static_cast<std::size_t>(code));
}

int FeatureSchema::level_of(const std::string& level) const {
  for (std::size_t i = 0; i < levels.size(); ++i)
    if (levels[i] == level) return static_cast<int>(i);
  return -1;
}

std::size_t Case::known_count() const {
  std::size_t n = 0;
  for (const auto& v : values)
    if (v.has_value()) ++n;
  return n;
}

std::size_t Case::missing_count() const { return values.size() - known_count(); }

int Dataset::feature_index(const std::string& name) const {
  for (std::size_t i = 0; i < schema.size(); ++i)
    if (schema[i].name == name) return static_cast<int>(i);
  return -1;
}

void Dataset::normalize_weights() {
  double total = 0;
  for (const auto& f : schema) total += f.weight;
  if (total <= 0) throw data_error("feature weights must sum to a positive value");
  for (auto& f : schema) f.weight /= total;
}

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == delim) {
      out.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  out.push_back(field);
  return out;
}

bool is_missing_token(const std::string& t) { return t.empty() || t == "?"; }

bool parse_number(const std::string& t, double& out) {
  const char* begin = t.data();
  const char* end = begin + t.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

bool read_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

}  // namespace

Dataset parse_table(std::istream& in, std::vector<FeatureSchema> schema, char delim) {
  std::string line;
  if (!read_line(in, line) || line.empty())
    throw data_error("missing header row");

  Dataset ds;
  ds.schema = std::move(schema);

  auto header = split_line(line, delim);
  std::vector<int> column_to_feature(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    int fi = ds.feature_index(header[c]);
    if (fi < 0) throw data_error("unknown column name: " + header[c]);
    column_to_feature[c] = fi;
  }

  std::int64_t next_id = 0;
  while (read_line(in, line)) {
    if (line.empty()) continue;
    auto fields = split_line(line, delim);
    if (fields.size() != header.size())
      throw data_error("row has " + std::to_string(fields.size()) + " fields, expected " +
                       std::to_string(header.size()));
    Case cs;
    cs.id = next_id++;
    cs.values.assign(ds.schema.size(), std::nullopt);
    cs.origin = Origin::Observed;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const std::string& tok = fields[c];
      if (is_missing_token(tok)) continue;
      FeatureSchema& f = ds.schema[static_cast<std::size_t>(column_to_feature[c])];
      double v = 0;
      switch (f.kind) {
        case FeatureKind::Continuous:
        case FeatureKind::Cyclic:
          if (!parse_number(tok, v))
            throw data_error("non-numeric token '" + tok + "' in " + kind_name(f.kind) +
                             " column " + f.name);
          break;
        case FeatureKind::Nominal:
          v = f.intern(tok);
          break;
        case FeatureKind::Ordinal: {
          int level = f.level_of(tok);
          if (level < 0)
            throw data_error("ordinal symbol '" + tok + "' not in level list of " + f.name);
          v = level;
          break;
        }
      }
      cs.values[static_cast<std::size_t>(column_to_feature[c])] = v;
    }
    ds.cases.push_back(std::move(cs));
  }
  ds.normalize_weights();
  return ds;
}

std::vector<FeatureSchema> infer_schema(std::istream& in, char delim) {
  std::string line;
  if (!read_line(in, line) || line.empty()) throw data_error("empty header");
  auto header = split_line(line, delim);

  std::vector<bool> numeric(header.size(), true);
  std::vector<bool> any_known(header.size(), false);
  while (read_line(in, line)) {
    if (line.empty()) continue;
    auto fields = split_line(line, delim);
    for (std::size_t c = 0; c < fields.size() && c < header.size(); ++c) {
      if (is_missing_token(fields[c])) continue;
      any_known[c] = true;
      double v;
      if (!parse_number(fields[c], v)) numeric[c] = false;
    }
  }

  std::vector<FeatureSchema> schema(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    schema[c].name = header[c];
    // All-missing columns default to continuous; mixed columns are nominal.
    schema[c].kind = numeric[c] ? FeatureKind::Continuous : FeatureKind::Nominal;
    schema[c].weight = 1.0 / static_cast<double>(header.size());
  }
  return schema;
}

std::vector<FeatureSchema> parse_schema_file(std::istream& in) {
  std::vector<FeatureSchema> schema;
  std::string line;
  while (read_line(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string name, kind;
    if (!(ls >> name >> kind)) throw data_error("bad schema line: " + line);
    FeatureSchema f;
    f.name = name;
    std::string tail;
    std::vector<std::string> rest;
    while (ls >> tail) rest.push_back(tail);
    std::size_t used = 0;
    if (kind == "continuous") {
      f.kind = FeatureKind::Continuous;
      if (!rest.empty() && rest[0].find(',') != std::string::npos) {
        auto parts = split_line(rest[0], ',');
        if (parts.size() != 2) throw data_error("bad bounds in schema line: " + line);
        double lo, hi;
        if (!parse_number(parts[0], lo) || !parse_number(parts[1], hi))
          throw data_error("bad bounds in schema line: " + line);
        f.lower = lo;
        f.upper = hi;
        used = 1;
      }
    } else if (kind == "nominal") {
      f.kind = FeatureKind::Nominal;
    } else if (kind == "ordinal") {
      f.kind = FeatureKind::Ordinal;
      if (rest.empty()) throw data_error("ordinal feature needs a level list: " + line);
      f.levels = split_line(rest[0], ',');
      if (f.levels.empty()) throw data_error("empty level list: " + line);
      for (std::size_t i = 0; i < f.levels.size(); ++i)
        for (std::size_t j = i + 1; j < f.levels.size(); ++j)
          if (f.levels[i] == f.levels[j])
            throw data_error("duplicate ordinal level '" + f.levels[i] + "' in " + name);
      used = 1;
    } else if (kind == "cyclic") {
      f.kind = FeatureKind::Cyclic;
      if (rest.empty() || !parse_number(rest[0], f.period) || f.period <= 0)
        throw data_error("cyclic feature needs a positive period: " + line);
      used = 1;
    } else {
      throw data_error("unknown feature kind '" + kind + "' in schema line: " + line);
    }
    if (rest.size() > used) {
      if (!parse_number(rest[used], f.weight) || f.weight <= 0)
        throw data_error("bad weight in schema line: " + line);
    }
    schema.push_back(std::move(f));
  }
  return schema;
}

std::string format_value(const FeatureSchema& f, const Value& v) {
  if (!v.has_value()) return "";
  switch (f.kind) {
    case FeatureKind::Nominal:
      return f.symbol_of(static_cast<int>(*v));
    case FeatureKind::Ordinal:
      return f.levels.at(static_cast<std::size_t>(*v));
    default: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", *v);
      return buf;
    }
  }
}

void write_table(std::ostream& out, const Dataset& ds, char delim, bool origin_column) {
  for (std::size_t i = 0; i < ds.schema.size(); ++i) {
    if (i) out << delim;
    out << ds.schema[i].name;
  }
  if (origin_column) out << delim << "origin";
  out << '\n';
  for (const auto& cs : ds.cases) {
    for (std::size_t i = 0; i < ds.schema.size(); ++i) {
      if (i) out << delim;
      out << format_value(ds.schema[i], cs.values[i]);
    }
    if (origin_column) out << delim << origin_name(cs.origin);
    out << '\n';
  }
}

Dataset mask_values(const Dataset& ds, double fraction, std::uint64_t seed,
                    std::vector<MaskEntry>& mask) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw usage_error("mask fraction must lie in (0,1)");
  mask.clear();

  std::vector<std::pair<std::size_t, std::size_t>> cells;
  for (std::size_t i = 0; i < ds.cases.size(); ++i)
    for (std::size_t j = 0; j < ds.schema.size(); ++j)
      if (ds.cases[i].values[j].has_value()) cells.emplace_back(i, j);
  if (cells.empty()) throw data_error("mask_values requires a complete dataset");

  std::size_t want = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(ds.cases.size()) *
                   static_cast<double>(ds.schema.size())));
  want = std::max<std::size_t>(1, std::min(want, cells.size()));

  Rng rng(seed);
  // Fisher-Yates prefix of length `want`.
  for (std::size_t i = 0; i < want; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.integer(cells.size() - i));
    std::swap(cells[i], cells[j]);
  }

  Dataset out = ds;
  for (std::size_t i = 0; i < want; ++i) {
    auto [ci, fi] = cells[i];
    mask.push_back({ci, fi, *out.cases[ci].values[fi]});
    out.cases[ci].values[fi] = std::nullopt;
  }
  std::sort(mask.begin(), mask.end(), [](const MaskEntry& a, const MaskEntry& b) {
    return a.case_index != b.case_index ? a.case_index < b.case_index
                                        : a.feature < b.feature;
  });
  return out;
}

}  // namespace sknn
