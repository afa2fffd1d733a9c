#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sknn {

enum class FeatureKind { Continuous, Nominal, Ordinal, Cyclic };

const char* kind_name(FeatureKind k);

// Per-feature schema entry. Nominal symbols are interned to dense integer
// codes in order of first appearance; the symbol table is open-set.
struct FeatureSchema {
  std::string name;
  FeatureKind kind = FeatureKind::Continuous;
  double weight = 1.0;
  std::vector<std::string> levels;           // ordinal only, ordered, duplicate-free
  double period = 0.0;                       // cyclic only, > 0
  std::optional<double> lower, upper;        // continuous bounds, optional
  std::vector<std::string> symbols;          // nominal interning table

  int intern(const std::string& symbol);
  int code_of(const std::string& symbol) const;  // -1 if absent
  const std::string& symbol_of(int code) const;
  int level_of(const std::string& level) const;  // -1 if absent
};

// A value is either a known double or missing. Nominal codes and ordinal
// level indices are stored as exact small integers in the double.
using Value = std::optional<double>;

enum class Origin { Observed, Imputed, Synthesized };

const char* origin_name(Origin o);

struct Case {
  std::int64_t id = 0;
  std::vector<Value> values;  // one slot per schema feature
  Origin origin = Origin::Observed;
  std::string session;        // empty means none

  std::size_t known_count() const;
  std::size_t missing_count() const;
};

struct Dataset {
  std::vector<FeatureSchema> schema;
  std::vector<Case> cases;

  std::size_t feature_count() const { return schema.size(); }
  std::size_t size() const { return cases.size(); }
  int feature_index(const std::string& name) const;  // -1 if absent

  // Rescales feature weights to sum to 1. Idempotent.
  void normalize_weights();
};

// Parses delimiter-separated text against a given schema. The header row
// must name schema features only; empty fields and "?" are missing.
Dataset parse_table(std::istream& in, std::vector<FeatureSchema> schema, char delim = ',');

// Infers a schema from the header plus data: columns whose non-missing
// tokens all parse as numbers become continuous, everything else nominal.
// Weights come out uniform.
std::vector<FeatureSchema> infer_schema(std::istream& in, char delim = ',');

// Schema override file: one feature per line,
//   name kind [params] [weight]
// where params is levels for ordinal (comma-separated), the period for
// cyclic, and optional min,max bounds for continuous.
std::vector<FeatureSchema> parse_schema_file(std::istream& in);

void write_table(std::ostream& out, const Dataset& ds, char delim = ',',
                 bool origin_column = false);

std::string format_value(const FeatureSchema& f, const Value& v);

struct MaskEntry {
  std::size_t case_index;
  std::size_t feature;
  double value;  // ground truth removed by the mask
};

// Deterministically blanks a fraction of known cells of a complete
// dataset. Mask size is max(1, round(fraction * n * xi)).
Dataset mask_values(const Dataset& ds, double fraction, std::uint64_t seed,
                    std::vector<MaskEntry>& mask);

}  // namespace sknn
