#pragma once

#include <string>
#include <vector>

#include "sknn/engine.hpp"
#include "sknn/random.hpp"
#include "sknn/residuals.hpp"

namespace sknn::testing {

inline FeatureSchema continuous(const std::string& name, double weight = 1.0) {
  FeatureSchema f;
  f.name = name;
  f.kind = FeatureKind::Continuous;
  f.weight = weight;
  return f;
}

inline FeatureSchema nominal(const std::string& name,
                             const std::vector<std::string>& symbols,
                             double weight = 1.0) {
  FeatureSchema f;
  f.name = name;
  f.kind = FeatureKind::Nominal;
  f.weight = weight;
  for (const auto& s : symbols) f.intern(s);
  return f;
}

inline FeatureSchema cyclic(const std::string& name, double period, double weight = 1.0) {
  FeatureSchema f;
  f.name = name;
  f.kind = FeatureKind::Cyclic;
  f.period = period;
  f.weight = weight;
  return f;
}

inline FeatureSchema ordinal(const std::string& name,
                             const std::vector<std::string>& levels,
                             double weight = 1.0) {
  FeatureSchema f;
  f.name = name;
  f.kind = FeatureKind::Ordinal;
  f.levels = levels;
  f.weight = weight;
  return f;
}

// Rows of fully known values over the given schema; ids in row order.
inline Dataset dataset(std::vector<FeatureSchema> schema,
                       const std::vector<std::vector<double>>& rows) {
  Dataset ds;
  ds.schema = std::move(schema);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    Case cs;
    cs.id = static_cast<std::int64_t>(i);
    for (double v : rows[i]) cs.values.push_back(v);
    ds.cases.push_back(std::move(cs));
  }
  ds.normalize_weights();
  return ds;
}

// A 1-D model over plain absolute differences (no deviation correction).
inline Model line_model(const std::vector<double>& xs, int k = 8, double p = 1.0) {
  std::vector<std::vector<double>> rows;
  for (double x : xs) rows.push_back({x});
  Hyperparams omega;
  omega.k = k;
  omega.metric.p = p;
  omega.metric.mode = DeviationMode::None;
  Model m = make_model(dataset({continuous("x")}, rows), omega);
  m.deviations = bootstrap_deviations(m.data);
  return m;
}

inline Model plain_model(Dataset ds, double p = 1.0, int k = 8) {
  Hyperparams omega;
  omega.k = k;
  omega.metric.p = p;
  omega.metric.mode = DeviationMode::None;
  Model m = make_model(std::move(ds), omega);
  m.deviations = bootstrap_deviations(m.data);
  return m;
}

inline Model lk_model(Dataset ds, double p = 0.0, int k = 8) {
  Hyperparams omega;
  omega.k = k;
  omega.metric.p = p;
  omega.metric.mode = DeviationMode::LkNormal;
  Model m = make_model(std::move(ds), omega);
  m.deviations = bootstrap_deviations(m.data);
  return m;
}

}  // namespace sknn::testing
