#include "sknn/persistence.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "sknn/error.hpp"

namespace sknn {

namespace {

constexpr int kFormatVersion = 1;
constexpr const char* kMagic = "sknn-snapshot";

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

class Writer {
public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void i64(std::int64_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    buf_.append(s);
  }
  const std::string& bytes() const { return buf_; }

private:
  void raw(const void* p, std::size_t n) {
    buf_.append(static_cast<const char*>(p), n);
  }
  std::string buf_;
};

class Reader {
public:
  explicit Reader(const std::string& bytes) : buf_(bytes) {}

  std::uint8_t u8() {
    check(1);
    return static_cast<std::uint8_t>(buf_[pos_++]);
  }
  std::uint32_t u32() {
    std::uint32_t v;
    raw(&v, sizeof v);
    return v;
  }
  std::int64_t i64() {
    std::int64_t v;
    raw(&v, sizeof v);
    return v;
  }
  double f64() {
    double v;
    raw(&v, sizeof v);
    return v;
  }
  std::string str() {
    auto len = u32();
    check(len);
    std::string s = buf_.substr(pos_, len);
    pos_ += len;
    return s;
  }
  bool exhausted() const { return pos_ == buf_.size(); }

private:
  void check(std::size_t n) {
    if (pos_ + n > buf_.size()) throw corruption_error("snapshot body truncated");
  }
  void raw(void* p, std::size_t n) {
    check(n);
    std::memcpy(p, buf_.data() + pos_, n);
    pos_ += n;
  }
  const std::string& buf_;
  std::size_t pos_ = 0;
};

std::string encode_body(const Model& m) {
  Writer w;
  const std::size_t xi = m.feature_count();
  w.u32(static_cast<std::uint32_t>(xi));
  w.i64(static_cast<std::int64_t>(m.size()));

  for (const auto& f : m.data.schema) {
    w.str(f.name);
    w.u8(static_cast<std::uint8_t>(f.kind));
    w.f64(f.weight);
    w.u32(static_cast<std::uint32_t>(f.levels.size()));
    for (const auto& l : f.levels) w.str(l);
    w.f64(f.period);
    w.u8(f.lower.has_value() ? 1 : 0);
    w.f64(f.lower.value_or(0.0));
    w.u8(f.upper.has_value() ? 1 : 0);
    w.f64(f.upper.value_or(0.0));
    w.u32(static_cast<std::uint32_t>(f.symbols.size()));
    for (const auto& s : f.symbols) w.str(s);
  }

  w.u32(static_cast<std::uint32_t>(m.omega.k));
  w.f64(m.omega.metric.p);
  w.f64(m.omega.alpha);
  w.u8(m.omega.metric.mode == DeviationMode::LkNormal ? 1 : 0);

  w.u8(m.deviations.empty() ? 0 : 1);
  if (!m.deviations.empty()) {
    for (double r : m.deviations.r) w.f64(r);
    for (const auto& c : m.deviations.confusion) {
      w.u32(static_cast<std::uint32_t>(c.size));
      for (double p : c.p) w.f64(p);
    }
  }

  w.u8(m.stats_valid ? 1 : 0);
  if (m.stats_valid) w.f64(m.expected_self_info);

  // Canonical case order: ascending id (cached stats follow the same order).
  std::vector<std::size_t> order(m.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return m.data.cases[a].id < m.data.cases[b].id;
  });

  for (std::size_t idx : order) {
    const Case& cs = m.data.cases[idx];
    w.i64(cs.id);
    w.u8(static_cast<std::uint8_t>(cs.origin));
    w.str(cs.session);
    for (std::size_t j = 0; j < xi; ++j) {
      w.u8(cs.values[j].has_value() ? 1 : 0);
      w.f64(cs.values[j].value_or(0.0));
    }
    if (m.stats_valid) w.f64(m.case_self_info[idx]);
  }
  return w.bytes();
}

}  // namespace

void save_model(const Model& m, std::ostream& out) {
  std::string body = encode_body(m);
  char digest[20];
  std::snprintf(digest, sizeof digest, "%016llx",
                static_cast<unsigned long long>(fnv1a(body)));
  out << kMagic << ' ' << kFormatVersion << '\n'
      << "digest " << digest << '\n'
      << "features " << m.feature_count() << '\n'
      << "cases " << m.size() << '\n';
  for (const auto& f : m.data.schema)
    out << "# feature " << f.name << ' ' << kind_name(f.kind) << '\n';
  out << "body " << body.size() << '\n' << body;
}

void save_model(const Model& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot open " + path + " for writing");
  save_model(m, out);
  if (!out) throw data_error("failed writing " + path);
}

Model load_model(std::istream& in) {
  std::string magic, digest_hex, line;
  int version = -1;
  if (!(in >> magic >> version) || magic != kMagic)
    throw corruption_error("not a snapshot file");
  if (version != kFormatVersion)
    throw corruption_error("unsupported snapshot version " + std::to_string(version));

  std::size_t body_len = 0;
  std::string key;
  while (in >> key) {
    if (key == "digest") {
      in >> digest_hex;
    } else if (key == "#") {
      std::getline(in, line);
    } else if (key == "body") {
      in >> body_len;
      break;
    } else {
      in >> line;  // features/cases counts are informational
    }
  }
  if (digest_hex.empty()) throw corruption_error("snapshot missing digest");
  in.get();  // newline after body length

  std::string body(body_len, '\0');
  in.read(body.data(), static_cast<std::streamsize>(body_len));
  if (static_cast<std::size_t>(in.gcount()) != body_len)
    throw corruption_error("snapshot body truncated");

  char digest[20];
  std::snprintf(digest, sizeof digest, "%016llx",
                static_cast<unsigned long long>(fnv1a(body)));
  if (digest_hex != digest) throw corruption_error("snapshot digest mismatch");

  Reader r(body);
  Model m;
  auto xi = r.u32();
  auto n = static_cast<std::size_t>(r.i64());

  for (std::uint32_t j = 0; j < xi; ++j) {
    FeatureSchema f;
    f.name = r.str();
    f.kind = static_cast<FeatureKind>(r.u8());
    f.weight = r.f64();
    auto nlevels = r.u32();
    for (std::uint32_t l = 0; l < nlevels; ++l) f.levels.push_back(r.str());
    f.period = r.f64();
    bool has_lower = r.u8() != 0;
    double lower = r.f64();
    if (has_lower) f.lower = lower;
    bool has_upper = r.u8() != 0;
    double upper = r.f64();
    if (has_upper) f.upper = upper;
    auto nsym = r.u32();
    for (std::uint32_t s = 0; s < nsym; ++s) f.symbols.push_back(r.str());
    m.data.schema.push_back(std::move(f));
  }

  m.omega.k = static_cast<int>(r.u32());
  m.omega.metric.p = r.f64();
  m.omega.alpha = r.f64();
  m.omega.metric.mode = r.u8() != 0 ? DeviationMode::LkNormal : DeviationMode::None;

  if (r.u8() != 0) {
    m.deviations.r.resize(xi);
    for (std::uint32_t j = 0; j < xi; ++j) m.deviations.r[j] = r.f64();
    m.deviations.confusion.resize(xi);
    for (std::uint32_t j = 0; j < xi; ++j) {
      auto size = r.u32();
      m.deviations.confusion[j].size = static_cast<int>(size);
      m.deviations.confusion[j].p.resize(static_cast<std::size_t>(size) * size);
      for (auto& p : m.deviations.confusion[j].p) p = r.f64();
    }
  }

  m.stats_valid = r.u8() != 0;
  if (m.stats_valid) m.expected_self_info = r.f64();

  for (std::size_t i = 0; i < n; ++i) {
    Case cs;
    cs.id = r.i64();
    cs.origin = static_cast<Origin>(r.u8());
    cs.session = r.str();
    cs.values.resize(xi);
    for (std::uint32_t j = 0; j < xi; ++j) {
      bool known = r.u8() != 0;
      double v = r.f64();
      if (known) cs.values[j] = v;
    }
    m.data.cases.push_back(std::move(cs));
    if (m.stats_valid) m.case_self_info.push_back(r.f64());
  }
  if (!r.exhausted()) throw corruption_error("trailing bytes in snapshot body");
  return m;
}

Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open " + path);
  return load_model(in);
}

}  // namespace sknn
