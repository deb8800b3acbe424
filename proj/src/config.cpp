#include "bahadur_lab/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <tuple>

#include "bahadur_lab/errors.hpp"

namespace bahadur_lab {

namespace {

struct Value {
  enum class Type { Number, String, Bool, Array };
  Type type;
  std::string text;
  bool flag = false;
  std::vector<Value> items;
  std::size_t line = 0;
};

struct Entry {
  std::string key;
  Value value;
};

struct Table {
  std::size_t line = 0;
  std::vector<Entry> entries;
};

struct Document {
  std::optional<Table> experiment;
  std::vector<Table> tests;
  std::vector<Table> alternatives;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Drops a trailing comment, ignoring '#' inside strings.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted && c == '\\') {
      ++i;
    } else if (c == '"') {
      quoted = !quoted;
    } else if (c == '#' && !quoted) {
      return line.substr(0, i);
    }
  }
  return line;
}

class ValueParser {
 public:
  ValueParser(std::string_view text, std::size_t line) : s_(text), line_(line) {}

  Value parse_all() {
    Value v = parse();
    skip_space();
    if (pos_ != s_.size()) fail("unexpected trailing characters");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, line_); }

  void skip_space() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\r' ||
                                s_[pos_] == '\n')) {
      ++pos_;
    }
  }

  Value parse() {
    skip_space();
    if (pos_ >= s_.size()) fail("missing value");
    const char c = s_[pos_];
    if (c == '"') return parse_string();
    if (c == '[') return parse_array();
    if (s_.substr(pos_, 4) == "true") {
      pos_ += 4;
      return {Value::Type::Bool, "true", true, {}, line_};
    }
    if (s_.substr(pos_, 5) == "false") {
      pos_ += 5;
      return {Value::Type::Bool, "false", false, {}, line_};
    }
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::string_view("+-.0123456789eE_").find(s_[pos_]) !=
                                   std::string_view::npos) {
      ++pos_;
    }
    if (pos_ == start) fail("cannot parse value");
    std::string text(s_.substr(start, pos_ - start));
    text.erase(std::remove(text.begin(), text.end(), '_'), text.end());
    return {Value::Type::Number, text, false, {}, line_};
  }

  Value parse_string() {
    std::string out;
    ++pos_;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      char c = s_[pos_++];
      if (c == '\\') {
        if (pos_ >= s_.size()) break;
        const char e = s_[pos_++];
        switch (e) {
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          default: fail(std::string("unsupported escape \\") + e);
        }
      }
      out.push_back(c);
    }
    if (pos_ >= s_.size()) fail("unterminated string");
    ++pos_;
    return {Value::Type::String, out, false, {}, line_};
  }

  Value parse_array() {
    Value v{Value::Type::Array, {}, false, {}, line_};
    ++pos_;
    skip_space();
    if (pos_ < s_.size() && s_[pos_] == ']') {
      ++pos_;
      return v;
    }
    for (;;) {
      v.items.push_back(parse());
      skip_space();
      if (pos_ >= s_.size()) fail("unterminated array");
      if (s_[pos_] == ',') {
        ++pos_;
        skip_space();
        if (pos_ < s_.size() && s_[pos_] == ']') {
          ++pos_;
          return v;
        }
        continue;
      }
      if (s_[pos_] == ']') {
        ++pos_;
        return v;
      }
      fail("expected ',' or ']' in array");
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::size_t line_;
};

int bracket_balance(const std::string& s) {
  int depth = 0;
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (quoted && s[i] == '\\') {
      ++i;
    } else if (s[i] == '"') {
      quoted = !quoted;
    } else if (!quoted && s[i] == '[') {
      ++depth;
    } else if (!quoted && s[i] == ']') {
      --depth;
    }
  }
  return depth;
}

bool valid_key(const std::string& key) {
  return !key.empty() && std::all_of(key.begin(), key.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '-';
  });
}

Document parse_document(const std::string& text) {
  std::vector<std::string> lines;
  {
    std::istringstream in(text);
    std::string l;
    while (std::getline(in, l)) lines.push_back(l);
  }
  Document doc;
  Table* current = nullptr;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    std::string line = trim(strip_comment(lines[i]));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.rfind("[[", 0) == 0) {
        if (line.size() < 4 || line.substr(line.size() - 2) != "]]") {
          throw ParseError("malformed table header", line_no);
        }
        const std::string name = trim(line.substr(2, line.size() - 4));
        auto& list = name == "tests"          ? doc.tests
                     : name == "alternatives" ? doc.alternatives
                                              : throw BadValue("unknown section [[" + name + "]]", line_no);
        list.push_back(Table{line_no, {}});
        current = &list.back();
      } else {
        if (line.back() != ']') throw ParseError("malformed table header", line_no);
        const std::string name = trim(line.substr(1, line.size() - 2));
        if (name != "experiment") throw BadValue("unknown section [" + name + "]", line_no);
        if (doc.experiment) throw ParseError("duplicate section [experiment]", line_no);
        doc.experiment = Table{line_no, {}};
        current = &*doc.experiment;
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no);
    const std::string key = trim(line.substr(0, eq));
    if (!valid_key(key)) throw ParseError("invalid key '" + key + "'", line_no);
    std::string value_text = line.substr(eq + 1);
    while (bracket_balance(value_text) > 0 && i + 1 < lines.size()) {
      value_text += "\n" + strip_comment(lines[++i]);
    }
    if (!current) throw ParseError("key '" + key + "' outside of any section", line_no);
    for (const auto& e : current->entries) {
      if (e.key == key) throw BadValue("duplicate key '" + key + "'", line_no);
    }
    current->entries.push_back({key, ValueParser(value_text, line_no).parse_all()});
  }
  return doc;
}

class Reader {
 public:
  Reader(const Table& table, std::string section, std::vector<std::string> known)
      : table_(table), section_(std::move(section)) {
    for (const auto& e : table.entries) {
      if (std::find(known.begin(), known.end(), e.key) == known.end()) {
        throw BadValue("unknown key '" + e.key + "' in " + section_, e.value.line);
      }
    }
  }

  const Value* find(const std::string& key) const {
    for (const auto& e : table_.entries) {
      if (e.key == key) return &e.value;
    }
    return nullptr;
  }

  const Value& require(const std::string& key) const {
    const Value* v = find(key);
    if (!v) throw MissingKey("missing key '" + key + "' in " + section_, table_.line);
    return *v;
  }

  [[noreturn]] void bad(const std::string& key, const std::string& what, const Value& v) const {
    throw BadValue("key '" + key + "': " + what, v.line);
  }

  std::uint64_t unsigned_integer(const std::string& key, const Value& v) const {
    std::uint64_t out = 0;
    if (v.type != Value::Type::Number) bad(key, "expected an integer", v);
    const char* end = v.text.data() + v.text.size();
    const char* first = v.text.data();
    if (*first == '+') ++first;
    const auto res = std::from_chars(first, end, out);
    if (res.ec != std::errc{} || res.ptr != end) bad(key, "expected a nonnegative integer", v);
    return out;
  }

  double real(const std::string& key, const Value& v) const {
    double out = 0.0;
    if (v.type != Value::Type::Number) bad(key, "expected a number", v);
    const char* end = v.text.data() + v.text.size();
    const char* first = v.text.data();
    if (*first == '+') ++first;
    const auto res = std::from_chars(first, end, out);
    if (res.ec != std::errc{} || res.ptr != end || !std::isfinite(out)) {
      bad(key, "expected a finite number", v);
    }
    return out;
  }

  std::string string(const std::string& key, const Value& v) const {
    if (v.type != Value::Type::String) bad(key, "expected a string", v);
    return v.text;
  }

  std::vector<double> reals(const std::string& key, const Value& v) const {
    if (v.type != Value::Type::Array) bad(key, "expected an array", v);
    std::vector<double> out;
    for (const auto& item : v.items) out.push_back(real(key, item));
    return out;
  }

 private:
  const Table& table_;
  std::string section_;
};

WeightFunction read_weight(const Reader& r) {
  std::string kind = "unit";
  if (const Value* v = r.find("psi")) kind = r.string("psi", *v);
  WeightFunction psi = WeightFunction::unit();
  if (kind == "unit") {
    psi = WeightFunction::unit();
  } else if (kind == "ad") {
    psi = WeightFunction::anderson_darling();
  } else if (kind == "table") {
    const Value& k = r.require("knots");
    const Value& vals = r.require("values");
    try {
      psi = WeightFunction::table(r.reals("knots", k), r.reals("values", vals));
    } catch (const DomainError& e) {
      r.bad("knots", e.what(), k);
    }
  } else {
    r.bad("psi", "expected \"unit\", \"ad\" or \"table\"", *r.find("psi"));
  }
  if (kind != "table") {
    for (const char* key : {"knots", "values"}) {
      if (const Value* v = r.find(key)) r.bad(key, "only allowed with psi = \"table\"", *v);
    }
  }
  if (const Value* v = r.find("scale")) {
    const double c = r.real("scale", *v);
    if (!(c > 0.0)) r.bad("scale", "must be positive", *v);
    psi = psi.scaled(c);
  }
  return psi;
}

std::string number(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  std::string s(buf.data(), res.ptr);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out + "\"";
}

std::string weight_lines(const WeightFunction& psi) {
  std::string out;
  switch (psi.kind()) {
    case WeightFunction::Kind::Unit: out += "psi = \"unit\"\n"; break;
    case WeightFunction::Kind::AndersonDarling: out += "psi = \"ad\"\n"; break;
    case WeightFunction::Kind::Table: {
      out += "psi = \"table\"\n";
      auto list = [](std::span<const double> xs) {
        std::string s = "[";
        for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + number(xs[i]);
        return s + "]";
      };
      out += "knots = " + list(psi.knots()) + "\n";
      out += "values = " + list(psi.values()) + "\n";
      break;
    }
  }
  if (psi.scale() != 1.0) out += "scale = " + number(psi.scale()) + "\n";
  return out;
}

std::string canonical_test_name(TestKind::Id id) {
  switch (id) {
    case TestKind::Id::KS: return "ks";
    case TestKind::Id::CvM: return "cvm_simple";
    case TestKind::Id::AD: return "ad_simple";
    case TestKind::Id::Lilliefors: return "lilliefors";
    case TestKind::Id::WeightedCvM: return "weighted_cvm";
    case TestKind::Id::ShapiroWilk: return "shapiro_wilk";
    case TestKind::Id::BHEP: return "bhep";
  }
  return "";
}

std::string format_number(double v) {
  std::array<char, 40> buf{};
  std::snprintf(buf.data(), buf.size(), "%.9g", v);
  return buf.data();
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  const Document doc = parse_document(text);
  if (!doc.experiment) throw MissingKey("missing section [experiment]");

  ExperimentConfig config;
  const Reader exp(*doc.experiment, "[experiment]",
                   {"seed", "replications", "sample_sizes", "bhep_beta", "output"});
  config.seed = exp.unsigned_integer("seed", exp.require("seed"));
  const Value& reps = exp.require("replications");
  config.replications = exp.unsigned_integer("replications", reps);
  if (config.replications < 1) exp.bad("replications", "must be at least 1", reps);

  const Value& sizes = exp.require("sample_sizes");
  if (sizes.type != Value::Type::Array || sizes.items.empty()) {
    exp.bad("sample_sizes", "expected a nonempty array of integers", sizes);
  }
  for (const auto& item : sizes.items) {
    const auto n = exp.unsigned_integer("sample_sizes", item);
    if (n < 3) exp.bad("sample_sizes", "every sample size must be at least 3", item);
    config.sample_sizes.push_back(n);
  }
  if (const Value* v = exp.find("bhep_beta")) {
    config.bhep_beta = exp.real("bhep_beta", *v);
    if (!(config.bhep_beta > 0.0)) exp.bad("bhep_beta", "must be positive", *v);
  }
  if (const Value* v = exp.find("output")) config.output_path = exp.string("output", *v);

  if (doc.tests.empty()) throw MissingKey("at least one [[tests]] section is required");
  for (const auto& table : doc.tests) {
    const Reader r(table, "[[tests]]", {"name", "psi", "scale", "knots", "values", "beta"});
    const Value& name_value = r.require("name");
    const std::string name = r.string("name", name_value);
    const WeightFunction psi = read_weight(r);
    double beta = config.bhep_beta;
    if (const Value* v = r.find("beta")) beta = r.real("beta", *v);
    try {
      const TestKind test = TestKind::parse(name, psi, beta);
      const bool takes_psi =
          test.id() == TestKind::Id::Lilliefors ||
          (test.id() == TestKind::Id::WeightedCvM && name == "weighted_cvm");
      if (!takes_psi && r.find("psi")) r.bad("psi", "test '" + name + "' takes no weight", *r.find("psi"));
      if (test.id() != TestKind::Id::BHEP && r.find("beta")) {
        r.bad("beta", "only allowed for bhep", *r.find("beta"));
      }
      config.tests.push_back(test);
    } catch (const DomainError& e) {
      r.bad("name", e.what(), name_value);
    }
  }

  if (doc.alternatives.empty()) {
    throw MissingKey("at least one [[alternatives]] section is required");
  }
  for (const auto& table : doc.alternatives) {
    const Reader r(table, "[[alternatives]]", {"family", "params"});
    const Value& family = r.require("family");
    std::vector<double> params;
    if (const Value* v = r.find("params")) params = r.reals("params", *v);
    try {
      config.alternatives.push_back(AlternativeSpec::from_name(r.string("family", family), params));
    } catch (const DomainError& e) {
      r.bad("family", e.what(), family);
    }
  }

  try {
    config.validate();
  } catch (const DomainError& e) {
    throw BadValue(e.what());
  }
  return config;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str());
}

std::string emit_config(const ExperimentConfig& config) {
  std::string out = "[experiment]\n";
  out += "seed = " + std::to_string(config.seed) + "\n";
  out += "replications = " + std::to_string(config.replications) + "\n";
  out += "sample_sizes = [";
  for (std::size_t i = 0; i < config.sample_sizes.size(); ++i) {
    out += (i ? ", " : "") + std::to_string(config.sample_sizes[i]);
  }
  out += "]\n";
  out += "bhep_beta = " + number(config.bhep_beta) + "\n";
  if (!config.output_path.empty()) out += "output = " + quoted(config.output_path) + "\n";

  for (const auto& test : config.tests) {
    out += "\n[[tests]]\nname = \"" + canonical_test_name(test.id()) + "\"\n";
    if (test.id() == TestKind::Id::Lilliefors || test.id() == TestKind::Id::WeightedCvM) {
      out += weight_lines(test.psi());
    }
    if (test.id() == TestKind::Id::BHEP) out += "beta = " + number(test.beta()) + "\n";
  }
  for (const auto& alt : config.alternatives) {
    out += "\n[[alternatives]]\nfamily = \"" + alt.family_name() + "\"\n";
    out += "params = [" + number(alt.first());
    if (alt.family() != Family::Exponential) out += ", " + number(alt.second());
    out += "]\n";
  }
  return out;
}

std::string format_table(const std::vector<PValueCell>& cells, std::uint64_t seed,
                         std::size_t replications) {
  std::vector<const PValueCell*> rows;
  rows.reserve(cells.size());
  for (const auto& c : cells) rows.push_back(&c);
  std::stable_sort(rows.begin(), rows.end(), [](const PValueCell* x, const PValueCell* y) {
    const auto kx = std::tuple(x->alternative.label(), x->n, x->test.label());
    const auto ky = std::tuple(y->alternative.label(), y->n, y->test.label());
    return kx < ky;
  });
  std::string out = "alternative,n,test,mean_pvalue,std_error,seed,N\n";
  for (const auto* c : rows) {
    out += c->alternative.label();
    out += ',' + std::to_string(c->n) + ',' + c->test.label() + ',';
    out += format_number(c->estimate) + ',' + format_number(c->std_error) + ',';
    out += std::to_string(seed) + ',' + std::to_string(replications) + '\n';
  }
  return out;
}

void emit_table(const std::vector<PValueCell>& cells, std::uint64_t seed,
                std::size_t replications, const std::filesystem::path& path) {
  if (cells.empty()) throw DomainError("no cells to write");
  const std::string text = format_table(cells, seed, replications);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::vector<double> read_data_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read data file '" + path.string() + "'");
  std::vector<double> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(strip_comment(line));
    if (body.empty()) continue;
    double v = 0.0;
    const char* first = body.data();
    const char* end = body.data() + body.size();
    if (*first == '+') ++first;
    const auto res = std::from_chars(first, end, v);
    if (res.ec != std::errc{} || res.ptr != end || !std::isfinite(v)) {
      throw ParseError("not a finite number: '" + body + "'", line_no);
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace bahadur_lab
