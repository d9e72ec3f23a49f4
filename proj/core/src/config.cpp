#include "krisk/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "krisk/error.hpp"

namespace krisk {
namespace {

struct RawValue {
  bool array = false;
  bool quoted = false;
  std::string scalar;
  std::vector<std::string> items;
  int line = 0;
};

using Section = std::map<std::string, RawValue>;

[[noreturn]] void fail(const std::string& field, int line, const std::string& msg) {
  std::string where = field;
  if (line > 0) where += " (line " + std::to_string(line) + ")";
  throw Error(ErrorCode::Config, where + ": " + msg);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Cuts a trailing comment that is not inside a string.
std::string_view strip_comment(std::string_view s) {
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && in_string) {
      ++i;
    } else if (s[i] == '"') {
      in_string = !in_string;
    } else if (s[i] == '#' && !in_string) {
      return s.substr(0, i);
    }
  }
  return s;
}

std::string unquote(std::string_view s, const std::string& field, int line) {
  if (s.size() < 2 || s.front() != '"' || s.back() != '"') fail(field, line, "unterminated string");
  std::string out;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    if (s[i] == '\\') {
      if (i + 2 >= s.size()) fail(field, line, "dangling escape");
      const char c = s[++i];
      if (c == 'n') out += '\n';
      else if (c == 't') out += '\t';
      else if (c == '"' || c == '\\') out += c;
      else fail(field, line, std::string("unknown escape \\") + c);
    } else if (s[i] == '"') {
      fail(field, line, "stray quote in string");
    } else {
      out += s[i];
    }
  }
  return out;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') {
      out += '\\';
      out += c;
    } else if (c == '\n') {
      out += "\\n";
    } else if (c == '\t') {
      out += "\\t";
    } else {
      out += c;
    }
  }
  return out + "\"";
}

std::map<std::string, Section> tokenize(std::string_view text) {
  std::map<std::string, Section> doc;
  std::string section;
  doc[section];
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("section", line_no, "missing ']'");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section.empty()) fail("section", line_no, "empty section name");
      if (doc.count(section) && !doc[section].empty()) fail(section, line_no, "duplicate section");
      doc[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail("line", line_no, "expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const auto value = trim(line.substr(eq + 1));
    const std::string field = section.empty() ? key : section + "." + key;
    if (key.empty()) fail("line", line_no, "missing key");
    if (value.empty()) fail(field, line_no, "missing value");
    RawValue v;
    v.line = line_no;
    if (value.front() == '[') {
      if (value.back() != ']') fail(field, line_no, "array must close on the same line");
      v.array = true;
      const auto body = trim(value.substr(1, value.size() - 2));
      std::size_t start = 0;
      while (!body.empty() && start <= body.size()) {
        const auto comma = body.find(',', start);
        const auto item = trim(body.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (item.empty()) fail(field, line_no, "empty array element");
        v.items.emplace_back(item);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
      }
    } else if (value.front() == '"') {
      v.quoted = true;
      v.scalar = unquote(value, field, line_no);
    } else {
      v.scalar = std::string(value);
    }
    auto& sec = doc[section];
    if (sec.count(key)) fail(field, line_no, "duplicate key");
    sec.emplace(key, std::move(v));
  }
  return doc;
}

double parse_number(const std::string& s, const std::string& field, int line) {
  double v = 0.0;
  const char* first = s.data();
  if (!s.empty() && s.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    fail(field, line, "expected a finite number, got '" + s + "'");
  }
  return v;
}

std::uint64_t parse_unsigned(const std::string& s, const std::string& field, int line) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    fail(field, line, "expected a non-negative integer, got '" + s + "'");
  }
  return v;
}

long long parse_signed(const std::string& s, const std::string& field, int line) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    fail(field, line, "expected an integer, got '" + s + "'");
  }
  return v;
}

// Typed access to one section; every key must be consumed.
class Reader {
 public:
  Reader(std::string name, Section sec) : name_(std::move(name)), sec_(std::move(sec)) {}

  const RawValue* find(const std::string& key) {
    const auto it = sec_.find(key);
    if (it == sec_.end()) return nullptr;
    used_.push_back(key);
    return &it->second;
  }
  std::string field(const std::string& key) const { return name_.empty() ? key : name_ + "." + key; }

  const RawValue* scalar(const std::string& key, bool quoted) {
    const auto* v = find(key);
    if (!v) return nullptr;
    if (v->array) fail(field(key), v->line, "expected a scalar, got an array");
    if (v->quoted != quoted) fail(field(key), v->line, quoted ? "expected a quoted string" : "expected an unquoted value");
    return v;
  }
  void string(const std::string& key, std::string& out) {
    if (const auto* v = scalar(key, true)) out = v->scalar;
  }
  void number(const std::string& key, double& out) {
    if (const auto* v = scalar(key, false)) out = parse_number(v->scalar, field(key), v->line);
  }
  void number(const std::string& key, std::optional<double>& out) {
    if (const auto* v = scalar(key, false)) out = parse_number(v->scalar, field(key), v->line);
  }
  void count(const std::string& key, std::size_t& out) {
    if (const auto* v = scalar(key, false)) out = parse_unsigned(v->scalar, field(key), v->line);
  }
  void integer(const std::string& key, int& out) {
    if (const auto* v = scalar(key, false)) {
      const auto x = parse_signed(v->scalar, field(key), v->line);
      if (x < -1000000000LL || x > 1000000000LL) fail(field(key), v->line, "out of range");
      out = static_cast<int>(x);
    }
  }
  void numbers(const std::string& key, std::vector<double>& out) {
    const auto* v = find(key);
    if (!v) return;
    if (!v->array) fail(field(key), v->line, "expected an array");
    out.clear();
    for (const auto& item : v->items) out.push_back(parse_number(item, field(key), v->line));
  }
  void counts(const std::string& key, std::vector<std::size_t>& out) {
    const auto* v = find(key);
    if (!v) return;
    if (!v->array) fail(field(key), v->line, "expected an array");
    out.clear();
    for (const auto& item : v->items) out.push_back(parse_unsigned(item, field(key), v->line));
  }
  void finish() const {
    for (const auto& [key, v] : sec_) {
      if (std::find(used_.begin(), used_.end(), key) == used_.end()) {
        fail(field(key), v.line, "unknown key");
      }
    }
  }

 private:
  std::string name_;
  Section sec_;
  std::vector<std::string> used_;
};

ProblemKind parse_problem_kind(const std::string& s, const std::string& field) {
  if (s == "quadric") return ProblemKind::Quadric;
  if (s == "sine") return ProblemKind::Sine;
  if (s == "bell") return ProblemKind::Bell;
  fail(field, 0, "unknown problem kind '" + s + "' (quadric, sine, bell)");
}

Orientation parse_orientation(const std::string& s, const std::string& field) {
  if (s == "upper") return Orientation::Upper;
  if (s == "lower") return Orientation::Lower;
  fail(field, 0, "orientation must be 'upper' or 'lower', got '" + s + "'");
}

std::string list(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_double(v[i]);
  }
  return out + "]";
}

std::string list(const std::vector<std::size_t>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(v[i]);
  }
  return out + "]";
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw Error(ErrorCode::Io, "cannot format number");
  return std::string(buf, ptr);
}

std::string_view to_string(Orientation o) noexcept {
  return o == Orientation::Upper ? "upper" : "lower";
}

ModelKind parse_model_kind(std::string_view s) {
  if (s == "student") return ModelKind::Student;
  if (s == "gaussian-mle") return ModelKind::Gaussian;
  fail("model", 0, "expected 'student' or 'gaussian-mle', got '" + std::string(s) + "'");
}

ExperimentConfig parse_config(std::string_view text) {
  auto doc = tokenize(text);
  ExperimentConfig c;
  for (const auto& [name, sec] : doc) {
    if (name != "" && name != "problem" && name != "training" && name != "search" &&
        name != "mc" && name != "adaptive") {
      fail(name, sec.empty() ? 0 : sec.begin()->second.line, "unknown section");
    }
  }

  {
    Reader r("", doc[""]);
    std::string model = "student";
    r.string("model", model);
    c.model = parse_model_kind(model);
    if (const auto* v = r.scalar("seed", false)) c.seed = parse_unsigned(v->scalar, "seed", v->line);
    r.integer("threads", c.threads);
    r.string("output", c.output);
    r.finish();
  }
  {
    Reader r("problem", doc["problem"]);
    r.string("name", c.problem);
    if (c.problem == "custom") {
      CustomProblem p;
      std::string kind = "quadric";
      std::string orientation = "upper";
      r.string("kind", kind);
      p.kind = parse_problem_kind(kind, "problem.kind");
      r.numbers("coefficients", p.coefficients);
      r.numbers("centres", p.centres);
      r.numbers("widths", p.widths);
      r.count("dimension", p.dimension);
      r.number("threshold", p.threshold);
      r.string("orientation", orientation);
      p.orientation = parse_orientation(orientation, "problem.orientation");
      c.custom = p;
    }
    r.finish();
  }
  {
    Reader r("training", doc["training"]);
    r.string("csv", c.training_csv);
    r.count("points", c.training_points);
    r.finish();
  }
  {
    Reader r("search", doc["search"]);
    r.integer("restarts", c.restarts);
    r.number("gamma_min", c.gamma_min);
    r.number("gamma_max", c.gamma_max);
    r.number("gamma", c.pinned_gamma);
    r.numbers("lengths", c.fixed_lengths);
    r.integer("max_evaluations", c.max_evaluations);
    r.number("jitter", c.jitter);
    r.finish();
  }
  {
    Reader r("mc", doc["mc"]);
    r.counts("budgets", c.budgets);
    r.count("membership_samples", c.membership_samples);
    r.count("mixture_draws", c.mixture_draws);
    r.count("probes", c.probes);
    r.count("brute_force_samples", c.brute_force_samples);
    r.finish();
  }
  {
    Reader r("adaptive", doc["adaptive"]);
    r.count("initial_points", c.initial_points);
    r.integer("rounds", c.rounds);
    r.count("batch", c.batch);
    r.number("width_target", c.width_target);
    r.integer("starts", c.starts);
    r.finish();
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream o;
  o << "model = " << quote(c.model == ModelKind::Student ? "student" : "gaussian-mle") << "\n";
  if (c.seed) o << "seed = " << *c.seed << "\n";
  o << "threads = " << c.threads << "\n";
  o << "output = " << quote(c.output) << "\n";

  o << "\n[problem]\nname = " << quote(c.problem) << "\n";
  if (c.custom) {
    const auto& p = *c.custom;
    o << "kind = " << quote(std::string(to_string(p.kind))) << "\n";
    o << "coefficients = " << list(p.coefficients) << "\n";
    o << "centres = " << list(p.centres) << "\n";
    o << "widths = " << list(p.widths) << "\n";
    o << "dimension = " << p.dimension << "\n";
    o << "threshold = " << format_double(p.threshold) << "\n";
    o << "orientation = " << quote(std::string(to_string(p.orientation))) << "\n";
  }

  o << "\n[training]\n";
  o << "csv = " << quote(c.training_csv) << "\n";
  o << "points = " << c.training_points << "\n";

  o << "\n[search]\n";
  o << "restarts = " << c.restarts << "\n";
  o << "gamma_min = " << format_double(c.gamma_min) << "\n";
  o << "gamma_max = " << format_double(c.gamma_max) << "\n";
  if (c.pinned_gamma) o << "gamma = " << format_double(*c.pinned_gamma) << "\n";
  if (!c.fixed_lengths.empty()) o << "lengths = " << list(c.fixed_lengths) << "\n";
  o << "max_evaluations = " << c.max_evaluations << "\n";
  o << "jitter = " << format_double(c.jitter) << "\n";

  o << "\n[mc]\n";
  o << "budgets = " << list(c.budgets) << "\n";
  o << "membership_samples = " << c.membership_samples << "\n";
  o << "mixture_draws = " << c.mixture_draws << "\n";
  o << "probes = " << c.probes << "\n";
  o << "brute_force_samples = " << c.brute_force_samples << "\n";

  o << "\n[adaptive]\n";
  o << "initial_points = " << c.initial_points << "\n";
  o << "rounds = " << c.rounds << "\n";
  o << "batch = " << c.batch << "\n";
  o << "width_target = " << format_double(c.width_target) << "\n";
  o << "starts = " << c.starts << "\n";
  return o.str();
}

void ExperimentConfig::validate() const {
  if (!seed) fail("seed", 0, "a seed is required (set it in the file or pass --seed)");
  if (threads < 0) fail("threads", 0, "must be >= 0");
  if (output.empty()) fail("output", 0, "must not be empty");
  if (problem != "quadric" && problem != "sine" && problem != "bell" && problem != "custom") {
    fail("problem.name", 0, "unknown problem '" + problem + "' (quadric, sine, bell, custom)");
  }
  if (problem == "custom" && !custom) fail("problem", 0, "custom problem block missing");
  if (training_points == 0) fail("training.points", 0, "must be positive");
  if (restarts < 1) fail("search.restarts", 0, "must be positive");
  if (!(gamma_min > 0.0 && gamma_min < gamma_max && gamma_max <= 2.0)) {
    fail("search.gamma_min", 0, "need 0 < gamma_min < gamma_max <= 2");
  }
  if (pinned_gamma && !(*pinned_gamma > 0.0 && *pinned_gamma <= 2.0)) {
    fail("search.gamma", 0, "must lie in (0, 2]");
  }
  if (!fixed_lengths.empty()) {
    if (!pinned_gamma) fail("search.lengths", 0, "a fixed kernel also needs search.gamma");
    for (double l : fixed_lengths) {
      if (!(l > 0.0)) fail("search.lengths", 0, "length-scales must be positive");
    }
  }
  if (max_evaluations < 1) fail("search.max_evaluations", 0, "must be positive");
  if (!(jitter >= 0.0)) fail("search.jitter", 0, "must be non-negative");
  if (budgets.empty()) fail("mc.budgets", 0, "must list at least one budget");
  for (auto m : budgets) {
    if (m == 0) fail("mc.budgets", 0, "budgets must be positive");
  }
  if (membership_samples == 0) fail("mc.membership_samples", 0, "must be positive");
  if (mixture_draws < 2) fail("mc.mixture_draws", 0, "must be at least 2");
  if (probes == 0) fail("mc.probes", 0, "must be positive");
  if (brute_force_samples == 0) fail("mc.brute_force_samples", 0, "must be positive");
  if (initial_points == 0) fail("adaptive.initial_points", 0, "must be positive");
  if (rounds < 0) fail("adaptive.rounds", 0, "must be non-negative");
  if (batch == 0) fail("adaptive.batch", 0, "must be positive");
  if (!(width_target >= 0.0)) fail("adaptive.width_target", 0, "must be non-negative");
  if (starts < 1) fail("adaptive.starts", 0, "must be positive");
  try {
    (void)benchmark();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Config) throw;
    fail("problem", 0, e.what());
  }
}

SearchConfig ExperimentConfig::search() const {
  SearchConfig s;
  s.restarts = restarts;
  s.seed = seed.value_or(0);
  s.gamma_min = gamma_min;
  s.gamma_max = gamma_max;
  s.pinned_gamma = pinned_gamma;
  s.max_evaluations = max_evaluations;
  s.jitter = jitter;
  s.threads = threads;
  return s;
}

EnrichmentConfig ExperimentConfig::enrichment() const {
  EnrichmentConfig e;
  e.initial_points = initial_points;
  e.rounds = rounds;
  e.batch = batch;
  e.width_target = width_target;
  e.model = model;
  e.search = search();
  e.multistart.starts = starts;
  e.multistart.seed = seed.value_or(0);
  e.membership_samples = membership_samples;
  e.mixture_draws = mixture_draws;
  e.seed = seed.value_or(0);
  e.threads = threads;
  return e;
}

BenchmarkProblem ExperimentConfig::benchmark() const {
  if (problem != "custom") return reference_problem(problem);
  if (!custom) fail("problem", 0, "custom problem block missing");
  const auto& p = *custom;
  switch (p.kind) {
    case ProblemKind::Quadric:
      if (p.coefficients.empty()) fail("problem.coefficients", 0, "must not be empty");
      return BenchmarkProblem::quadric(p.coefficients, p.threshold, p.orientation);
    case ProblemKind::Sine: {
      if (p.coefficients.empty()) fail("problem.coefficients", 0, "must not be empty");
      std::vector<int> a;
      for (double v : p.coefficients) {
        if (v != std::round(v) || std::abs(v) > 1e6) fail("problem.coefficients", 0, "sine coefficients must be integers");
        a.push_back(static_cast<int>(v));
      }
      return BenchmarkProblem::sine(a, p.threshold, p.orientation);
    }
    case ProblemKind::Bell: {
      const std::size_t d = p.dimension;
      if (d == 0) fail("problem.dimension", 0, "bell needs a positive dimension");
      if (p.widths.empty() || p.centres.size() != p.widths.size() * d) {
        fail("problem.centres", 0, "need dimension x len(widths) centre coordinates");
      }
      Matrix centres(static_cast<Eigen::Index>(p.widths.size()), static_cast<Eigen::Index>(d));
      for (std::size_t i = 0; i < p.widths.size(); ++i) {
        for (std::size_t j = 0; j < d; ++j) {
          centres(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = p.centres[i * d + j];
        }
      }
      return BenchmarkProblem::bell(centres, p.widths, p.threshold, p.orientation);
    }
  }
  fail("problem.kind", 0, "unknown kind");
}

}  // namespace krisk
