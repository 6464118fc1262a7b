#include "ordermatch/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>

#include "ordermatch/error.hpp"

namespace om {

namespace {

struct BadValue {
  std::string why;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view s) {
  T v{};
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size()) throw BadValue{"expected a number, got '" + std::string(s) + "'"};
  return v;
}

bool parse_bool(std::string_view s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw BadValue{"expected true or false, got '" + std::string(s) + "'"};
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  while (!s.empty()) {
    const auto comma = s.find(',');
    out.push_back(trim(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Field {
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T, typename Ref>
Field number(Ref ref) {
  return {[ref](RunConfig& c, std::string_view v) { ref(c) = parse_number<T>(v); },
          [ref](const RunConfig& c) {
            if constexpr (std::is_floating_point_v<T>) {
              return fmt(ref(c));
            } else {
              return std::to_string(ref(c));
            }
          }};
}

template <typename Ref>
Field flag(Ref ref) {
  return {[ref](RunConfig& c, std::string_view v) { ref(c) = parse_bool(v); },
          [ref](const RunConfig& c) { return std::string(ref(c) ? "true" : "false"); }};
}

#define OM_REF(expr) [](auto& c) -> auto& { return c.expr; }

const std::map<std::string, Field, std::less<>>& fields() {
  static const std::map<std::string, Field, std::less<>> table = [] {
    std::map<std::string, Field, std::less<>> t;
    t["seed"] = number<std::uint64_t>(OM_REF(seed));
    t["workers"] = number<std::size_t>(OM_REF(workers));

    t["data.family"] = {[](RunConfig& c, std::string_view v) {
                          try {
                            c.data.family = parse_graph_family(v);
                          } catch (const Error& e) {
                            throw BadValue{e.what()};
                          }
                        },
                        [](const RunConfig& c) { return std::string(to_string(c.data.family)); }};
    t["data.min_nodes"] = number<std::size_t>(OM_REF(data.min_nodes));
    t["data.max_nodes"] = number<std::size_t>(OM_REF(data.max_nodes));
    t["data.p"] = number<double>(OM_REF(data.p));
    t["data.m"] = number<std::size_t>(OM_REF(data.m));
    t["data.p_add"] = number<double>(OM_REF(data.p_add));
    t["data.p_rewire"] = number<double>(OM_REF(data.p_rewire));
    t["data.label_alphabet_size"] = number<std::size_t>(OM_REF(data.label_alphabet_size));
    t["data.count"] = number<std::size_t>(OM_REF(data_count));
    t["data.validation_graphs"] = number<std::size_t>(OM_REF(validation_graphs));

    t["encoder.layers"] = number<std::size_t>(OM_REF(encoder.layers));
    t["encoder.hidden_dim"] = number<std::size_t>(OM_REF(encoder.hidden_dim));
    t["encoder.output_dim"] = number<std::size_t>(OM_REF(encoder.output_dim));
    t["encoder.leaky_slope"] = number<double>(OM_REF(encoder.leaky_slope));
    t["encoder.aggregation_scale"] = number<double>(OM_REF(encoder.aggregation_scale));
    t["encoder.use_structural_features"] = flag(OM_REF(encoder.use_structural_features));
    t["encoder.label_alphabet_size"] = number<std::size_t>(OM_REF(encoder.label_alphabet_size));
    t["encoder.edge_label_messages"] = flag(OM_REF(encoder.edge_label_messages));
    t["encoder.edge_label_alphabet_size"] = number<std::size_t>(OM_REF(encoder.edge_label_alphabet_size));

    t["margin.margin"] = number<double>(OM_REF(margin.margin));
    t["margin.threshold"] = number<double>(OM_REF(margin.threshold));

    t["train.learning_rate"] = number<double>(OM_REF(train.learning_rate));
    t["train.beta1"] = number<double>(OM_REF(train.adam.beta1));
    t["train.beta2"] = number<double>(OM_REF(train.adam.beta2));
    t["train.epsilon"] = number<double>(OM_REF(train.adam.epsilon));
    t["train.restart_period"] = number<int>(OM_REF(train.restart_period));
    t["train.patience"] = number<int>(OM_REF(train.curriculum.patience));
    t["train.plateau_delta"] = number<double>(OM_REF(train.curriculum.plateau_delta));
    t["train.max_radius"] = number<int>(OM_REF(train.curriculum.max_radius));
    t["train.max_target_count"] = number<std::size_t>(OM_REF(train.curriculum.max_target_count));
    t["train.use_curriculum"] = flag(OM_REF(train.use_curriculum));
    t["train.negatives_per_positive"] = number<int>(OM_REF(train.negatives_per_positive));
    t["train.hard_negative_fraction"] = number<double>(OM_REF(train.hard_negative_fraction));
    t["train.same_target_fraction"] = number<double>(OM_REF(train.same_target_fraction));
    t["train.regeneration_period"] = number<int>(OM_REF(train.regeneration_period));
    t["train.min_iterations"] = number<int>(OM_REF(train.min_iterations));
    t["train.batch_min"] = number<std::size_t>(OM_REF(train.batch_min));
    t["train.batch_max"] = number<std::size_t>(OM_REF(train.batch_max));
    t["train.epochs"] = number<int>(OM_REF(train.epochs));
    t["train.validation_pairs"] = number<std::size_t>(OM_REF(train.validation_pairs));

    t["sampler.strategy"] = {[](RunConfig& c, std::string_view v) {
                               try {
                                 c.train.pairs.query.strategy = parse_sampler_strategy(v);
                               } catch (const Error& e) {
                                 throw BadValue{e.what()};
                               }
                             },
                             [](const RunConfig& c) { return std::string(to_string(c.train.pairs.query.strategy)); }};
    t["sampler.edge_keep_probability"] = number<double>(OM_REF(train.pairs.query.edge_keep_probability));
    t["sampler.restart_probability"] = number<double>(OM_REF(train.pairs.query.restart_probability));
    t["sampler.min_nodes"] = number<std::size_t>(OM_REF(train.pairs.query.min_nodes));
    t["sampler.max_nodes"] = number<std::size_t>(OM_REF(train.pairs.query.max_nodes));
    t["sampler.target_max_nodes"] = number<std::size_t>(OM_REF(train.pairs.target_max_nodes));
    t["sampler.oracle_max_states"] = number<std::uint64_t>(OM_REF(train.pairs.oracle_budget.max_states));
    t["sampler.oracle_timeout_ms"] = {
        [](RunConfig& c, std::string_view v) {
          c.train.pairs.oracle_budget.wall_timeout = std::chrono::milliseconds(parse_number<long long>(v));
        },
        [](const RunConfig& c) { return std::to_string(c.train.pairs.oracle_budget.wall_timeout.count()); }};
    t["sampler.max_retries"] = number<int>(OM_REF(train.pairs.max_retries));

    t["bench.methods"] = {[](RunConfig& c, std::string_view v) {
                            std::vector<BenchMethod> out;
                            for (auto name : split_list(v)) {
                              try {
                                out.push_back(parse_bench_method(name));
                              } catch (const Error& e) {
                                throw BadValue{e.what()};
                              }
                            }
                            c.bench_methods = out;
                          },
                          [](const RunConfig& c) {
                            std::string s;
                            for (auto m : c.bench_methods) s += (s.empty() ? "" : ",") + std::string(to_string(m));
                            return s;
                          }};
    t["bench.sizes"] = {[](RunConfig& c, std::string_view v) {
                          std::vector<std::size_t> out;
                          for (auto s : split_list(v)) out.push_back(parse_number<std::size_t>(s));
                          c.bench_queries.sizes = out;
                        },
                        [](const RunConfig& c) {
                          std::string s;
                          for (auto n : c.bench_queries.sizes) s += (s.empty() ? "" : ",") + std::to_string(n);
                          return s;
                        }};
    t["bench.per_size"] = number<std::size_t>(OM_REF(bench_queries.per_size));
    t["bench.positive_fraction"] = number<double>(OM_REF(bench_queries.positive_fraction));
    t["bench.targets"] = number<std::size_t>(OM_REF(bench_targets));
    t["bench.target_nodes"] = number<std::size_t>(OM_REF(bench_target_nodes));
    t["bench.max_states"] = number<std::uint64_t>(OM_REF(bench.budget.max_states));
    t["bench.timeout_s"] = {
        [](RunConfig& c, std::string_view v) {
          const double s = parse_number<double>(v);
          if (!(s > 0.0 && s < 1e7)) throw BadValue{"expected a positive number of seconds"};
          c.bench.budget.wall_timeout = std::chrono::milliseconds(static_cast<long long>(s * 1000.0));
        },
        [](const RunConfig& c) { return fmt(static_cast<double>(c.bench.budget.wall_timeout.count()) / 1000.0); }};
    t["bench.label_timeout_s"] = {
        [](RunConfig& c, std::string_view v) {
          const double s = parse_number<double>(v);
          if (!(s > 0.0 && s < 1e7)) throw BadValue{"expected a positive number of seconds"};
          c.bench_queries.label_budget.wall_timeout = std::chrono::milliseconds(static_cast<long long>(s * 1000.0));
        },
        [](const RunConfig& c) {
          return fmt(static_cast<double>(c.bench_queries.label_budget.wall_timeout.count()) / 1000.0);
        }};

    t["query.vote_hops"] = number<int>(OM_REF(vote_hops));
    return t;
  }();
  return table;
}

#undef OM_REF

}  // namespace

namespace {

struct Rule {
  const char* key;
  bool (*ok)(const RunConfig&);
  const char* message;
};

bool in01(double p) { return p >= 0.0 && p <= 1.0; }
bool prob(double p) { return p > 0.0 && p <= 1.0; }

// Per-key range rules, so a bad record names every key at fault. Cross-key
// rules name the key that is usually the one to change.
constexpr Rule kRules[] = {
    {"workers", [](const RunConfig& c) { return c.workers >= 1; }, "must be >= 1"},
    {"data.min_nodes", [](const RunConfig& c) { return c.data.min_nodes >= 1; }, "must be >= 1"},
    {"data.max_nodes", [](const RunConfig& c) { return c.data.max_nodes >= c.data.min_nodes; },
     "must be >= data.min_nodes"},
    {"data.p", [](const RunConfig& c) { return in01(c.data.p); }, "must lie in [0, 1]"},
    {"data.m", [](const RunConfig& c) { return c.data.m >= 1; }, "must be >= 1"},
    {"data.p_add", [](const RunConfig& c) { return c.data.p_add >= 0.0 && c.data.p_add < 1.0; },
     "must lie in [0, 1)"},
    {"data.p_rewire",
     [](const RunConfig& c) { return c.data.p_rewire >= 0.0 && c.data.p_add + c.data.p_rewire < 1.0; },
     "must be >= 0 with data.p_add + data.p_rewire < 1"},
    {"data.label_alphabet_size", [](const RunConfig& c) { return c.data.label_alphabet_size >= 1; },
     "must be >= 1"},
    {"data.count", [](const RunConfig& c) { return c.data_count >= 1; }, "must be >= 1"},
    {"data.validation_graphs", [](const RunConfig& c) { return c.validation_graphs >= 1; }, "must be >= 1"},
    {"encoder.layers", [](const RunConfig& c) { return c.encoder.layers >= 1; }, "must be >= 1"},
    {"encoder.hidden_dim", [](const RunConfig& c) { return c.encoder.hidden_dim >= 1; }, "must be >= 1"},
    {"encoder.output_dim", [](const RunConfig& c) { return c.encoder.output_dim >= 1; }, "must be >= 1"},
    {"encoder.leaky_slope", [](const RunConfig& c) { return c.encoder.leaky_slope > 0.0 && c.encoder.leaky_slope < 1.0; },
     "must lie in (0, 1)"},
    {"encoder.aggregation_scale",
     [](const RunConfig& c) { return c.encoder.aggregation_scale > 0.0 && std::isfinite(c.encoder.aggregation_scale); },
     "must be positive"},
    {"encoder.label_alphabet_size",
     [](const RunConfig& c) { return c.encoder.label_alphabet_size >= std::max<std::size_t>(1, c.data.label_alphabet_size); },
     "must be >= 1 and >= data.label_alphabet_size"},
    {"encoder.edge_label_alphabet_size",
     [](const RunConfig& c) { return !c.encoder.edge_label_messages || c.encoder.edge_label_alphabet_size >= 1; },
     "must be >= 1 when edge_label_messages is on"},
    {"margin.margin", [](const RunConfig& c) { return c.margin.margin > 0.0; }, "must be positive"},
    {"margin.threshold",
     [](const RunConfig& c) { return c.margin.threshold > 0.0 && c.margin.threshold < c.margin.margin; },
     "must lie in (0, margin.margin)"},
    {"train.learning_rate", [](const RunConfig& c) { return c.train.learning_rate > 0.0; }, "must be positive"},
    {"train.beta1", [](const RunConfig& c) { return c.train.adam.beta1 >= 0.0 && c.train.adam.beta1 < 1.0; },
     "must lie in [0, 1)"},
    {"train.beta2", [](const RunConfig& c) { return c.train.adam.beta2 >= 0.0 && c.train.adam.beta2 < 1.0; },
     "must lie in [0, 1)"},
    {"train.epsilon", [](const RunConfig& c) { return c.train.adam.epsilon > 0.0; }, "must be positive"},
    {"train.restart_period", [](const RunConfig& c) { return c.train.restart_period >= 1; }, "must be >= 1"},
    {"train.patience", [](const RunConfig& c) { return c.train.curriculum.patience >= 1; }, "must be >= 1"},
    {"train.plateau_delta", [](const RunConfig& c) { return c.train.curriculum.plateau_delta >= 0.0; },
     "must be >= 0"},
    {"train.max_radius", [](const RunConfig& c) { return c.train.curriculum.max_radius >= 1; }, "must be >= 1"},
    {"train.max_target_count", [](const RunConfig& c) { return c.train.curriculum.max_target_count >= 1; },
     "must be >= 1"},
    {"train.negatives_per_positive", [](const RunConfig& c) { return c.train.negatives_per_positive >= 1; },
     "must be >= 1"},
    {"train.hard_negative_fraction", [](const RunConfig& c) { return in01(c.train.hard_negative_fraction); },
     "must lie in [0, 1]"},
    {"train.same_target_fraction", [](const RunConfig& c) { return in01(c.train.same_target_fraction); },
     "must lie in [0, 1]"},
    {"train.regeneration_period", [](const RunConfig& c) { return c.train.regeneration_period >= 1; },
     "must be >= 1"},
    {"train.min_iterations", [](const RunConfig& c) { return c.train.min_iterations >= 1; }, "must be >= 1"},
    {"train.batch_min",
     [](const RunConfig& c) {
       return c.train.negatives_per_positive < 1 ||
              c.train.batch_min >= static_cast<std::size_t>(c.train.negatives_per_positive) + 1;
     },
     "must be >= train.negatives_per_positive + 1"},
    {"train.batch_max", [](const RunConfig& c) { return c.train.batch_max >= c.train.batch_min; },
     "must be >= train.batch_min"},
    {"train.epochs", [](const RunConfig& c) { return c.train.epochs >= 1; }, "must be >= 1"},
    {"train.validation_pairs", [](const RunConfig& c) { return c.train.validation_pairs >= 2; }, "must be >= 2"},
    {"sampler.edge_keep_probability", [](const RunConfig& c) { return prob(c.train.pairs.query.edge_keep_probability); },
     "must lie in (0, 1]"},
    {"sampler.restart_probability", [](const RunConfig& c) { return prob(c.train.pairs.query.restart_probability); },
     "must lie in (0, 1]"},
    {"sampler.min_nodes", [](const RunConfig& c) { return c.train.pairs.query.min_nodes >= 1; }, "must be >= 1"},
    {"sampler.max_nodes", [](const RunConfig& c) { return c.train.pairs.query.max_nodes >= c.train.pairs.query.min_nodes; },
     "must be >= sampler.min_nodes"},
    {"sampler.target_max_nodes", [](const RunConfig& c) { return c.train.pairs.target_max_nodes >= 1; },
     "must be >= 1"},
    {"sampler.oracle_max_states", [](const RunConfig& c) { return c.train.pairs.oracle_budget.max_states > 0; },
     "must be positive"},
    {"sampler.oracle_timeout_ms", [](const RunConfig& c) { return c.train.pairs.oracle_budget.wall_timeout.count() > 0; },
     "must be positive"},
    {"sampler.max_retries", [](const RunConfig& c) { return c.train.pairs.max_retries >= 1; }, "must be >= 1"},
    {"bench.methods", [](const RunConfig& c) { return !c.bench_methods.empty(); }, "needs at least one method"},
    {"bench.sizes",
     [](const RunConfig& c) {
       return !c.bench_queries.sizes.empty() &&
              std::all_of(c.bench_queries.sizes.begin(), c.bench_queries.sizes.end(),
                          [&](std::size_t s) { return s >= 1 && s <= c.bench_target_nodes; });
     },
     "needs at least one size, each in [1, bench.target_nodes]"},
    {"bench.positive_fraction", [](const RunConfig& c) { return in01(c.bench_queries.positive_fraction); },
     "must lie in [0, 1]"},
    {"bench.targets", [](const RunConfig& c) { return c.bench_targets >= 1; }, "must be >= 1"},
    {"bench.max_states", [](const RunConfig& c) { return c.bench.budget.max_states > 0; }, "must be positive"},
};

std::vector<std::string> rule_problems(const RunConfig& cfg) {
  std::vector<std::string> out;
  for (const auto& r : kRules) {
    if (!r.ok(cfg)) out.push_back(std::string(r.key) + ": " + r.message);
  }
  if (!out.empty()) return out;
  // whatever the component validators still object to
  auto check = [&](const char* what, auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      out.push_back(std::string(what) + ": " + e.what());
    }
  };
  check("data", [&] { cfg.data.validate(); });
  check("encoder", [&] { cfg.encoder.validate(); });
  check("margin", [&] { cfg.margin.validate(); });
  check("train", [&] { cfg.train.validate(); });
  check("bench", [&] { cfg.bench.budget.validate(); });
  return out;
}

[[noreturn]] void raise(const std::vector<std::string>& problems) {
  std::string msg = "invalid configuration:";
  for (const auto& p : problems) msg += "\n  " + p;
  throw ConfigError(msg);
}

}  // namespace

void RunConfig::validate() const {
  const auto problems = rule_problems(*this);
  if (!problems.empty()) raise(problems);
}

RunConfig parse_run_config(std::string_view text, RunConfig base) {
  std::vector<std::string> problems;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      problems.push_back("line " + std::to_string(line_no) + ": expected 'key = value'");
      continue;
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto it = fields().find(key);
    if (it == fields().end()) {
      problems.push_back(std::string(key) + ": unknown key");
      continue;
    }
    try {
      it->second.set(base, value);
    } catch (const BadValue& e) {
      problems.push_back(std::string(key) + ": " + e.why);
    }
  }
  // range problems are reported alongside syntax problems
  for (auto& p : rule_problems(base)) problems.push_back(std::move(p));
  if (!problems.empty()) raise(problems);
  return base;
}

std::string run_config_to_text(const RunConfig& cfg) {
  std::string out;
  for (const auto& [key, field] : fields()) out += key + " = " + field.get(cfg) + "\n";
  return out;
}

std::vector<std::string> run_config_keys() {
  std::vector<std::string> keys;
  for (const auto& [key, field] : fields()) keys.push_back(key);
  return keys;
}

}  // namespace om
