#include "elicit/harness/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "elicit/error.hpp"
#include "elicit/rng.hpp"

namespace elicit::harness {

using nlohmann::json;

namespace {

/// Reads the members of one JSON object, remembering which keys were used so
/// leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ValidationError(path_.empty() ? "config" : path_, "must be an object");
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const json& raw(const std::string& key) {
    used_.insert(key);
    return node_.at(key);
  }

  Section child(const std::string& key) { return Section(raw(key), field(key)); }

  double real(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number()) throw ValidationError(field(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ValidationError(field(key), "must be finite");
    return d;
  }

  std::uint64_t uint(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      throw ValidationError(field(key), "expected a nonnegative integer");
    }
    return v.get<std::uint64_t>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_string()) throw ValidationError(field(key), "expected a string");
    return v.get<std::string>();
  }

  Currency money(const std::string& key, Currency fallback) {
    if (!has(key)) return fallback;
    return to_money(raw(key), field(key));
  }

  static Currency to_money(const json& v, const std::string& where) {
    try {
      if (v.is_string()) return Currency::parse(v.get<std::string>());
      if (v.is_number()) return Currency::from_units(v.get<double>());
    } catch (const std::exception& e) {
      throw ValidationError(where, e.what());
    }
    throw ValidationError(where, "expected an amount");
  }

  void finish() const {
    for (const auto& [key, value] : node_.items()) {
      if (!used_.count(key)) throw ValidationError(field(key), "unknown key");
    }
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> used_;
};

TaskSpec parse_task(Section s) {
  TaskSpec t;
  t.feature_dim = s.uint("feature_dim", t.feature_dim);
  t.concept_margin = s.real("concept_margin", t.concept_margin);
  t.representation_noise = s.real("representation_noise", t.representation_noise);
  t.pool_size = s.uint("pool_size", t.pool_size);
  t.test_size = s.uint("test_size", t.test_size);
  s.finish();
  return t;
}

SplitPlan parse_split(Section s, std::size_t test_size) {
  SplitPlan plan = SplitPlan::scaled(0.1, test_size);
  if (s.has("scale")) {
    const double scale = s.real("scale", 0.1);
    if (!(scale > 0.0)) throw ValidationError(s.field("scale"), "must be positive");
    plan = SplitPlan::scaled(scale, test_size);
  }
  plan.annotator_train_size = s.uint("annotator_train_size", plan.annotator_train_size);
  plan.candidate_pool_size = s.uint("candidate_pool_size", plan.candidate_pool_size);
  s.finish();
  return plan;
}

WeakAnnotatorSpec parse_weak_fields(Section& s, WeakAnnotatorSpec w) {
  w.visible_feature_fraction = s.real("visible_feature_fraction", w.visible_feature_fraction);
  w.input_noise = s.real("input_noise", w.input_noise);
  w.train_epochs = s.uint("train_epochs", w.train_epochs);
  w.train_size = s.uint("train_size", w.train_size);
  w.batch_size = s.uint("batch_size", w.batch_size);
  w.learning_rate = s.real("learning_rate", w.learning_rate);
  return w;
}

MethodSpec parse_method(const json& node, const std::string& where) {
  MethodSpec m;
  try {
    if (node.is_string()) {
      m.kind = parse_method_kind(node.get<std::string>());
      return m;
    }
    Section s(node, where);
    m.kind = parse_method_kind(s.string("kind", ""));
    m.fewshot_k = s.uint("k", m.fewshot_k);
    m.n_proto = s.uint("n_proto", m.n_proto);
    m.alpha_max = s.real("alpha_max", m.alpha_max);
    m.logconf_minibatch = s.uint("minibatch", m.logconf_minibatch);
    s.finish();
  } catch (const ValidationError& e) {
    if (e.field().rfind(where, 0) == 0) throw;
    throw ValidationError(where, e.what());
  }
  return m;
}

json method_json(const MethodSpec& m) {
  json j;
  j["kind"] = std::string(to_string(m.kind));
  switch (m.kind) {
    case MethodKind::fewshot_proto: j["k"] = m.fewshot_k; break;
    case MethodKind::proto_seq_sft: j["n_proto"] = m.n_proto; break;
    case MethodKind::logconf_seq_sft:
      j["alpha_max"] = m.alpha_max;
      j["minibatch"] = m.logconf_minibatch;
      break;
    default: break;
  }
  return j;
}

void rethrow_with_prefix(const ValidationError& e, const std::string& prefix) {
  if (e.field().rfind(prefix, 0) == 0) throw e;
  throw ValidationError(prefix + "." + e.field(), std::string(e.what()).substr(e.field().size() + 2));
}

}  // namespace

void ExperimentConfig::validate() const {
  try {
    setup.task.validate();
  } catch (const ValidationError& e) {
    rethrow_with_prefix(e, "task");
  }
  try {
    setup.split.validate();
  } catch (const ValidationError& e) {
    rethrow_with_prefix(e, "split");
  }
  try {
    setup.weak.validate();
  } catch (const ValidationError& e) {
    rethrow_with_prefix(e, "weak");
  }
  try {
    grid.validate();
  } catch (const ValidationError& e) {
    rethrow_with_prefix(e, "grid");
  }
  try {
    learner.schedule.validate();
    learner.stopping.validate();
  } catch (const ValidationError& e) {
    rethrow_with_prefix(e, "learner");
  }
  if (!(learner.init_std >= 0.0)) throw ValidationError("learner.init_std", "must be nonnegative");
  if (!(learner.proto_init_norm > 0.0)) {
    throw ValidationError("learner.proto_init_norm", "must be positive");
  }
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw ValidationError("learner.val_fraction", "must be in (0, 1)");
  }
  if (min_val == 0) throw ValidationError("learner.min_val", "must be at least 1");
  if (methods.empty()) throw ValidationError("methods", "must list at least one method");
  for (std::size_t i = 0; i < methods.size(); ++i) {
    try {
      methods[i].validate();
    } catch (const ValidationError& e) {
      rethrow_with_prefix(e, "methods[" + std::to_string(i) + "]");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (methods[j].name() == methods[i].name()) {
        throw ValidationError("methods[" + std::to_string(i) + "]",
                              "duplicate method '" + methods[i].name() + "'");
      }
    }
  }
  if (setup.split.test_size != setup.task.test_size) {
    throw ValidationError("split.test_size", "must equal task.test_size");
  }
  if (setup.task.pool_size < setup.split.test_size + setup.split.candidate_pool_size) {
    throw ValidationError("task.pool_size",
                          "must hold test_size + candidate_pool_size = " +
                              std::to_string(setup.split.test_size + setup.split.candidate_pool_size) +
                              " examples");
  }
  if (setup.weak.train_size > setup.split.annotator_train_size) {
    throw ValidationError("weak.train_size", "exceeds split.annotator_train_size");
  }
}

Allocation ExperimentConfig::allocation(Currency budget, double rho) const {
  Allocation a;
  a.budget = budget;
  a.weak_spend_fraction = rho;
  a.val_fraction = val_fraction;
  a.min_val = min_val;
  return a;
}

ExperimentConfig parse_config(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError("config", std::string("not valid JSON: ") + e.what());
  }
  Section s(root, "");
  ExperimentConfig c;

  c.setup.master_seed = s.uint("master_seed", 0);
  c.output_dir = s.string("output_dir", c.output_dir.string());

  if (!s.has("task")) throw ValidationError("task", "missing required section");
  c.setup.task = parse_task(s.child("task"));

  if (s.has("split")) {
    c.setup.split = parse_split(s.child("split"), c.setup.task.test_size);
  } else {
    c.setup.split = SplitPlan::scaled(0.1, c.setup.task.test_size);
  }

  c.weak_preset = "q70";
  c.setup.weak = WeakAnnotatorSpec::preset("q70");
  if (s.has("weak")) {
    const json& w = s.raw("weak");
    try {
      if (w.is_string()) {
        c.weak_preset = w.get<std::string>();
        c.setup.weak = WeakAnnotatorSpec::preset(c.weak_preset);
      } else {
        Section ws(w, "weak");
        c.weak_preset = ws.string("preset", "");
        c.setup.weak = c.weak_preset.empty() ? WeakAnnotatorSpec{}
                                             : WeakAnnotatorSpec::preset(c.weak_preset);
        const WeakAnnotatorSpec before = c.setup.weak;
        c.setup.weak = parse_weak_fields(ws, c.setup.weak);
        if (before.visible_feature_fraction != c.setup.weak.visible_feature_fraction ||
            before.input_noise != c.setup.weak.input_noise) {
          c.weak_preset.clear();
        }
        ws.finish();
      }
    } catch (const ValidationError& e) {
      rethrow_with_prefix(e, "weak");
    }
  }

  c.grid = SweepGrid::defaults();
  if (s.has("cost_models")) {
    const json& list = s.raw("cost_models");
    if (!list.is_array() || list.empty()) {
      throw ValidationError("cost_models", "expected a nonempty list");
    }
    c.grid.cost_models.clear();
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string where = "cost_models[" + std::to_string(i) + "]";
      CostModel cm;
      if (list[i].is_object()) {
        Section cs(list[i], where);
        cm.weak_cost = cs.money("weak_cost", cm.weak_cost);
        cm.hq_cost = cs.money("hq_cost", cm.hq_cost);
        cs.finish();
      } else {
        cm.weak_cost = Section::to_money(list[i], where);
      }
      try {
        cm.validate();
      } catch (const ValidationError& e) {
        rethrow_with_prefix(e, where);
      }
      c.grid.cost_models.push_back(cm);
    }
  }

  if (s.has("grid")) {
    Section g = s.child("grid");
    if (g.has("budgets")) {
      const json& list = g.raw("budgets");
      if (!list.is_array()) throw ValidationError("grid.budgets", "expected a list");
      c.grid.budgets.clear();
      for (std::size_t i = 0; i < list.size(); ++i) {
        c.grid.budgets.push_back(
            Section::to_money(list[i], "grid.budgets[" + std::to_string(i) + "]"));
      }
    }
    if (g.has("rho")) {
      const json& list = g.raw("rho");
      if (!list.is_array()) throw ValidationError("grid.rho", "expected a list");
      c.grid.rho_grid.clear();
      for (std::size_t i = 0; i < list.size(); ++i) {
        if (!list[i].is_number()) {
          throw ValidationError("grid.rho[" + std::to_string(i) + "]", "expected a number");
        }
        c.grid.rho_grid.push_back(list[i].get<double>());
      }
    }
    c.grid.seeds = g.uint("seeds", c.grid.seeds);
    c.grid.expanded_seeds = g.uint("expanded_seeds", c.grid.expanded_seeds);
    c.grid.small_stage_threshold = g.uint("small_stage_threshold", c.grid.small_stage_threshold);
    g.finish();
  }

  if (s.has("methods")) {
    const json& list = s.raw("methods");
    if (!list.is_array()) throw ValidationError("methods", "expected a list");
    for (std::size_t i = 0; i < list.size(); ++i) {
      c.methods.push_back(parse_method(list[i], "methods[" + std::to_string(i) + "]"));
    }
  } else {
    c.methods = {MethodSpec{MethodKind::seq_sft}};
  }

  if (s.has("learner")) {
    Section l = s.child("learner");
    TrainSchedule& ts = c.learner.schedule;
    ts.total_steps = l.uint("total_steps", ts.total_steps);
    ts.batch_size = l.uint("batch_size", ts.batch_size);
    ts.learning_rate = l.real("learning_rate", ts.learning_rate);
    ts.warmup_cap = l.uint("warmup_cap", ts.warmup_cap);
    if (l.has("mode")) {
      try {
        ts.mode = parse_schedule_mode(l.string("mode", ""));
      } catch (const ValidationError& e) {
        throw ValidationError("learner.mode", e.what());
      }
    }
    EarlyStopPolicy& es = c.learner.stopping;
    es.eval_cap = l.uint("eval_cap", es.eval_cap);
    es.patience = l.uint("patience", es.patience);
    es.min_delta = l.real("min_delta", es.min_delta);
    c.learner.init_std = l.real("init_std", c.learner.init_std);
    c.learner.proto_init_norm = l.real("proto_init_norm", c.learner.proto_init_norm);
    c.val_fraction = l.real("val_fraction", c.val_fraction);
    c.min_val = l.uint("min_val", c.min_val);
    l.finish();
  }

  s.finish();
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config", "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

namespace {

json to_json(const ExperimentConfig& c, bool with_output_dir) {
  json j;
  j["master_seed"] = c.setup.master_seed;
  if (with_output_dir) j["output_dir"] = c.output_dir.generic_string();
  const TaskSpec& t = c.setup.task;
  j["task"] = {{"feature_dim", t.feature_dim},
               {"concept_margin", t.concept_margin},
               {"representation_noise", t.representation_noise},
               {"pool_size", t.pool_size},
               {"test_size", t.test_size}};
  j["split"] = {{"annotator_train_size", c.setup.split.annotator_train_size},
                {"candidate_pool_size", c.setup.split.candidate_pool_size}};
  const WeakAnnotatorSpec& w = c.setup.weak;
  j["weak"] = {{"visible_feature_fraction", w.visible_feature_fraction},
               {"input_noise", w.input_noise},
               {"train_epochs", w.train_epochs},
               {"train_size", w.train_size},
               {"batch_size", w.batch_size},
               {"learning_rate", w.learning_rate}};
  if (!c.weak_preset.empty()) j["weak"]["preset"] = c.weak_preset;
  j["cost_models"] = json::array();
  for (const auto& cm : c.grid.cost_models) {
    j["cost_models"].push_back(
        {{"weak_cost", cm.weak_cost.to_string()}, {"hq_cost", cm.hq_cost.to_string()}});
  }
  json budgets = json::array();
  for (const auto& b : c.grid.budgets) budgets.push_back(b.to_string());
  j["grid"] = {{"budgets", budgets},
               {"rho", c.grid.rho_grid},
               {"seeds", c.grid.seeds},
               {"expanded_seeds", c.grid.expanded_seeds},
               {"small_stage_threshold", c.grid.small_stage_threshold}};
  j["methods"] = json::array();
  for (const auto& m : c.methods) j["methods"].push_back(method_json(m));
  const TrainSchedule& ts = c.learner.schedule;
  const EarlyStopPolicy& es = c.learner.stopping;
  j["learner"] = {{"total_steps", ts.total_steps},
                  {"batch_size", ts.batch_size},
                  {"learning_rate", ts.learning_rate},
                  {"warmup_cap", ts.warmup_cap},
                  {"mode", std::string(to_string(ts.mode))},
                  {"eval_cap", es.eval_cap},
                  {"patience", es.patience},
                  {"min_delta", es.min_delta},
                  {"init_std", c.learner.init_std},
                  {"proto_init_norm", c.learner.proto_init_norm},
                  {"val_fraction", c.val_fraction},
                  {"min_val", c.min_val}};
  return j;
}

}  // namespace

std::string canonical_json(const ExperimentConfig& config) {
  return to_json(config, true).dump(2) + "\n";
}

std::string config_hash(const ExperimentConfig& config) {
  const std::uint64_t h = fnv1a64(to_json(config, false).dump());
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 0; i < 16; ++i) out[15 - i] = kHex[(h >> (4 * i)) & 0xF];
  return out;
}

}  // namespace elicit::harness
