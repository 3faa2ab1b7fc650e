// Copyright 2026 The fastfish Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fastfish/config.hpp"

#include <optional>

namespace fastfish {

using nlohmann::json;

namespace {

std::string mode_name(GreedyMode m) { return m == GreedyMode::ForwardOnly ? "forward_only" : "forward_backward"; }

// Nests "a.b.c": v keys into {"a": {"b": {"c": v}}}.
json unflatten(const json& doc) {
  if (!doc.is_object()) return doc;
  json out = json::object();
  for (const auto& [key, value] : doc.items()) {
    json* node = &out;
    std::string_view rest = key;
    for (auto dot = rest.find('.'); dot != std::string_view::npos; dot = rest.find('.')) {
      node = &(*node)[std::string(rest.substr(0, dot))];
      if (!node->is_object()) *node = json::object();
      rest.remove_prefix(dot + 1);
    }
    json& slot = (*node)[std::string(rest)];
    if (slot.is_object() && value.is_object()) slot.update(unflatten(value), true);
    else slot = value.is_object() ? unflatten(value) : value;
  }
  return out;
}

class Parser {
 public:
  std::vector<std::string> problems;

  const json* section(const json& doc, const std::string& name, bool required) {
    auto it = doc.find(name);
    if (it == doc.end()) {
      if (required) problems.push_back("missing required section '" + name + "'");
      return nullptr;
    }
    if (!it->is_object()) {
      problems.push_back("'" + name + "' must be an object");
      return nullptr;
    }
    return &*it;
  }

  void allow_only(const json* obj, const std::string& path, std::initializer_list<const char*> keys) {
    if (!obj) return;
    for (const auto& [key, value] : obj->items()) {
      bool known = false;
      for (const char* k : keys) known = known || key == k;
      if (!known) problems.push_back("unknown key '" + path + key + "'");
    }
  }

  std::optional<std::string> str(const json* obj, const std::string& path, const char* key, bool required) {
    if (!obj || !obj->contains(key)) {
      if (required) problems.push_back("missing required key '" + path + key + "'");
      return std::nullopt;
    }
    const json& v = (*obj)[key];
    if (!v.is_string()) {
      problems.push_back("'" + path + key + "' must be a string");
      return std::nullopt;
    }
    return v.get<std::string>();
  }

  std::optional<std::int64_t> integer(const json* obj, const std::string& path, const char* key, bool required) {
    if (!obj || !obj->contains(key)) {
      if (required) problems.push_back("missing required key '" + path + key + "'");
      return std::nullopt;
    }
    const json& v = (*obj)[key];
    if (!v.is_number_integer()) {
      problems.push_back("'" + path + key + "' must be an integer");
      return std::nullopt;
    }
    return v.get<std::int64_t>();
  }

  std::optional<double> number(const json* obj, const std::string& path, const char* key) {
    if (!obj || !obj->contains(key)) return std::nullopt;
    const json& v = (*obj)[key];
    if (!v.is_number()) {
      problems.push_back("'" + path + key + "' must be a number");
      return std::nullopt;
    }
    return v.get<double>();
  }
};

std::string fim_param_name(const FimKind& kind) {
  const std::string s = to_string(kind);
  return s.substr(0, s.find(':'));
}

}  // namespace

std::string strategy_id(const StrategyKind& kind) {
  return std::visit(
      [](const auto& s) -> std::string {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, strategy::Random>) return "random";
        else if constexpr (std::is_same_v<S, strategy::Margin>) return "margin";
        else if constexpr (std::is_same_v<S, strategy::Badge>) return "badge";
        else if constexpr (std::is_same_v<S, strategy::Typiclust>) return "typiclust";
        else return "bait:" + to_string(s.fim);
      },
      kind);
}

StrategyKind parse_strategy(std::string_view text) {
  if (text == "random") return strategy::Random{};
  if (text == "margin") return strategy::Margin{};
  if (text == "badge") return strategy::Badge{};
  if (text == "typiclust") return strategy::Typiclust{};
  if (text == "bait") return strategy::Bait{};
  if (text.starts_with("bait:")) {
    strategy::Bait b;
    b.fim = parse_fim_kind(text.substr(5));
    if (std::holds_alternative<fim::Sampled>(b.fim))
      throw InvalidParameter("bait does not support the sampled Fisher kind");
    return b;
  }
  throw InvalidParameter("unknown strategy '" + std::string(text) + "'");
}

ExperimentConfig parse_config(const json& raw, const std::filesystem::path& base_dir) {
  if (!raw.is_object()) throw ConfigError({"config root must be an object"});
  const json doc = unflatten(raw);
  Parser p;
  ExperimentConfig cfg;

  p.allow_only(&doc, "", {"dataset", "strategy", "al", "classifier"});

  const json* dataset = p.section(doc, "dataset", true);
  p.allow_only(dataset, "dataset.", {"train", "test"});
  const auto resolve = [&](const std::string& s) {
    std::filesystem::path path(s);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };
  if (auto v = p.str(dataset, "dataset.", "train", true)) cfg.train_path = resolve(*v);
  if (auto v = p.str(dataset, "dataset.", "test", true)) cfg.test_path = resolve(*v);

  const json* strat = p.section(doc, "strategy", true);
  p.allow_only(strat, "strategy.", {"name", "params"});
  const json* params = strat ? p.section(*strat, "params", false) : nullptr;
  if (auto name = p.str(strat, "strategy.", "name", true)) {
    try {
      cfg.strategy = parse_strategy(*name);
    } catch (const Error& e) {
      p.problems.push_back(std::string("strategy.name: ") + e.what());
    }
    const bool named_fim = name->starts_with("bait:");
    if (auto* bait = std::get_if<strategy::Bait>(&cfg.strategy)) {
      p.allow_only(params, "strategy.params.", {"fim", "c", "mode", "lambda", "max_candidates"});
      if (auto fim = p.str(params, "strategy.params.", "fim", false)) {
        if (named_fim) {
          p.problems.push_back("strategy.params.fim conflicts with strategy.name '" + *name + "'");
        } else {
          try {
            bait->fim = parse_fim_kind(*fim);
            if (std::holds_alternative<fim::Sampled>(bait->fim))
              p.problems.push_back("strategy.params.fim: bait does not support the sampled Fisher kind");
          } catch (const Error& e) {
            p.problems.push_back(std::string("strategy.params.fim: ") + e.what());
          }
        }
      }
      if (auto c = p.integer(params, "strategy.params.", "c", false)) {
        if (auto* t = std::get_if<fim::TopC>(&bait->fim)) {
          if (named_fim && name->find(':', 5) != std::string::npos && t->c != *c)
            p.problems.push_back("strategy.params.c conflicts with strategy.name '" + *name + "'");
          else if (*c < 1) p.problems.push_back("strategy.params.c must be >= 1");
          else t->c = static_cast<int>(*c);
        } else {
          p.problems.push_back("strategy.params.c only applies to fim 'topc'");
        }
      }
      if (auto mode = p.str(params, "strategy.params.", "mode", false)) {
        if (*mode == "forward_only") bait->mode = GreedyMode::ForwardOnly;
        else if (*mode == "forward_backward") bait->mode = GreedyMode::ForwardBackward;
        else p.problems.push_back("strategy.params.mode must be 'forward_only' or 'forward_backward'");
      }
      if (auto lambda = p.number(params, "strategy.params.", "lambda")) {
        if (*lambda > 0) bait->lambda = *lambda;
        else p.problems.push_back("strategy.params.lambda must be positive");
      }
      if (auto cap = p.integer(params, "strategy.params.", "max_candidates", false)) {
        if (*cap >= 0) bait->max_candidates = *cap;
        else p.problems.push_back("strategy.params.max_candidates must be >= 0");
      }
    } else if (auto* typi = std::get_if<strategy::Typiclust>(&cfg.strategy)) {
      p.allow_only(params, "strategy.params.", {"k_nn"});
      if (auto k = p.integer(params, "strategy.params.", "k_nn", false)) {
        if (*k >= 1) typi->k_nn = *k;
        else p.problems.push_back("strategy.params.k_nn must be >= 1");
      }
    } else {
      p.allow_only(params, "strategy.params.", {});
    }
  }

  const json* al = p.section(doc, "al", true);
  p.allow_only(al, "al.", {"initial_labeled", "acquisition_size", "total_budget", "seeds"});
  if (auto v = p.integer(al, "al.", "initial_labeled", true)) cfg.initial_labeled = *v;
  if (auto v = p.integer(al, "al.", "acquisition_size", true)) cfg.acquisition_size = *v;
  if (auto v = p.integer(al, "al.", "total_budget", true)) cfg.total_budget = *v;
  if (al && al->contains("seeds")) {
    const json& s = (*al)["seeds"];
    if (!s.is_array()) {
      p.problems.push_back("'al.seeds' must be a list of non-negative integers");
    } else {
      cfg.seeds.clear();
      for (const auto& v : s) {
        if (v.is_number_unsigned()) cfg.seeds.push_back(v.get<std::uint64_t>());
        else p.problems.push_back("'al.seeds' entries must be non-negative integers");
      }
    }
  }

  const json* cls = p.section(doc, "classifier", false);
  p.allow_only(cls, "classifier.",
               {"epochs", "batch_size", "learning_rate", "weight_decay", "schedule", "seed", "optimizer"});
  if (auto v = p.integer(cls, "classifier.", "epochs", false)) cfg.classifier.epochs = static_cast<int>(*v);
  if (auto v = p.integer(cls, "classifier.", "batch_size", false)) cfg.classifier.batch_size = static_cast<int>(*v);
  if (auto v = p.number(cls, "classifier.", "learning_rate")) cfg.classifier.learning_rate = *v;
  if (auto v = p.number(cls, "classifier.", "weight_decay")) cfg.classifier.weight_decay = *v;
  if (auto v = p.integer(cls, "classifier.", "seed", false)) {
    if (*v >= 0) cfg.classifier.seed = static_cast<std::uint64_t>(*v);
    else p.problems.push_back("classifier.seed must be >= 0");
  }
  if (auto v = p.str(cls, "classifier.", "schedule", false)) {
    if (*v == "cosine") cfg.classifier.schedule = LrSchedule::CosineAnnealing;
    else if (*v == "constant") cfg.classifier.schedule = LrSchedule::Constant;
    else p.problems.push_back("classifier.schedule must be 'cosine' or 'constant'");
  }
  if (auto v = p.str(cls, "classifier.", "optimizer", false)) {
    if (*v != "radam") p.problems.push_back("classifier.optimizer: only 'radam' is available");
  }

  try {
    validate(cfg);
  } catch (const ConfigError& e) {
    for (const auto& m : e.problems()) p.problems.push_back(m);
  }
  if (!p.problems.empty()) throw ConfigError(p.problems);
  return cfg;
}

void validate(const ExperimentConfig& c) {
  std::vector<std::string> problems;
  if (c.initial_labeled < 1) problems.push_back("al.initial_labeled must be >= 1");
  if (c.acquisition_size < 1) problems.push_back("al.acquisition_size must be >= 1");
  if (c.total_budget < c.initial_labeled) problems.push_back("al.total_budget must be >= al.initial_labeled");
  else if (c.acquisition_size >= 1 && (c.total_budget - c.initial_labeled) % c.acquisition_size != 0)
    problems.push_back("al.total_budget - al.initial_labeled must be a multiple of al.acquisition_size");
  if (c.seeds.empty()) problems.push_back("al.seeds must not be empty");
  if (c.classifier.epochs < 1) problems.push_back("classifier.epochs must be >= 1");
  if (c.classifier.batch_size < 1) problems.push_back("classifier.batch_size must be >= 1");
  if (!(c.classifier.learning_rate > 0)) problems.push_back("classifier.learning_rate must be positive");
  if (!(c.classifier.weight_decay >= 0)) problems.push_back("classifier.weight_decay must be >= 0");
  if (!problems.empty()) throw ConfigError(problems);
}

ExperimentConfig read_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const IoError& e) {
    throw ConfigError({e.what()});
  }
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("cannot parse ") + path.string() + ": " + e.what()});
  }
  return parse_config(doc, path.parent_path());
}

json to_json(const ExperimentConfig& c) {
  json strat;
  json params = json::object();
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, strategy::Bait>) {
          strat["name"] = "bait";
          params["fim"] = fim_param_name(s.fim);
          if (const auto* t = std::get_if<fim::TopC>(&s.fim)) params["c"] = t->c;
          params["mode"] = mode_name(s.mode);
          params["lambda"] = s.lambda;
          params["max_candidates"] = s.max_candidates;
        } else if constexpr (std::is_same_v<S, strategy::Typiclust>) {
          strat["name"] = "typiclust";
          params["k_nn"] = s.k_nn;
        } else {
          strat["name"] = strategy_id(s);
        }
      },
      c.strategy);
  strat["params"] = params;
  return json{
      {"dataset", {{"train", c.train_path.string()}, {"test", c.test_path.string()}}},
      {"strategy", strat},
      {"al",
       {{"initial_labeled", c.initial_labeled},
        {"acquisition_size", c.acquisition_size},
        {"total_budget", c.total_budget},
        {"seeds", c.seeds}}},
      {"classifier",
       {{"epochs", c.classifier.epochs},
        {"batch_size", c.classifier.batch_size},
        {"learning_rate", c.classifier.learning_rate},
        {"weight_decay", c.classifier.weight_decay},
        {"schedule", c.classifier.schedule == LrSchedule::CosineAnnealing ? "cosine" : "constant"},
        {"seed", c.classifier.seed},
        {"optimizer", c.classifier.optimizer}}},
  };
}

std::string config_hash(const ExperimentConfig& config) {
  const std::string canonical = to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = kHex[h & 0xf];
  return out;
}

}  // namespace fastfish
