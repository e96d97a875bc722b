#include "fsmirl/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <string_view>
#include <vector>

#include "fsmirl/types.hpp"

namespace fsmirl {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// Cuts at the first # that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (in_string) {
      if (ch == '\\') {
        ++i;
      } else if (ch == '"') {
        in_string = false;
      }
    } else if (ch == '"') {
      in_string = true;
    } else if (ch == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

std::string unescape(const std::string& body, const std::string& path,
                     int line) {
  std::string out;
  out.reserve(body.size());
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (body[i] != '\\') {
      out += body[i];
      continue;
    }
    if (i + 1 >= body.size())
      throw ParseError(path, line, "dangling escape in string");
    const char next = body[++i];
    switch (next) {
      case '"': out += '"'; break;
      case '\\': out += '\\'; break;
      case 'n': out += '\n'; break;
      case 't': out += '\t'; break;
      default:
        throw ParseError(path, line,
                         std::string("unsupported escape \\") + next);
    }
  }
  return out;
}

nlohmann::json parse_scalar(const std::string& raw, const std::string& path,
                            int line) {
  if (raw.empty()) throw ParseError(path, line, "missing value");
  if (raw.front() == '"') {
    if (raw.size() < 2 || raw.back() != '"')
      throw ParseError(path, line, "unterminated string");
    // reject an escaped closing quote masquerading as the terminator
    std::size_t backslashes = 0;
    for (std::size_t i = raw.size() - 2; i >= 1 && raw[i] == '\\'; --i)
      ++backslashes;
    if (backslashes % 2 == 1)
      throw ParseError(path, line, "unterminated string");
    return unescape(raw.substr(1, raw.size() - 2), path, line);
  }
  if (raw == "true") return true;
  if (raw == "false") return false;
  const bool integral =
      raw.find_first_not_of("0123456789",
                            (raw[0] == '-' || raw[0] == '+') ? 1 : 0) ==
          std::string::npos &&
      raw.find_first_of("0123456789") != std::string::npos;
  try {
    if (integral) {
      std::size_t pos = 0;
      const long long v = std::stoll(raw, &pos);
      if (pos != raw.size()) throw ParseError(path, line, "bad integer");
      return v;
    }
    std::size_t pos = 0;
    const double v = std::stod(raw, &pos);
    if (pos != raw.size())
      throw ParseError(path, line, "bad value: " + raw);
    return v;
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception&) {
    throw ParseError(path, line, "bad value: " + raw);
  }
}

nlohmann::json* open_section(nlohmann::json& root, const std::string& dotted,
                             const std::string& path, int line) {
  nlohmann::json* cur = &root;
  std::stringstream parts(dotted);
  std::string part;
  bool any = false;
  while (std::getline(parts, part, '.')) {
    part = trim(part);
    if (part.empty())
      throw ParseError(path, line, "empty section name component");
    any = true;
    nlohmann::json& next = (*cur)[part];
    if (next.is_null()) next = nlohmann::json::object();
    if (!next.is_object())
      throw ParseError(path, line, "section [" + dotted + "] collides with a value");
    cur = &next;
  }
  if (!any) throw ParseError(path, line, "empty section name");
  return cur;
}

template <typename T>
void maybe(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

DataSpec::Kind data_kind_from_name(const std::string& name) {
  if (name == "files") return DataSpec::Kind::Files;
  if (name == "synthetic") return DataSpec::Kind::Synthetic;
  throw ConfigError("config: unknown data kind '" + name + "'");
}

const char* data_kind_name(DataSpec::Kind kind) {
  return kind == DataSpec::Kind::Files ? "files" : "synthetic";
}

ShiftSpec::Kind shift_kind_from_name(const std::string& name) {
  if (name == "none") return ShiftSpec::Kind::None;
  if (name == "feature_bias") return ShiftSpec::Kind::FeatureBias;
  if (name == "structural") return ShiftSpec::Kind::Structural;
  if (name == "synthetic") return ShiftSpec::Kind::Synthetic;
  throw ConfigError("config: unknown shift kind '" + name + "'");
}

const char* shift_kind_name(ShiftSpec::Kind kind) {
  switch (kind) {
    case ShiftSpec::Kind::None: return "none";
    case ShiftSpec::Kind::FeatureBias: return "feature_bias";
    case ShiftSpec::Kind::Structural: return "structural";
    case ShiftSpec::Kind::Synthetic: return "synthetic";
  }
  return "none";
}

void apply_synthetic(SyntheticGeoConfig& s, const nlohmann::json& j) {
  maybe(j, "blocks", s.blocks);
  maybe(j, "nodes_per_block", s.nodes_per_block);
  maybe(j, "p_in", s.p_in);
  maybe(j, "p_out", s.p_out);
  maybe(j, "feature_dim", s.feature_dim);
  maybe(j, "class_separation", s.class_separation);
  maybe(j, "rho_train", s.rho_train);
  maybe(j, "rho_test", s.rho_test);
  maybe(j, "structural_mix", s.structural_mix);
  maybe(j, "train_fraction", s.train_fraction);
  maybe(j, "val_fraction", s.val_fraction);
}

nlohmann::json synthetic_to_json(const SyntheticGeoConfig& s) {
  return {{"blocks", s.blocks},
          {"nodes_per_block", s.nodes_per_block},
          {"p_in", s.p_in},
          {"p_out", s.p_out},
          {"feature_dim", s.feature_dim},
          {"class_separation", s.class_separation},
          {"rho_train", s.rho_train},
          {"rho_test", s.rho_test},
          {"structural_mix", s.structural_mix},
          {"train_fraction", s.train_fraction},
          {"val_fraction", s.val_fraction}};
}

}  // namespace

nlohmann::json parse_toml_subset(const std::string& text,
                                 const std::string& path) {
  nlohmann::json root = nlohmann::json::object();
  nlohmann::json* section = &root;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ParseError(path, line_no, "unterminated section header");
      section =
          open_section(root, trim(line.substr(1, line.size() - 2)), path,
                       line_no);
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(path, line_no, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError(path, line_no, "empty key");
    (*section)[key] = parse_scalar(trim(line.substr(eq + 1)), path, line_no);
  }
  return root;
}

nlohmann::json parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, 0, "cannot open file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  std::size_t first = 0;
  while (first < text.size() &&
         std::isspace(static_cast<unsigned char>(text[first])))
    ++first;
  if (first < text.size() && text[first] == '{') {
    try {
      return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path, 0, e.what());
    }
  }
  return parse_toml_subset(text, path);
}

void apply_config(ExperimentConfig& cfg, const nlohmann::json& j) {
  try {
    if (j.contains("train")) {
      const auto& t = j.at("train");
      maybe(t, "epochs", cfg.train.epochs);
      maybe(t, "batch_size", cfg.train.batch_size);
      maybe(t, "learning_rate", cfg.train.learning_rate);
      maybe(t, "l2", cfg.train.l2);
      maybe(t, "sample_size", cfg.train.sample_size);
      maybe(t, "hidden", cfg.train.hidden);
      maybe(t, "weight_update_period", cfg.train.weight_update_period);
      maybe(t, "seed", cfg.train.seed);
      maybe(t, "use_ca_sampling", cfg.train.use_ca_sampling);
      maybe(t, "use_hsic_weights", cfg.train.use_hsic_weights);
      if (t.contains("reweight")) {
        const auto& r = t.at("reweight");
        maybe(r, "steps", cfg.train.reweight.steps);
        maybe(r, "learning_rate", cfg.train.reweight.learning_rate);
        maybe(r, "pairs_per_step", cfg.train.reweight.pairs_per_step);
        maybe(r, "holdout_pairs", cfg.train.reweight.holdout_pairs);
        maybe(r, "finite_differences", cfg.train.reweight.finite_differences);
      }
    }
    if (j.contains("data")) {
      const auto& d = j.at("data");
      if (d.contains("kind"))
        cfg.data.kind = data_kind_from_name(d.at("kind").get<std::string>());
      maybe(d, "nodes", cfg.data.nodes_path);
      maybe(d, "edges", cfg.data.edges_path);
      maybe(d, "per_class_train", cfg.data.per_class_train);
      maybe(d, "test_count", cfg.data.test_count);
      maybe(d, "val_count", cfg.data.val_count);
      if (d.contains("synthetic"))
        apply_synthetic(cfg.data.synthetic, d.at("synthetic"));
    }
    if (j.contains("shift")) {
      const auto& s = j.at("shift");
      if (s.contains("kind"))
        cfg.shift.kind = shift_kind_from_name(s.at("kind").get<std::string>());
      if (s.contains("level"))
        cfg.shift.level = bias_level_from_name(s.at("level").get<std::string>());
      maybe(s, "edge_fraction", cfg.shift.edge_fraction);
      maybe(s, "seed", cfg.shift.seed);
      if (s.contains("synthetic"))
        apply_synthetic(cfg.shift.synthetic, s.at("synthetic"));
    }
    if (j.contains("bench")) {
      const auto& b = j.at("bench");
      maybe(b, "seeds", cfg.seeds);
      maybe(b, "threads", cfg.threads);
      maybe(b, "wallclock", cfg.wallclock);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

nlohmann::json config_snapshot(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["train"] = {{"epochs", cfg.train.epochs},
                {"batch_size", cfg.train.batch_size},
                {"learning_rate", cfg.train.learning_rate},
                {"l2", cfg.train.l2},
                {"sample_size", cfg.train.sample_size},
                {"hidden", cfg.train.hidden},
                {"weight_update_period", cfg.train.weight_update_period},
                {"seed", cfg.train.seed},
                {"use_ca_sampling", cfg.train.use_ca_sampling},
                {"use_hsic_weights", cfg.train.use_hsic_weights},
                {"reweight",
                 {{"steps", cfg.train.reweight.steps},
                  {"learning_rate", cfg.train.reweight.learning_rate},
                  {"pairs_per_step", cfg.train.reweight.pairs_per_step},
                  {"holdout_pairs", cfg.train.reweight.holdout_pairs},
                  {"finite_differences", cfg.train.reweight.finite_differences}}}};
  j["data"] = {{"kind", data_kind_name(cfg.data.kind)},
               {"nodes", cfg.data.nodes_path},
               {"edges", cfg.data.edges_path},
               {"per_class_train", cfg.data.per_class_train},
               {"test_count", cfg.data.test_count},
               {"val_count", cfg.data.val_count},
               {"synthetic", synthetic_to_json(cfg.data.synthetic)}};
  j["shift"] = {{"kind", shift_kind_name(cfg.shift.kind)},
                {"level", bias_level_name(cfg.shift.level)},
                {"edge_fraction", cfg.shift.edge_fraction},
                {"seed", cfg.shift.seed},
                {"synthetic", synthetic_to_json(cfg.shift.synthetic)}};
  // threads is scheduling, not semantics: results are slot-assigned and
  // identical for any worker count, so it stays out of the snapshot.
  j["bench"] = {{"seeds", cfg.seeds}, {"wallclock", cfg.wallclock}};
  return j;
}

void finalize_report(Report& report, const ExperimentConfig& cfg) {
  report.config = config_snapshot(cfg);
  report.config_hash = fnv1a_hex(report.config.dump());
}

}  // namespace fsmirl
