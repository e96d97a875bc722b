#include "fsmirl/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>

namespace fsmirl {
namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

std::int64_t parse_int(std::string_view field, const std::string& path,
                       std::int64_t line, const char* what) {
  std::int64_t value = 0;
  const auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError(path, line,
                     std::string("malformed ") + what + " '" +
                         std::string(field) + "'");
  }
  return value;
}

double parse_double(std::string_view field, const std::string& path,
                    std::int64_t line, const char* what) {
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError(path, line,
                     std::string("malformed ") + what + " '" +
                         std::string(field) + "'");
  }
  return value;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  return in;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

Graph load_graph(const std::filesystem::path& nodes_path,
                 const std::filesystem::path& edges_path,
                 std::int32_t num_classes) {
  const std::string npath = nodes_path.string();
  std::ifstream nodes_in = open_or_throw(nodes_path);

  std::string line;
  std::int64_t lineno = 0;
  if (!std::getline(nodes_in, line)) {
    throw ParseError(npath, 1, "empty nodes file");
  }
  ++lineno;
  strip_cr(line);
  const auto header = split_tabs(line);
  if (header.size() < 2 || header[0] != "id" || header[1] != "label") {
    throw ParseError(npath, 1, "expected header 'id<TAB>label<TAB>f0...'");
  }
  const std::size_t dim = header.size() - 2;

  std::vector<std::int32_t> labels;
  std::vector<double> feature_rows;
  std::int64_t next_id = 0;
  while (std::getline(nodes_in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != header.size()) {
      throw ParseError(npath, lineno,
                       "expected " + std::to_string(header.size()) +
                           " fields, got " + std::to_string(fields.size()));
    }
    const std::int64_t id = parse_int(fields[0], npath, lineno, "node id");
    if (id != next_id) {
      throw ParseError(npath, lineno,
                       "node ids must be contiguous from 0; expected " +
                           std::to_string(next_id) + ", got " +
                           std::to_string(id));
    }
    ++next_id;
    const std::int64_t label = parse_int(fields[1], npath, lineno, "label");
    labels.push_back(static_cast<std::int32_t>(label));
    for (std::size_t j = 0; j < dim; ++j) {
      feature_rows.push_back(
          parse_double(fields[2 + j], npath, lineno, "feature"));
    }
  }
  const auto n = static_cast<Eigen::Index>(labels.size());
  Eigen::MatrixXd features(n, static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < features.cols(); ++j) {
      features(i, j) = feature_rows[static_cast<std::size_t>(i) * dim +
                                    static_cast<std::size_t>(j)];
    }
  }

  if (num_classes < 0) {
    std::int32_t max_label = -1;
    for (std::int32_t l : labels) max_label = std::max(max_label, l);
    num_classes = max_label + 1;
    if (num_classes <= 0) {
      throw ValidationError("cannot infer class count: no labels");
    }
  }

  const std::string epath = edges_path.string();
  std::ifstream edges_in = open_or_throw(edges_path);
  std::vector<std::pair<NodeId, NodeId>> edges;
  lineno = 0;
  while (std::getline(edges_in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 2) {
      throw ParseError(epath, lineno, "expected 'src<TAB>dst'");
    }
    const auto src = parse_int(fields[0], epath, lineno, "edge source");
    const auto dst = parse_int(fields[1], epath, lineno, "edge target");
    if (src < 0 || src >= next_id || dst < 0 || dst >= next_id) {
      throw ValidationError("endpoint out of range at " + epath + ":" +
                            std::to_string(lineno) + ": (" +
                            std::to_string(src) + ", " + std::to_string(dst) +
                            ") with " + std::to_string(next_id) + " nodes");
    }
    edges.emplace_back(static_cast<NodeId>(src), static_cast<NodeId>(dst));
  }

  return Graph::from_edges(std::move(features), std::move(labels),
                           num_classes, edges);
}

void save_graph(const Graph& g, const std::filesystem::path& nodes_path,
                const std::filesystem::path& edges_path) {
  std::ofstream nodes_out(nodes_path);
  if (!nodes_out) {
    throw std::runtime_error("cannot write " + nodes_path.string());
  }
  nodes_out << "id\tlabel";
  for (Eigen::Index j = 0; j < g.feature_dim(); ++j) {
    nodes_out << "\tf" << j;
  }
  nodes_out << '\n';
  std::ostringstream row;
  row.precision(17);
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    row.str("");
    row << v << '\t' << g.label(v);
    for (Eigen::Index j = 0; j < g.feature_dim(); ++j) {
      row << '\t' << g.features()(v, j);
    }
    nodes_out << row.str() << '\n';
  }

  std::ofstream edges_out(edges_path);
  if (!edges_out) {
    throw std::runtime_error("cannot write " + edges_path.string());
  }
  for (const auto& [u, v] : g.undirected_edges()) {
    edges_out << u << '\t' << v << '\n';
  }
}

SplitAssignment load_split(const std::filesystem::path& path,
                           std::size_t num_nodes) {
  const std::string spath = path.string();
  std::ifstream in = open_or_throw(path);
  SplitAssignment split(num_nodes);
  std::string line;
  std::int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 2) {
      throw ParseError(spath, lineno, "expected 'id<TAB>role'");
    }
    const auto id = parse_int(fields[0], spath, lineno, "node id");
    if (id < 0 || id >= static_cast<std::int64_t>(num_nodes)) {
      throw ValidationError("split node id out of range at " + spath + ":" +
                            std::to_string(lineno));
    }
    const auto role = role_from_name(std::string(fields[1]));
    if (!role) {
      throw ParseError(spath, lineno,
                       "unknown role '" + std::string(fields[1]) + "'");
    }
    split.set_role(static_cast<NodeId>(id), *role);
  }
  return split;
}

void save_split(const SplitAssignment& split,
                const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  for (std::size_t v = 0; v < split.size(); ++v) {
    out << v << '\t' << role_name(split.role(static_cast<NodeId>(v))) << '\n';
  }
}

std::pair<std::int64_t, std::int64_t> convert_citation_corpus(
    const std::filesystem::path& content_path,
    const std::filesystem::path& cites_path,
    const std::filesystem::path& nodes_out,
    const std::filesystem::path& edges_out) {
  const std::string cpath = content_path.string();
  std::ifstream content = open_or_throw(content_path);

  // content rows: <paper id> <f0..f{d-1}> <class name>, whitespace separated.
  // Paper ids and class names are mapped to dense indices in first-seen
  // order, which makes the conversion deterministic for a fixed input.
  std::unordered_map<std::string, NodeId> paper_ids;
  std::unordered_map<std::string, std::int32_t> class_ids;
  std::vector<std::string> rows;
  std::vector<std::int32_t> labels;
  std::size_t dim = 0;

  std::string line;
  std::int64_t lineno = 0;
  while (std::getline(content, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::vector<std::string> tokens;
    std::string tok;
    while (fields >> tok) tokens.push_back(tok);
    if (tokens.size() < 3) {
      throw ParseError(cpath, lineno, "expected '<id> <features...> <class>'");
    }
    if (dim == 0) {
      dim = tokens.size() - 2;
    } else if (tokens.size() - 2 != dim) {
      throw ParseError(cpath, lineno,
                       "inconsistent feature count: expected " +
                           std::to_string(dim) + ", got " +
                           std::to_string(tokens.size() - 2));
    }
    const auto [it, fresh] = paper_ids.try_emplace(
        tokens.front(), static_cast<NodeId>(paper_ids.size()));
    if (!fresh) {
      throw ParseError(cpath, lineno,
                       "duplicate paper id '" + tokens.front() + "'");
    }
    const auto [cit, ignored] = class_ids.try_emplace(
        tokens.back(), static_cast<std::int32_t>(class_ids.size()));
    labels.push_back(cit->second);
    std::string features;
    for (std::size_t j = 1; j + 1 < tokens.size(); ++j) {
      features += '\t';
      features += tokens[j];
    }
    rows.push_back(std::move(features));
  }

  std::ofstream nout(nodes_out);
  if (!nout) {
    throw std::runtime_error("cannot write " + nodes_out.string());
  }
  nout << "id\tlabel";
  for (std::size_t j = 0; j < dim; ++j) nout << "\tf" << j;
  nout << '\n';
  for (std::size_t v = 0; v < rows.size(); ++v) {
    nout << v << '\t' << labels[v] << rows[v] << '\n';
  }

  const std::string epath = cites_path.string();
  std::ifstream cites = open_or_throw(cites_path);
  std::ofstream eout(edges_out);
  if (!eout) {
    throw std::runtime_error("cannot write " + edges_out.string());
  }
  std::int64_t edge_rows = 0;
  lineno = 0;
  while (std::getline(cites, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string a, b;
    if (!(fields >> a >> b)) {
      throw ParseError(epath, lineno, "expected '<cited> <citing>'");
    }
    const auto ia = paper_ids.find(a);
    const auto ib = paper_ids.find(b);
    if (ia == paper_ids.end() || ib == paper_ids.end()) {
      // Citations into papers outside the content file are dropped.
      continue;
    }
    eout << ia->second << '\t' << ib->second << '\n';
    ++edge_rows;
  }
  return {static_cast<std::int64_t>(rows.size()), edge_rows};
}

}  // namespace fsmirl
