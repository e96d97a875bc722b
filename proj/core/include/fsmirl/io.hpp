#pragma once

#include <filesystem>
#include <iosfwd>

#include "fsmirl/graph.hpp"
#include "fsmirl/split.hpp"

namespace fsmirl {

// Loads a graph from the tab-separated node/edge file pair.
//
// nodes file: header `id<TAB>label<TAB>f0...f{d-1}`, then one row per node
// with ids 0..N-1 contiguous. edges file: `src<TAB>dst` per line, no header.
// Directed or duplicate rows are fine; storage is symmetrized on load.
//
// num_classes < 0 infers the class count as max(label) + 1.
Graph load_graph(const std::filesystem::path& nodes_path,
                 const std::filesystem::path& edges_path,
                 std::int32_t num_classes = -1);

void save_graph(const Graph& g, const std::filesystem::path& nodes_path,
                const std::filesystem::path& edges_path);

// Split files are `id<TAB>role` rows with role in
// {train, validation, test, unused}; omitted ids default to unused.
SplitAssignment load_split(const std::filesystem::path& path,
                           std::size_t num_nodes);
void save_split(const SplitAssignment& split,
                const std::filesystem::path& path);

// Converts a raw citation-corpus export (content/cites file pair, as
// distributed for the common citation benchmarks) into the native format.
// See docs/DATA.md for the exact mapping. Returns (nodes, edges) row counts.
std::pair<std::int64_t, std::int64_t> convert_citation_corpus(
    const std::filesystem::path& content_path,
    const std::filesystem::path& cites_path,
    const std::filesystem::path& nodes_out,
    const std::filesystem::path& edges_out);

}  // namespace fsmirl
