#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "treemix/model.hpp"

namespace treemix {

/// Model files are JSON documents:
///
///   {
///     "format_version": 1,
///     "alphabet_size": 2,
///     "nodes": 3,
///     "root_dist": [0.5, 0.5],
///     "edges": [
///       {"parent": 1, "child": 2, "kernel": [[0.9, 0.1], [0.2, 0.8]]},
///       ...
///     ]
///   }
///
/// kernel[y][x] = p(child = x | parent = y). States are 0-indexed, node
/// labels 1-based and arbitrary; the loaded model is canonicalized.
inline constexpr int kModelFormatVersion = 1;

/// Throws ParseError with the offending field path, or the tree/stochastic
/// validation error.
LabeledModel parse_model(std::string_view text);
LabeledModel load_model(const std::filesystem::path& path);

/// Writes the canonical model. parse_model(serialize_model(m)) reproduces
/// m bit-exactly.
std::string serialize_model(const MarkovTreeModel& m);

/// 17 significant digits with a '.' separator regardless of the global
/// locale.
std::string format_double(double v);

/// Minimal CSV writer; fields are never quoted, callers only emit numbers
/// and identifiers.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  CsvWriter& row(const std::vector<std::string>& fields);

 private:
  std::ostream& out_;
};

}  // namespace treemix
