#include "treemix/model_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "treemix/error.hpp"

namespace treemix {

namespace {

using json = nlohmann::json;

const json& field(const json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(path + ": missing field '" + key + "'");
  return *it;
}

int as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ParseError(path + ": expected an integer");
  return v.get<int>();
}

std::vector<double> as_probs(const json& v, const std::string& path) {
  if (!v.is_array()) throw ParseError(path + ": expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!v[k].is_number()) {
      throw ParseError(path + "[" + std::to_string(k) + "]: expected a number");
    }
    out.push_back(v[k].get<double>());
  }
  return out;
}

}  // namespace

LabeledModel parse_model(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("model file must be a JSON object");

  const int version = as_int(field(doc, "format_version", "$"), "format_version");
  if (version != kModelFormatVersion) {
    throw ParseError("format_version: unsupported version " + std::to_string(version));
  }
  const int alphabet = as_int(field(doc, "alphabet_size", "$"), "alphabet_size");
  if (alphabet < 2) throw ParseError("alphabet_size: must be at least 2");
  const int n = as_int(field(doc, "nodes", "$"), "nodes");
  if (n < 1) throw ParseError("nodes: must be at least 1");

  std::vector<double> root = as_probs(field(doc, "root_dist", "$"), "root_dist");
  if (static_cast<int>(root.size()) != alphabet) {
    throw ParseError("root_dist: length " + std::to_string(root.size()) +
                     " does not match alphabet_size " + std::to_string(alphabet));
  }

  const json& edges = field(doc, "edges", "$");
  if (!edges.is_array()) throw ParseError("edges: expected an array");
  std::vector<ParentMajorKernel> kernels;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const std::string path = "edges[" + std::to_string(e) + "]";
    const json& item = edges[e];
    if (!item.is_object()) throw ParseError(path + ": expected an object");
    ParentMajorKernel k;
    k.edge.parent = as_int(field(item, "parent", path), path + ".parent");
    k.edge.child = as_int(field(item, "child", path), path + ".child");
    const json& rows = field(item, "kernel", path);
    if (!rows.is_array() || static_cast<int>(rows.size()) != alphabet) {
      throw ParseError(path + ".kernel: expected " + std::to_string(alphabet) + " rows");
    }
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const std::string rpath = path + ".kernel[" + std::to_string(r) + "]";
      auto row = as_probs(rows[r], rpath);
      if (static_cast<int>(row.size()) != alphabet) {
        throw ParseError(rpath + ": expected " + std::to_string(alphabet) + " entries");
      }
      k.rows.push_back(std::move(row));
    }
    kernels.push_back(std::move(k));
  }
  try {
    return make_model(n, alphabet, std::move(root), kernels);
  } catch (const DomainError& e) {
    throw ParseError(e.what());
  }
}

LabeledModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open model file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

std::string serialize_model(const MarkovTreeModel& m) {
  nlohmann::ordered_json doc;
  doc["format_version"] = kModelFormatVersion;
  doc["alphabet_size"] = m.alphabet();
  doc["nodes"] = m.size();
  doc["root_dist"] = std::vector<double>(m.root_dist().begin(), m.root_dist().end());
  auto edges = nlohmann::ordered_json::array();
  for (const Edge& e : m.tree().edges()) {
    const Kernel& k = m.kernel(e);
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(m.alphabet()));
    for (int y = 0; y < m.alphabet(); ++y) {
      for (int x = 0; x < m.alphabet(); ++x) rows[y].push_back(k.prob(x, y));
    }
    nlohmann::ordered_json item;
    item["parent"] = e.parent;
    item["child"] = e.child;
    item["kernel"] = rows;
    edges.push_back(std::move(item));
  }
  doc["edges"] = std::move(edges);
  return doc.dump(2) + "\n";
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

CsvWriter& CsvWriter::row(const std::vector<std::string>& fields) {
  for (std::size_t k = 0; k < fields.size(); ++k) {
    if (k > 0) out_ << ',';
    out_ << fields[k];
  }
  out_ << '\n';
  return *this;
}

}  // namespace treemix
