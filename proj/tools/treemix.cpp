// treemix command-line tool. Exit codes: 0 success, 1 usage, 2 data or
// validation error, 3 verification failure.

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <locale>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "treemix/concentration.hpp"
#include "treemix/error.hpp"
#include "treemix/generate.hpp"
#include "treemix/mixing.hpp"
#include "treemix/model.hpp"
#include "treemix/model_io.hpp"
#include "treemix/verify.hpp"

namespace tx = treemix;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitVerify = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string short_num(double v) {
  if (std::isnan(v)) return "-";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 8);
  return std::string(buf, res.ptr);
}

/// Left-aligned text table; column widths follow the widest cell.
class Table {
 public:
  explicit Table(std::vector<std::string> header) { rows_.push_back(std::move(header)); }
  void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

  void print(std::ostream& out) const {
    std::vector<std::size_t> width;
    for (const auto& r : rows_) {
      if (width.size() < r.size()) width.resize(r.size(), 0);
      for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
    }
    for (const auto& r : rows_) {
      for (std::size_t c = 0; c < r.size(); ++c) {
        out << r[c];
        if (c + 1 < r.size()) out << std::string(width[c] - r[c].size() + 2, ' ');
      }
      out << '\n';
    }
  }

 private:
  std::vector<std::vector<std::string>> rows_;
};

/// Opens --csv PATH when given; "-" means standard output.
class CsvSink {
 public:
  explicit CsvSink(const std::string& path) {
    if (path.empty()) return;
    if (path == "-") {
      out_ = &std::cout;
      return;
    }
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*file_) throw tx::Error("cannot open CSV output " + path);
    file_->imbue(std::locale::classic());
    out_ = file_.get();
  }

  explicit operator bool() const { return out_ != nullptr; }
  tx::CsvWriter writer() { return tx::CsvWriter(*out_); }
  bool to_stdout() const { return out_ == &std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* out_ = nullptr;
};

struct Common {
  std::string model_path;
  std::string csv;
  bool verbose = false;
  int threads = 1;
};

tx::LabeledModel load(const Common& c) {
  auto lm = tx::load_model(c.model_path);
  if (c.verbose) {
    std::cerr << "relabeling (input -> canonical):";
    for (std::size_t k = 0; k < lm.to_canonical.size(); ++k) {
      std::cerr << ' ' << (k + 1) << "->" << lm.to_canonical[k];
    }
    std::cerr << '\n';
  }
  return lm;
}

std::vector<tx::Source> sources_for(const std::string& text, const tx::MarkovTreeModel& m) {
  if (!text.empty()) {
    auto s = tx::parse_source(text);
    if (!s) throw UsageError("unknown --source '" + text + "'");
    return {*s};
  }
  std::vector<tx::Source> out;
  if (tx::config_count(m.alphabet(), static_cast<std::size_t>(m.size())) <= tx::enumeration_cap()) {
    out.push_back(tx::Source::exact);
  }
  out.push_back(tx::Source::level_bound);
  out.push_back(tx::Source::uniform_bound);
  return out;
}

int run_inspect(const Common& c) {
  const auto lm = load(c);
  const auto& m = lm.model;
  const auto& t = m.tree();
  std::cout << "nodes     " << m.size() << '\n'
            << "alphabet  " << m.alphabet() << '\n'
            << "depth     " << t.depth() << '\n'
            << "width     " << t.width() << '\n';
  Table levels({"level", "size", "nodes"});
  for (int d = 0; d <= t.depth(); ++d) {
    std::string nodes;
    for (tx::Node v : t.level(d)) nodes += (nodes.empty() ? "" : " ") + std::to_string(v);
    levels.add({std::to_string(d), std::to_string(t.level(d).size()), nodes});
  }
  levels.print(std::cout);

  CsvSink sink(c.csv);
  if (sink) {
    auto w = sink.writer();
    w.row({"node", "input_label", "parent", "depth"});
    for (tx::Node v = 1; v <= m.size(); ++v) {
      const auto p = t.parent(v);
      w.row({std::to_string(v), std::to_string(lm.from_canonical[v - 1]),
             p ? std::to_string(*p) : "0", std::to_string(t.depth(v))});
    }
  }
  return 0;
}

int run_coeffs(const Common& c) {
  const auto m = load(c).model;
  Table table({"parent", "child", "theta"});
  CsvSink sink(c.csv);
  std::optional<tx::CsvWriter> w;
  if (sink) {
    w.emplace(sink.writer());
    w->row({"parent", "child", "theta"});
  }
  for (const auto& e : m.tree().edges()) {
    const double th = tx::contraction_coefficient(m, e);
    table.add({std::to_string(e.parent), std::to_string(e.child), short_num(th)});
    if (w) w->row({std::to_string(e.parent), std::to_string(e.child), tx::format_double(th)});
  }
  if (!sink.to_stdout()) table.print(std::cout);
  return 0;
}

int run_eta(const Common& c, const std::string& source_text) {
  const auto m = load(c).model;
  const auto sources = sources_for(source_text.empty() ? "level-bound" : source_text, m);
  const auto source = sources.front();
  const auto pair = tx::build_mixing_matrices(m, source);
  const int n = m.size();

  if (c.csv != "-") {
    std::cout << "eta-bar (" << tx::to_string(source) << ")\n";
    std::vector<std::string> header{"i\\j"};
    for (int j = 1; j <= n; ++j) header.push_back(std::to_string(j));
    Table table(header);
    for (int i = 1; i <= n; ++i) {
      std::vector<std::string> row{std::to_string(i)};
      for (int j = 1; j <= n; ++j) {
        row.push_back(j < i ? "." : short_num(pair.delta.at(i, j)));
      }
      table.add(row);
    }
    table.print(std::cout);
  }

  CsvSink sink(c.csv);
  if (sink) {
    auto w = sink.writer();
    w.row({"i", "j", "eta_bar", "provenance"});
    for (int i = 1; i <= n; ++i) {
      for (int j = i + 1; j <= n; ++j) {
        w.row({std::to_string(i), std::to_string(j), tx::format_double(pair.delta.at(i, j)),
               std::string(tx::to_string(source))});
      }
    }
  }
  return 0;
}

int run_norms(const Common& c, const std::string& source_text) {
  const auto m = load(c).model;
  Table table({"source", "delta_inf", "gamma_l2"});
  CsvSink sink(c.csv);
  std::optional<tx::CsvWriter> w;
  if (sink) {
    w.emplace(sink.writer());
    w->row({"source", "delta_inf", "gamma_l2"});
  }
  for (auto s : sources_for(source_text, m)) {
    const auto pair = tx::build_mixing_matrices(m, s);
    const double d = tx::delta_inf_norm(pair.delta);
    const double g = tx::gamma_l2_norm(pair.gamma);
    table.add({std::string(tx::to_string(s)), short_num(d), short_num(g)});
    if (w) w->row({std::string(tx::to_string(s)), tx::format_double(d), tx::format_double(g)});
  }
  if (!sink.to_stdout()) table.print(std::cout);
  return 0;
}

int run_bound(const Common& c, const std::string& source_text, const std::vector<double>& ts) {
  const auto m = load(c).model;
  Table table({"source", "metric", "t", "norm", "tail_bound", "note"});
  CsvSink sink(c.csv);
  std::optional<tx::CsvWriter> w;
  if (sink) {
    w.emplace(sink.writer());
    w->row({"source", "metric", "t", "norm", "tail_bound", "requires_convexity"});
  }
  for (auto s : sources_for(source_text, m)) {
    const auto pair = tx::build_mixing_matrices(m, s);
    const double norms[] = {tx::delta_inf_norm(pair.delta), tx::gamma_l2_norm(pair.gamma)};
    for (auto metric : {tx::Metric::hamming, tx::Metric::euclidean}) {
      const double norm = norms[metric == tx::Metric::hamming ? 0 : 1];
      for (double t : ts) {
        const auto r = tx::tail_bound(m.size(), norm, t, metric);
        const std::string src(tx::to_string(s));
        const std::string met(tx::to_string(metric));
        table.add({src, met, short_num(t), short_num(norm), short_num(r.tail_bound),
                   r.requires_convexity ? "heuristic: convex f on {0,1} in [0,1]" : ""});
        if (w) {
          w->row({src, met, tx::format_double(t), tx::format_double(norm),
                  tx::format_double(r.tail_bound), r.requires_convexity ? "1" : "0"});
        }
      }
    }
  }
  if (!sink.to_stdout()) table.print(std::cout);
  return 0;
}

int run_sample(const Common& c, std::uint64_t seed, std::size_t count) {
  if (count < 1) throw UsageError("--count must be positive");
  const auto m = load(c).model;
  const auto paths = tx::sample_paths(m, seed, count, c.threads);
  CsvSink sink(c.csv.empty() ? "-" : c.csv);
  auto w = sink.writer();
  std::vector<std::string> header{"path"};
  for (int v = 1; v <= m.size(); ++v) header.push_back("x" + std::to_string(v));
  w.row(header);
  for (std::size_t k = 0; k < paths.count; ++k) {
    std::vector<std::string> row{std::to_string(k)};
    for (int x : paths.path(k)) row.push_back(std::to_string(x));
    w.row(row);
  }
  if (!sink.to_stdout()) std::cout << "wrote " << count << " paths to " << c.csv << '\n';
  return 0;
}

int run_verify(const Common& c, const tx::VerifyOptions& opts) {
  std::vector<tx::SuiteResult> results;
  if (!c.model_path.empty()) {
    const auto m = load(c).model;
    results = tx::verify_model(m, opts);
  }
  for (auto& r : tx::verify_random(opts)) results.push_back(std::move(r));

  Table table({"suite", "cases", "max_violation", "tolerance", "result", "note"});
  bool ok = true;
  for (const auto& r : results) {
    ok = ok && r.passed;
    table.add({r.name, std::to_string(r.cases), short_num(r.max_violation),
               short_num(r.tolerance), r.passed ? "PASS" : "FAIL", r.note});
  }
  CsvSink sink(c.csv);
  if (!sink.to_stdout()) table.print(std::cout);
  if (sink) {
    auto w = sink.writer();
    w.row({"suite", "cases", "max_violation", "tolerance", "passed", "note"});
    for (const auto& r : results) {
      w.row({r.name, std::to_string(r.cases), tx::format_double(r.max_violation),
             tx::format_double(r.tolerance), r.passed ? "1" : "0", r.note});
    }
  }
  return ok ? 0 : kExitVerify;
}

int run_gen(const Common& c, const tx::GenOptions& g, std::uint64_t seed, const std::string& out,
            bool chain, int chain_nodes) {
  tx::Stream rng(seed, 0);
  const auto m = chain ? tx::generate_chain(chain_nodes, g.alphabet, g.theta_max, rng)
                       : tx::generate_model(g, rng);
  const auto text = tx::serialize_model(m);
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    std::ofstream f(out, std::ios::binary);
    if (!f) throw tx::Error("cannot open output " + out);
    f << text;
    if (c.verbose) std::cerr << "wrote model with " << m.size() << " nodes to " << out << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::cout.imbue(std::locale::classic());
  CLI::App app{"Mixing coefficients and concentration bounds for Markov tree processes"};
  app.require_subcommand(1);
  app.fallthrough();

  Common common;
  app.add_flag("-v,--verbose", common.verbose, "Echo the canonical relabeling and progress");
  app.add_option("--threads", common.threads, "Worker thread cap")->check(CLI::PositiveNumber);

  auto add_model = [&](CLI::App* sub, bool required = true) {
    auto* opt = sub->add_option("model", common.model_path, "Model file (JSON)");
    if (required) opt->required();
    sub->add_option("--csv", common.csv, "Write machine-readable CSV to PATH ('-' for stdout)");
  };

  std::string source_text;
  std::uint64_t seed = 42;
  std::size_t count = 1000;
  std::vector<double> t_grid{0.05, 0.1, 0.2, 0.3, 0.5};
  tx::VerifyOptions vopts;
  tx::GenOptions gopts;
  std::string gen_out;
  bool gen_chain = false;
  int gen_nodes = 5;

  auto* inspect = app.add_subcommand("inspect", "Tree shape: depth, width and levels");
  add_model(inspect);

  auto* coeffs = app.add_subcommand("coeffs", "Contraction coefficient of every edge");
  add_model(coeffs);

  auto* eta = app.add_subcommand("eta", "Upper-triangular eta-bar matrix");
  add_model(eta);
  eta->add_option("--source", source_text, "exact | level | uniform (default level)");

  auto* norms = app.add_subcommand("norms", "Operator norms of the mixing matrices");
  add_model(norms);
  norms->add_option("--source", source_text, "exact | level | uniform (default all feasible)");

  auto* bound = app.add_subcommand("bound", "Tail-bound curve over a t-grid");
  add_model(bound);
  bound->add_option("--source", source_text, "exact | level | uniform (default all feasible)");
  bound->add_option("--t", t_grid, "Deviation levels")->delimiter(',');

  auto* sample = app.add_subcommand("sample", "Draw sample paths");
  add_model(sample);
  sample->add_option("--seed", seed, "64-bit seed");
  sample->add_option("--count", count, "Number of paths");

  auto* verify = app.add_subcommand("verify", "Run the property suites");
  add_model(verify, false);
  verify->add_option("--trials", vopts.trials, "Instances per randomized suite");
  verify->add_option("--seed", vopts.seed, "64-bit seed");
  verify->add_option("--samples", vopts.mc_samples, "Monte Carlo samples per test function");

  auto* gen = app.add_subcommand("gen", "Generate a random model file");
  gen->add_option("--alphabet", gopts.alphabet, "Alphabet size")->check(CLI::Range(2, 64));
  gen->add_option("--depth", gopts.depth, "Tree depth")->check(CLI::NonNegativeNumber);
  gen->add_option("--width", gopts.width, "Largest level size")->check(CLI::PositiveNumber);
  gen->add_option("--theta-max", gopts.theta_max, "Upper bound on edge contraction")
      ->check(CLI::Range(0.0, 1.0));
  gen->add_option("--max-nodes", gopts.max_nodes, "Node cap (0 for none)");
  gen->add_option("--zero-fraction", gopts.zero_fraction, "Chance of a zero kernel entry")
      ->check(CLI::Range(0.0, 1.0));
  gen->add_flag("--chain", gen_chain, "Generate a chain instead of a random tree");
  gen->add_option("--nodes", gen_nodes, "Chain length with --chain")->check(CLI::PositiveNumber);
  gen->add_option("--seed", seed, "64-bit seed");
  gen->add_option("-o,--output", gen_out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*inspect) return run_inspect(common);
    if (*coeffs) return run_coeffs(common);
    if (*eta) return run_eta(common, source_text);
    if (*norms) return run_norms(common, source_text);
    if (*bound) return run_bound(common, source_text, t_grid);
    if (*sample) return run_sample(common, seed, count);
    if (*verify) {
      vopts.threads = common.threads;
      return run_verify(common, vopts);
    }
    if (*gen) return run_gen(common, gopts, seed, gen_out, gen_chain, gen_nodes);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const tx::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
