#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "retrosearch/errors.hpp"
#include "retrosearch/retrospective.hpp"

namespace retro {
namespace {

void append_values(std::string& out, const std::vector<double>& v) {
  char buf[40];
  for (double d : v) {
    std::snprintf(buf, sizeof buf, " %.17g", d);
    out += buf;
  }
}

std::string kv(std::istream& in, const std::string& key) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("dataset file: unexpected end, wanted " + key);
  const auto eq = line.find('=');
  if (eq == std::string::npos || line.substr(0, eq) != key) {
    throw IoError("dataset file: expected '" + key + "=...', got '" + line + "'");
  }
  return line.substr(eq + 1);
}

const char* read_values(const char* p, std::size_t count, std::vector<double>& out) {
  out.resize(count);
  char* end = nullptr;
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = std::strtod(p, &end);
    if (end == p) throw IoError("dataset file: missing feature value");
    p = end;
  }
  return p;
}

}  // namespace

std::string write_dataset_text(const Dataset& ds) {
  std::size_t dim = 0;
  if (!ds.examples.empty()) {
    dim = ds.examples.front().context.dim();
  } else if (!ds.prune_examples.empty()) {
    dim = ds.prune_examples.front().features.dim();
  }
  std::string out = "retrosearch-dataset v1\n";
  out += "schema=" + ds.schema_id + "\n";
  out += "dim=" + std::to_string(dim) + "\n";
  out += "iteration=" + std::to_string(ds.iteration) + "\n";
  out += "size=" + std::to_string(ds.problem_size) + "\n";
  out += "examples=" + std::to_string(ds.examples.size()) + "\n";
  out += "prune_examples=" + std::to_string(ds.prune_examples.size()) + "\n";
  for (const LabeledExample& ex : ds.examples) {
    out += "E " + ex.instance_id + " " + std::to_string(ex.decision_step) + " " +
           std::to_string(ex.negatives.size());
    append_values(out, ex.context.values);
    for (const FeatureVector& n : ex.negatives) append_values(out, n.values);
    out += '\n';
  }
  for (const PruneExample& pe : ds.prune_examples) {
    out += "P " + pe.instance_id + " " + std::to_string(pe.decision_step) + " " +
           (pe.keep ? std::string("1") : std::string("0"));
    append_values(out, pe.features.values);
    out += '\n';
  }
  return out;
}

Dataset parse_dataset_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "retrosearch-dataset v1") {
    throw IoError("dataset file: bad magic line");
  }
  Dataset ds;
  ds.schema_id = kv(in, "schema");
  const std::size_t dim = std::stoul(kv(in, "dim"));
  ds.iteration = std::stoi(kv(in, "iteration"));
  ds.problem_size = std::stoi(kv(in, "size"));
  const std::size_t n_examples = std::stoul(kv(in, "examples"));
  const std::size_t n_prune = std::stoul(kv(in, "prune_examples"));

  auto read_head = [&](const char* tag) {
    if (!std::getline(in, line)) throw IoError("dataset file: truncated records");
    if (line.size() < 2 || line[0] != tag[0] || line[1] != ' ') {
      throw IoError(std::string("dataset file: expected ") + tag + " record, got '" + line + "'");
    }
  };

  for (std::size_t i = 0; i < n_examples; ++i) {
    read_head("E");
    std::istringstream ls(line.substr(2));
    LabeledExample ex;
    std::size_t n_neg = 0;
    if (!(ls >> ex.instance_id >> ex.decision_step >> n_neg)) {
      throw IoError("dataset file: malformed E record");
    }
    std::string rest;
    std::getline(ls, rest);
    const char* p = rest.c_str();
    ex.context.schema_id = ds.schema_id;
    p = read_values(p, dim, ex.context.values);
    ex.negatives.resize(n_neg);
    for (std::size_t k = 0; k < n_neg; ++k) {
      ex.negatives[k].schema_id = ds.schema_id;
      p = read_values(p, dim, ex.negatives[k].values);
    }
    ds.examples.push_back(std::move(ex));
  }
  for (std::size_t i = 0; i < n_prune; ++i) {
    read_head("P");
    std::istringstream ls(line.substr(2));
    PruneExample pe;
    int keep = 0;
    if (!(ls >> pe.instance_id >> pe.decision_step >> keep)) {
      throw IoError("dataset file: malformed P record");
    }
    pe.keep = keep != 0;
    std::string rest;
    std::getline(ls, rest);
    pe.features.schema_id = ds.schema_id;
    read_values(rest.c_str(), dim, pe.features.values);
    ds.prune_examples.push_back(std::move(pe));
  }
  return ds;
}

void save_dataset(const std::string& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open dataset file for writing: " + path);
  const std::string text = write_dataset_text(ds);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("failed writing dataset file: " + path);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_dataset_text(ss.str());
}

}  // namespace retro
