#include "retrosearch/policy.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "retrosearch/errors.hpp"

namespace retro {
namespace {

double softplus(double t) {
  // log(1 + e^t) without overflow on either side.
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

double sigmoid(double t) { return t > 0.0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t)); }

void check_input(const RankerParams& p, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != p.input_dim) {
    throw std::invalid_argument("ranker: input dimension mismatch (got " +
                                std::to_string(x.size()) + ", expected " +
                                std::to_string(p.input_dim) + ")");
  }
}

/// Forward pass keeping pre-activations; fills dscore/dparams scaled by
/// `scale` into grad. Returns the score.
double forward_backward(const RankerParams& p, const std::vector<double>& x, double scale,
                        std::vector<double>& grad, std::vector<double>& z_buf) {
  check_input(p, x);
  const int in = p.input_dim, h = p.hidden_dim;
  z_buf.resize(static_cast<std::size_t>(h));
  double s = p.b2;
  for (int j = 0; j < h; ++j) {
    double z = p.b1[j];
    const double* row = &p.w1[static_cast<std::size_t>(j) * in];
    for (int k = 0; k < in; ++k) z += row[k] * x[k];
    z_buf[j] = z;
    s += p.w2[j] * LeakyRelu::f(z);
  }
  if (scale != 0.0) {
    double* gw1 = grad.data();
    double* gb1 = gw1 + static_cast<std::size_t>(h) * in;
    double* gw2 = gb1 + h;
    double* gb2 = gw2 + h;
    for (int j = 0; j < h; ++j) {
      const double a = LeakyRelu::f(z_buf[j]);
      const double dz = scale * p.w2[j] * LeakyRelu::df(z_buf[j]);
      gw2[j] += scale * a;
      gb1[j] += dz;
      double* grow = &gw1[static_cast<std::size_t>(j) * in];
      for (int k = 0; k < in; ++k) grow[k] += dz * x[k];
    }
    *gb2 += scale;
  }
  return s;
}

}  // namespace

double ranker_score(const RankerParams& p, const std::vector<double>& x) {
  check_input(p, x);
  double s = p.b2;
  for (int j = 0; j < p.hidden_dim; ++j) {
    double z = p.b1[j];
    const double* row = &p.w1[static_cast<std::size_t>(j) * p.input_dim];
    for (int k = 0; k < p.input_dim; ++k) z += row[k] * x[k];
    s += p.w2[j] * LeakyRelu::f(z);
  }
  return s;
}

double pairwise_loss(double score_pref, double score_neg) {
  const double d = score_pref - score_neg;
  return d >= 0.0 ? std::log1p(std::exp(-d)) : -d + std::log1p(std::exp(d));
}

double pairwise_loss_grad(const RankerParams& p, const std::vector<double>& x_pref,
                          const std::vector<double>& x_neg, std::vector<double>& grad) {
  grad.resize(p.parameter_count(), 0.0);
  std::vector<double> z_buf;
  // dL/dd for L = log(1 + exp(-d)) is -sigmoid(-d); chain through both passes.
  const double s_pref = forward_backward(p, x_pref, 0.0, grad, z_buf);
  const double s_neg = forward_backward(p, x_neg, 0.0, grad, z_buf);
  const double d = s_pref - s_neg;
  const double dl_dd = -sigmoid(-d);
  forward_backward(p, x_pref, dl_dd, grad, z_buf);
  forward_backward(p, x_neg, -dl_dd, grad, z_buf);
  return pairwise_loss(s_pref, s_neg);
}

double pruner_keep_probability(const PrunerParams& p, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != p.input_dim) {
    throw std::invalid_argument("pruner: input dimension mismatch");
  }
  double z = p.b;
  for (int k = 0; k < p.input_dim; ++k) z += p.w[k] * x[k];
  return sigmoid(z);
}

double pruner_loss_grad(const PrunerParams& p, const std::vector<double>& x, bool keep,
                        std::vector<double>& grad) {
  if (static_cast<int>(x.size()) != p.input_dim) {
    throw std::invalid_argument("pruner: input dimension mismatch");
  }
  grad.resize(static_cast<std::size_t>(p.input_dim) + 1, 0.0);
  double z = p.b;
  for (int k = 0; k < p.input_dim; ++k) z += p.w[k] * x[k];
  const double y = keep ? 1.0 : 0.0;
  const double weight = keep ? p.keep_weight : 1.0;
  const double loss = weight * ((1.0 - y) * z + softplus(-z));
  const double dz = weight * (sigmoid(z) - y);
  for (int k = 0; k < p.input_dim; ++k) grad[k] += dz * x[k];
  grad[static_cast<std::size_t>(p.input_dim)] += dz;
  return loss;
}

RankerParams init_ranker(int input_dim, int hidden_dim, const std::string& schema_id,
                         std::uint64_t seed) {
  if (input_dim <= 0 || hidden_dim <= 0) {
    throw std::invalid_argument("init_ranker: dimensions must be positive");
  }
  RankerParams p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  p.schema_id = schema_id;
  p.w1.resize(static_cast<std::size_t>(hidden_dim) * input_dim);
  p.b1.assign(static_cast<std::size_t>(hidden_dim), 0.0);
  p.w2.resize(static_cast<std::size_t>(hidden_dim));
  Rng rng(seed);
  const double lim1 = std::sqrt(6.0 / (input_dim + hidden_dim));
  for (double& w : p.w1) w = (2.0 * rng.uniform01() - 1.0) * lim1;
  const double lim2 = std::sqrt(6.0 / (hidden_dim + 1));
  for (double& w : p.w2) w = (2.0 * rng.uniform01() - 1.0) * lim2;
  return p;
}

PrunerParams init_pruner(int input_dim, const std::string& schema_id, double keep_weight) {
  if (input_dim <= 0) throw std::invalid_argument("init_pruner: dimension must be positive");
  if (keep_weight < 1.0) throw std::invalid_argument("init_pruner: keep_weight must be >= 1");
  PrunerParams p;
  p.input_dim = input_dim;
  p.schema_id = schema_id;
  p.keep_weight = keep_weight;
  p.w.assign(static_cast<std::size_t>(input_dim), 0.0);
  p.b = 0.0;
  return p;
}

RankerPolicy::RankerPolicy(LearnedPolicy learned) : learned_(std::move(learned)) {}

double RankerPolicy::score(const FeatureVector& raw, const NormalizationContext& ctx) const {
  if (!learned_.ranker.schema_id.empty() && raw.schema_id != learned_.ranker.schema_id) {
    throw std::invalid_argument("RankerPolicy: schema mismatch, model=" +
                                learned_.ranker.schema_id + " input=" + raw.schema_id);
  }
  return ranker_score(learned_.ranker, normalize(raw, ctx).values);
}

bool RankerPolicy::prune(const FeatureVector& raw, const NormalizationContext& ctx) const {
  if (!learned_.pruner) return false;
  const double keep_p = pruner_keep_probability(*learned_.pruner, normalize(raw, ctx).values);
  return keep_p < 0.5;  // exact tie keeps the node
}

std::string RankerPolicy::tag() const {
  std::string t = "ranker[" + learned_.ranker.schema_id + ",h" +
                  std::to_string(learned_.ranker.hidden_dim) + "]";
  if (learned_.pruner) t += "+pruner";
  return t;
}

std::size_t MixturePolicy::pick(double u01) const {
  if (components.empty() || components.size() != weights.size()) {
    throw std::logic_error("MixturePolicy: malformed mixture");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u01 < acc) return i;
  }
  return weights.size() - 1;
}

// --- model files ------------------------------------------------------------

namespace {

void write_doubles(std::string& out, const char* key, const std::vector<double>& v) {
  out += key;
  out += '=';
  char buf[40];
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ' ';
    std::snprintf(buf, sizeof buf, "%.17g", v[i]);
    out += buf;
  }
  out += '\n';
}

void write_double(std::string& out, const char* key, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += key;
  out += '=';
  out += buf;
  out += '\n';
}

void write_learned(std::string& out, const LearnedPolicy& lp) {
  out += "kind=ranker\n";
  out += "schema=" + lp.ranker.schema_id + "\n";
  out += "input_dim=" + std::to_string(lp.ranker.input_dim) + "\n";
  out += "hidden_dim=" + std::to_string(lp.ranker.hidden_dim) + "\n";
  write_doubles(out, "w1", lp.ranker.w1);
  write_doubles(out, "b1", lp.ranker.b1);
  write_doubles(out, "w2", lp.ranker.w2);
  write_double(out, "b2", lp.ranker.b2);
  out += std::string("pruner=") + (lp.pruner ? "1" : "0") + "\n";
  if (lp.pruner) {
    write_doubles(out, "pruner_w", lp.pruner->w);
    write_double(out, "pruner_b", lp.pruner->b);
    write_double(out, "keep_weight", lp.pruner->keep_weight);
  }
}

struct LineReader {
  std::istringstream in;
  std::string line;
  int line_no = 0;

  explicit LineReader(const std::string& text) : in(text) {}

  bool next() {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty()) return true;
    }
    return false;
  }

  std::string expect_key(const std::string& key) {
    if (!next()) throw IoError("model file: unexpected end, wanted " + key);
    const auto eq = line.find('=');
    if (eq == std::string::npos || line.substr(0, eq) != key) {
      throw IoError("model file line " + std::to_string(line_no) + ": expected " + key + "=...");
    }
    return line.substr(eq + 1);
  }
};

std::vector<double> parse_doubles(const std::string& s, const char* what) {
  std::vector<double> v;
  const char* p = s.c_str();
  char* end = nullptr;
  while (*p) {
    const double d = std::strtod(p, &end);
    if (end == p) throw IoError(std::string("model file: bad number in ") + what);
    v.push_back(d);
    p = end;
    while (*p == ' ') ++p;
  }
  return v;
}

LearnedPolicy parse_learned(LineReader& r) {
  LearnedPolicy lp;
  lp.ranker.schema_id = r.expect_key("schema");
  lp.ranker.input_dim = std::stoi(r.expect_key("input_dim"));
  lp.ranker.hidden_dim = std::stoi(r.expect_key("hidden_dim"));
  lp.ranker.w1 = parse_doubles(r.expect_key("w1"), "w1");
  lp.ranker.b1 = parse_doubles(r.expect_key("b1"), "b1");
  lp.ranker.w2 = parse_doubles(r.expect_key("w2"), "w2");
  lp.ranker.b2 = std::stod(r.expect_key("b2"));
  const std::size_t h = static_cast<std::size_t>(lp.ranker.hidden_dim);
  if (lp.ranker.w1.size() != h * lp.ranker.input_dim || lp.ranker.b1.size() != h ||
      lp.ranker.w2.size() != h) {
    throw IoError("model file: weight shapes disagree with declared dimensions");
  }
  if (r.expect_key("pruner") == "1") {
    PrunerParams pr;
    pr.input_dim = lp.ranker.input_dim;
    pr.schema_id = lp.ranker.schema_id;
    pr.w = parse_doubles(r.expect_key("pruner_w"), "pruner_w");
    pr.b = std::stod(r.expect_key("pruner_b"));
    pr.keep_weight = std::stod(r.expect_key("keep_weight"));
    if (pr.w.size() != static_cast<std::size_t>(pr.input_dim)) {
      throw IoError("model file: pruner weight shape mismatch");
    }
    lp.pruner = std::move(pr);
  }
  return lp;
}

}  // namespace

std::string write_policy_text(const PolicyArtifact& artifact) {
  std::string out = "retrosearch-model v1\n";
  switch (artifact.kind) {
    case PolicyKind::ranker:
      write_learned(out, artifact.learned);
      break;
    case PolicyKind::maze_expert:
      out += "kind=maze_expert\n";
      break;
    case PolicyKind::bnb_best_bound:
      out += "kind=bnb_best_bound\n";
      break;
    case PolicyKind::mixture: {
      out += "kind=mixture\n";
      out += "components=" + std::to_string(artifact.mixture.components.size()) + "\n";
      write_doubles(out, "weights", artifact.mixture.weights);
      for (std::size_t i = 0; i < artifact.mixture.components.size(); ++i) {
        out += "component " + std::to_string(i) + "\n";
        write_learned(out, artifact.mixture.components[i]);
      }
      break;
    }
  }
  return out;
}

PolicyArtifact parse_policy_text(const std::string& text) {
  LineReader r(text);
  if (!r.next() || r.line != "retrosearch-model v1") {
    throw IoError("model file: bad magic line");
  }
  const std::string kind = r.expect_key("kind");
  PolicyArtifact artifact;
  if (kind == "ranker") {
    artifact.kind = PolicyKind::ranker;
    artifact.learned = parse_learned(r);
  } else if (kind == "maze_expert") {
    artifact.kind = PolicyKind::maze_expert;
  } else if (kind == "bnb_best_bound") {
    artifact.kind = PolicyKind::bnb_best_bound;
  } else if (kind == "mixture") {
    artifact.kind = PolicyKind::mixture;
    const std::size_t count = std::stoul(r.expect_key("components"));
    artifact.mixture.weights = parse_doubles(r.expect_key("weights"), "weights");
    if (artifact.mixture.weights.size() != count) {
      throw IoError("model file: mixture weight count mismatch");
    }
    for (std::size_t i = 0; i < count; ++i) {
      if (!r.next() || r.line != "component " + std::to_string(i)) {
        throw IoError("model file: expected component " + std::to_string(i));
      }
      if (r.expect_key("kind") != "ranker") {
        throw IoError("model file: mixture components must be rankers");
      }
      artifact.mixture.components.push_back(parse_learned(r));
    }
  } else {
    throw IoError("model file: unknown kind '" + kind + "'");
  }
  return artifact;
}

void save_policy(const std::string& path, const PolicyArtifact& artifact) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open model file for writing: " + path);
  const std::string text = write_policy_text(artifact);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("failed writing model file: " + path);
}

PolicyArtifact load_policy(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_policy_text(ss.str());
}

}  // namespace retro
