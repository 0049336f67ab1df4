#include "retrosearch/trace_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "retrosearch/errors.hpp"

namespace retro {
namespace {

std::string expect_kv(std::istream& in, const std::string& key) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("trace file: unexpected end, wanted " + key);
  const auto eq = line.find('=');
  if (eq == std::string::npos || line.substr(0, eq) != key) {
    throw IoError("trace file: expected '" + key + "=...', got '" + line + "'");
  }
  return line.substr(eq + 1);
}

std::uint64_t parse_u64(const std::string& s, const char* what) {
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw IoError(std::string("trace file: bad integer in ") + what + ": '" + s + "'");
  }
  return v;
}

}  // namespace

std::string write_trace_text(const TraceData& data) {
  std::string out = "retrosearch-trace v1\n";
  out += "instance_id=" + data.instance_id + "\n";
  out += "seed=" + std::to_string(data.seed) + "\n";
  out += "policy_tag=" + data.policy_tag + "\n";
  out += "events=" + std::to_string(data.events.size()) + "\n";
  for (const TraceEvent& ev : data.events) {
    out += std::to_string(ev.step);
    out += ' ';
    out += std::to_string(ev.popped);
    if (!ev.children.empty()) {
      out += ' ';
      for (std::size_t i = 0; i < ev.children.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(ev.children[i]);
      }
    }
    out += '\n';
  }
  return out;
}

TraceData parse_trace_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "retrosearch-trace v1") {
    throw IoError("trace file: bad magic line");
  }
  TraceData data;
  data.instance_id = expect_kv(in, "instance_id");
  data.seed = parse_u64(expect_kv(in, "seed"), "seed");
  data.policy_tag = expect_kv(in, "policy_tag");
  const std::uint64_t count = parse_u64(expect_kv(in, "events"), "events");
  data.events.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    if (!std::getline(in, line)) throw IoError("trace file: truncated event list");
    std::istringstream ls(line);
    TraceEvent ev;
    std::string step_tok, pop_tok, child_tok;
    if (!(ls >> step_tok >> pop_tok)) throw IoError("trace file: malformed event '" + line + "'");
    ev.step = parse_u64(step_tok, "event step");
    ev.popped = parse_u64(pop_tok, "event pop");
    if (ls >> child_tok) {
      std::size_t pos = 0;
      while (pos < child_tok.size()) {
        auto comma = child_tok.find(',', pos);
        if (comma == std::string::npos) comma = child_tok.size();
        ev.children.push_back(parse_u64(child_tok.substr(pos, comma - pos), "event child"));
        pos = comma + 1;
      }
    }
    if (ev.step != i) throw IoError("trace file: event steps out of order");
    data.events.push_back(std::move(ev));
  }
  return data;
}

void save_trace(const std::string& path, const TraceData& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open trace file for writing: " + path);
  const std::string text = write_trace_text(data);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("failed writing trace file: " + path);
}

TraceData load_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open trace file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_trace_text(ss.str());
}

}  // namespace retro
