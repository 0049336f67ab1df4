#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "retrosearch/search_tree.hpp"

namespace retro {

/// The serializable part of a trace: the header plus the event log. States,
/// features and scores are not persisted; replay(env, events) reconstructs
/// the tree exactly.
struct TraceData {
  std::string instance_id;
  std::uint64_t seed = 0;
  std::string policy_tag;
  std::vector<TraceEvent> events;
};

/// Line-oriented text format:
///   retrosearch-trace v1
///   instance_id=<id>
///   seed=<u64>
///   policy_tag=<tag>
///   events=<count>
///   <step> <pop_id> [<child_id>,<child_id>,...]
/// Writing is canonical, so write(parse(write(t))) == write(t) byte for byte.
std::string write_trace_text(const TraceData& data);
TraceData parse_trace_text(const std::string& text);

void save_trace(const std::string& path, const TraceData& data);
TraceData load_trace(const std::string& path);

template <class State>
TraceData trace_data(const Trace<State>& trace) {
  return TraceData{trace.instance_id, trace.seed, trace.policy_tag, trace.events};
}

}  // namespace retro
