#include "repflow/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "repflow/workload.hpp"

namespace repflow {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expect) {
  throw std::invalid_argument("field '" + std::string(key) + "': invalid value '" +
                              std::string(value) + "' (expected " + std::string(expect) + ")");
}

double parse_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out))
    bad_value(key, v, "a number");
  return out;
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view v) {
  Int out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) bad_value(key, v, "a non-negative integer");
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "off" || v == "0" || v == "no") return false;
  bad_value(key, v, "on|off");
}

std::string format(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

// Unit-converted values, rounded so that 50e-6 s prints as 50 us.
std::string format_scaled(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 12);
  return std::string(buf, end);
}

struct KeyInfo {
  std::string_view section;
  std::string_view key;
};

constexpr KeyInfo kKeys[] = {
    {"topology", "topology"},         {"topology", "pods"},
    {"topology", "link_mbps"},        {"topology", "link_delay_us"},
    {"topology", "buffer_pkts"},      {"topology", "host_link_mbps"},
    {"traffic", "workload"},          {"traffic", "load"},
    {"traffic", "pattern"},           {"traffic", "toy_large_flow"},
    {"traffic", "toy_short_size"},    {"traffic", "toy_short_interval_ms"},
    {"transport", "protocol"},        {"transport", "replication"},
    {"transport", "short_flow_threshold"}, {"transport", "initial_window"},
    {"transport", "max_window"},      {"transport", "ecn_threshold"},
    {"transport", "rto_ms"},          {"run", "duration"},
    {"run", "drain_timeout"},         {"run", "seed"},
};

std::string_view section_of(std::string_view key) {
  for (const auto& k : kKeys)
    if (k.key == key) return k.section;
  return {};
}

}  // namespace

void ScenarioConfig::set(std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "topology") {
    if (value == "fat_tree") topology = TopologyKind::fat_tree;
    else if (value == "toy_fig3") topology = TopologyKind::toy_fig3;
    else if (value == "two_host") topology = TopologyKind::two_host;
    else bad_value(key, value, "fat_tree|toy_fig3|two_host");
  } else if (key == "pods") {
    pods = parse_int<unsigned>(key, value);
  } else if (key == "link_mbps") {
    links.link_mbps = parse_double(key, value);
  } else if (key == "link_delay_us") {
    links.delay_s = parse_double(key, value) * 1e-6;
  } else if (key == "buffer_pkts") {
    links.buffer_pkts = value == "unlimited" ? kUnlimitedBuffer : parse_int<std::uint32_t>(key, value);
  } else if (key == "host_link_mbps") {
    if (value == "same" || value.empty()) links.host_link_mbps.reset();
    else links.host_link_mbps = parse_double(key, value);
  } else if (key == "workload") {
    workload = std::string(value);
  } else if (key == "load") {
    load = parse_double(key, value);
  } else if (key == "pattern") {
    if (value == "random_pairs") pattern = TrafficPattern::random_pairs;
    else if (value == "toy_fig3") pattern = TrafficPattern::toy_fig3;
    else if (value == "scripted") pattern = TrafficPattern::scripted;
    else bad_value(key, value, "random_pairs|toy_fig3|scripted");
  } else if (key == "toy_large_flow") {
    toy_large_flow = parse_bool(key, value);
  } else if (key == "toy_short_size") {
    toy_short_size = parse_int<std::uint32_t>(key, value);
  } else if (key == "toy_short_interval_ms") {
    toy_short_interval_s = parse_double(key, value) * 1e-3;
  } else if (key == "protocol") {
    if (value == "tcp") protocol = Protocol::tcp;
    else if (value == "dctcp_like") protocol = Protocol::dctcp_like;
    else bad_value(key, value, "tcp|dctcp_like");
  } else if (key == "replication") {
    if (value == "off") replication = ReplicationMode::off;
    else if (value == "short_flows" || value == "on") replication = ReplicationMode::short_flows;
    else bad_value(key, value, "off|short_flows");
  } else if (key == "short_flow_threshold") {
    short_flow_threshold = parse_int<std::uint32_t>(key, value);
  } else if (key == "initial_window") {
    initial_window = parse_int<std::uint32_t>(key, value);
  } else if (key == "max_window") {
    max_window = parse_int<std::uint32_t>(key, value);
  } else if (key == "ecn_threshold") {
    ecn_threshold = value == "auto" ? 0 : parse_int<std::uint32_t>(key, value);
  } else if (key == "rto_ms") {
    rto_s = value == "auto" ? 0.0 : parse_double(key, value) * 1e-3;
  } else if (key == "duration") {
    duration_s = parse_double(key, value);
  } else if (key == "drain_timeout") {
    drain_timeout_s = parse_double(key, value);
  } else if (key == "seed") {
    seed = parse_int<std::uint64_t>(key, value);
  } else {
    throw std::invalid_argument("unknown field '" + std::string(key) + "'");
  }
}

std::uint32_t ScenarioConfig::effective_ecn_threshold() const {
  if (ecn_threshold != 0) return ecn_threshold;
  if (links.buffer_pkts == kUnlimitedBuffer) return kUnlimitedBuffer;
  return std::max<std::uint32_t>(1, (links.buffer_pkts * 5 + 99) / 100);
}

TransportParams ScenarioConfig::transport() const {
  TransportParams p;
  p.protocol = protocol;
  p.initial_window = initial_window;
  p.max_window = max_window;
  return p;
}

void ScenarioConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("scenario: " + what); };
  if (topology == TopologyKind::fat_tree && (pods < 2 || pods % 2 != 0))
    fail("field 'pods' must be even and >= 2");
  if (!(links.link_mbps > 0.0)) fail("field 'link_mbps' must be positive");
  if (links.host_link_mbps && !(*links.host_link_mbps > 0.0))
    fail("field 'host_link_mbps' must be positive");
  if (!(links.delay_s >= 0.0)) fail("field 'link_delay_us' must be non-negative");
  if (links.buffer_pkts < 1) fail("field 'buffer_pkts' must be >= 1");
  if (pattern == TrafficPattern::random_pairs && !(load > 0.0 && load < 1.0))
    fail("field 'load' must lie in (0, 1)");
  if (pattern == TrafficPattern::toy_fig3 && topology != TopologyKind::toy_fig3)
    fail("pattern toy_fig3 requires topology toy_fig3");
  if (pattern == TrafficPattern::toy_fig3 && (toy_short_size < 1 || !(toy_short_interval_s > 0.0)))
    fail("toy flow size and interval must be positive");
  if (initial_window < 1 || initial_window > max_window)
    fail("initial_window must lie in [1, max_window]");
  if (short_flow_threshold < 1) fail("field 'short_flow_threshold' must be >= 1");
  if (links.buffer_pkts != kUnlimitedBuffer && effective_ecn_threshold() >= links.buffer_pkts)
    fail("ecn_threshold must be below buffer_pkts");
  if (!(rto_s >= 0.0)) fail("field 'rto_ms' must be non-negative");
  if (!(duration_s >= 0.0)) fail("field 'duration' must be non-negative");
  if (!(drain_timeout_s >= 0.0)) fail("field 'drain_timeout' must be non-negative");
}

double effective_rto(const ScenarioConfig& config, double base_rtt_s, double full_queues_s) {
  if (config.rto_s > 0.0) return config.rto_s;
  return std::max(4.0 * base_rtt_s, full_queues_s);
}

ScenarioConfig preset(std::string_view name) {
  ScenarioConfig c;
  if (name == "desk-4pod") {
    c.duration_s = 5.0;
    return c;
  }
  if (name == "paper-16pod") {
    c.pods = 16;
    c.links.link_mbps = 1000.0;
    c.links.delay_s = 2.5e-6;
    c.duration_s = 0.5;
    return c;
  }
  if (name == "toy-fig3") {
    c.topology = TopologyKind::toy_fig3;
    c.pattern = TrafficPattern::toy_fig3;
    c.links.link_mbps = 50.0;
    c.links.host_link_mbps = 500.0;
    c.links.delay_s = 50e-6;
    c.max_window = 90;
    c.duration_s = 10.0;
    return c;
  }
  throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
}

std::vector<std::string> preset_names() { return {"toy-fig3", "desk-4pod", "paper-16pod"}; }

ScenarioConfig parse_scenario(std::istream& in, std::string_view source, ScenarioConfig base) {
  std::string line;
  std::string section;
  int lineno = 0;
  auto where = [&] { return std::string(source) + ":" + std::to_string(lineno) + ": "; };
  while (std::getline(in, line)) {
    ++lineno;
    auto body = trim(line);
    if (const auto hash = body.find('#'); hash != std::string_view::npos) body = trim(body.substr(0, hash));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') throw std::invalid_argument(where() + "unterminated section header");
      section = std::string(trim(body.substr(1, body.size() - 2)));
      if (section != "topology" && section != "traffic" && section != "transport" && section != "run")
        throw std::invalid_argument(where() + "unknown section '" + section + "'");
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw std::invalid_argument(where() + "expected 'key = value'");
    const auto key = trim(body.substr(0, eq));
    const auto value = trim(body.substr(eq + 1));
    if (key == "preset") {
      try {
        base = preset(value);
      } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(where() + "field 'preset': " + e.what());
      }
      continue;
    }
    const auto expected = section_of(key);
    if (expected.empty()) throw std::invalid_argument(where() + "unknown field '" + std::string(key) + "'");
    if (!section.empty() && section != expected)
      throw std::invalid_argument(where() + "field '" + std::string(key) + "' belongs in [" +
                                  std::string(expected) + "], not [" + section + "]");
    try {
      base.set(key, value);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(where() + e.what());
    }
  }
  try {
    base.validate();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string(source) + ": " + e.what());
  }
  return base;
}

ScenarioConfig load_scenario(const std::string& path, ScenarioConfig base) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open scenario file '" + path + "'");
  return parse_scenario(in, path, std::move(base));
}

void write_scenario(std::ostream& out, const ScenarioConfig& c) {
  out << "[topology]\n"
      << "topology = " << to_string(c.topology) << '\n'
      << "pods = " << c.pods << '\n'
      << "link_mbps = " << format(c.links.link_mbps) << '\n'
      << "link_delay_us = " << format_scaled(c.links.delay_s * 1e6) << '\n'
      << "buffer_pkts = "
      << (c.links.buffer_pkts == kUnlimitedBuffer ? std::string("unlimited")
                                                  : std::to_string(c.links.buffer_pkts))
      << '\n'
      << "host_link_mbps = " << (c.links.host_link_mbps ? format(*c.links.host_link_mbps) : "same")
      << "\n\n[traffic]\n"
      << "workload = " << c.workload << '\n'
      << "load = " << format(c.load) << '\n'
      << "pattern = " << to_string(c.pattern) << '\n'
      << "toy_large_flow = " << (c.toy_large_flow ? "on" : "off") << '\n'
      << "toy_short_size = " << c.toy_short_size << '\n'
      << "toy_short_interval_ms = " << format_scaled(c.toy_short_interval_s * 1e3) << "\n\n[transport]\n"
      << "protocol = " << to_string(c.protocol) << '\n'
      << "replication = " << to_string(c.replication) << '\n'
      << "short_flow_threshold = " << c.short_flow_threshold << '\n'
      << "initial_window = " << c.initial_window << '\n'
      << "max_window = " << c.max_window << '\n'
      << "ecn_threshold = " << (c.ecn_threshold == 0 ? std::string("auto") : std::to_string(c.ecn_threshold))
      << '\n'
      << "rto_ms = " << (c.rto_s == 0.0 ? std::string("auto") : format_scaled(c.rto_s * 1e3)) << "\n\n[run]\n"
      << "duration = " << format(c.duration_s) << '\n'
      << "drain_timeout = " << format(c.drain_timeout_s) << '\n'
      << "seed = " << c.seed << '\n';
}

std::string_view to_string(TopologyKind k) {
  switch (k) {
    case TopologyKind::fat_tree: return "fat_tree";
    case TopologyKind::toy_fig3: return "toy_fig3";
    case TopologyKind::two_host: return "two_host";
  }
  return "?";
}

std::string_view to_string(ReplicationMode m) {
  return m == ReplicationMode::off ? "off" : "short_flows";
}

std::string_view to_string(TrafficPattern p) {
  switch (p) {
    case TrafficPattern::random_pairs: return "random_pairs";
    case TrafficPattern::toy_fig3: return "toy_fig3";
    case TrafficPattern::scripted: return "scripted";
  }
  return "?";
}

}  // namespace repflow
