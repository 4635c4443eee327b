#include "repflow/workload.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace repflow {

namespace {

// Keep in sync with data/workloads/*.cdf; a unit test compares them.
const std::vector<SizeAtom> kWebSearch = {
    {2, 0.08},   {5, 0.16},   {10, 0.26},  {20, 0.36},   {35, 0.46},   {50, 0.57},
    {68, 0.69},  {100, 0.71}, {900, 0.80}, {1300, 0.88}, {2000, 0.95}, {3000, 1.0},
};

const std::vector<SizeAtom> kDataMining = {
    {1, 0.40},    {2, 0.55},     {4, 0.70},     {6, 0.81},       {20, 0.83},    {45, 0.87},
    {68, 0.952},  {300, 0.956},  {3000, 0.964}, {24000, 0.984},  {30000, 1.0},
};

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

FlowSizeDistribution::FlowSizeDistribution(std::string name, std::vector<SizeAtom> atoms)
    : name_(std::move(name)), atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw std::invalid_argument("distribution '" + name_ + "' has no atoms");
  double prev_cum = 0.0;
  std::uint32_t prev_size = 0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    const auto& a = atoms_[i];
    if (a.packets < 1)
      throw std::invalid_argument("distribution '" + name_ + "': sizes must be >= 1 packet");
    if (i > 0 && a.packets <= prev_size)
      throw std::invalid_argument("distribution '" + name_ + "': sizes must be strictly increasing");
    if (!(a.cumulative > prev_cum))
      throw std::invalid_argument("distribution '" + name_ +
                                  "': cumulative probabilities must be strictly increasing");
    prev_cum = a.cumulative;
    prev_size = a.packets;
  }
  if (atoms_.back().cumulative != 1.0)
    throw std::invalid_argument("distribution '" + name_ + "': final cumulative probability must be 1");

  for (std::size_t i = 0; i < atoms_.size(); ++i) mean_ += atoms_[i].packets * probability(i);
}

double FlowSizeDistribution::probability(std::size_t i) const {
  const double lower = i == 0 ? 0.0 : atoms_.at(i - 1).cumulative;
  return atoms_.at(i).cumulative - lower;
}

std::uint32_t FlowSizeDistribution::quantile(double u) const {
  auto it = std::upper_bound(atoms_.begin(), atoms_.end(), u,
                             [](double x, const SizeAtom& a) { return x < a.cumulative; });
  if (it == atoms_.end()) --it;
  return it->packets;
}

FlowSizeDistribution FlowSizeDistribution::parse(std::istream& in, std::string name) {
  std::vector<SizeAtom> atoms;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    std::istringstream fields{std::string(body)};
    std::string size_tok, cum_tok, extra;
    fields >> size_tok >> cum_tok;
    if (cum_tok.empty() || (fields >> extra))
      throw std::invalid_argument(name + ":" + std::to_string(lineno) +
                                  ": expected 'size_packets cumulative_probability'");
    SizeAtom atom;
    auto r1 = std::from_chars(size_tok.data(), size_tok.data() + size_tok.size(), atom.packets);
    auto r2 = std::from_chars(cum_tok.data(), cum_tok.data() + cum_tok.size(), atom.cumulative);
    if (r1.ec != std::errc{} || r1.ptr != size_tok.data() + size_tok.size() ||
        r2.ec != std::errc{} || r2.ptr != cum_tok.data() + cum_tok.size())
      throw std::invalid_argument(name + ":" + std::to_string(lineno) + ": malformed number");
    atoms.push_back(atom);
  }
  return FlowSizeDistribution(std::move(name), std::move(atoms));
}

FlowSizeDistribution FlowSizeDistribution::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open distribution file '" + path + "'");
  return parse(in, path);
}

void FlowSizeDistribution::write(std::ostream& out) const {
  out << "# " << name_ << "\n# size_packets cumulative_probability\n";
  for (const auto& a : atoms_) out << a.packets << ' ' << format_double(a.cumulative) << '\n';
}

void FlowSizeDistribution::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write distribution file '" + path + "'");
  write(out);
}

FlowSizeDistribution builtin_distribution(std::string_view name) {
  if (name == "web_search") return FlowSizeDistribution("web_search", kWebSearch);
  if (name == "data_mining") return FlowSizeDistribution("data_mining", kDataMining);
  throw std::invalid_argument("unknown workload '" + std::string(name) + "'");
}

std::vector<std::string> builtin_distribution_names() { return {"web_search", "data_mining"}; }

FlowSizeDistribution resolve_distribution(std::string_view name_or_path) {
  for (const auto& n : builtin_distribution_names())
    if (n == name_or_path) return builtin_distribution(n);
  return FlowSizeDistribution::load(std::string(name_or_path));
}

std::uint32_t sample_flow_size(const FlowSizeDistribution& dist, Rng& rng) {
  return dist.quantile(rng.uniform());
}

double TrafficSpec::arrival_rate() const {
  return load * link_capacity_pps / dist->mean();
}

void TrafficSpec::validate() const {
  if (!dist) throw std::invalid_argument("traffic spec has no distribution");
  if (!(load > 0.0 && load < 1.0)) throw std::invalid_argument("load must lie in (0, 1)");
  if (!(link_capacity_pps > 0.0)) throw std::invalid_argument("link capacity must be positive");
}

double exponential_variate(double rate, Rng& rng) {
  return -std::log1p(-rng.uniform()) / rate;
}

double next_interarrival(const TrafficSpec& spec, Rng& rng) {
  return exponential_variate(spec.arrival_rate(), rng);
}

}  // namespace repflow
