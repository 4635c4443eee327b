#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <numbers>

#include "repflow/analytic.hpp"

using namespace repflow;
using namespace repflow::analytic;

namespace {

std::vector<double> grid() {
  std::vector<double> g;
  for (int i = 1; i < 99; ++i) g.push_back(i / 100.0);
  return g;
}

}  // namespace

TEST_CASE("every formula increases strictly with load") {
  for (const auto& name : builtin_distribution_names()) {
    const auto dist = builtin_distribution(name);
    ModelParams p;
    p.short_byte_fraction = short_flow_byte_fraction(dist, p.large_threshold);
    const auto in = short_flow_integrals(dist, p);
    double prev[8] = {};
    bool first = true;
    for (double rho : grid()) {
      p.load = rho;
      if ((1 + p.short_byte_fraction) * rho >= 1) break;
      const double v[8] = {mean_fct_short(p, in, Replication::off), mean_fct_short(p, in, Replication::on),
                           tail_fct_short(p, in, Replication::off), tail_fct_short(p, in, Replication::on),
                           mean_fct_large(rho, p.short_byte_fraction, Replication::off),
                           mean_fct_large(rho, p.short_byte_fraction, Replication::on),
                           tail_fct_large(p, in, Replication::off), tail_fct_large(p, in, Replication::on)};
      if (!first)
        for (int k = 0; k < 8; ++k) {
          INFO(name, " rho=", rho, " curve=", k);
          CHECK(v[k] > prev[k]);
        }
      std::copy(v, v + 8, prev);
      first = false;
    }
  }
}

TEST_CASE("replication dominates for short flows") {
  const auto dist = builtin_distribution("web_search");
  for (double eps : {0.0, 0.01, 0.05, 0.2}) {
    for (double rho : grid()) {
      ModelParams p;
      p.load = rho;
      p.short_byte_fraction = eps;
      if (!(std::pow(1 + eps, 2) * rho < 1)) continue;
      const auto in = short_flow_integrals(dist, p);
      INFO("eps=", eps, " rho=", rho);
      CHECK(mean_fct_short(p, in, Replication::on) < mean_fct_short(p, in, Replication::off));
      CHECK(tail_fct_short(p, in, Replication::on) < tail_fct_short(p, in, Replication::off));
    }
  }
}

TEST_CASE("replication never helps large flows") {
  for (double rho : grid()) {
    CHECK(mean_fct_large(rho, 0.0, Replication::on) == mean_fct_large(rho, 0.0, Replication::off));
    for (double eps : {0.01, 0.05}) {
      if ((1 + eps) * rho >= 1) continue;
      CHECK(mean_fct_large(rho, eps, Replication::on) > mean_fct_large(rho, eps, Replication::off));
    }
  }
}

TEST_CASE("tail delay is 2 ln 10 times the mean delay") {
  for (double m : {1.0, 12.0, 44.0, 90.0})
    for (double rho : grid())
      CHECK(tail_queueing_delay(rho, m) ==
            doctest::Approx(2 * std::numbers::ln10 * mean_queueing_delay(rho, m)).epsilon(1e-12));
}
