#include "repflow/transport.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace repflow {

CongestionWindow::CongestionWindow(const TransportParams& params)
    : params_(params), cwnd_(params.initial_window) {
  if (params.initial_window < 1 || params.initial_window > params.max_window)
    throw std::invalid_argument("initial window must lie in [1, max_window]");
}

void CongestionWindow::on_ack(std::uint32_t newly_acked, std::uint32_t newly_marked,
                              std::uint64_t snd_una, std::uint64_t snd_nxt) {
  const double max_w = params_.max_window;
  if (phase_ == WindowPhase::slow_start) {
    cwnd_ += newly_acked;
    if (cwnd_ >= max_w) {
      cwnd_ = max_w;
      phase_ = WindowPhase::cong_avoid;
    }
  } else if (params_.protocol == Protocol::dctcp_like) {
    cwnd_ = std::min(max_w, cwnd_ + newly_acked / cwnd_);
  }

  if (params_.protocol != Protocol::dctcp_like) return;

  acked_in_window_ += newly_acked;
  marked_in_window_ += newly_marked;
  if (snd_una < window_end_ || acked_in_window_ == 0) return;

  const double fraction = static_cast<double>(marked_in_window_) / acked_in_window_;
  alpha_ = (1.0 - params_.dctcp_gain) * alpha_ + params_.dctcp_gain * fraction;
  if (marked_in_window_ > 0) {
    cwnd_ = std::max(1.0, cwnd_ * (1.0 - alpha_ / 2.0));
    phase_ = WindowPhase::cong_avoid;
    ++reductions_;
  }
  acked_in_window_ = 0;
  marked_in_window_ = 0;
  window_end_ = snd_nxt;
}

void CongestionWindow::on_timeout() {
  cwnd_ = params_.initial_window;
  phase_ = WindowPhase::slow_start;
  acked_in_window_ = 0;
  marked_in_window_ = 0;
  window_end_ = 0;
}

std::uint32_t CongestionWindow::window() const noexcept {
  return std::max<std::uint32_t>(1, static_cast<std::uint32_t>(std::floor(cwnd_)));
}

std::string_view to_string(Protocol p) {
  return p == Protocol::tcp ? "tcp" : "dctcp_like";
}

}  // namespace repflow
