#pragma once

#include <cstdint>
#include <string_view>

namespace repflow {

enum class Protocol : std::uint8_t { tcp, dctcp_like };

enum class WindowPhase : std::uint8_t { slow_start, cong_avoid };

struct TransportParams {
  Protocol protocol = Protocol::tcp;
  std::uint32_t initial_window = 12;
  std::uint32_t max_window = 44;
  double dctcp_gain = 1.0 / 16.0;
};

// Sender window of the simplified transport. Slow start adds one packet per
// acked packet until max_window, after which plain TCP holds the window
// fixed. The dctcp_like variant keeps an EWMA of the marked fraction and
// cuts the window by (1 - alpha/2) once per window of data that saw marks,
// then grows additively.
class CongestionWindow {
 public:
  explicit CongestionWindow(const TransportParams& params);

  // `snd_una` and `snd_nxt` are the sender's sequence state after the ack.
  void on_ack(std::uint32_t newly_acked, std::uint32_t newly_marked, std::uint64_t snd_una,
              std::uint64_t snd_nxt);
  void on_timeout();

  // Packets that may be outstanding.
  std::uint32_t window() const noexcept;
  double cwnd() const noexcept { return cwnd_; }
  WindowPhase phase() const noexcept { return phase_; }
  double alpha() const noexcept { return alpha_; }
  std::uint32_t reductions() const noexcept { return reductions_; }

 private:
  TransportParams params_;
  double cwnd_;
  WindowPhase phase_ = WindowPhase::slow_start;

  double alpha_ = 1.0;
  std::uint64_t window_end_ = 0;
  std::uint32_t acked_in_window_ = 0;
  std::uint32_t marked_in_window_ = 0;
  std::uint32_t reductions_ = 0;
};

std::string_view to_string(Protocol p);

}  // namespace repflow
