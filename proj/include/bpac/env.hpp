#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "bpac/core.hpp"
#include "bpac/rng.hpp"

namespace bpac {

struct Feedback {
  bool correct = false;
};

/// One closed round as seen by the learner. The true label is never stored.
struct TranscriptEntry {
  std::size_t x = 0;
  Label prediction = 0;
  bool correct = false;
};

/// Simulated bandit environment. Each round draws (x, y) from the instance,
/// reveals only x, and answers a single prediction with the correctness bit.
/// It is the only sample meter: every opened round counts once.
///
/// Holds a reference to `instance`, which must outlive the environment.
class BanditEnv {
 public:
  BanditEnv(const Instance& instance, std::uint64_t seed);

  /// Draws a hidden pair and returns its example index.
  /// Throws ProtocolError when a round is already open.
  std::size_t open_round();

  /// Closes the open round. Throws ProtocolError without an open round and
  /// ValidationError for a label outside [0, K).
  Feedback predict(Label prediction);

  std::uint64_t sample_budget() const { return samples_drawn_; }
  bool round_open() const { return pending_.has_value(); }
  std::size_t num_labels() const { return instance_.num_labels(); }
  std::size_t num_examples() const { return instance_.num_examples(); }

  void record_transcript(bool on) { recording_ = on; }
  const std::vector<TranscriptEntry>& transcript() const { return transcript_; }

 private:
  struct Hidden {
    std::size_t x;
    Label y;
  };

  const Instance& instance_;
  Rng rng_;
  std::vector<double> cdf_;
  std::uint64_t samples_drawn_ = 0;
  std::optional<Hidden> pending_;
  bool recording_ = false;
  std::vector<TranscriptEntry> transcript_;
};

}  // namespace bpac
