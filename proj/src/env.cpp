#include "bpac/env.hpp"

#include <algorithm>

#include "bpac/errors.hpp"

namespace bpac {

BanditEnv::BanditEnv(const Instance& instance, std::uint64_t seed)
    : instance_(instance), rng_(seed, Stream::kEnv) {
  require_valid(instance_);
  cdf_.reserve(instance_.support.size());
  double acc = 0.0;
  for (const auto& s : instance_.support) {
    acc += s.p;
    cdf_.push_back(acc);
  }
}

std::size_t BanditEnv::open_round() {
  if (pending_) throw ProtocolError("open_round called while a round is already open");
  const double u = rng_.uniform() * cdf_.back();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const auto i = std::min<std::size_t>(it - cdf_.begin(), cdf_.size() - 1);
  const auto& s = instance_.support[i];
  pending_ = Hidden{s.x, s.y};
  ++samples_drawn_;
  return s.x;
}

Feedback BanditEnv::predict(Label prediction) {
  if (!pending_) throw ProtocolError("predict called without an open round");
  if (prediction >= instance_.num_labels()) {
    throw ValidationError("predicted label " + std::to_string(prediction) + " out of range");
  }
  const Feedback feedback{prediction == pending_->y};
  if (recording_) transcript_.push_back({pending_->x, prediction, feedback.correct});
  pending_.reset();
  return feedback;
}

}  // namespace bpac
