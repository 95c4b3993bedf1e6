#include "rpg/rl/replay_buffer.hpp"

#include <utility>

#include "rpg/error.hpp"

namespace rpg::rl {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : slots_(capacity) {
  if (capacity == 0) throw BadDimensions("replay buffer: capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
  slots_[next_] = std::move(t);
  next_ = (next_ + 1) % slots_.size();
  if (filled_ < slots_.size()) ++filled_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= filled_) throw BadDimensions("replay buffer: index out of range");
  const std::size_t oldest = filled_ < slots_.size() ? 0 : next_;
  return slots_[(oldest + i) % slots_.size()];
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t k, RngStream& rng) const {
  if (filled_ == 0) throw EmptyBuffer("replay buffer: cannot sample from an empty buffer");
  std::vector<std::size_t> idx(k);
  for (auto& i : idx) i = rng.index(filled_);
  return idx;
}

std::vector<Transition> ReplayBuffer::sample(std::size_t k, RngStream& rng) const {
  std::vector<Transition> out;
  out.reserve(k);
  for (std::size_t i : sample_indices(k, rng)) out.push_back(at(i));
  return out;
}

}  // namespace rpg::rl
