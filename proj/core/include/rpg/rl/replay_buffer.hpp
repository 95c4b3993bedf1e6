#pragma once

#include <cstddef>
#include <vector>

#include "rpg/linalg.hpp"
#include "rpg/rng.hpp"

namespace rpg::rl {

struct Transition {
  Vector state;
  Vector action;
  double reward = 0.0;
  Vector next_state;
  bool done = false;
};

/// Fixed-capacity ring buffer with FIFO eviction.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return filled_; }
  std::size_t capacity() const { return slots_.size(); }

  /// i-th oldest stored transition.
  const Transition& at(std::size_t i) const;

  /// k uniform draws (with replacement) from the filled region. Throws
  /// EmptyBuffer when nothing has been pushed.
  std::vector<std::size_t> sample_indices(std::size_t k, RngStream& rng) const;
  std::vector<Transition> sample(std::size_t k, RngStream& rng) const;

 private:
  std::vector<Transition> slots_;
  std::size_t next_ = 0;
  std::size_t filled_ = 0;
};

}  // namespace rpg::rl
