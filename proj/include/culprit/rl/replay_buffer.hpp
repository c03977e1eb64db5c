#pragma once

#include <random>
#include <vector>

namespace culprit::rl {

using Vector = std::vector<double>;

struct Transition {
  Vector state;
  Vector action;  // entries in [-1, 1]
  double reward = 0.0;
  Vector next_state;
  bool done = false;

  friend bool operator==(const Transition&, const Transition&) = default;
};

/// Fixed-capacity ring of transitions; the oldest entry is evicted first.
class ReplayBuffer {
public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);

  std::size_t size() const noexcept { return size_; }
  std::size_t capacity() const noexcept { return capacity_; }
  bool empty() const noexcept { return size_ == 0; }

  /// i = 0 is the oldest stored transition.
  const Transition& operator[](std::size_t i) const;

  /// Uniform sampling with replacement, so a batch may exceed size().
  /// Throws NotReadyError only when the buffer is empty.
  std::vector<Transition> sample(std::size_t batch_size, std::mt19937_64& rng) const;

  /// Indices (oldest = 0) drawn by the same procedure as sample().
  std::vector<std::size_t> sample_indices(std::size_t batch_size, std::mt19937_64& rng) const;

private:
  std::size_t capacity_;
  std::vector<Transition> slots_;
  std::size_t head_ = 0;  // next write position
  std::size_t size_ = 0;
};

}  // namespace culprit::rl
