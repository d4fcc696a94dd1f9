#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "detrl/rng.hpp"

namespace detrl {

struct Transition {
  std::vector<float> state;
  int action = 0;
  float reward = 0.0f;
  std::vector<float> next_state;
  bool terminal = false;
};

// Raised by sample() while the buffer is still warming up.
class ReplayNotReady : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Fixed-capacity ring of the last N transitions. Contents are a pure
// function of the pushed sequence; sampling draws indices i.i.d. uniform
// with replacement from the minibatch stream and never mutates the buffer.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);

  // B transitions in draw order, duplicates preserved. Optionally reports
  // the raw index sequence (used by draw-alignment tests).
  std::vector<const Transition*> sample(
      std::size_t batch_size, RandomStream& minibatch_stream,
      std::vector<std::uint64_t>* indices_out = nullptr) const;

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }

  // k-th oldest transition, k in [0, size).
  const Transition& at(std::size_t k) const;

 private:
  std::size_t capacity_;
  std::vector<Transition> storage_;
  std::size_t write_cursor_ = 0;
  std::size_t size_ = 0;
};

}  // namespace detrl
