#include "detrl/replay.hpp"

#include <utility>

namespace detrl {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("capacity must be >= 1");
  storage_.reserve(capacity);
}

void ReplayBuffer::push(Transition t) {
  if (size_ < capacity_) {
    storage_.push_back(std::move(t));
    ++size_;
  } else {
    storage_[write_cursor_] = std::move(t);
  }
  write_cursor_ = (write_cursor_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t k) const {
  if (k >= size_) throw std::out_of_range("ReplayBuffer::at");
  if (size_ < capacity_) return storage_[k];
  return storage_[(write_cursor_ + k) % capacity_];
}

std::vector<const Transition*> ReplayBuffer::sample(
    std::size_t batch_size, RandomStream& minibatch_stream,
    std::vector<std::uint64_t>* indices_out) const {
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (size_ < batch_size)
    throw ReplayNotReady("replay buffer holds " + std::to_string(size_) +
                         " < batch of " + std::to_string(batch_size));
  std::vector<const Transition*> out;
  out.reserve(batch_size);
  if (indices_out) indices_out->clear();
  for (std::size_t b = 0; b < batch_size; ++b) {
    const std::uint64_t idx = minibatch_stream.next_int(size_);
    if (indices_out) indices_out->push_back(idx);
    out.push_back(&storage_[idx]);
  }
  return out;
}

}  // namespace detrl
