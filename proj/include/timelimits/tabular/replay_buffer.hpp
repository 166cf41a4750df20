#pragma once

#include <algorithm>
#include <vector>

#include "timelimits/core/errors.hpp"
#include "timelimits/core/random.hpp"

namespace timelimits {

/// Fixed-capacity FIFO store with uniform sampling (with replacement).
template <class T>
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw InvalidInput("replay buffer capacity must be positive");
    items_.reserve(std::min<std::size_t>(capacity_, 1 << 16));
  }

  void push(T item) {
    if (items_.size() < capacity_) {
      items_.push_back(std::move(item));
    } else {
      items_[head_] = std::move(item);
      head_ = (head_ + 1) % capacity_;
    }
  }

  [[nodiscard]] std::size_t size() const { return items_.size(); }
  [[nodiscard]] std::size_t capacity() const { return capacity_; }
  [[nodiscard]] bool empty() const { return items_.empty(); }

  /// Uniformly chosen element. Precondition: not empty.
  const T& sample(Rng& rng) const {
    if (items_.empty()) throw ContractViolation("sampling an empty replay buffer");
    return items_[rng.below(items_.size())];
  }

  /// Contents from oldest to newest.
  [[nodiscard]] std::vector<T> contents() const {
    std::vector<T> out;
    out.reserve(items_.size());
    for (std::size_t i = 0; i < items_.size(); ++i)
      out.push_back(items_[(head_ + i) % items_.size()]);
    return out;
  }

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // oldest element once full
  std::vector<T> items_;
};

}  // namespace timelimits
