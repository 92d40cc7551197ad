#pragma once

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "moodnet/errors.hpp"
#include "moodnet/tensor.hpp"

namespace moodnet {

/// Ordered collection of uniquely named tensors. Iteration order is insertion
/// order, which keeps parameter traversal (updates, serialization) stable.
template <typename T>
class NamedTensors {
 public:
  void add(std::string name, Tensor<T> value) {
    if (index_.count(name) != 0) throw StateError("duplicate tensor name: " + name);
    index_.emplace(name, items_.size());
    items_.emplace_back(std::move(name), std::move(value));
  }

  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  Tensor<T>& at(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw StateError("unknown tensor name: " + name);
    return items_[it->second].second;
  }

  const Tensor<T>& at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw StateError("unknown tensor name: " + name);
    return items_[it->second].second;
  }

  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }

  auto begin() { return items_.begin(); }
  auto end() { return items_.end(); }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(items_.size());
    for (const auto& [name, value] : items_) out.push_back(name);
    return out;
  }

  /// Zero-filled clone with the same names and shapes.
  NamedTensors<T> zeros_like() const {
    NamedTensors<T> out;
    for (const auto& [name, value] : items_) out.add(name, Tensor<T>::zeros(value.shape()));
    return out;
  }

  Index total_elements() const {
    Index n = 0;
    for (const auto& [name, value] : items_) n += value.size();
    return n;
  }

 private:
  std::vector<std::pair<std::string, Tensor<T>>> items_;
  std::unordered_map<std::string, std::size_t> index_;
};

namespace detail {

/// Both collections must carry the same names in the same order with matching
/// shapes; used to pair parameters with their gradients or moment buffers.
template <typename T>
void require_congruent(const NamedTensors<T>& a, const NamedTensors<T>& b, const char* what) {
  if (a.size() != b.size()) {
    throw StateError(std::string(what) + ": collections differ in size (" + std::to_string(a.size()) +
                     " vs " + std::to_string(b.size()) + ")");
  }
  auto ia = a.begin();
  auto ib = b.begin();
  for (; ia != a.end(); ++ia, ++ib) {
    if (ia->first != ib->first) {
      throw StateError(std::string(what) + ": name mismatch (" + ia->first + " vs " + ib->first + ")");
    }
    if (ia->second.shape() != ib->second.shape()) {
      throw ShapeError(std::string(what) + ": shape mismatch for " + ia->first + " (" +
                       shape_str(ia->second.shape()) + " vs " + shape_str(ib->second.shape()) + ")");
    }
  }
}

}  // namespace detail

}  // namespace moodnet
