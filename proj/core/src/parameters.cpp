#include "sfgnn/parameters.hpp"

#include "sfgnn/error.hpp"

#include <algorithm>

namespace sfgnn {

std::size_t ParameterSet::add(std::string name, Matrix value, bool regularized) {
  require(!contains(name), ErrorCode::kParameter, "duplicate tensor name '" + name + "'");
  entries_.push_back({std::move(name), std::move(value), regularized});
  return entries_.size() - 1;
}

std::size_t ParameterSet::scalar_count() const noexcept {
  std::size_t n = 0;
  for (const auto& e : entries_) n += static_cast<std::size_t>(e.value.size());
  return n;
}

std::size_t ParameterSet::index_of(std::string_view name) const {
  const auto it = std::find_if(entries_.begin(), entries_.end(),
                               [&](const Entry& e) { return e.name == name; });
  if (it == entries_.end()) raise(ErrorCode::kLookup, "no tensor named '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - entries_.begin());
}

bool ParameterSet::contains(std::string_view name) const noexcept {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const Entry& e) { return e.name == name; });
}

Matrix& ParameterSet::at(std::string_view name) { return entries_[index_of(name)].value; }

const Matrix& ParameterSet::at(std::string_view name) const {
  return entries_[index_of(name)].value;
}

ParameterSet ParameterSet::zeros_like() const {
  ParameterSet out;
  out.entries_.reserve(entries_.size());
  for (const auto& e : entries_) {
    out.entries_.push_back({e.name, Matrix::Zero(e.value.rows(), e.value.cols()), e.regularized});
  }
  return out;
}

bool ParameterSet::same_layout(const ParameterSet& other) const noexcept {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& a = entries_[i].value;
    const auto& b = other.entries_[i].value;
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  }
  return true;
}

bool ParameterSet::all_finite() const noexcept {
  return std::all_of(entries_.begin(), entries_.end(),
                     [](const Entry& e) { return e.value.allFinite(); });
}

void ParameterSet::set_zero() {
  for (auto& e : entries_) e.value.setZero();
}

void ParameterSet::axpy(double scale, const ParameterSet& other) {
  require(same_layout(other), ErrorCode::kShape, "parameter layouts differ");
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    entries_[i].value += scale * other.entries_[i].value;
  }
}

}  // namespace sfgnn
