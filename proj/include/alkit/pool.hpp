#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "alkit/error.hpp"
#include "alkit/matrix.hpp"

namespace alkit {

using EntryId = std::size_t;
using ClassId = int;

struct UpdateEvent {
  EntryId entry_id;
  ClassId label;
};

using UpdateCallback = std::function<void(const UpdateEvent&)>;
using CallbackHandle = std::size_t;

struct LabeledEntry {
  EntryId id;
  std::span<const double> features;
  ClassId label;
};

struct UnlabeledEntry {
  EntryId id;
  std::span<const double> features;
};

// The example store: labeled and unlabeled examples addressed by their
// position. Labels only ever go from absent to present. Every successful
// update is broadcast to the registered callbacks in registration order.
//
// Callbacks must not call update() themselves; doing so raises
// ReentrantUpdateError and leaves the nested update unapplied.
class Pool {
 public:
  Pool(Matrix features, std::vector<std::optional<ClassId>> labels)
      : features_(std::move(features)), labels_(std::move(labels)) {
    if (features_.rows() == 0) throw DimensionError("pool needs at least one example");
    if (features_.cols() == 0) throw DimensionError("pool needs at least one feature");
    if (labels_.size() != features_.rows()) {
      throw DimensionError("features/labels length mismatch: " +
                           std::to_string(features_.rows()) + " vs " +
                           std::to_string(labels_.size()));
    }
    for (const auto& l : labels_) {
      if (l && *l < 0) throw DomainError("class ids must be non-negative");
      if (l) ++labeled_;
    }
  }

  Pool(const std::vector<std::vector<double>>& features,
       std::vector<std::optional<ClassId>> labels)
      : Pool(Matrix::from_rows(features), std::move(labels)) {}

  // Callbacks capture observer addresses, so pools are never copied.
  Pool(const Pool&) = delete;
  Pool& operator=(const Pool&) = delete;
  Pool(Pool&&) = default;
  Pool& operator=(Pool&&) = default;

  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t dimensionality() const noexcept { return features_.cols(); }
  std::size_t labeled_count() const noexcept { return labeled_; }
  std::size_t unlabeled_count() const noexcept { return size() - labeled_; }

  std::span<const double> features(EntryId id) const {
    check_id(id);
    return features_.row(id);
  }
  const Matrix& feature_matrix() const noexcept { return features_; }

  std::optional<ClassId> label(EntryId id) const {
    check_id(id);
    return labels_[id];
  }
  bool is_labeled(EntryId id) const { return label(id).has_value(); }

  void update(EntryId id, ClassId label) {
    if (dispatching_) {
      throw ReentrantUpdateError("update() called from inside an update callback");
    }
    check_id(id);
    if (labels_[id]) {
      throw AlreadyLabeledError("entry " + std::to_string(id) + " is already labeled");
    }
    if (label < 0) throw DomainError("class ids must be non-negative");
    labels_[id] = label;
    ++labeled_;

    const UpdateEvent event{id, label};
    dispatching_ = true;
    try {
      // A callback may register further callbacks; those see later events
      // only. Each callback is copied so growth cannot invalidate it mid-call.
      const std::size_t n = callbacks_.size();
      for (std::size_t i = 0; i < n; ++i) {
        if (const auto cb = callbacks_[i].second) cb(event);
      }
    } catch (...) {
      dispatching_ = false;
      throw;
    }
    dispatching_ = false;
  }

  CallbackHandle on_update(UpdateCallback callback) {
    callbacks_.emplace_back(next_handle_, std::move(callback));
    return next_handle_++;
  }

  void remove_callback(CallbackHandle handle) {
    for (auto& [h, cb] : callbacks_) {
      if (h == handle) cb = nullptr;
    }
  }

  std::vector<LabeledEntry> labeled_view() const {
    std::vector<LabeledEntry> out;
    out.reserve(labeled_);
    for (EntryId i = 0; i < size(); ++i) {
      if (labels_[i]) out.push_back({i, features_.row(i), *labels_[i]});
    }
    return out;
  }

  std::vector<UnlabeledEntry> unlabeled_view() const {
    std::vector<UnlabeledEntry> out;
    out.reserve(unlabeled_count());
    for (EntryId i = 0; i < size(); ++i) {
      if (!labels_[i]) out.push_back({i, features_.row(i)});
    }
    return out;
  }

  std::vector<EntryId> unlabeled_ids() const {
    std::vector<EntryId> out;
    out.reserve(unlabeled_count());
    for (EntryId i = 0; i < size(); ++i) {
      if (!labels_[i]) out.push_back(i);
    }
    return out;
  }

  // Labeled examples as a (matrix, labels) pair, in id order.
  std::pair<Matrix, std::vector<ClassId>> labeled_data() const {
    Matrix x(labeled_, dimensionality());
    std::vector<ClassId> y;
    y.reserve(labeled_);
    std::size_t r = 0;
    for (EntryId i = 0; i < size(); ++i) {
      if (!labels_[i]) continue;
      std::copy(features_.row(i).begin(), features_.row(i).end(), x.row_mut(r++).begin());
      y.push_back(*labels_[i]);
    }
    return {std::move(x), std::move(y)};
  }

 private:
  void check_id(EntryId id) const {
    if (id >= size()) {
      throw NotFoundError("entry " + std::to_string(id) + " not in pool of size " +
                          std::to_string(size()));
    }
  }

  Matrix features_;
  std::vector<std::optional<ClassId>> labels_;
  std::size_t labeled_ = 0;
  std::vector<std::pair<CallbackHandle, UpdateCallback>> callbacks_;
  CallbackHandle next_handle_ = 0;
  bool dispatching_ = false;
};

}  // namespace alkit
