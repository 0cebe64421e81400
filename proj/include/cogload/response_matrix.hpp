#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cogload {

// One observed response, keyed by opaque learner and item identifiers.
struct Response {
  std::string learner_id;
  std::string item_id;
  bool correct = false;
};

// Sparse binary learner x item correctness matrix. Row and column indices
// follow first appearance in the input. Adjacency lists are stored in id
// order, so every reduction over them is independent of input ordering and
// of index assignment; calibration results are bit-identical under input
// permutation because of this.
class ResponseMatrix {
 public:
  struct Entry {
    std::uint32_t index;  // index in the other dimension
    bool correct;
  };

  ResponseMatrix() = default;

  // Builds the matrix, assigning indices by first appearance. Throws
  // InconsistentInputError when a (learner, item) pair repeats.
  static ResponseMatrix from_responses(std::span<const Response> responses);

  // Same, but with the index order fixed by the caller. Entries are
  // (learner index, item index, correct) against the given id vectors.
  struct IndexedEntry {
    std::uint32_t learner;
    std::uint32_t item;
    bool correct;
  };
  static ResponseMatrix from_indexed(std::vector<std::string> learner_ids,
                                     std::vector<std::string> item_ids,
                                     std::span<const IndexedEntry> entries);

  std::size_t n_learners() const { return learner_ids_.size(); }
  std::size_t n_items() const { return item_ids_.size(); }
  std::size_t n_entries() const { return n_entries_; }
  bool empty() const { return n_entries_ == 0; }

  const std::string& learner_id(std::size_t i) const { return learner_ids_[i]; }
  const std::string& item_id(std::size_t j) const { return item_ids_[j]; }
  const std::vector<std::string>& learner_ids() const { return learner_ids_; }
  const std::vector<std::string>& item_ids() const { return item_ids_; }

  std::optional<std::size_t> learner_index(std::string_view id) const;
  std::optional<std::size_t> item_index(std::string_view id) const;

  // Entries of learner i, ordered by item id.
  std::span<const Entry> learner_entries(std::size_t i) const {
    return by_learner_[i];
  }
  // Entries of item j, ordered by learner id.
  std::span<const Entry> item_entries(std::size_t j) const { return by_item_[j]; }

  // Learner indices sorted by id: the canonical order for whole-matrix
  // reductions such as the total log-likelihood.
  const std::vector<std::uint32_t>& learners_in_id_order() const {
    return learner_id_order_;
  }

 private:
  void build_adjacency(std::span<const IndexedEntry> entries);

  std::vector<std::string> learner_ids_;
  std::vector<std::string> item_ids_;
  std::unordered_map<std::string, std::uint32_t> learner_lookup_;
  std::unordered_map<std::string, std::uint32_t> item_lookup_;
  std::vector<std::vector<Entry>> by_learner_;
  std::vector<std::vector<Entry>> by_item_;
  std::vector<std::uint32_t> learner_id_order_;
  std::size_t n_entries_ = 0;
};

}  // namespace cogload
