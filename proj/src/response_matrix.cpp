#include "cogload/response_matrix.hpp"

#include <algorithm>
#include <numeric>

#include "cogload/errors.hpp"

namespace cogload {

ResponseMatrix ResponseMatrix::from_responses(std::span<const Response> responses) {
  ResponseMatrix m;
  std::vector<IndexedEntry> entries;
  entries.reserve(responses.size());
  for (const Response& r : responses) {
    auto [lit, lnew] = m.learner_lookup_.try_emplace(
        r.learner_id, static_cast<std::uint32_t>(m.learner_ids_.size()));
    if (lnew) m.learner_ids_.push_back(r.learner_id);
    auto [iit, inew] = m.item_lookup_.try_emplace(
        r.item_id, static_cast<std::uint32_t>(m.item_ids_.size()));
    if (inew) m.item_ids_.push_back(r.item_id);
    entries.push_back({lit->second, iit->second, r.correct});
  }
  m.build_adjacency(entries);
  return m;
}

ResponseMatrix ResponseMatrix::from_indexed(std::vector<std::string> learner_ids,
                                            std::vector<std::string> item_ids,
                                            std::span<const IndexedEntry> entries) {
  ResponseMatrix m;
  m.learner_ids_ = std::move(learner_ids);
  m.item_ids_ = std::move(item_ids);
  for (std::uint32_t i = 0; i < m.learner_ids_.size(); ++i) {
    m.learner_lookup_.emplace(m.learner_ids_[i], i);
  }
  for (std::uint32_t j = 0; j < m.item_ids_.size(); ++j) {
    m.item_lookup_.emplace(m.item_ids_[j], j);
  }
  m.build_adjacency(entries);
  return m;
}

void ResponseMatrix::build_adjacency(std::span<const IndexedEntry> entries) {
  by_learner_.assign(learner_ids_.size(), {});
  by_item_.assign(item_ids_.size(), {});
  for (const IndexedEntry& e : entries) {
    by_learner_[e.learner].push_back({e.item, e.correct});
    by_item_[e.item].push_back({e.learner, e.correct});
  }
  for (std::size_t i = 0; i < by_learner_.size(); ++i) {
    auto& row = by_learner_[i];
    std::sort(row.begin(), row.end(), [this](const Entry& a, const Entry& b) {
      return item_ids_[a.index] < item_ids_[b.index];
    });
    for (std::size_t k = 1; k < row.size(); ++k) {
      if (row[k].index == row[k - 1].index) {
        throw InconsistentInputError("duplicate response for learner '" +
                                     learner_ids_[i] + "' and item '" +
                                     item_ids_[row[k].index] + "'");
      }
    }
  }
  for (auto& col : by_item_) {
    std::sort(col.begin(), col.end(), [this](const Entry& a, const Entry& b) {
      return learner_ids_[a.index] < learner_ids_[b.index];
    });
  }
  learner_id_order_.resize(learner_ids_.size());
  std::iota(learner_id_order_.begin(), learner_id_order_.end(), 0u);
  std::sort(learner_id_order_.begin(), learner_id_order_.end(),
            [this](std::uint32_t a, std::uint32_t b) {
              return learner_ids_[a] < learner_ids_[b];
            });
  n_entries_ = entries.size();
}

std::optional<std::size_t> ResponseMatrix::learner_index(std::string_view id) const {
  auto it = learner_lookup_.find(std::string(id));
  if (it == learner_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> ResponseMatrix::item_index(std::string_view id) const {
  auto it = item_lookup_.find(std::string(id));
  if (it == item_lookup_.end()) return std::nullopt;
  return it->second;
}

}  // namespace cogload
