#include "leomfris/fed.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "leomfris/numerics.hpp"

namespace leomfris::fed {

void FlConfig::validate() const {
  if (period == 0) throw std::invalid_argument("FlConfig: period must be >= 1");
  if (slice_fraction <= 0.0 || slice_fraction > 1.0)
    throw std::invalid_argument("FlConfig: slice_fraction outside (0,1]");
}

std::vector<std::vector<std::size_t>> make_groups(std::size_t num_agents,
                                                  std::size_t group_size) {
  if (num_agents == 0)
    throw std::invalid_argument("make_groups: no agents");
  const std::size_t g = (group_size == 0) ? num_agents : group_size;
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t start = 0; start < num_agents; start += g) {
    std::vector<std::size_t> members;
    for (std::size_t i = start; i < std::min(start + g, num_agents); ++i)
      members.push_back(i);
    groups.push_back(std::move(members));
  }
  return groups;
}

std::size_t select_edge(const std::vector<double>& quality,
                        const std::vector<std::size_t>& group) {
  if (group.empty()) throw std::invalid_argument("select_edge: empty group");
  std::size_t best = group[0];
  for (std::size_t id : group) {
    if (id >= quality.size())
      throw std::invalid_argument("select_edge: agent id out of range");
    if (quality[id] > quality[best]) best = id;
  }
  return best;
}

std::vector<std::size_t> slice_indices(std::size_t param_count,
                                       double fraction, std::uint64_t seed) {
  if (param_count == 0)
    throw std::invalid_argument("slice_indices: empty parameter vector");
  if (fraction <= 0.0 || fraction > 1.0)
    throw std::invalid_argument("slice_indices: fraction outside (0,1]");
  const std::size_t take = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(param_count)));
  std::vector<std::size_t> all(param_count);
  std::iota(all.begin(), all.end(), std::size_t{0});
  numerics::SeededRng rng(seed);
  // Partial Fisher-Yates: the first `take` entries are a uniform subset.
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j =
        i + static_cast<std::size_t>(rng.uniform() *
                                     static_cast<double>(param_count - i));
    std::swap(all[i], all[std::min(j, param_count - 1)]);
  }
  all.resize(take);
  std::sort(all.begin(), all.end());
  return all;
}

ModelSlice extract_slice(const std::vector<double>& params,
                         const std::vector<std::size_t>& idx) {
  ModelSlice s;
  s.idx = idx;
  s.values.reserve(idx.size());
  for (std::size_t i : idx) {
    if (i >= params.size())
      throw std::invalid_argument("extract_slice: index out of range");
    s.values.push_back(params[i]);
  }
  return s;
}

std::vector<double> aggregate(const std::vector<ModelSlice>& slices,
                              const std::vector<double>& xi) {
  if (slices.empty()) throw std::invalid_argument("aggregate: no slices");
  if (xi.size() != slices.size())
    throw std::invalid_argument("aggregate: weight count mismatch");
  const std::size_t n = slices[0].values.size();
  for (const auto& s : slices)
    if (s.values.size() != n || s.idx != slices[0].idx)
      throw std::invalid_argument("aggregate: slices not aligned");
  double total = 0.0;
  for (double w : xi) {
    if (w < 0.0) throw std::invalid_argument("aggregate: negative weight");
    total += w;
  }
  if (total <= 0.0)
    throw std::invalid_argument("aggregate: weights sum to zero");

  // v0 + sum(xi_hat * (v_i - v0)): identical inputs pass through bit-exactly.
  std::vector<double> out = slices[0].values;
  for (std::size_t s = 1; s < slices.size(); ++s) {
    const double w = xi[s] / total;
    for (std::size_t j = 0; j < n; ++j)
      out[j] += w * (slices[s].values[j] - slices[0].values[j]);
  }
  return out;
}

void broadcast_merge(std::vector<double>& params, const ModelSlice& slice) {
  if (slice.idx.size() != slice.values.size())
    throw std::invalid_argument("broadcast_merge: malformed slice");
  for (std::size_t j = 0; j < slice.idx.size(); ++j) {
    if (slice.idx[j] >= params.size())
      throw std::invalid_argument("broadcast_merge: index out of range");
    params[slice.idx[j]] = slice.values[j];
  }
}

}  // namespace leomfris::fed
