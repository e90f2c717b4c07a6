// Federated parameter exchange: agent grouping, edge election by channel
// quality, seeded partial-model slicing, weighted aggregation and broadcast.
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace leomfris::fed {

struct FlConfig {
  std::size_t period = 5;        // episodes between exchange rounds
  double slice_fraction = 0.5;   // fraction of parameters exchanged
  std::size_t group_size = 0;    // 0 puts every agent in one group
  bool include_actor = false;    // also exchange target-actor parameters

  void validate() const;
};

// A masked view of one model's flat parameter vector. idx is sorted,
// duplicate-free and shared by every member of a group within a round.
struct ModelSlice {
  std::vector<std::size_t> idx;
  std::vector<double> values;
};

// Agents partitioned by id order into groups of group_size (the last group
// may be smaller). group_size = 0 means one group with everyone.
std::vector<std::vector<std::size_t>> make_groups(std::size_t num_agents,
                                                  std::size_t group_size);

// Index of the member with the best channel quality; ties go to the lowest
// agent id. quality is indexed by agent id.
std::size_t select_edge(const std::vector<double>& quality,
                        const std::vector<std::size_t>& group);

// Deterministic ceil(fraction * param_count) distinct indices, sorted.
// Depends only on (param_count, fraction, seed).
std::vector<std::size_t> slice_indices(std::size_t param_count,
                                       double fraction, std::uint64_t seed);

ModelSlice extract_slice(const std::vector<double>& params,
                         const std::vector<std::size_t>& idx);

// Weighted mean of aligned slices with weights xi normalized to sum 1.
// Computed in baseline-corrected form v0 + sum(xi_hat * (v - v0)) so that
// aggregating identical slices returns them bit-exactly.
std::vector<double> aggregate(const std::vector<ModelSlice>& slices,
                              const std::vector<double>& xi);

// Overwrites params at slice.idx with slice.values.
void broadcast_merge(std::vector<double>& params, const ModelSlice& slice);

}  // namespace leomfris::fed
