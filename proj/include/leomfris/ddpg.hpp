// Deterministic-policy actor-critic learner: dense MLP with analytic
// reverse-mode gradients, replay memory, target networks with soft updates,
// and a binary checkpoint format.
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "leomfris/numerics.hpp"

namespace leomfris::ddpg {

using numerics::SeededRng;

// Fully connected net, tanh hidden activations, linear output. Parameters are
// stored flat per layer as [W row-major (out x in), b], which is also the
// checkpoint payload order.
struct Mlp {
  std::vector<std::size_t> sizes;  // layer widths including input and output
  std::vector<double> params;

  static Mlp make(std::vector<std::size_t> sizes, SeededRng& rng);

  std::size_t input_dim() const { return sizes.front(); }
  std::size_t output_dim() const { return sizes.back(); }
  std::size_t param_count() const;
};

std::vector<double> forward(const Mlp& net, const std::vector<double>& in);

struct Gradients {
  std::vector<double> param;  // d(out . upstream)/d params
  std::vector<double> input;  // d(out . upstream)/d input
};

// Exact reverse-mode gradient of dot(output, upstream) for one input.
Gradients backward(const Mlp& net, const std::vector<double>& in,
                   const std::vector<double>& upstream);

// Batched forward keeping activations for the backward pass. Rows are
// samples; all buffers are row-major.
struct ForwardCache {
  std::size_t batch = 0;
  std::vector<std::vector<double>> acts;  // acts[0] = input, acts.back() = out
};

void forward_batch(const Mlp& net, const std::vector<double>& in,
                   std::size_t batch, ForwardCache& cache);

struct BatchGrad {
  std::vector<double> param;  // summed over the batch
  std::vector<double> input;  // per sample, batch x input_dim
};

void backward_batch(const Mlp& net, const ForwardCache& cache,
                    const std::vector<double>& upstream, BatchGrad& grad);

// Optimizers. sgd_step descends params -= lr * grad; adam_step keeps
// per-parameter moment estimates (the optional adaptive-moment mode).
struct AdamState {
  std::vector<double> m, v;
  std::uint64_t t = 0;
};

void sgd_step(Mlp& net, const std::vector<double>& grad, double lr);
void adam_step(Mlp& net, AdamState& st, const std::vector<double>& grad,
               double lr);

// One slot of experience for one agent. joint_action concatenates every
// agent's raw (pre-decode) action vector in agent-id order. terminal marks
// the fixed-horizon episode end; bootstrapping is masked there.
struct Transition {
  std::vector<double> state;
  std::vector<double> joint_action;
  double reward = 0.0;
  std::vector<double> next_state;
  bool terminal = false;
};

// Fixed-capacity FIFO ring with uniform sampling with replacement. Single
// writer per buffer.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return full_ ? buf_.size() : head_; }
  std::size_t capacity() const { return buf_.size(); }
  // Storage-slot access; slot identity is stable until overwritten, so
  // lockstep writers keep slots aligned across agents.
  const Transition& at(std::size_t slot) const { return buf_[slot]; }

  std::vector<std::size_t> sample_indices(std::size_t x, SeededRng& rng) const;
  std::vector<Transition> sample_minibatch(std::size_t x, SeededRng& rng) const;

 private:
  std::vector<Transition> buf_;
  std::size_t head_ = 0;
  bool full_ = false;
};

struct TrainConfig {
  double lr_actor = 1e-3;
  double lr_critic = 5e-4;
  double gamma = 0.99;
  double tau = 0.005;
  std::size_t batch = 64;
  std::size_t buffer_capacity = 100000;
  double noise_sigma = 0.1;
  double noise_decay = 0.999;       // per episode
  double reward_scale = 1.0;        // applied to rewards entering the buffer
  std::size_t update_every = 1;     // gradient step cadence in slots
  bool adaptive_moments = false;    // adam instead of plain SGD
  std::vector<std::size_t> hidden = {256, 256};

  void validate() const;
};

// One learner: actor + critic + their targets + replay + optimizer state.
// The critic consumes [own state, all agents' raw actions]. The policy is
// tanh-bounded: act() and every internal actor evaluation squash the network
// output into [-1,1]^action_dim before it reaches the critic or the env.
struct Agent {
  Agent(std::size_t state_dim, std::size_t action_dim,
        std::size_t joint_action_dim, const TrainConfig& tc, SeededRng init);

  // Squashed actor output plus exploration noise, clipped back into the box.
  std::vector<double> act(const std::vector<double>& state, double sigma,
                          SeededRng& noise) const;

  std::size_t state_dim;
  std::size_t action_dim;
  std::size_t joint_dim;
  TrainConfig cfg;
  Mlp actor, critic, actor_tgt, critic_tgt;
  ReplayBuffer buffer;
  AdamState actor_opt, critic_opt;
};

// Minibatch assembled across the lockstep per-agent buffers: the owner's
// rewards/terminals/states plus every agent's next state so target actors can
// be evaluated where they act.
struct JointBatch {
  std::size_t x = 0;
  std::size_t state_dim = 0;
  std::size_t joint_dim = 0;
  std::size_t owner = 0;
  std::vector<double> states;                    // x * state_dim
  std::vector<double> joint_actions;             // x * joint_dim
  std::vector<double> rewards;                   // x
  std::vector<std::uint8_t> terminal;            // x
  std::vector<std::vector<double>> next_states;  // per agent, x * state_dim
};

JointBatch assemble_joint_batch(const std::vector<const ReplayBuffer*>& bufs,
                                std::size_t owner,
                                const std::vector<std::size_t>& slots);

// y = r + gamma * Q'(s', a'_1..a'_L) with terminal samples unbootstrapped.
std::vector<double> critic_target(const Mlp& critic_tgt,
                                  const std::vector<const Mlp*>& actor_tgts,
                                  const JointBatch& b, double gamma);

// Minimizes mean squared Bellman error; returns the pre-step loss.
double critic_update(Mlp& critic, AdamState& opt, const JointBatch& b,
                     const std::vector<double>& y, double lr, bool adam);

// Ascends the batch-mean critic value with the owner's action slot replaced
// by the actor's output; returns the parameter gradient L2 norm.
double actor_update(Mlp& actor, AdamState& opt, const Mlp& critic,
                    const JointBatch& b, double lr, bool adam);

// target <- tau * source + (1 - tau) * target.
void soft_update(Mlp& target, const Mlp& source, double tau);

// Binary checkpoint: "MLP1" magic, u32 version, u32 layer count, u32 layer
// sizes, then the flat parameter array as little-endian float64.
void save_checkpoint(const Mlp& net, const std::string& path);
Mlp load_checkpoint(const std::string& path);

}  // namespace leomfris::ddpg
