#include "leomfris/ddpg.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace leomfris::ddpg {

namespace {

// Parameter offset of layer l's weight block; biases follow the weights.
std::size_t layer_offset(const std::vector<std::size_t>& sizes, std::size_t l) {
  std::size_t off = 0;
  for (std::size_t i = 0; i < l; ++i)
    off += sizes[i + 1] * sizes[i] + sizes[i + 1];
  return off;
}

}  // namespace

Mlp Mlp::make(std::vector<std::size_t> sizes, SeededRng& rng) {
  if (sizes.size() < 2)
    throw std::invalid_argument("Mlp: need at least input and output layers");
  for (std::size_t s : sizes)
    if (s == 0) throw std::invalid_argument("Mlp: zero-width layer");
  Mlp net;
  net.sizes = std::move(sizes);
  net.params.resize(net.param_count());
  const std::size_t layers = net.sizes.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t fan_in = net.sizes[l];
    const std::size_t fan_out = net.sizes[l + 1];
    // Xavier for hidden layers; the output layer starts near zero so initial
    // policies sit mid-range and initial values are small.
    const double limit =
        (l + 1 == layers)
            ? 1e-3
            : std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    double* w = net.params.data() + layer_offset(net.sizes, l);
    for (std::size_t i = 0; i < fan_out * fan_in; ++i)
      w[i] = (2.0 * rng.uniform() - 1.0) * limit;
    // Biases start at zero.
  }
  return net;
}

std::size_t Mlp::param_count() const {
  return layer_offset(sizes, sizes.size() - 1);
}

void forward_batch(const Mlp& net, const std::vector<double>& in,
                   std::size_t batch, ForwardCache& cache) {
  if (in.size() != batch * net.input_dim())
    throw std::invalid_argument("forward_batch: input size mismatch");
  const std::size_t layers = net.sizes.size() - 1;
  cache.batch = batch;
  cache.acts.resize(layers + 1);
  cache.acts[0] = in;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t din = net.sizes[l];
    const std::size_t dout = net.sizes[l + 1];
    const double* w = net.params.data() + layer_offset(net.sizes, l);
    const double* bias = w + dout * din;
    const bool last = (l + 1 == layers);
    auto& out = cache.acts[l + 1];
    out.assign(batch * dout, 0.0);
    const auto& x = cache.acts[l];
    for (std::size_t b = 0; b < batch; ++b) {
      const double* xb = x.data() + b * din;
      double* ob = out.data() + b * dout;
      for (std::size_t o = 0; o < dout; ++o) {
        const double* wo = w + o * din;
        double z = bias[o];
        for (std::size_t i = 0; i < din; ++i) z += wo[i] * xb[i];
        ob[o] = last ? z : std::tanh(z);
      }
    }
  }
}

std::vector<double> forward(const Mlp& net, const std::vector<double>& in) {
  ForwardCache cache;
  forward_batch(net, in, 1, cache);
  return cache.acts.back();
}

void backward_batch(const Mlp& net, const ForwardCache& cache,
                    const std::vector<double>& upstream, BatchGrad& grad) {
  const std::size_t layers = net.sizes.size() - 1;
  const std::size_t batch = cache.batch;
  if (upstream.size() != batch * net.output_dim())
    throw std::invalid_argument("backward_batch: upstream size mismatch");
  grad.param.assign(net.param_count(), 0.0);
  std::vector<double> delta = upstream;  // d/d(activation of current layer)
  std::vector<double> delta_prev;
  for (std::size_t l = layers; l-- > 0;) {
    const std::size_t din = net.sizes[l];
    const std::size_t dout = net.sizes[l + 1];
    const double* w = net.params.data() + layer_offset(net.sizes, l);
    double* gw = grad.param.data() + layer_offset(net.sizes, l);
    double* gb = gw + dout * din;
    const bool last = (l + 1 == layers);
    const auto& x = cache.acts[l];
    const auto& a = cache.acts[l + 1];
    delta_prev.assign(batch * din, 0.0);
    for (std::size_t b = 0; b < batch; ++b) {
      const double* xb = x.data() + b * din;
      const double* ab = a.data() + b * dout;
      double* db = delta.data() + b * dout;
      double* dpb = delta_prev.data() + b * din;
      for (std::size_t o = 0; o < dout; ++o) {
        // tanh'(z) = 1 - a^2 on hidden layers, identity on the output.
        const double dz = last ? db[o] : db[o] * (1.0 - ab[o] * ab[o]);
        if (dz == 0.0) continue;
        const double* wo = w + o * din;
        double* gwo = gw + o * din;
        gb[o] += dz;
        for (std::size_t i = 0; i < din; ++i) {
          gwo[i] += dz * xb[i];
          dpb[i] += dz * wo[i];
        }
      }
    }
    delta.swap(delta_prev);
  }
  grad.input = std::move(delta);
}

Gradients backward(const Mlp& net, const std::vector<double>& in,
                   const std::vector<double>& upstream) {
  ForwardCache cache;
  forward_batch(net, in, 1, cache);
  BatchGrad bg;
  backward_batch(net, cache, upstream, bg);
  return Gradients{std::move(bg.param), std::move(bg.input)};
}

void sgd_step(Mlp& net, const std::vector<double>& grad, double lr) {
  if (grad.size() != net.params.size())
    throw std::invalid_argument("sgd_step: gradient size mismatch");
  for (std::size_t i = 0; i < grad.size(); ++i) net.params[i] -= lr * grad[i];
}

void adam_step(Mlp& net, AdamState& st, const std::vector<double>& grad,
               double lr) {
  if (grad.size() != net.params.size())
    throw std::invalid_argument("adam_step: gradient size mismatch");
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  if (st.m.size() != grad.size()) {
    st.m.assign(grad.size(), 0.0);
    st.v.assign(grad.size(), 0.0);
    st.t = 0;
  }
  st.t += 1;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(st.t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(st.t));
  for (std::size_t i = 0; i < grad.size(); ++i) {
    st.m[i] = b1 * st.m[i] + (1.0 - b1) * grad[i];
    st.v[i] = b2 * st.v[i] + (1.0 - b2) * grad[i] * grad[i];
    net.params[i] -= lr * (st.m[i] / c1) / (std::sqrt(st.v[i] / c2) + eps);
  }
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) {
  if (capacity == 0)
    throw std::invalid_argument("ReplayBuffer: capacity must be > 0");
  buf_.reserve(capacity);
  buf_.resize(capacity);
}

void ReplayBuffer::push(Transition t) {
  buf_[head_] = std::move(t);
  head_ += 1;
  if (head_ == buf_.size()) {
    head_ = 0;
    full_ = true;
  }
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t x,
                                                      SeededRng& rng) const {
  const std::size_t n = size();
  if (n == 0) throw std::logic_error("ReplayBuffer: sampling from empty buffer");
  std::vector<std::size_t> idx(x);
  for (std::size_t i = 0; i < x; ++i)
    idx[i] = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n));
  return idx;
}

std::vector<Transition> ReplayBuffer::sample_minibatch(std::size_t x,
                                                       SeededRng& rng) const {
  std::vector<Transition> out;
  out.reserve(x);
  for (std::size_t slot : sample_indices(x, rng)) out.push_back(buf_[slot]);
  return out;
}

void TrainConfig::validate() const {
  if (lr_actor <= 0.0 || lr_critic <= 0.0)
    throw std::invalid_argument("TrainConfig: learning rates must be > 0");
  if (gamma < 0.0 || gamma > 1.0)
    throw std::invalid_argument("TrainConfig: gamma outside [0,1]");
  if (tau <= 0.0 || tau > 1.0)
    throw std::invalid_argument("TrainConfig: tau outside (0,1]");
  if (batch == 0 || buffer_capacity < batch)
    throw std::invalid_argument("TrainConfig: batch/buffer sizes inconsistent");
  if (noise_sigma < 0.0 || noise_decay <= 0.0 || noise_decay > 1.0)
    throw std::invalid_argument("TrainConfig: bad exploration noise settings");
  if (reward_scale <= 0.0)
    throw std::invalid_argument("TrainConfig: reward_scale must be > 0");
  if (update_every == 0)
    throw std::invalid_argument("TrainConfig: update_every must be >= 1");
  if (hidden.empty())
    throw std::invalid_argument("TrainConfig: need at least one hidden layer");
}

namespace {

std::vector<std::size_t> stack_sizes(std::size_t in,
                                     const std::vector<std::size_t>& hidden,
                                     std::size_t out) {
  std::vector<std::size_t> s;
  s.push_back(in);
  s.insert(s.end(), hidden.begin(), hidden.end());
  s.push_back(out);
  return s;
}

}  // namespace

Agent::Agent(std::size_t sd, std::size_t ad, std::size_t jd,
             const TrainConfig& tc, SeededRng init)
    : state_dim(sd),
      action_dim(ad),
      joint_dim(jd),
      cfg(tc),
      actor(Mlp::make(stack_sizes(sd, tc.hidden, ad), init)),
      critic(Mlp::make(stack_sizes(sd + jd, tc.hidden, 1), init)),
      actor_tgt(actor),
      critic_tgt(critic),
      buffer(tc.buffer_capacity) {
  cfg.validate();
}

std::vector<double> Agent::act(const std::vector<double>& state, double sigma,
                               SeededRng& noise) const {
  // Bounded policy: tanh keeps the action in [-1,1]^d so the critic never
  // extrapolates past the range the decoders respond to; exploration noise is
  // clipped back into the box.
  std::vector<double> a = forward(actor, state);
  for (double& v : a)
    v = std::clamp(std::tanh(v) + sigma * noise.gaussian(), -1.0, 1.0);
  return a;
}

JointBatch assemble_joint_batch(const std::vector<const ReplayBuffer*>& bufs,
                                std::size_t owner,
                                const std::vector<std::size_t>& slots) {
  if (owner >= bufs.size())
    throw std::invalid_argument("assemble_joint_batch: owner out of range");
  const ReplayBuffer& ob = *bufs[owner];
  JointBatch b;
  b.x = slots.size();
  b.owner = owner;
  b.state_dim = ob.at(slots.empty() ? 0 : slots[0]).state.size();
  b.joint_dim = ob.at(slots.empty() ? 0 : slots[0]).joint_action.size();
  b.states.reserve(b.x * b.state_dim);
  b.joint_actions.reserve(b.x * b.joint_dim);
  b.rewards.reserve(b.x);
  b.terminal.reserve(b.x);
  b.next_states.assign(bufs.size(), {});
  for (auto& ns : b.next_states) ns.reserve(b.x * b.state_dim);
  for (std::size_t slot : slots) {
    const Transition& t = ob.at(slot);
    b.states.insert(b.states.end(), t.state.begin(), t.state.end());
    b.joint_actions.insert(b.joint_actions.end(), t.joint_action.begin(),
                           t.joint_action.end());
    b.rewards.push_back(t.reward);
    b.terminal.push_back(t.terminal ? 1 : 0);
    for (std::size_t a = 0; a < bufs.size(); ++a) {
      const auto& ns = bufs[a]->at(slot).next_state;
      b.next_states[a].insert(b.next_states[a].end(), ns.begin(), ns.end());
    }
  }
  return b;
}

std::vector<double> critic_target(const Mlp& critic_tgt,
                                  const std::vector<const Mlp*>& actor_tgts,
                                  const JointBatch& b, double gamma) {
  if (b.next_states.size() != actor_tgts.size())
    throw std::invalid_argument("critic_target: agent count mismatch");
  // Joint next action from every agent's target actor on its own next state,
  // squashed into the same bounded box the behavior policy emits.
  std::vector<double> joint(b.x * b.joint_dim, 0.0);
  std::size_t slot_off = 0;
  ForwardCache cache;
  for (std::size_t a = 0; a < actor_tgts.size(); ++a) {
    const Mlp& pol = *actor_tgts[a];
    forward_batch(pol, b.next_states[a], b.x, cache);
    const std::size_t ad = pol.output_dim();
    for (std::size_t s = 0; s < b.x; ++s)
      for (std::size_t i = 0; i < ad; ++i)
        joint[s * b.joint_dim + slot_off + i] =
            std::tanh(cache.acts.back()[s * ad + i]);
    slot_off += ad;
  }
  if (slot_off != b.joint_dim)
    throw std::invalid_argument("critic_target: joint action dim mismatch");

  const std::size_t owner_sd =
      b.next_states[b.owner].size() / (b.x == 0 ? 1 : b.x);
  std::vector<double> in(b.x * (owner_sd + b.joint_dim));
  for (std::size_t s = 0; s < b.x; ++s) {
    std::memcpy(in.data() + s * (owner_sd + b.joint_dim),
                b.next_states[b.owner].data() + s * owner_sd,
                owner_sd * sizeof(double));
    std::memcpy(in.data() + s * (owner_sd + b.joint_dim) + owner_sd,
                joint.data() + s * b.joint_dim, b.joint_dim * sizeof(double));
  }
  forward_batch(critic_tgt, in, b.x, cache);
  std::vector<double> y(b.x);
  for (std::size_t s = 0; s < b.x; ++s) {
    const double q = cache.acts.back()[s];
    y[s] = b.rewards[s] + (b.terminal[s] ? 0.0 : gamma * q);
  }
  return y;
}

namespace {

std::vector<double> critic_input(const JointBatch& b,
                                 const std::vector<double>& joint) {
  std::vector<double> in(b.x * (b.state_dim + b.joint_dim));
  for (std::size_t s = 0; s < b.x; ++s) {
    std::memcpy(in.data() + s * (b.state_dim + b.joint_dim),
                b.states.data() + s * b.state_dim, b.state_dim * sizeof(double));
    std::memcpy(in.data() + s * (b.state_dim + b.joint_dim) + b.state_dim,
                joint.data() + s * b.joint_dim, b.joint_dim * sizeof(double));
  }
  return in;
}

}  // namespace

double critic_update(Mlp& critic, AdamState& opt, const JointBatch& b,
                     const std::vector<double>& y, double lr, bool adam) {
  if (y.size() != b.x)
    throw std::invalid_argument("critic_update: target size mismatch");
  const std::vector<double> in = critic_input(b, b.joint_actions);
  ForwardCache cache;
  forward_batch(critic, in, b.x, cache);
  const auto& q = cache.acts.back();
  double loss = 0.0;
  std::vector<double> upstream(b.x);
  const double inv_x = 1.0 / static_cast<double>(b.x);
  for (std::size_t s = 0; s < b.x; ++s) {
    const double err = q[s] - y[s];
    loss += err * err * inv_x;
    upstream[s] = 2.0 * err * inv_x;
  }
  BatchGrad grad;
  backward_batch(critic, cache, upstream, grad);
  if (adam)
    adam_step(critic, opt, grad.param, lr);
  else
    sgd_step(critic, grad.param, lr);
  return loss;
}

double actor_update(Mlp& actor, AdamState& opt, const Mlp& critic,
                    const JointBatch& b, double lr, bool adam) {
  const std::size_t ad = actor.output_dim();
  ForwardCache actor_cache;
  forward_batch(actor, b.states, b.x, actor_cache);
  // Replace the owner's slot in the stored joint actions with the bounded
  // policy output.
  std::vector<double> joint = b.joint_actions;
  std::vector<double> squashed(b.x * ad);
  const std::size_t off = b.owner * ad;
  for (std::size_t s = 0; s < b.x; ++s)
    for (std::size_t i = 0; i < ad; ++i) {
      squashed[s * ad + i] = std::tanh(actor_cache.acts.back()[s * ad + i]);
      joint[s * b.joint_dim + off + i] = squashed[s * ad + i];
    }

  const std::vector<double> in = critic_input(b, joint);
  ForwardCache critic_cache;
  forward_batch(critic, in, b.x, critic_cache);
  const double inv_x = 1.0 / static_cast<double>(b.x);
  const std::vector<double> upstream(b.x, inv_x);  // d(mean Q)/dQ
  BatchGrad critic_grad;
  backward_batch(critic, critic_cache, upstream, critic_grad);

  // Chain through the critic input slice that carries the actor's output,
  // then through the tanh squash: d tanh(z)/dz = 1 - tanh(z)^2.
  std::vector<double> dq_da(b.x * ad);
  const std::size_t cin = b.state_dim + b.joint_dim;
  for (std::size_t s = 0; s < b.x; ++s)
    for (std::size_t i = 0; i < ad; ++i) {
      const double a = squashed[s * ad + i];
      dq_da[s * ad + i] =
          critic_grad.input[s * cin + b.state_dim + off + i] * (1.0 - a * a);
    }
  BatchGrad actor_grad;
  backward_batch(actor, actor_cache, dq_da, actor_grad);

  double norm_sq = 0.0;
  for (double g : actor_grad.param) norm_sq += g * g;
  // Ascend mean Q.
  for (double& g : actor_grad.param) g = -g;
  if (adam)
    adam_step(actor, opt, actor_grad.param, lr);
  else
    sgd_step(actor, actor_grad.param, lr);
  return std::sqrt(norm_sq);
}

void soft_update(Mlp& target, const Mlp& source, double tau) {
  if (target.sizes != source.sizes)
    throw std::invalid_argument("soft_update: architecture mismatch");
  if (tau < 0.0 || tau > 1.0)
    throw std::invalid_argument("soft_update: tau outside [0,1]");
  for (std::size_t i = 0; i < target.params.size(); ++i)
    target.params[i] = tau * source.params[i] + (1.0 - tau) * target.params[i];
}

namespace {

constexpr char kMagic[4] = {'M', 'L', 'P', '1'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ofstream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::ifstream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw std::runtime_error("checkpoint: truncated header");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

void put_f64(std::ofstream& os, double d) {
  const std::uint64_t v = std::bit_cast<std::uint64_t>(d);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::ifstream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw std::runtime_error("checkpoint: truncated payload");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(v);
}

}  // namespace

void save_checkpoint(const Mlp& net, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("checkpoint: cannot open " + path);
  os.write(kMagic, 4);
  put_u32(os, kVersion);
  put_u32(os, static_cast<std::uint32_t>(net.sizes.size()));
  for (std::size_t s : net.sizes) put_u32(os, static_cast<std::uint32_t>(s));
  for (double p : net.params) put_f64(os, p);
  if (!os) throw std::runtime_error("checkpoint: write failed " + path);
}

Mlp load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("checkpoint: bad magic");
  if (get_u32(is) != kVersion)
    throw std::runtime_error("checkpoint: unsupported version");
  const std::uint32_t layers = get_u32(is);
  if (layers < 2 || layers > 64)
    throw std::runtime_error("checkpoint: implausible layer count");
  Mlp net;
  net.sizes.resize(layers);
  for (auto& s : net.sizes) {
    s = get_u32(is);
    if (s == 0) throw std::runtime_error("checkpoint: zero-width layer");
  }
  net.params.resize(net.param_count());
  for (double& p : net.params) p = get_f64(is);
  is.peek();
  if (!is.eof()) throw std::runtime_error("checkpoint: trailing bytes");
  return net;
}

}  // namespace leomfris::ddpg
