#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "doctest.h"
#include "leomfris/ddpg.hpp"

using namespace leomfris::ddpg;
using leomfris::numerics::SeededRng;

namespace {

// Scalar objective whose analytic gradient backward() claims to produce.
double dot_objective(const Mlp& net, const std::vector<double>& in,
                     const std::vector<double>& upstream) {
  const std::vector<double> out = forward(net, in);
  double s = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) s += out[i] * upstream[i];
  return s;
}

std::vector<double> random_vec(std::size_t n, SeededRng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.gaussian();
  return v;
}

}  // namespace

TEST_CASE("mlp init bounds and shapes") {
  SeededRng rng(11);
  const Mlp net = Mlp::make({5, 8, 7, 3}, rng);
  REQUIRE(net.param_count() == 8 * 5 + 8 + 7 * 8 + 7 + 3 * 7 + 3);
  REQUIRE(net.params.size() == net.param_count());

  // Hidden weights respect the symmetric fan-based limit; output layer starts
  // near zero; biases are exactly zero.
  const double lim0 = std::sqrt(6.0 / (5 + 8));
  for (std::size_t i = 0; i < 8 * 5; ++i) CHECK(std::abs(net.params[i]) <= lim0);
  for (std::size_t i = 8 * 5; i < 8 * 5 + 8; ++i) CHECK(net.params[i] == 0.0);
  const std::size_t last = 8 * 5 + 8 + 7 * 8 + 7;
  for (std::size_t i = last; i < last + 3 * 7; ++i)
    CHECK(std::abs(net.params[i]) <= 1e-3);

  CHECK_THROWS_AS((void)Mlp::make({4}, rng), std::invalid_argument);
  CHECK_THROWS_AS((void)Mlp::make({4, 0, 2}, rng), std::invalid_argument);
}

TEST_CASE("backward matches central finite differences") {
  SeededRng rng(101);
  Mlp net = Mlp::make({5, 8, 7, 3}, rng);
  // Perturb away from the tiny output-layer init so gradients are non-trivial.
  for (double& p : net.params) p += 0.05 * rng.gaussian();
  const std::vector<double> in = random_vec(5, rng);
  const std::vector<double> up = random_vec(3, rng);

  const Gradients g = backward(net, in, up);
  REQUIRE(g.param.size() == net.param_count());
  REQUIRE(g.input.size() == 5);
  REQUIRE(net.param_count() >= 100);

  const double h = 1e-5;
  for (std::size_t i = 0; i < net.param_count(); ++i) {
    const double keep = net.params[i];
    net.params[i] = keep + h;
    const double fp = dot_objective(net, in, up);
    net.params[i] = keep - h;
    const double fm = dot_objective(net, in, up);
    net.params[i] = keep;
    const double fd = (fp - fm) / (2.0 * h);
    CHECK(std::abs(g.param[i] - fd) <= 1e-4 * std::max(1.0, std::abs(fd)));
  }
  std::vector<double> x = in;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double fp = dot_objective(net, x, up);
    x[i] = keep - h;
    const double fm = dot_objective(net, x, up);
    x[i] = keep;
    const double fd = (fp - fm) / (2.0 * h);
    CHECK(std::abs(g.input[i] - fd) <= 1e-4 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("batched forward and backward agree with per-sample calls") {
  SeededRng rng(55);
  Mlp net = Mlp::make({4, 6, 2}, rng);
  for (double& p : net.params) p += 0.1 * rng.gaussian();
  const std::size_t batch = 5;
  const std::vector<double> in = random_vec(batch * 4, rng);
  const std::vector<double> up = random_vec(batch * 2, rng);

  ForwardCache cache;
  forward_batch(net, in, batch, cache);
  BatchGrad bg;
  backward_batch(net, cache, up, bg);

  std::vector<double> param_sum(net.param_count(), 0.0);
  for (std::size_t b = 0; b < batch; ++b) {
    const std::vector<double> xb(in.begin() + b * 4, in.begin() + (b + 1) * 4);
    const std::vector<double> ub(up.begin() + b * 2, up.begin() + (b + 1) * 2);
    const std::vector<double> ob = forward(net, xb);
    for (std::size_t o = 0; o < 2; ++o)
      CHECK(cache.acts.back()[b * 2 + o] == doctest::Approx(ob[o]).epsilon(1e-14));
    const Gradients g = backward(net, xb, ub);
    for (std::size_t i = 0; i < g.param.size(); ++i) param_sum[i] += g.param[i];
    for (std::size_t i = 0; i < 4; ++i)
      CHECK(bg.input[b * 4 + i] == doctest::Approx(g.input[i]).epsilon(1e-12));
  }
  for (std::size_t i = 0; i < param_sum.size(); ++i)
    CHECK(bg.param[i] == doctest::Approx(param_sum[i]).epsilon(1e-12));
}

TEST_CASE("optimizer steps move parameters as specified") {
  SeededRng rng(9);
  Mlp net = Mlp::make({2, 3, 1}, rng);
  const Mlp before = net;
  std::vector<double> grad(net.param_count());
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] = 0.25 * (i % 3);
  sgd_step(net, grad, 0.1);
  for (std::size_t i = 0; i < grad.size(); ++i)
    CHECK(net.params[i] == before.params[i] - 0.1 * grad[i]);

  // First adaptive step is lr * g / (|g| + eps): approximately signed lr.
  Mlp anet = before;
  AdamState st;
  std::vector<double> g2(anet.param_count(), 0.0);
  g2[0] = 3.0;
  g2[1] = -0.5;
  adam_step(anet, st, g2, 0.01);
  CHECK(st.t == 1);
  CHECK(anet.params[0] == doctest::Approx(before.params[0] - 0.01).epsilon(1e-6));
  CHECK(anet.params[1] == doctest::Approx(before.params[1] + 0.01).epsilon(1e-6));
  CHECK(anet.params[2] == before.params[2]);

  CHECK_THROWS_AS(sgd_step(net, std::vector<double>(3), 0.1),
                  std::invalid_argument);
}

TEST_CASE("replay buffer is a FIFO ring with uniform sampling") {
  ReplayBuffer rb(4);
  CHECK(rb.size() == 0);
  SeededRng rng(3);
  CHECK_THROWS_AS((void)rb.sample_indices(2, rng), std::logic_error);

  for (int i = 0; i < 6; ++i) {
    Transition t;
    t.reward = static_cast<double>(i);
    t.state = {static_cast<double>(i)};
    t.joint_action = {0.0};
    t.next_state = {static_cast<double>(i) + 0.5};
    rb.push(std::move(t));
    CHECK(rb.size() == std::min<std::size_t>(static_cast<std::size_t>(i) + 1, 4));
  }
  // Oldest two were overwritten in place: slots 0,1 now hold items 4,5.
  CHECK(rb.at(0).reward == 4.0);
  CHECK(rb.at(1).reward == 5.0);
  CHECK(rb.at(2).reward == 2.0);
  CHECK(rb.at(3).reward == 3.0);

  const auto idx = rb.sample_indices(20000, rng);
  REQUIRE(idx.size() == 20000);
  std::vector<int> freq(4, 0);
  for (std::size_t s : idx) {
    REQUIRE(s < 4);
    freq[s] += 1;
  }
  for (int f : freq) {
    CHECK(f > 4500);
    CHECK(f < 5500);
  }
}

TEST_CASE("joint batches read aligned slots across per-agent buffers") {
  ReplayBuffer a(8), b(8);
  for (int i = 0; i < 3; ++i) {
    Transition ta, tb;
    ta.state = {1.0 + i, 10.0 + i};
    ta.joint_action = {0.1 * i, 0.2 * i, 0.3 * i};
    ta.reward = 100.0 + i;
    ta.next_state = {2.0 + i, 20.0 + i};
    ta.terminal = (i == 2);
    tb.state = {-1.0 - i, -10.0 - i};
    tb.joint_action = ta.joint_action;
    tb.reward = -100.0 - i;
    tb.next_state = {-2.0 - i, -20.0 - i};
    tb.terminal = ta.terminal;
    a.push(std::move(ta));
    b.push(std::move(tb));
  }
  const std::vector<const ReplayBuffer*> bufs{&a, &b};
  const JointBatch jb = assemble_joint_batch(bufs, 1, {2, 0});
  REQUIRE(jb.x == 2);
  CHECK(jb.state_dim == 2);
  CHECK(jb.joint_dim == 3);
  CHECK(jb.owner == 1);
  // Owner fields come from buffer b; next states come from both buffers at
  // the same slots.
  CHECK(jb.states == std::vector<double>{-3.0, -12.0, -1.0, -10.0});
  CHECK(jb.rewards == std::vector<double>{-102.0, -100.0});
  CHECK(jb.terminal == std::vector<std::uint8_t>{1, 0});
  CHECK(jb.next_states[0] == std::vector<double>{4.0, 22.0, 2.0, 20.0});
  CHECK(jb.next_states[1] == std::vector<double>{-4.0, -22.0, -2.0, -20.0});
  CHECK(jb.joint_actions ==
        std::vector<double>{0.2, 0.4, 0.6, 0.0, 0.0, 0.0});
}

TEST_CASE("critic target bootstraps through target actors with terminal mask") {
  SeededRng rng(77);
  const std::size_t sd = 3, ad = 2, agents = 2;
  const std::size_t jd = agents * ad;
  Mlp critic = Mlp::make({sd + jd, 6, 1}, rng);
  Mlp pol0 = Mlp::make({sd, 5, ad}, rng);
  Mlp pol1 = Mlp::make({sd, 5, ad}, rng);
  for (double& p : critic.params) p += 0.2 * rng.gaussian();
  for (double& p : pol0.params) p += 0.2 * rng.gaussian();
  for (double& p : pol1.params) p += 0.2 * rng.gaussian();

  JointBatch b;
  b.x = 2;
  b.state_dim = sd;
  b.joint_dim = jd;
  b.owner = 0;
  b.states = random_vec(b.x * sd, rng);
  b.joint_actions = random_vec(b.x * jd, rng);
  b.rewards = {0.7, -1.3};
  b.terminal = {0, 1};
  b.next_states = {random_vec(b.x * sd, rng), random_vec(b.x * sd, rng)};

  const double gamma = 0.9;
  const std::vector<double> y =
      critic_target(critic, {&pol0, &pol1}, b, gamma);
  REQUIRE(y.size() == 2);

  for (std::size_t s = 0; s < 2; ++s) {
    const std::vector<double> ns0(b.next_states[0].begin() + s * sd,
                                  b.next_states[0].begin() + (s + 1) * sd);
    const std::vector<double> ns1(b.next_states[1].begin() + s * sd,
                                  b.next_states[1].begin() + (s + 1) * sd);
    // Target actions pass through the same tanh bound as the live policy.
    std::vector<double> a0 = forward(pol0, ns0);
    std::vector<double> a1 = forward(pol1, ns1);
    for (double& v : a0) v = std::tanh(v);
    for (double& v : a1) v = std::tanh(v);
    std::vector<double> cin = ns0;  // owner 0 observes its own next state
    cin.insert(cin.end(), a0.begin(), a0.end());
    cin.insert(cin.end(), a1.begin(), a1.end());
    const double q = forward(critic, cin)[0];
    const double expect = b.rewards[s] + (b.terminal[s] ? 0.0 : gamma * q);
    CHECK(y[s] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("critic regression loss falls and actor ascends the critic") {
  SeededRng rng(123);
  const std::size_t sd = 3, ad = 2, jd = 4;
  JointBatch b;
  b.x = 16;
  b.state_dim = sd;
  b.joint_dim = jd;
  b.owner = 1;
  b.states = random_vec(b.x * sd, rng);
  b.joint_actions = random_vec(b.x * jd, rng);
  b.rewards.assign(b.x, 0.0);
  b.terminal.assign(b.x, 0);
  b.next_states = {random_vec(b.x * sd, rng), random_vec(b.x * sd, rng)};
  std::vector<double> y = random_vec(b.x, rng);

  // Plain gradient descent makes steady progress.
  Mlp sgd_critic = Mlp::make({sd + jd, 8, 1}, rng);
  AdamState unused;
  std::vector<double> sgd_losses;
  for (int it = 0; it < 100; ++it)
    sgd_losses.push_back(critic_update(sgd_critic, unused, b, y, 0.05, false));
  CHECK(sgd_losses.back() < 0.9 * sgd_losses.front());

  // The adaptive optimizer drives the regression much further.
  Mlp critic = Mlp::make({sd + jd, 8, 1}, rng);
  AdamState copt;
  std::vector<double> losses;
  for (int it = 0; it < 400; ++it)
    losses.push_back(critic_update(critic, copt, b, y, 0.01, true));
  CHECK(losses.back() < 0.2 * losses.front());

  // Freeze the trained critic and ascend its mean value with the actor.
  Mlp actor = Mlp::make({sd, 8, ad}, rng);
  AdamState aopt;
  const auto mean_q = [&](const Mlp& pol) {
    double total = 0.0;
    for (std::size_t s = 0; s < b.x; ++s) {
      const std::vector<double> st(b.states.begin() + s * sd,
                                   b.states.begin() + (s + 1) * sd);
      const std::vector<double> a = forward(pol, st);
      std::vector<double> cin = st;
      std::vector<double> joint(b.joint_actions.begin() + s * jd,
                                b.joint_actions.begin() + (s + 1) * jd);
      std::copy(a.begin(), a.end(), joint.begin() + b.owner * ad);
      cin.insert(cin.end(), joint.begin(), joint.end());
      total += forward(critic, cin)[0];
    }
    return total / static_cast<double>(b.x);
  };
  const double q0 = mean_q(actor);
  double gnorm = 0.0;
  for (int it = 0; it < 100; ++it)
    gnorm = actor_update(actor, aopt, critic, b, 0.02, false);
  CHECK(mean_q(actor) > q0);
  CHECK(gnorm >= 0.0);
}

TEST_CASE("soft update interpolates and copies at tau one") {
  SeededRng rng(5);
  Mlp src = Mlp::make({3, 4, 2}, rng);
  Mlp tgt = Mlp::make({3, 4, 2}, rng);
  const Mlp tgt0 = tgt;
  soft_update(tgt, src, 0.005);
  for (std::size_t i = 0; i < tgt.params.size(); ++i)
    CHECK(tgt.params[i] == 0.005 * src.params[i] + 0.995 * tgt0.params[i]);
  soft_update(tgt, src, 1.0);
  CHECK(tgt.params == src.params);

  Mlp other = Mlp::make({3, 5, 2}, rng);
  CHECK_THROWS_AS(soft_update(other, src, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(soft_update(tgt, src, 1.5), std::invalid_argument);
}

TEST_CASE("agent construction and noisy action determinism") {
  TrainConfig tc;
  tc.hidden = {8, 8};
  tc.buffer_capacity = 128;
  tc.batch = 16;
  tc.validate();
  Agent ag(6, 4, 8, tc, SeededRng(2024));
  CHECK(ag.actor.input_dim() == 6);
  CHECK(ag.actor.output_dim() == 4);
  CHECK(ag.critic.input_dim() == 6 + 8);
  CHECK(ag.critic.output_dim() == 1);
  CHECK(ag.actor_tgt.params == ag.actor.params);
  CHECK(ag.critic_tgt.params == ag.critic.params);

  SeededRng rng(1);
  const std::vector<double> s{0.1, -0.2, 0.3, 0.0, 0.5, -0.5};
  SeededRng n1(99), n2(99);
  const auto a1 = ag.act(s, 0.2, n1);
  const auto a2 = ag.act(s, 0.2, n2);
  CHECK(a1 == a2);
  SeededRng n3(100);
  const auto noiseless = ag.act(s, 0.0, n3);
  const auto pre = forward(ag.actor, s);
  REQUIRE(noiseless.size() == pre.size());
  for (std::size_t i = 0; i < pre.size(); ++i) {
    CHECK(noiseless[i] == doctest::Approx(std::tanh(pre[i])).epsilon(1e-15));
    CHECK(std::abs(noiseless[i]) <= 1.0);
  }
  // Large noise is clipped back into the action box.
  SeededRng n4(7);
  for (double v : ag.act(s, 50.0, n4)) CHECK(std::abs(v) <= 1.0);

  TrainConfig bad = tc;
  bad.gamma = 1.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = tc;
  bad.buffer_capacity = 4;  // smaller than batch
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("checkpoint roundtrip is bit exact and rejects malformed files") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "leomfris_ckpt_test";
  fs::create_directories(dir);
  const std::string path = (dir / "net.bin").string();

  SeededRng rng(31);
  Mlp net = Mlp::make({7, 9, 4}, rng);
  for (double& p : net.params) p += rng.gaussian();
  save_checkpoint(net, path);
  const Mlp back = load_checkpoint(path);
  CHECK(back.sizes == net.sizes);
  CHECK(back.params == net.params);

  // Truncation, bad magic and trailing garbage are all hard errors.
  {
    std::ifstream is(path, std::ios::binary);
    std::vector<char> bytes((std::istreambuf_iterator<char>(is)),
                            std::istreambuf_iterator<char>());
    std::ofstream os((dir / "trunc.bin").string(), std::ios::binary);
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 9));
  }
  CHECK_THROWS_AS((void)load_checkpoint((dir / "trunc.bin").string()),
                  std::runtime_error);
  {
    std::ofstream os((dir / "magic.bin").string(), std::ios::binary);
    os.write("XXXX", 4);
  }
  CHECK_THROWS_AS((void)load_checkpoint((dir / "magic.bin").string()),
                  std::runtime_error);
  {
    std::ifstream is(path, std::ios::binary);
    std::vector<char> bytes((std::istreambuf_iterator<char>(is)),
                            std::istreambuf_iterator<char>());
    std::ofstream os((dir / "trail.bin").string(), std::ios::binary);
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    os.put('\0');
  }
  CHECK_THROWS_AS((void)load_checkpoint((dir / "trail.bin").string()),
                  std::runtime_error);
  CHECK_THROWS_AS((void)load_checkpoint((dir / "missing.bin").string()),
                  std::runtime_error);
  fs::remove_all(dir);
}
