#include "culprit/rl/ddpg_agent.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "culprit/detail/seed.hpp"
#include "culprit/errors.hpp"
#include "culprit/nn/serialize.hpp"

namespace culprit::rl {

namespace {

using detail::mix_seed;

nn::Mlp build_network(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out,
                      nn::Activation head, std::uint64_t seed) {
  std::vector<std::size_t> sizes{in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  std::vector<nn::Activation> acts(hidden.size(), nn::Activation::ReLU);
  acts.push_back(head);
  return nn::init_mlp(sizes, acts, seed);
}

nn::Mlp shrink_head(nn::Mlp net, double scale, std::uint64_t seed) {
  if (scale <= 0.0) return net;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  nn::DenseLayer& head = net.layers().back();
  for (std::size_t r = 0; r < head.weights.rows(); ++r) {
    for (std::size_t c = 0; c < head.weights.cols(); ++c) head.weights(r, c) = u(rng);
  }
  return net;
}

}  // namespace

void AgentConfig::validate() const {
  if (state_dim == 0 || action_dim == 0) throw ConfigError("agent: state and action dims must be positive");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError(fmt::format("agent: gamma {} outside [0, 1]", gamma));
  if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError(fmt::format("agent: tau {} outside (0, 1]", tau));
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw ConfigError("agent: noise_sigma must be >= 0");
  if (batch_size == 0) throw ConfigError("agent: batch_size must be positive");
  if (batch_size > buffer_capacity) {
    throw ConfigError(fmt::format("agent: batch_size {} exceeds buffer_capacity {}", batch_size,
                                  buffer_capacity));
  }
  if (!(actor_lr > 0.0) || !(critic_lr > 0.0)) throw ConfigError("agent: learning rates must be positive");
  if (!(head_init_scale >= 0.0) || !std::isfinite(head_init_scale)) {
    throw ConfigError("agent: head_init_scale must be a finite number >= 0");
  }
  for (std::size_t h : hidden) {
    if (h == 0) throw ConfigError("agent: hidden layer widths must be positive");
  }
}

Vector PolicySnapshot::act(std::span<const double> state) const { return nn::forward(actor, state); }

void soft_update(nn::Mlp& target, const nn::Mlp& online, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError(fmt::format("soft_update: tau {} outside (0, 1]", tau));
  if (!target.same_shape(online)) throw ShapeError("soft_update: networks differ in shape");
  auto tl = target.layers();
  auto ol = online.layers();
  auto blend = [tau](double& t, double o) { t = tau * o + (1.0 - tau) * t; };
  for (std::size_t i = 0; i < tl.size(); ++i) {
    auto tw = tl[i].weights.data();
    auto ow = ol[i].weights.data();
    for (std::size_t k = 0; k < tw.size(); ++k) blend(tw[k], ow[k]);
    for (std::size_t k = 0; k < tl[i].biases.size(); ++k) blend(tl[i].biases[k], ol[i].biases[k]);
  }
}

DdpgAgent::DdpgAgent(AgentConfig config)
    : config_((config.validate(), std::move(config))),
      actor_(shrink_head(build_network(config_.state_dim, config_.hidden, config_.action_dim,
                                       nn::Activation::Tanh, mix_seed(config_.seed, 1)),
                         config_.head_init_scale, mix_seed(config_.seed, 4))),
      critic_(build_network(config_.state_dim + config_.action_dim, config_.hidden, 1,
                            nn::Activation::Identity, mix_seed(config_.seed, 2))),
      target_actor_(actor_),
      target_critic_(critic_),
      actor_opt_(actor_, {config_.actor_lr}),
      critic_opt_(critic_, {config_.critic_lr}),
      buffer_(config_.buffer_capacity),
      rng_(mix_seed(config_.seed, 3)) {}

DdpgAgent::DdpgAgent(AgentConfig config, nn::Mlp actor, nn::Mlp critic, nn::Mlp target_actor,
                     nn::Mlp target_critic)
    : config_((config.validate(), std::move(config))),
      actor_(std::move(actor)),
      critic_(std::move(critic)),
      target_actor_(std::move(target_actor)),
      target_critic_(std::move(target_critic)),
      actor_opt_(actor_, {config_.actor_lr}),
      critic_opt_(critic_, {config_.critic_lr}),
      buffer_(config_.buffer_capacity),
      rng_(mix_seed(config_.seed, 3)) {
  if (actor_.input_dim() != config_.state_dim || actor_.output_dim() != config_.action_dim) {
    throw ConfigError("agent: actor dimensions disagree with config");
  }
  if (critic_.input_dim() != config_.state_dim + config_.action_dim || critic_.output_dim() != 1) {
    throw ConfigError("agent: critic dimensions disagree with config");
  }
  if (actor_.layers().back().activation != nn::Activation::Tanh) {
    throw ConfigError("agent: actor head must be tanh");
  }
  if (!target_actor_.same_shape(actor_) || !target_critic_.same_shape(critic_)) {
    throw ConfigError("agent: target networks differ in shape from online networks");
  }
}

Vector DdpgAgent::critic_input(std::span<const double> state, std::span<const double> action) const {
  if (state.size() != config_.state_dim || action.size() != config_.action_dim) {
    throw ShapeError(fmt::format("critic input: state {} / action {}, expected {} / {}",
                                 state.size(), action.size(), config_.state_dim,
                                 config_.action_dim));
  }
  Vector x(state.begin(), state.end());
  x.insert(x.end(), action.begin(), action.end());
  return x;
}

void DdpgAgent::check_transition(const Transition& t) const {
  if (t.state.size() != config_.state_dim || t.next_state.size() != config_.state_dim ||
      t.action.size() != config_.action_dim) {
    throw ShapeError(fmt::format("transition shapes {}/{}/{} do not match state {} action {}",
                                 t.state.size(), t.action.size(), t.next_state.size(),
                                 config_.state_dim, config_.action_dim));
  }
}

Vector DdpgAgent::select_action(std::span<const double> state, bool explore) {
  if (state.size() != config_.state_dim) {
    throw ShapeError(fmt::format("select_action: state has {} entries, expected {}",
                                 state.size(), config_.state_dim));
  }
  Vector a = nn::forward(actor_, state);
  if (explore && config_.noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, config_.noise_sigma);
    for (double& v : a) v = std::clamp(v + noise(rng_), -1.0, 1.0);
  }
  return a;
}

void DdpgAgent::store_transition(Transition t) {
  check_transition(t);
  buffer_.push(std::move(t));
}

std::vector<Transition> DdpgAgent::sample_batch(std::size_t batch_size) {
  if (buffer_.size() < batch_size) {
    throw NotReadyError(fmt::format("replay buffer holds {} transitions, batch needs {}",
                                    buffer_.size(), batch_size));
  }
  return buffer_.sample(batch_size, rng_);
}

double DdpgAgent::q_value(std::span<const double> state, std::span<const double> action) const {
  return nn::forward(critic_, critic_input(state, action))[0];
}

Vector DdpgAgent::compute_td_targets(std::span<const Transition> batch) const {
  if (batch.empty()) throw ShapeError("compute_td_targets: empty batch");
  Vector y(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Transition& t = batch[i];
    check_transition(t);
    y[i] = t.reward;
    if (!t.done) {
      const Vector next_action = nn::forward(target_actor_, t.next_state);
      const double bootstrap = nn::forward(target_critic_, critic_input(t.next_state, next_action))[0];
      y[i] += config_.gamma * bootstrap;
    }
  }
  return y;
}

ScalarAndGradients DdpgAgent::critic_loss_gradient(std::span<const Transition> batch,
                                                   std::span<const double> targets) const {
  if (batch.empty()) throw ShapeError("critic update: empty batch");
  if (targets.size() != batch.size()) throw ShapeError("critic update: one target per transition required");
  std::vector<nn::ForwardTrace> traces;
  traces.reserve(batch.size());
  Vector q(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    traces.push_back(nn::forward_trace(critic_, critic_input(batch[i].state, batch[i].action)));
    q[i] = traces.back().output()[0];
  }
  const nn::LossResult loss = nn::mse_loss(q, targets);
  ScalarAndGradients out{loss.loss, nn::Gradients::zeros_like(critic_)};
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double g = loss.grad[i];
    nn::backward_accumulate(critic_, traces[i], std::span<const double>(&g, 1), out.grads);
  }
  return out;
}

ScalarAndGradients DdpgAgent::actor_objective_gradient(std::span<const Transition> batch) const {
  if (batch.empty()) throw ShapeError("actor update: empty batch");
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  ScalarAndGradients out{0.0, nn::Gradients::zeros_like(actor_)};
  nn::Gradients critic_scratch = nn::Gradients::zeros_like(critic_);
  for (const Transition& t : batch) {
    check_transition(t);
    const nn::ForwardTrace actor_trace = nn::forward_trace(actor_, t.state);
    const nn::ForwardTrace critic_trace =
        nn::forward_trace(critic_, critic_input(t.state, actor_trace.output()));
    out.value += critic_trace.output()[0] * inv_n;
    const Vector dq_dinput =
        nn::backward_accumulate(critic_, critic_trace, std::span<const double>(&inv_n, 1), critic_scratch);
    const std::span<const double> dq_daction(dq_dinput.data() + config_.state_dim, config_.action_dim);
    nn::backward_accumulate(actor_, actor_trace, dq_daction, out.grads);
  }
  return out;
}

double DdpgAgent::critic_update(std::span<const Transition> batch, std::span<const double> targets) {
  ScalarAndGradients lg = critic_loss_gradient(batch, targets);
  critic_opt_.step(critic_, lg.grads);
  return lg.value;
}

double DdpgAgent::actor_update(std::span<const Transition> batch) {
  ScalarAndGradients og = actor_objective_gradient(batch);
  og.grads *= -1.0;  // Adam minimizes; the policy ascends Q
  actor_opt_.step(actor_, og.grads);
  return og.value;
}

StepReport DdpgAgent::train_step(Transition t) {
  store_transition(std::move(t));
  ++env_steps_;
  StepReport report;
  if (buffer_.size() < config_.batch_size) return report;
  const std::vector<Transition> batch = sample_batch(config_.batch_size);
  const Vector targets = compute_td_targets(batch);
  report.critic_loss = critic_update(batch, targets);
  report.actor_objective = actor_update(batch);
  soft_update(target_actor_, actor_, config_.tau);
  soft_update(target_critic_, critic_, config_.tau);
  report.updated = true;
  ++updates_;
  return report;
}

bool DdpgAgent::parameters_finite() const {
  for (const nn::Mlp* m : {&actor_, &critic_, &target_actor_, &target_critic_}) {
    if (!nn::all_finite(m->flatten())) return false;
  }
  return true;
}

void DdpgAgent::save(std::ostream& os) const {
  os << "ddpg-checkpoint v1\n";
  os << "state_dim " << config_.state_dim << '\n';
  os << "action_dim " << config_.action_dim << '\n';
  os << "gamma " << nn::format_real(config_.gamma) << '\n';
  os << "tau " << nn::format_real(config_.tau) << '\n';
  os << "noise_sigma " << nn::format_real(config_.noise_sigma) << '\n';
  os << "batch_size " << config_.batch_size << '\n';
  os << "buffer_capacity " << config_.buffer_capacity << '\n';
  os << "actor_lr " << nn::format_real(config_.actor_lr) << '\n';
  os << "critic_lr " << nn::format_real(config_.critic_lr) << '\n';
  os << "hidden " << config_.hidden.size();
  for (std::size_t h : config_.hidden) os << ' ' << h;
  os << '\n';
  os << "head_init_scale " << nn::format_real(config_.head_init_scale) << '\n';
  os << "seed " << config_.seed << '\n';
  os << "env_steps " << env_steps_ << '\n';
  os << "updates " << updates_ << '\n';
  os << "actor\n";
  nn::write_mlp(os, actor_);
  os << "critic\n";
  nn::write_mlp(os, critic_);
  os << "target_actor\n";
  nn::write_mlp(os, target_actor_);
  os << "target_critic\n";
  nn::write_mlp(os, target_critic_);
}

void DdpgAgent::save(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw IoError(fmt::format("cannot open '{}' for writing", path));
  save(os);
}

namespace {

template <typename T>
T read_field(std::istream& is, const char* key) {
  std::string name;
  if (!(is >> name) || name != key) {
    throw LoadError(fmt::format("checkpoint: expected field '{}', found '{}'", key, name));
  }
  std::string raw;
  if (!(is >> raw)) throw LoadError(fmt::format("checkpoint: missing value for '{}'", key));
  std::istringstream vs(raw);
  T value{};
  if (!(vs >> value) || !vs.eof()) {
    throw LoadError(fmt::format("checkpoint: bad value '{}' for '{}'", raw, key));
  }
  return value;
}

template <>
double read_field<double>(std::istream& is, const char* key) {
  std::string name;
  if (!(is >> name) || name != key) {
    throw LoadError(fmt::format("checkpoint: expected field '{}', found '{}'", key, name));
  }
  std::string raw;
  if (!(is >> raw)) throw LoadError(fmt::format("checkpoint: missing value for '{}'", key));
  try {
    std::size_t pos = 0;
    const double v = std::stod(raw, &pos);
    if (pos != raw.size()) throw std::invalid_argument(raw);
    return v;
  } catch (const std::exception&) {
    throw LoadError(fmt::format("checkpoint: bad value '{}' for '{}'", raw, key));
  }
}

void expect_section(std::istream& is, const char* name) {
  std::string tok;
  if (!(is >> tok) || tok != name) {
    throw LoadError(fmt::format("checkpoint: expected section '{}', found '{}'", name, tok));
  }
}

}  // namespace

DdpgAgent DdpgAgent::load(std::istream& is) {
  std::string magic, version;
  if (!(is >> magic >> version) || magic != "ddpg-checkpoint") {
    throw LoadError("checkpoint: missing 'ddpg-checkpoint' header");
  }
  if (version != "v1") throw LoadError(fmt::format("checkpoint: unsupported version '{}'", version));
  AgentConfig c;
  c.state_dim = read_field<std::size_t>(is, "state_dim");
  c.action_dim = read_field<std::size_t>(is, "action_dim");
  c.gamma = read_field<double>(is, "gamma");
  c.tau = read_field<double>(is, "tau");
  c.noise_sigma = read_field<double>(is, "noise_sigma");
  c.batch_size = read_field<std::size_t>(is, "batch_size");
  c.buffer_capacity = read_field<std::size_t>(is, "buffer_capacity");
  c.actor_lr = read_field<double>(is, "actor_lr");
  c.critic_lr = read_field<double>(is, "critic_lr");
  const auto n_hidden = read_field<std::size_t>(is, "hidden");
  if (n_hidden > 64) throw LoadError("checkpoint: implausible hidden layer count");
  c.hidden.resize(n_hidden);
  for (auto& h : c.hidden) {
    if (!(is >> h)) throw LoadError("checkpoint: bad hidden layer width");
  }
  c.head_init_scale = read_field<double>(is, "head_init_scale");
  c.seed = read_field<std::uint64_t>(is, "seed");
  const auto env_steps = read_field<std::uint64_t>(is, "env_steps");
  const auto updates = read_field<std::uint64_t>(is, "updates");
  expect_section(is, "actor");
  nn::Mlp actor = nn::read_mlp(is);
  expect_section(is, "critic");
  nn::Mlp critic = nn::read_mlp(is);
  expect_section(is, "target_actor");
  nn::Mlp target_actor = nn::read_mlp(is);
  expect_section(is, "target_critic");
  nn::Mlp target_critic = nn::read_mlp(is);
  try {
    DdpgAgent agent(std::move(c), std::move(actor), std::move(critic), std::move(target_actor),
                    std::move(target_critic));
    agent.env_steps_ = env_steps;
    agent.updates_ = updates;
    return agent;
  } catch (const ConfigError& e) {
    throw LoadError(fmt::format("checkpoint: {}", e.what()));
  }
}

DdpgAgent DdpgAgent::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError(fmt::format("cannot open checkpoint '{}'", path));
  try {
    return load(is);
  } catch (const LoadError& e) {
    throw LoadError(fmt::format("{}: {}", path, e.what()));
  }
}

}  // namespace culprit::rl
