// Copyright 2026 The hsc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hsc/server.hpp"

#include <chrono>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/signal_set.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <nlohmann/json.hpp>

#include "hsc/harness.hpp"

namespace hsc {

namespace beast = boost::beast;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using json = nlohmann::json;

namespace {

constexpr std::size_t kMaxQueuedFrames = 4096;
constexpr double kFrameRate = 60.0;

struct Inbound {
  enum class Kind { Connected, Disconnected, Input, Reset, Configure };
  Kind kind;
  OperatorInput input;
  std::optional<Group> group;
  std::optional<std::uint64_t> seed;
};

std::string error_frame(const std::string& msg) {
  return json{{"type", "error"}, {"msg", msg}}.dump();
}

// Reads an optional channel value, which must be a finite number in [0, 1].
double channel(const json& j, const char* key) {
  if (!j.contains(key)) return 0.0;
  const json& v = j.at(key);
  if (!v.is_number()) throw std::invalid_argument(std::string(key) + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d) || d < 0.0 || d > 1.0) {
    throw std::invalid_argument(std::string(key) + " must lie in [0, 1]");
  }
  return d;
}

Inbound parse_message(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error&) {
    throw std::invalid_argument("malformed JSON");
  }
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
    throw std::invalid_argument("message needs a string \"type\"");
  }
  const std::string type = j.at("type").get<std::string>();
  Inbound in{};
  if (type == "input") {
    in.kind = Inbound::Kind::Input;
    in.input.flex = channel(j, "flex");
    in.input.ext = channel(j, "ext");
    in.input.lift = channel(j, "lift");
    if (j.contains("button")) {
      if (!j.at("button").is_boolean()) throw std::invalid_argument("button must be a boolean");
      in.input.button = j.at("button").get<bool>();
    }
  } else if (type == "reset") {
    in.kind = Inbound::Kind::Reset;
  } else if (type == "configure") {
    in.kind = Inbound::Kind::Configure;
    if (j.contains("group")) {
      const json& g = j.at("group");
      in.group = g.is_string() ? parse_group(g.get<std::string>()) : std::nullopt;
      if (!in.group) throw std::invalid_argument("group must be standard, vibro or shared");
    }
    if (j.contains("seed")) {
      const json& s = j.at("seed");
      if (!s.is_number_unsigned()) throw std::invalid_argument("seed must be a non-negative integer");
      in.seed = s.get<std::uint64_t>();
    }
  } else {
    throw std::invalid_argument("unknown message type '" + type + "'");
  }
  return in;
}

}  // namespace

class WsSession;

struct LiveServer::Impl {
  Impl(ExperimentConfig c, std::filesystem::path o) : config(std::move(c)), out(std::move(o)) {}

  // ---- network side ----
  net::io_context ioc{1};
  tcp::acceptor acceptor{ioc};
  std::shared_ptr<WsSession> client;  // guarded by mu

  bool attach(const std::shared_ptr<WsSession>& s);
  void detach(const WsSession* s);
  void on_message(const std::string& text, const std::shared_ptr<WsSession>& from);
  void publish(std::string frame);
  void do_accept();

  // ---- shared ----
  std::mutex mu;
  std::condition_variable cv;
  std::deque<Inbound> inbox;
  bool stopping = false;

  void push(Inbound in) {
    {
      std::lock_guard lock(mu);
      inbox.push_back(std::move(in));
    }
    cv.notify_one();
  }

  // ---- simulation side, touched only by the sim thread ----
  ExperimentConfig config;
  std::filesystem::path out;
  std::optional<Session> session;
  std::optional<Session> trial_start;
  std::unique_ptr<TrialWriter> writer;
  std::vector<TelemetryRow> rows;
  std::vector<TrialRecord> records;
  int trial = 0;
  bool complete = false;
  bool rebase = true;

  void sim_main();
  void start_session();
  void start_trial(int k);
  void end_trial();
  void step_once(const OperatorInput& input, bool safety);
  void finalize();
  std::string state_frame() const;
};

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket socket, LiveServer::Impl& server)
      : ws_(std::move(socket)), server_(server) {}

  void start() {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(beast::bind_front_handler(&WsSession::on_accept, shared_from_this()));
  }

  void send(std::string frame) {
    net::post(ws_.get_executor(), [self = shared_from_this(), f = std::move(frame)]() mutable {
      if (self->closed_ || self->queue_.size() >= kMaxQueuedFrames) return;
      self->queue_.push_back(std::move(f));
      if (self->queue_.size() == 1) self->do_write();
    });
  }

  void reject(const std::string& msg) {
    closing_ = true;
    send(error_frame(msg));
  }

  void close() {
    net::post(ws_.get_executor(), [self = shared_from_this()] {
      if (self->closed_) return;
      self->closed_ = true;
      beast::error_code ec;
      beast::get_lowest_layer(self->ws_).socket().close(ec);
    });
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    ws_.text(true);
    if (!server_.attach(shared_from_this())) {
      reject("another operator is already connected");
      return;
    }
    do_read();
  }

  void do_read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&WsSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      closed_ = true;
      server_.detach(this);
      return;
    }
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    server_.on_message(text, shared_from_this());
    do_read();
  }

  void do_write() {
    ws_.async_write(net::buffer(queue_.front()),
                    beast::bind_front_handler(&WsSession::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) {
      closed_ = true;
      server_.detach(this);
      return;
    }
    queue_.pop_front();
    if (!queue_.empty()) {
      do_write();
    } else if (closing_ && !closed_) {
      closed_ = true;
      ws_.async_close(websocket::close_code::try_again_later,
                      [self = shared_from_this()](beast::error_code) {});
    }
  }

  websocket::stream<beast::tcp_stream> ws_;
  LiveServer::Impl& server_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
  bool closing_ = false;
  bool closed_ = false;
};

bool LiveServer::Impl::attach(const std::shared_ptr<WsSession>& s) {
  {
    std::lock_guard lock(mu);
    if (client) return false;
    client = s;
    inbox.push_back({Inbound::Kind::Connected, {}, {}, {}});
  }
  cv.notify_one();
  return true;
}

void LiveServer::Impl::detach(const WsSession* s) {
  {
    std::lock_guard lock(mu);
    if (client.get() != s) return;
    client.reset();
    inbox.push_back({Inbound::Kind::Disconnected, {}, {}, {}});
  }
  cv.notify_one();
}

void LiveServer::Impl::on_message(const std::string& text, const std::shared_ptr<WsSession>& from) {
  try {
    push(parse_message(text));
  } catch (const std::invalid_argument& e) {
    from->send(error_frame(e.what()));
  }
}

void LiveServer::Impl::publish(std::string frame) {
  std::shared_ptr<WsSession> target;
  {
    std::lock_guard lock(mu);
    target = client;
  }
  if (target) target->send(std::move(frame));
}

void LiveServer::Impl::do_accept() {
  acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
    if (ec) return;  // acceptor closed
    std::make_shared<WsSession>(std::move(socket), *this)->start();
    do_accept();
  });
}

std::string LiveServer::Impl::state_frame() const {
  const PlantState& p = session->plant();
  const SessionMode& m = session->arbiter().mode();
  return json{{"type", "state"},
              {"t", session->trial_time()},
              {"trial", trial},
              {"mode", std::string(to_string(mode_tag(m)))},
              {"stage", std::string(to_string(session->arbiter().autonomy().stage))},
              {"aperture_pct", 100.0 * p.aperture / config.plant.max_aperture},
              {"L", p.load_voltage},
              {"nu", session->last_envelope()},
              {"led", m.led},
              {"airborne", p.airborne},
              {"broken", p.broken},
              {"lifts", session->lifts()},
              {"trial_clock", config.schedule.trial_duration - session->trial_time()}}
      .dump();
}

void LiveServer::Impl::start_session() {
  session.emplace(config.group, config.session_params());
  records.clear();
  complete = false;
  start_trial(1);
}

void LiveServer::Impl::start_trial(int k) {
  trial = k;
  session->begin_trial();
  trial_start = session;
  rows.clear();
  writer = std::make_unique<TrialWriter>(out, k);
  rebase = true;
}

void LiveServer::Impl::end_trial() {
  writer->finish();
  writer.reset();
  records.push_back(summarize_trial(trial, rows, segment_params(config)));
  publish(json{{"type", "event"}, {"name", "trial_end"}, {"t", session->trial_time()}}.dump());
  if (trial < config.schedule.trials) {
    start_trial(trial + 1);
  } else {
    complete = true;
    write_summary(config, records, out);
    publish(json{{"type", "event"}, {"name", "session_complete"}, {"t", session->trial_time()}}
                .dump());
  }
}

void LiveServer::Impl::step_once(const OperatorInput& input, bool safety) {
  const std::int64_t n = session->tick();
  const InputSample sample{input, safety};
  const TelemetryRow row = session->step(input, safety);
  writer->add(n, sample, row);
  rows.push_back(row);
  for (std::string_view name : event_names(row.events)) {
    publish(json{{"type", "event"}, {"name", std::string(name)}, {"t", row.t}}.dump());
  }
  const auto frame_ticks = std::max<std::int64_t>(
      1, std::llround(1.0 / (kFrameRate * config.plant.tick)));
  if (safety || session->tick() % frame_ticks == 0) publish(state_frame());
  if (session->tick() >= std::llround(config.schedule.trial_duration / config.plant.tick)) {
    end_trial();
  }
}

void LiveServer::Impl::finalize() {
  if (complete || !session) return;
  writer->finish();
  writer.reset();
  records.push_back(summarize_trial(trial, rows, segment_params(config)));
  write_summary(config, records, out);
  complete = true;
}

void LiveServer::Impl::sim_main() {
  using clock = std::chrono::steady_clock;
  bool connected = false;
  OperatorInput held;
  clock::time_point base_wall = clock::now();
  std::int64_t base_tick = 0;

  start_session();
  while (true) {
    std::deque<Inbound> batch;
    {
      std::unique_lock lock(mu);
      if (!connected || complete) {
        cv.wait(lock, [&] { return stopping || !inbox.empty(); });
      } else {
        cv.wait_for(lock, std::chrono::milliseconds(1),
                    [&] { return stopping || !inbox.empty(); });
      }
      if (stopping) break;
      batch.swap(inbox);
    }
    for (const Inbound& in : batch) {
      switch (in.kind) {
        case Inbound::Kind::Connected:
          connected = true;
          held = {};
          rebase = true;
          publish(state_frame());
          break;
        case Inbound::Kind::Disconnected:
          if (connected && !complete) step_once({}, true);
          connected = false;
          break;
        case Inbound::Kind::Input:
          held = in.input;
          break;
        case Inbound::Kind::Reset:
          if (complete) break;
          session = trial_start;
          rows.clear();
          writer = std::make_unique<TrialWriter>(out, trial);
          held = {};
          rebase = true;
          publish(json{{"type", "event"}, {"name", "trial_reset"}, {"t", 0.0}}.dump());
          break;
        case Inbound::Kind::Configure:
          if (in.group) config.group = *in.group;
          if (in.seed) config.seed = *in.seed;
          writer.reset();
          start_session();
          held = {};
          publish(json{{"type", "event"}, {"name", "configured"}, {"t", 0.0}}.dump());
          publish(state_frame());
          break;
      }
    }
    if (!connected || complete) continue;
    if (rebase) {
      base_wall = clock::now();
      base_tick = session->tick();
      rebase = false;
    }
    const double elapsed = std::chrono::duration<double>(clock::now() - base_wall).count();
    const auto due = base_tick + static_cast<std::int64_t>(
                                     std::floor(elapsed * config.io.speed / config.plant.tick));
    while (connected && !complete && !rebase && session->tick() < due) {
      step_once(held, false);
    }
  }
  finalize();
}

LiveServer::LiveServer(ExperimentConfig config, std::filesystem::path out_dir)
    : impl_(std::make_unique<Impl>(std::move(config), std::move(out_dir))) {
  impl_->config.validate();
}

LiveServer::~LiveServer() = default;

void LiveServer::bind() {
  beast::error_code ec;
  const auto address = net::ip::make_address(impl_->config.io.listen_address, ec);
  if (ec) throw ConfigError("invalid listen address " + impl_->config.io.listen_address);
  const tcp::endpoint endpoint(address, static_cast<unsigned short>(impl_->config.io.port));
  auto& acc = impl_->acceptor;
  acc.open(endpoint.protocol(), ec);
  if (!ec) acc.set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) acc.bind(endpoint, ec);
  if (ec == net::error::address_in_use || ec == net::error::access_denied) {
    throw PortInUseError("cannot listen on " + impl_->config.io.listen_address + ":" +
                         std::to_string(impl_->config.io.port) + ": " + ec.message());
  }
  if (!ec) acc.listen(net::socket_base::max_listen_connections, ec);
  if (ec) throw IoError("cannot listen: " + ec.message());
}

unsigned short LiveServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void LiveServer::run(bool handle_signals) {
  if (!impl_->acceptor.is_open()) bind();
  impl_->do_accept();
  std::optional<net::signal_set> signals;
  if (handle_signals) {
    signals.emplace(impl_->ioc, SIGINT, SIGTERM);
    signals->async_wait([this](beast::error_code ec, int) {
      if (!ec) stop();
    });
  }
  std::thread sim([this] { impl_->sim_main(); });
  impl_->ioc.run();
  {
    std::lock_guard lock(impl_->mu);
    impl_->stopping = true;
  }
  impl_->cv.notify_one();
  sim.join();
  std::lock_guard lock(impl_->mu);
  impl_->client.reset();
}

void LiveServer::stop() {
  net::post(impl_->ioc, [this] {
    beast::error_code ec;
    impl_->acceptor.close(ec);
    std::shared_ptr<WsSession> c;
    {
      std::lock_guard lock(impl_->mu);
      c = impl_->client;
    }
    if (c) c->close();
    impl_->ioc.stop();
  });
}

}  // namespace hsc
