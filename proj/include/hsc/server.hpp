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

#pragma once

#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>

#include "hsc/config.hpp"

namespace hsc {

class PortInUseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Live session over WebSocket, one JSON object per text frame.
///
/// Client to server:
///   {"type":"input","flex":f,"ext":e,"lift":l,"button":b}
///   {"type":"reset"}                       restart the current trial
///   {"type":"configure","group":g,"seed":n} restart the whole session
/// Server to client:
///   {"type":"state",...} at 60 Hz of simulated time
///   {"type":"event","name":..,"t":..}
///   {"type":"error","msg":..}
///
/// One operator at a time; a second connection gets an error frame and is
/// closed. The simulation runs only while an operator is connected. A lost
/// connection forces one tick with the motor at 0, then pauses. Telemetry,
/// inputs and summaries go to the output directory exactly as in batch mode.
class LiveServer {
 public:
  LiveServer(ExperimentConfig config, std::filesystem::path out_dir);
  ~LiveServer();
  LiveServer(const LiveServer&) = delete;
  LiveServer& operator=(const LiveServer&) = delete;

  /// Binds the listening socket. Throws PortInUseError if the port is taken.
  void bind();
  /// Actual port, useful after binding port 0.
  unsigned short port() const;
  /// Serves until stop() or SIGINT/SIGTERM (when `handle_signals`).
  void run(bool handle_signals = false);
  /// Thread-safe. Flushes the current trial's files.
  void stop();

 private:
  friend class WsSession;
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace hsc
