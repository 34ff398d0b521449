#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "fcg/generator.hpp"

namespace fcg {

// Where an external generator lives: a shell command started as a child
// process (stdio), or a TCP server.
struct Endpoint {
  enum class Kind { command, tcp };
  Kind kind = Kind::command;
  std::string command;
  std::string host;
  std::string port;

  // "tcp://host:port" and "host:port" select TCP; anything else is a command.
  static Endpoint parse(std::string_view spec);
  std::string describe() const;
};

// Bidirectional line-oriented byte stream.
class LineChannel {
 public:
  virtual ~LineChannel() = default;
  virtual void write_line(std::string_view line) = 0;
  // Returns nullopt on end of stream. Throws GeneratorError on timeout.
  virtual std::optional<std::string> read_line(std::chrono::milliseconds timeout) = 0;
};

std::unique_ptr<LineChannel> connect(const Endpoint& endpoint);

// Client side of the external generator line protocol:
//   server -> {"protocol":"fcg-extgen","version":1}       (first line)
//   client -> {"id": "...", "marked": "..."}
//   server -> {"id": "...", "comment": "..."} | {"id": "...", "abstain": true}
// One request in flight per connection; calls are serialized.
class ExternalGenerator final : public Generator {
 public:
  struct Options {
    std::string marker = std::string(kDefaultMarker);
    std::chrono::milliseconds timeout{30000};
  };

  ExternalGenerator(const Endpoint& endpoint, Options options);
  // Takes an already-open channel; performs the handshake.
  ExternalGenerator(std::unique_ptr<LineChannel> channel, std::string id, Options options);

  std::optional<std::string> generate(const Sample& sample) const override;
  std::string id() const override { return id_; }

  // Sends one already-marked sentence under an explicit request id.
  std::optional<std::string> request(const std::string& request_id, const std::string& marked) const;

 private:
  void handshake();

  std::unique_ptr<LineChannel> channel_;
  std::string id_;
  Options options_;
  mutable std::mutex mutex_;
  mutable std::size_t counter_ = 0;
};

} // namespace fcg
