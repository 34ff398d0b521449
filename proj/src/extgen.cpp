#include "fcg/extgen.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>
#include <regex>

#include <signal.h>

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "fcg/error.hpp"

namespace fcg {

namespace {

using json = nlohmann::json;

constexpr std::string_view kProtocol = "fcg-extgen";
constexpr int kProtocolVersion = 1;

std::string errno_text() { return std::strerror(errno); }

void ignore_sigpipe() {
  static const bool once = [] {
    std::signal(SIGPIPE, SIG_IGN);
    return true;
  }();
  (void)once;
}

class FdReader {
 public:
  explicit FdReader(int fd) : fd_(fd) {}

  std::optional<std::string> read_line(std::chrono::milliseconds timeout) {
    while (true) {
      if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return line;
      }
      if (eof_) {
        if (buffer_.empty()) return std::nullopt;
        std::string rest = std::move(buffer_);
        buffer_.clear();
        return rest;
      }
      pollfd p{fd_, POLLIN, 0};
      const int r = ::poll(&p, 1, static_cast<int>(timeout.count()));
      if (r < 0) {
        if (errno == EINTR) continue;
        throw GeneratorError("poll failed: " + errno_text());
      }
      if (r == 0) throw GeneratorError("timed out waiting for external generator");
      char buf[4096];
      const ssize_t n = ::read(fd_, buf, sizeof buf);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw GeneratorError("read failed: " + errno_text());
      }
      if (n == 0) eof_ = true;
      buffer_.append(buf, static_cast<std::size_t>(n));
    }
  }

 private:
  int fd_;
  std::string buffer_;
  bool eof_ = false;
};

void write_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      if (errno == EPIPE || errno == ECONNRESET)
        throw GeneratorError("protocol violation: endpoint closed the connection");
      throw GeneratorError("write to external generator failed: " + errno_text());
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

class ProcessChannel final : public LineChannel {
 public:
  explicit ProcessChannel(const std::string& command) {
    ignore_sigpipe();
    int to_child[2];
    int from_child[2];
    if (::pipe(to_child) != 0) throw GeneratorError("pipe failed: " + errno_text());
    if (::pipe(from_child) != 0) {
      ::close(to_child[0]);
      ::close(to_child[1]);
      throw GeneratorError("pipe failed: " + errno_text());
    }
    pid_ = ::fork();
    if (pid_ < 0) throw GeneratorError("fork failed: " + errno_text());
    if (pid_ == 0) {
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      ::close(to_child[0]);
      ::close(to_child[1]);
      ::close(from_child[0]);
      ::close(from_child[1]);
      ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    in_ = to_child[1];
    out_ = from_child[0];
    ::fcntl(in_, F_SETFD, FD_CLOEXEC);
    ::fcntl(out_, F_SETFD, FD_CLOEXEC);
    reader_ = std::make_unique<FdReader>(out_);
  }

  ~ProcessChannel() override {
    if (in_ >= 0) ::close(in_);
    if (out_ >= 0) ::close(out_);
    if (pid_ > 0) {
      // The server should exit once its stdin closes; give it two seconds.
      int status = 0;
      for (int i = 0; i < 200; ++i) {
        if (::waitpid(pid_, &status, WNOHANG) != 0) return;
        ::usleep(10000);
      }
      ::kill(pid_, SIGKILL);
      while (::waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
      }
    }
  }

  ProcessChannel(const ProcessChannel&) = delete;
  ProcessChannel& operator=(const ProcessChannel&) = delete;

  void write_line(std::string_view line) override {
    std::string data(line);
    data += '\n';
    write_all(in_, data);
  }

  std::optional<std::string> read_line(std::chrono::milliseconds timeout) override {
    return reader_->read_line(timeout);
  }

 private:
  pid_t pid_ = -1;
  int in_ = -1;
  int out_ = -1;
  std::unique_ptr<FdReader> reader_;
};

class TcpChannel final : public LineChannel {
 public:
  TcpChannel(const std::string& host, const std::string& port) {
    ignore_sigpipe();
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (const int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &res); rc != 0)
      throw GeneratorError("cannot resolve " + host + ":" + port + ": " + ::gai_strerror(rc));
    for (addrinfo* ai = res; ai; ai = ai->ai_next) {
      const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
      if (fd < 0) continue;
      if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
        fd_ = fd;
        break;
      }
      ::close(fd);
    }
    ::freeaddrinfo(res);
    if (fd_ < 0) throw GeneratorError("cannot connect to " + host + ":" + port + ": " + errno_text());
    reader_ = std::make_unique<FdReader>(fd_);
  }

  ~TcpChannel() override {
    if (fd_ >= 0) ::close(fd_);
  }

  TcpChannel(const TcpChannel&) = delete;
  TcpChannel& operator=(const TcpChannel&) = delete;

  void write_line(std::string_view line) override {
    std::string data(line);
    data += '\n';
    write_all(fd_, data);
  }

  std::optional<std::string> read_line(std::chrono::milliseconds timeout) override {
    return reader_->read_line(timeout);
  }

 private:
  int fd_ = -1;
  std::unique_ptr<FdReader> reader_;
};

[[noreturn]] void violation(const std::string& what) {
  throw GeneratorError("protocol violation: " + what);
}

} // namespace

Endpoint Endpoint::parse(std::string_view spec) {
  static const std::regex host_port(R"(^(?:tcp://)?([A-Za-z0-9.\-]+|\[[0-9A-Fa-f:]+\]):([0-9]{1,5})$)");
  const std::string s(spec);
  Endpoint e;
  std::smatch m;
  if (std::regex_match(s, m, host_port)) {
    e.kind = Kind::tcp;
    e.host = m[1].str();
    if (e.host.front() == '[') e.host = e.host.substr(1, e.host.size() - 2);
    e.port = m[2].str();
    return e;
  }
  if (s.rfind("tcp://", 0) == 0) throw Error("malformed TCP endpoint '" + s + "'");
  if (s.empty()) throw Error("empty external generator endpoint");
  e.kind = Kind::command;
  e.command = s;
  return e;
}

std::string Endpoint::describe() const {
  return kind == Kind::tcp ? "tcp://" + host + ":" + port : "cmd:" + command;
}

std::unique_ptr<LineChannel> connect(const Endpoint& endpoint) {
  if (endpoint.kind == Endpoint::Kind::tcp)
    return std::make_unique<TcpChannel>(endpoint.host, endpoint.port);
  return std::make_unique<ProcessChannel>(endpoint.command);
}

ExternalGenerator::ExternalGenerator(const Endpoint& endpoint, Options options)
    : ExternalGenerator(connect(endpoint), "external:" + endpoint.describe(), std::move(options)) {}

ExternalGenerator::ExternalGenerator(std::unique_ptr<LineChannel> channel, std::string id,
                                     Options options)
    : channel_(std::move(channel)), id_(std::move(id)), options_(std::move(options)) {
  handshake();
}

void ExternalGenerator::handshake() {
  const auto line = channel_->read_line(options_.timeout);
  if (!line) violation("endpoint closed before sending the handshake");
  json j;
  try {
    j = json::parse(*line);
  } catch (const json::exception&) {
    violation("handshake is not JSON: " + *line);
  }
  if (!j.is_object() || j.value("protocol", std::string{}) != kProtocol)
    violation("unexpected handshake: " + *line);
  if (!j.contains("version") || !j["version"].is_number_integer() ||
      j["version"].get<int>() != kProtocolVersion)
    violation("unsupported protocol version in handshake: " + *line);
}

std::optional<std::string> ExternalGenerator::request(const std::string& request_id,
                                                      const std::string& marked) const {
  std::lock_guard lock(mutex_);
  const json req = {{"id", request_id}, {"marked", marked}};
  channel_->write_line(req.dump());

  const auto line = channel_->read_line(options_.timeout);
  if (!line) violation("endpoint closed the connection (request " + request_id + ")");
  json resp;
  try {
    resp = json::parse(*line);
  } catch (const json::exception&) {
    violation("response is not JSON: " + *line);
  }
  if (!resp.is_object()) violation("response is not a JSON object: " + *line);
  if (resp.contains("error")) {
    const auto& err = resp["error"];
    throw GeneratorError("external generator error: " + (err.is_string() ? err.get<std::string>() : err.dump()));
  }
  if (!resp.contains("id") || !resp["id"].is_string() || resp["id"].get<std::string>() != request_id)
    violation("response id does not match request " + request_id + ": " + *line);
  if (resp.contains("abstain")) {
    if (resp["abstain"] != true) violation("'abstain' must be true: " + *line);
    return std::nullopt;
  }
  if (!resp.contains("comment") || !resp["comment"].is_string())
    violation("response has neither a comment nor an abstention: " + *line);
  return resp["comment"].get<std::string>();
}

std::optional<std::string> ExternalGenerator::generate(const Sample& sample) const {
  std::string request_id = sample.id;
  if (request_id.empty()) {
    std::lock_guard lock(mutex_);
    request_id = "req-" + std::to_string(++counter_);
  }
  return request(request_id, mark_span(sample, options_.marker));
}

} // namespace fcg
