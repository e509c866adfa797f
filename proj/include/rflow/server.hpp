#pragma once

#include "rflow/protocol.hpp"

#include <memory>

namespace rflow {

enum class Transport { Tcp, WebSocket };

struct ServerOptions {
  Transport transport = Transport::Tcp;
  std::string address = "127.0.0.1";
  /// 0 picks a free port; see Server::port().
  unsigned short port = 1042;
  SessionOptions session;
};

class ServerError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Accepts clients and gives each its own ProtocolSession on a dedicated thread.
/// TCP messages are newline-delimited JSON; websocket messages are one JSON text per frame.
class Server {
public:
  /// Binds immediately; throws ServerError when the address is unavailable.
  explicit Server(ServerOptions options);
  ~Server();

  Server(const Server &) = delete;
  Server &operator=(const Server &) = delete;

  unsigned short port() const;

  /// Blocks until stop() is called.
  void run();
  /// Closes the listener and every open connection, then waits for the client threads.
  void stop();

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

} // namespace rflow
