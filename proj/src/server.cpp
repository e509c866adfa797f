#include "rflow/server.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include <sys/socket.h>

#include <atomic>
#include <list>
#include <mutex>
#include <thread>

namespace asio = boost::asio;
namespace beast = boost::beast;
using tcp = asio::ip::tcp;
using nlohmann::json;

namespace rflow {

namespace {

std::string encode(const json &j) { return j.dump(-1, ' ', false, json::error_handler_t::replace); }

json answer(ProtocolSession &session, std::string_view text) {
  try {
    return session.handle_text(text);
  } catch (const std::exception &e) {
    return {{"type", "error"}, {"message", std::string("internal error: ") + e.what()}};
  }
}

} // namespace

struct Server::Impl {
  struct Connection {
    std::thread thread;
    int fd = -1;
    std::atomic<bool> done{false};
  };

  ServerOptions options;
  asio::io_context io;
  tcp::acceptor acceptor{io};
  std::mutex mutex;
  std::list<Connection> connections;
  std::atomic<bool> stopping{false};

  void reap() {
    std::lock_guard lock(mutex);
    for (auto it = connections.begin(); it != connections.end();) {
      if (it->done) {
        it->thread.join();
        it = connections.erase(it);
      } else {
        ++it;
      }
    }
  }

  void close(Connection &c, tcp::socket &socket) {
    std::lock_guard lock(mutex);
    c.fd = -1;
    boost::system::error_code ec;
    socket.close(ec);
  }

  void serve_tcp(Connection &c, tcp::socket socket) {
    ProtocolSession session(options.session);
    boost::system::error_code ec;
    asio::write(socket, asio::buffer(encode(ProtocolSession::hello()) + "\n"), ec);
    asio::streambuf buffer;
    while (!ec) {
      std::size_t n = asio::read_until(socket, buffer, '\n', ec);
      if (ec)
        break;
      std::string line(asio::buffers_begin(buffer.data()), asio::buffers_begin(buffer.data()) + n);
      buffer.consume(n);
      while (!line.empty() && (line.back() == '\n' || line.back() == '\r'))
        line.pop_back();
      if (line.find_first_not_of(" \t") == std::string::npos)
        continue;
      asio::write(socket, asio::buffer(encode(answer(session, line)) + "\n"), ec);
    }
    close(c, socket);
  }

  void serve_ws(Connection &c, tcp::socket socket) {
    ProtocolSession session(options.session);
    beast::websocket::stream<tcp::socket> ws(std::move(socket));
    boost::system::error_code ec;
    ws.accept(ec);
    ws.text(true);
    if (!ec)
      ws.write(asio::buffer(encode(ProtocolSession::hello())), ec);
    while (!ec) {
      beast::flat_buffer buffer;
      ws.read(buffer, ec);
      if (ec)
        break;
      ws.write(asio::buffer(encode(answer(session, beast::buffers_to_string(buffer.data())))), ec);
    }
    close(c, ws.next_layer());
  }
};

Server::Server(ServerOptions options) : impl_(std::make_unique<Impl>()) {
  impl_->options = std::move(options);
  boost::system::error_code ec;
  auto address = asio::ip::make_address(impl_->options.address, ec);
  if (ec)
    throw ServerError("invalid address " + impl_->options.address);
  tcp::endpoint endpoint(address, impl_->options.port);
  auto &acc = impl_->acceptor;
  acc.open(endpoint.protocol(), ec);
  if (!ec)
    acc.set_option(tcp::acceptor::reuse_address(true), ec);
  if (!ec)
    acc.bind(endpoint, ec);
  if (!ec)
    acc.listen(asio::socket_base::max_listen_connections, ec);
  if (ec)
    throw ServerError("cannot listen on " + impl_->options.address + ":" +
                      std::to_string(impl_->options.port) + ": " + ec.message());
}

Server::~Server() { stop(); }

unsigned short Server::port() const { return impl_->acceptor.local_endpoint().port(); }

void Server::run() {
  Impl &s = *impl_;
  while (!s.stopping) {
    tcp::socket socket(s.io);
    boost::system::error_code ec;
    s.acceptor.accept(socket, ec);
    if (ec) {
      if (s.stopping)
        break;
      continue;
    }
    s.reap();
    std::lock_guard lock(s.mutex);
    if (s.stopping)
      break;
    Impl::Connection &c = s.connections.emplace_back();
    c.fd = socket.native_handle();
    c.thread = std::thread([&s, &c, socket = std::move(socket)]() mutable {
      if (s.options.transport == Transport::WebSocket)
        s.serve_ws(c, std::move(socket));
      else
        s.serve_tcp(c, std::move(socket));
      c.done = true;
    });
  }
}

void Server::stop() {
  Impl &s = *impl_;
  if (s.stopping.exchange(true))
    return;
  // shutdown() wakes threads blocked in accept/read without racing their close().
  ::shutdown(s.acceptor.native_handle(), SHUT_RDWR);
  {
    std::lock_guard lock(s.mutex);
    for (auto &c : s.connections)
      if (c.fd >= 0)
        ::shutdown(c.fd, SHUT_RDWR);
  }
  for (auto &c : s.connections)
    if (c.thread.joinable())
      c.thread.join();
  std::lock_guard lock(s.mutex);
  s.connections.clear();
}

} // namespace rflow
