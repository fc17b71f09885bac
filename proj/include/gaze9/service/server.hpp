#pragma once

#include <sys/socket.h>

#include <atomic>
#include <list>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <string_view>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "gaze9/service/config.hpp"
#include "gaze9/service/session.hpp"

namespace gaze9::service {

namespace asio = boost::asio;
namespace beast = boost::beast;
using tcp = asio::ip::tcp;

/// TCP endpoint serving one Session per connection, each on its own thread.
///
/// A connection whose first bytes are "GET " is upgraded to a WebSocket and
/// exchanges one JSON message per text frame. Anything else is read as
/// newline-delimited JSON, with each reply written as one line.
class Server {
 public:
  Server(SessionConfig config, std::shared_ptr<const Model> model, std::ostream* log = nullptr)
      : config_(std::move(config)), model_(std::move(model)), log_(log), acceptor_(io_) {
    config_.validate();
  }

  ~Server() { stop(); }

  /// Binds and listens; returns the bound port (useful with port 0).
  std::uint16_t listen(const Endpoint& ep) {
    const tcp::endpoint endpoint(asio::ip::make_address(ep.host), ep.port);
    acceptor_.open(endpoint.protocol());
    acceptor_.set_option(asio::socket_base::reuse_address(true));
    acceptor_.bind(endpoint);
    acceptor_.listen();
    return acceptor_.local_endpoint().port();
  }

  std::uint16_t port() const { return acceptor_.local_endpoint().port(); }

  /// Accepts connections until stop().
  void run() {
    accept_next();
    io_.run();
  }

  void stop() {
    if (stopped_.exchange(true)) return;
    asio::post(io_, [this] {
      boost::system::error_code ignored;
      acceptor_.close(ignored);
    });
    io_.stop();
    std::list<Connection> conns;
    {
      std::lock_guard lock(mu_);
      for (auto& c : connections_) ::shutdown(c.socket->native_handle(), SHUT_RDWR);
      conns.swap(connections_);
    }
    for (auto& c : conns) {
      if (c.thread.joinable()) c.thread.join();
    }
  }

 private:
  struct Connection {
    std::shared_ptr<tcp::socket> socket;
    std::thread thread;
  };

  void accept_next() {
    acceptor_.async_accept([this](boost::system::error_code ec, tcp::socket socket) {
      if (ec || stopped_) return;
      auto sock = std::make_shared<tcp::socket>(std::move(socket));
      const std::string id = std::to_string(++next_id_);
      {
        std::lock_guard lock(mu_);
        if (stopped_) return;
        connections_.push_back({sock, std::thread([this, sock, id] { serve(sock, id); })});
      }
      accept_next();
    });
  }

  void serve(std::shared_ptr<tcp::socket> sock, const std::string& id) {
    try {
      Session session(config_, model_, id);
      beast::flat_buffer buffer;
      // Peek at the first bytes to choose the protocol.
      auto head = [&] {
        const auto data = buffer.data();
        return std::string_view(static_cast<const char*>(data.data()), data.size());
      };
      constexpr std::string_view kGet = "GET ";
      while (head().size() < kGet.size() && kGet.starts_with(head())) {
        const auto n = sock->read_some(buffer.prepare(512));
        buffer.commit(n);
      }
      if (head().starts_with(kGet)) {
        serve_websocket(*sock, buffer, session);
      } else {
        serve_lines(*sock, std::string(head()), session);
      }
    } catch (const std::exception& e) {
      note("connection " + id + " closed: " + e.what());
    }
  }

  void serve_lines(tcp::socket& sock, std::string pending, Session& session) {
    char chunk[4096];
    for (;;) {
      std::size_t nl;
      while ((nl = pending.find('\n')) != std::string::npos) {
        std::string line = pending.substr(0, nl);
        pending.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::string reply;
        for (const auto& m : session.handle_text(line)) reply += m.dump() + "\n";
        if (!reply.empty()) asio::write(sock, asio::buffer(reply));
      }
      boost::system::error_code ec;
      const auto n = sock.read_some(asio::buffer(chunk), ec);
      if (ec) return;
      pending.append(chunk, n);
    }
  }

  void serve_websocket(tcp::socket& sock, beast::flat_buffer& buffer, Session& session) {
    beast::http::request<beast::http::string_body> req;
    beast::http::read(sock, buffer, req);
    beast::websocket::stream<tcp::socket&> ws(sock);
    ws.accept(req);
    ws.text(true);
    buffer.consume(buffer.size());
    for (;;) {
      boost::system::error_code ec;
      ws.read(buffer, ec);
      if (ec) return;
      const std::string text = beast::buffers_to_string(buffer.data());
      buffer.consume(buffer.size());
      for (const auto& m : session.handle_text(text)) ws.write(asio::buffer(m.dump()));
    }
  }

  void note(const std::string& s) {
    if (!log_) return;
    std::lock_guard lock(mu_);
    *log_ << s << '\n';
  }

  SessionConfig config_;
  std::shared_ptr<const Model> model_;
  std::ostream* log_;
  asio::io_context io_;
  tcp::acceptor acceptor_;
  std::atomic<bool> stopped_{false};
  std::atomic<std::uint64_t> next_id_{0};
  std::mutex mu_;
  std::list<Connection> connections_;
};

}  // namespace gaze9::service
