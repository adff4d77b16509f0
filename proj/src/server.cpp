#include <httplib.h>
#include <nlohmann/json.hpp>

#include <mutex>
#include <thread>
#include <unordered_map>

#include "raf/error.hpp"
#include "raf/harness.hpp"
#include "raf/wire.hpp"

namespace raf {

struct OracleServer::Impl {
  Impl(std::shared_ptr<const Gallery> g, std::optional<std::size_t> b)
      : oracle(std::move(g)), budget(b) {}

  LocalOracle oracle;
  std::optional<std::size_t> budget;
  std::mutex mutex;
  std::unordered_map<std::string, std::size_t> spent;
  httplib::Server server;
  std::thread thread;
  std::string host;
  int port = 0;

  // Charges one request to the client; false once the budget is gone.
  bool charge(const std::string& token) {
    if (!budget) return true;
    std::lock_guard lock(mutex);
    std::size_t& used = spent[token];
    if (used >= *budget) return false;
    ++used;
    return true;
  }

  void handle(const httplib::Request& req, httplib::Response& res) {
    std::string token = req.get_header_value(kClientTokenHeader);
    if (token.empty()) token = "anonymous";
    if (!charge(token)) {
      res.status = 429;
      res.set_content(R"({"error":"budget_exhausted"})", "application/json");
      return;
    }
    Image img;
    try {
      img = parse_identify_request(req.body);
    } catch (const Error& e) {
      res.status = 400;
      res.set_content(nlohmann::json{{"error", e.what()}}.dump(), "application/json");
      return;
    }
    // LocalOracle is stateless over an immutable gallery; concurrent handlers are fine.
    const OracleResponse response = oracle.query(img);
    res.status = 200;
    res.set_content(make_identify_response(response), "application/json");
  }
};

OracleServer::OracleServer(std::shared_ptr<const Gallery> gallery,
                           std::optional<std::size_t> per_client_budget)
    : impl_(std::make_unique<Impl>(std::move(gallery), per_client_budget)) {
  impl_->server.Post(kIdentifyPath, [this](const httplib::Request& req, httplib::Response& res) {
    impl_->handle(req, res);
  });
  impl_->server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"status":"ok"})", "application/json");
  });
}

OracleServer::~OracleServer() { stop(); }

int OracleServer::bind(const std::string& host, int port) {
  impl_->host = host;
  if (port == 0) {
    impl_->port = impl_->server.bind_to_any_port(host);
    if (impl_->port < 0) throw IoError("cannot bind " + host);
  } else {
    if (!impl_->server.bind_to_port(host, port)) {
      throw IoError("cannot bind " + host + ":" + std::to_string(port));
    }
    impl_->port = port;
  }
  return impl_->port;
}

void OracleServer::start() {
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void OracleServer::run() { impl_->server.listen_after_bind(); }

void OracleServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::string OracleServer::url() const {
  return "http://" + impl_->host + ":" + std::to_string(impl_->port);
}

std::unique_ptr<OracleServer> serve_oracle(std::shared_ptr<const Gallery> gallery,
                                           const std::string& bind_address,
                                           std::optional<std::size_t> per_client_budget) {
  const auto colon = bind_address.rfind(':');
  if (colon == std::string::npos) throw InvalidInput("bind address must be host:port");
  const std::string host = bind_address.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(bind_address.substr(colon + 1));
  } catch (const std::exception&) {
    throw InvalidInput("invalid port in bind address '" + bind_address + "'");
  }
  auto server = std::make_unique<OracleServer>(std::move(gallery), per_client_budget);
  server->bind(host, port);
  server->start();
  return server;
}

}  // namespace raf
