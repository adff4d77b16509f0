#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "raf/oracle.hpp"

namespace raf {

/// HTTP header carrying the opaque client identity for server-side budgets.
inline constexpr const char* kClientTokenHeader = "X-Client-Token";
inline constexpr const char* kIdentifyPath = "/identify";

std::string base64_encode(std::span<const std::uint8_t> bytes);
/// Throws InvalidInput on malformed input.
std::vector<std::uint8_t> base64_decode(std::string_view text);

/// {"image_b64": <base64 PNG>}
std::string make_identify_request(const Image& img);
/// Throws InvalidInput when the body is not a decodable request.
Image parse_identify_request(std::string_view body);

/// {"identity": string|null, "confidence": number}
std::string make_identify_response(const OracleResponse& response);
OracleResponse parse_identify_response(std::string_view body);

/// Oracle over the HTTP wire protocol. One instance per worker.
class RemoteOracle final : public Oracle {
 public:
  /// `url` is scheme://host:port, e.g. http://127.0.0.1:8080.
  explicit RemoteOracle(const std::string& url, std::string client_token = "raf",
                        double timeout_seconds = 10.0);
  ~RemoteOracle() override;
  RemoteOracle(const RemoteOracle&) = delete;
  RemoteOracle& operator=(const RemoteOracle&) = delete;

  /// Throws TransportError on connection failure or any non-200 status.
  OracleResponse query(const Image& img) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::string token_;
};

}  // namespace raf
