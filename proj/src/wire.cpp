#include "raf/wire.hpp"

#include <openssl/evp.h>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "raf/error.hpp"

namespace raf {

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw InvalidInput("base64 length is not a multiple of 4");
  std::vector<std::uint8_t> out(3 * (text.size() / 4));
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0) throw InvalidInput("malformed base64 payload");
  // EVP_DecodeBlock keeps the bytes produced by '=' padding.
  std::size_t padding = 0;
  if (!text.empty() && text.back() == '=') ++padding;
  if (text.size() > 1 && text[text.size() - 2] == '=') ++padding;
  out.resize(static_cast<std::size_t>(n) - padding);
  return out;
}

std::string make_identify_request(const Image& img) {
  return nlohmann::json{{"image_b64", base64_encode(encode_png(img))}}.dump();
}

Image parse_identify_request(std::string_view body) {
  const auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("image_b64") ||
      !j["image_b64"].is_string()) {
    throw InvalidInput("request body must be {\"image_b64\": <base64 PNG>}");
  }
  const auto bytes = base64_decode(j["image_b64"].get<std::string>());
  try {
    return decode_png(bytes);
  } catch (const IoError& e) {
    throw InvalidInput(e.what());
  }
}

std::string make_identify_response(const OracleResponse& response) {
  nlohmann::json j;
  j["identity"] = response.identity ? nlohmann::json(*response.identity) : nlohmann::json(nullptr);
  j["confidence"] = response.confidence;
  return j.dump();
}

OracleResponse parse_identify_response(std::string_view body) {
  const auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("confidence") ||
      !j["confidence"].is_number()) {
    throw TransportError("malformed oracle response: " + std::string(body.substr(0, 200)));
  }
  std::optional<std::string> id;
  if (j.contains("identity") && j["identity"].is_string()) id = j["identity"].get<std::string>();
  try {
    return {std::move(id), j["confidence"].get<double>()};
  } catch (const InvalidInput& e) {
    throw TransportError(std::string("malformed oracle response: ") + e.what());
  }
}

struct RemoteOracle::Impl {
  explicit Impl(const std::string& url) : client(url) {}
  httplib::Client client;
};

RemoteOracle::RemoteOracle(const std::string& url, std::string client_token,
                           double timeout_seconds)
    : token_(std::move(client_token)) {
  try {
    impl_ = std::make_unique<Impl>(url);
  } catch (const std::exception& e) {
    throw InvalidInput("invalid oracle url '" + url + "': " + e.what());
  }
  if (!impl_->client.is_valid()) throw InvalidInput("invalid oracle url '" + url + "'");
  const auto secs = static_cast<time_t>(timeout_seconds);
  const auto usecs = static_cast<time_t>((timeout_seconds - static_cast<double>(secs)) * 1e6);
  impl_->client.set_connection_timeout(secs, usecs);
  impl_->client.set_read_timeout(secs, usecs);
  impl_->client.set_write_timeout(secs, usecs);
}

RemoteOracle::~RemoteOracle() = default;

OracleResponse RemoteOracle::query(const Image& img) {
  const httplib::Headers headers = {{kClientTokenHeader, token_}};
  auto res = impl_->client.Post(kIdentifyPath, headers, make_identify_request(img),
                                "application/json");
  if (!res) throw TransportError("oracle request failed: " + httplib::to_string(res.error()));
  if (res->status != 200) {
    throw TransportError("oracle returned HTTP " + std::to_string(res->status) + ": " + res->body);
  }
  return parse_identify_response(res->body);
}

}  // namespace raf
