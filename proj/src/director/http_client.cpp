#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"
#include "json.hpp"
#include "scene4d/core/error.hpp"
#include "scene4d/director/client.hpp"

namespace scene4d {

HttpChatClient::HttpChatClient(HttpClientSettings settings) : settings_(std::move(settings)) {
  if (settings_.url.empty()) throw ConfigError("chat endpoint URL is empty");
}

std::string HttpChatClient::complete(const ChatRequest& request) {
  if (!network_enabled()) throw NetworkError("network access is disabled");

  const auto scheme_end = settings_.url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("chat endpoint URL needs a scheme");
  const auto path_start = settings_.url.find('/', scheme_end + 3);
  const std::string origin = settings_.url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : settings_.url.substr(path_start);

  nlohmann::json body;
  body["model"] = settings_.model;
  body["temperature"] = 0;
  body["response_format"] = {{"type", "json_object"}};
  body["messages"] = nlohmann::json::array({{{"role", "system"}, {"content", request.system}},
                                            {{"role", "user"}, {"content", request.user}}});

  httplib::Client cli(origin);
  cli.set_connection_timeout(settings_.timeout_seconds);
  cli.set_read_timeout(settings_.timeout_seconds);
  httplib::Headers headers;
  if (!settings_.api_key.empty()) headers.emplace("Authorization", "Bearer " + settings_.api_key);

  auto res = cli.Post(path, headers, body.dump(), "application/json");
  if (!res) throw NetworkError("chat request failed: " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300) {
    throw NetworkError("chat endpoint returned HTTP " + std::to_string(res->status));
  }
  try {
    const auto reply = nlohmann::json::parse(res->body);
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw NetworkError(std::string("unexpected chat reply: ") + e.what());
  }
}

}  // namespace scene4d
