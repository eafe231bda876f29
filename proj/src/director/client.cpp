#include "scene4d/director/client.hpp"

#include <atomic>
#include <cstdlib>

#include "json.hpp"
#include "scene4d/core/error.hpp"

namespace scene4d {

namespace {
std::atomic<bool> g_network_enabled{true};
}

void set_network_enabled(bool enabled) { g_network_enabled = enabled; }
bool network_enabled() { return g_network_enabled; }

HttpClientSettings HttpClientSettings::from_environment() {
  HttpClientSettings s;
  const char* url = std::getenv("DIRECTOR_API_URL");
  if (url == nullptr || *url == '\0') throw ConfigError("DIRECTOR_API_URL is not set");
  s.url = url;
  if (const char* key = std::getenv("DIRECTOR_API_KEY")) s.api_key = key;
  if (const char* model = std::getenv("DIRECTOR_MODEL"); model != nullptr && *model != '\0') s.model = model;
  return s;
}

ReplayClient::ReplayClient(const std::string& transcript_path) {
  std::ifstream in(transcript_path);
  if (!in) throw LoadError("cannot open transcript " + transcript_path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      if (j.contains("response")) responses_.push_back(j.at("response").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw LoadError(std::string("malformed transcript line: ") + e.what());
    }
  }
}

ReplayClient::ReplayClient(std::vector<std::string> responses) : responses_(std::move(responses)) {}

std::string ReplayClient::complete(const ChatRequest&) {
  if (cursor_ >= responses_.size()) throw NetworkError("transcript exhausted");
  return responses_[cursor_++];
}

TranscriptClient::TranscriptClient(std::unique_ptr<ChatClient> inner, const std::string& path)
    : inner_(std::move(inner)), out_(path, std::ios::app) {
  if (!out_) throw Error("cannot open " + path + " for writing");
}

std::string TranscriptClient::complete(const ChatRequest& request) {
  nlohmann::json j;
  j["request"] = {{"system", request.system}, {"user", request.user}};
  try {
    std::string response = inner_->complete(request);
    j["response"] = response;
    out_ << j.dump() << '\n';
    out_.flush();
    return response;
  } catch (const std::exception& e) {
    j["error"] = e.what();
    out_ << j.dump() << '\n';
    out_.flush();
    throw;
  }
}

}  // namespace scene4d
