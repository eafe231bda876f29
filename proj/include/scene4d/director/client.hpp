#pragma once

#include <fstream>
#include <memory>
#include <string>
#include <vector>

namespace scene4d {

struct ChatRequest {
  std::string system;
  std::string user;
};

// Blocking chat-completion endpoint returning the assistant's text.
class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual std::string complete(const ChatRequest& request) = 0;
};

// Process-wide switch. When off, HttpChatClient refuses to connect.
void set_network_enabled(bool enabled);
bool network_enabled();

struct HttpClientSettings {
  std::string url;      // full endpoint, e.g. https://host/v1/chat/completions
  std::string api_key;
  std::string model = "gpt-4";
  int timeout_seconds = 60;

  // Reads DIRECTOR_API_URL and DIRECTOR_API_KEY (and DIRECTOR_MODEL when set).
  // Throws ConfigError when the URL is missing.
  static HttpClientSettings from_environment();
};

// OpenAI-style chat completions over HTTP(S). Throws NetworkError on
// transport failures, non-2xx replies, or when networking is disabled.
class HttpChatClient : public ChatClient {
 public:
  explicit HttpChatClient(HttpClientSettings settings);
  std::string complete(const ChatRequest& request) override;

 private:
  HttpClientSettings settings_;
};

// Replays the responses of a transcript file in order.
class ReplayClient : public ChatClient {
 public:
  explicit ReplayClient(const std::string& transcript_path);
  explicit ReplayClient(std::vector<std::string> responses);
  std::string complete(const ChatRequest& request) override;
  std::size_t remaining() const { return responses_.size() - cursor_; }

 private:
  std::vector<std::string> responses_;
  std::size_t cursor_ = 0;
};

// Logs every exchange of `inner` verbatim, one JSON object per line:
// {"request": {"system", "user"}, "response"} or {"request", "error"}.
class TranscriptClient : public ChatClient {
 public:
  TranscriptClient(std::unique_ptr<ChatClient> inner, const std::string& path);
  std::string complete(const ChatRequest& request) override;

 private:
  std::unique_ptr<ChatClient> inner_;
  std::ofstream out_;
};

}  // namespace scene4d
