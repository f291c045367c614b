#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "wtdiag/types.hpp"

namespace wtdiag {

struct ContentPart {
  enum class Kind { kText, kImage };
  Kind kind = Kind::kText;
  std::string text;          // kText
  std::string data_base64;   // kImage
  std::string media_type;    // kImage, e.g. "image/png"

  static ContentPart make_text(std::string text);
  static ContentPart make_image(std::string data_base64, std::string media_type);

  friend bool operator==(const ContentPart&, const ContentPart&) = default;
};

struct ChatMessage {
  std::string role;  // "system", "user" or "assistant"
  std::vector<ContentPart> parts;

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

// How image parts are laid out on the wire. kImageUrl sends
// {"type":"image_url","image_url":{"url":"data:<media>;base64,<data>"}};
// kBase64Source sends
// {"type":"image","source":{"type":"base64","media_type":..,"data":..}}.
enum class ImagePartStyle { kImageUrl, kBase64Source };

// Which pipeline stage a request serves; the stub transport answers in the
// matching format. Not sent on the wire.
enum class ChatPurpose { kAnalysis, kAdvice };

struct ChatRequest {
  std::string endpoint;
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  int max_tokens = 1024;
  std::chrono::milliseconds timeout{60000};  // budget for all attempts
  int max_retries = 2;                       // attempts = 1 + max_retries
  std::chrono::milliseconds backoff{250};    // doubled after each failure
  ImagePartStyle image_style = ImagePartStyle::kImageUrl;
  std::string api_key;  // sent as a bearer token, never serialized
  ChatPurpose purpose = ChatPurpose::kAnalysis;

  void validate() const;
};

// Chat-completions style body: model, messages (content as typed parts),
// temperature, max_tokens.
nlohmann::json to_wire_json(const ChatRequest& request);

// First completion text from a chat-completions style response. Accepts
// choices[0].message.content as a string or a list of text parts, and a
// top-level "content" list of text parts. Throws ProtocolError otherwise.
std::string extract_completion(const nlohmann::json& response);

class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  virtual std::string complete(const ChatRequest& request) = 0;
  virtual std::string tag() const = 0;
};

// JSON POST to request.endpoint. Connection failures, timeouts, HTTP 429 and
// 5xx are retried up to request.max_retries times with exponential backoff;
// the whole exchange stays within request.timeout.
class RemoteTransport final : public ChatTransport {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  RemoteTransport();
  explicit RemoteTransport(Sleeper sleeper);

  std::string complete(const ChatRequest& request) override;
  std::string tag() const override { return "remote"; }

 private:
  Sleeper sleeper_;
};

// Deterministic offline stand-in for both stages. It reads only the text
// parts of user messages, finds every fault class named there, and answers
// with fixed template sentences about those classes ("unknown" when none).
// Analysis requests get a descriptive paragraph; advice requests get the
// four report sections. Classes in `suppressed` are never echoed.
class StubTransport final : public ChatTransport {
 public:
  StubTransport() = default;
  explicit StubTransport(std::set<ClassId> suppressed)
      : suppressed_(std::move(suppressed)) {}

  std::string complete(const ChatRequest& request) override;
  std::string tag() const override { return "stub"; }

 private:
  std::set<ClassId> suppressed_;
};

// Validates the request, then delegates to the transport.
std::string invoke(const ChatRequest& request, ChatTransport& transport);

}  // namespace wtdiag
