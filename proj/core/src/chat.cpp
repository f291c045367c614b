#include "wtdiag/chat.hpp"

#include <algorithm>
#include <array>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "http_util.hpp"
#include "wtdiag/error.hpp"
#include "wtdiag/fault_class.hpp"

namespace wtdiag {

ContentPart ContentPart::make_text(std::string text) {
  ContentPart p;
  p.kind = Kind::kText;
  p.text = std::move(text);
  return p;
}

ContentPart ContentPart::make_image(std::string data_base64,
                                   std::string media_type) {
  ContentPart p;
  p.kind = Kind::kImage;
  p.data_base64 = std::move(data_base64);
  p.media_type = std::move(media_type);
  return p;
}

void ChatRequest::validate() const {
  if (messages.empty()) throw DomainError("chat request has no messages");
  if (!(temperature >= 0)) throw DomainError("temperature must be >= 0");
  if (max_tokens < 1) throw DomainError("max_tokens must be >= 1");
  if (max_retries < 0) throw DomainError("max_retries must be >= 0");
  if (timeout.count() < 1) throw DomainError("timeout must be positive");
}

nlohmann::json to_wire_json(const ChatRequest& request) {
  nlohmann::json messages = nlohmann::json::array();
  for (const auto& m : request.messages) {
    nlohmann::json content = nlohmann::json::array();
    for (const auto& p : m.parts) {
      if (p.kind == ContentPart::Kind::kText) {
        content.push_back({{"type", "text"}, {"text", p.text}});
      } else if (request.image_style == ImagePartStyle::kImageUrl) {
        content.push_back(
            {{"type", "image_url"},
             {"image_url",
              {{"url", "data:" + p.media_type + ";base64," + p.data_base64}}}});
      } else {
        content.push_back({{"type", "image"},
                           {"source",
                            {{"type", "base64"},
                             {"media_type", p.media_type},
                             {"data", p.data_base64}}}});
      }
    }
    messages.push_back({{"role", m.role}, {"content", std::move(content)}});
  }
  return {{"model", request.model},
          {"messages", std::move(messages)},
          {"temperature", request.temperature},
          {"max_tokens", request.max_tokens}};
}

namespace {

std::string join_text_parts(const nlohmann::json& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (p.is_string()) {
      out += p.get<std::string>();
    } else if (p.is_object() && p.contains("text") && p["text"].is_string()) {
      out += p["text"].get<std::string>();
    }
  }
  return out;
}

}  // namespace

std::string extract_completion(const nlohmann::json& response) {
  if (response.is_object() && response.contains("choices") &&
      response["choices"].is_array() && !response["choices"].empty()) {
    const auto& choice = response["choices"][0];
    if (choice.contains("message") && choice["message"].contains("content")) {
      const auto& content = choice["message"]["content"];
      if (content.is_string()) return content.get<std::string>();
      if (content.is_array()) {
        std::string text = join_text_parts(content);
        if (!text.empty()) return text;
      }
    }
    if (choice.contains("text") && choice["text"].is_string()) {
      return choice["text"].get<std::string>();
    }
  }
  if (response.is_object() && response.contains("content") &&
      response["content"].is_array()) {
    std::string text = join_text_parts(response["content"]);
    if (!text.empty()) return text;
  }
  throw ProtocolError("response carries no completion text");
}

RemoteTransport::RemoteTransport()
    : sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {}

RemoteTransport::RemoteTransport(Sleeper sleeper) : sleeper_(std::move(sleeper)) {}

std::string RemoteTransport::complete(const ChatRequest& request) {
  using Clock = std::chrono::steady_clock;
  using std::chrono::duration_cast;
  using std::chrono::milliseconds;

  const auto url = detail::split_url(request.endpoint);
  const std::string body = to_wire_json(request).dump();
  httplib::Headers headers;
  if (!request.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + request.api_key);
  }

  const auto deadline = Clock::now() + request.timeout;
  int last_status = 0;
  int attempts = 0;
  bool out_of_time = false;
  std::string last_error;
  for (int attempt = 0; attempt <= request.max_retries; ++attempt) {
    const auto remaining = duration_cast<milliseconds>(deadline - Clock::now());
    if (remaining.count() <= 0) {
      out_of_time = true;
      break;
    }
    ++attempts;

    httplib::Client client(url.origin);
    client.set_connection_timeout(remaining);
    client.set_read_timeout(remaining);
    client.set_write_timeout(remaining);
    auto res = client.Post(url.path, headers, body, "application/json");

    if (res && res->status >= 200 && res->status < 300) {
      nlohmann::json parsed;
      try {
        parsed = nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::exception& e) {
        throw ProtocolError(std::string("response is not JSON: ") + e.what());
      }
      return extract_completion(parsed);
    }
    if (res) {
      last_status = res->status;
      last_error = "chat endpoint returned an error";
      const bool retryable = res->status == 429 || res->status >= 500;
      if (!retryable) throw TransportError(last_error, last_status);
    } else {
      last_status = 0;
      last_error = "chat request failed: " + httplib::to_string(res.error());
      // a timeout that used up the remaining budget
      if (duration_cast<milliseconds>(deadline - Clock::now()).count() <= 0) {
        out_of_time = true;
        break;
      }
    }

    if (attempt < request.max_retries) {
      const milliseconds scaled = request.backoff * (1LL << std::min(attempt, 20));
      const milliseconds wait =
          std::min(scaled, duration_cast<milliseconds>(deadline - Clock::now()));
      if (wait.count() > 0) sleeper_(wait);
    }
  }
  if (out_of_time || Clock::now() >= deadline) {
    throw TimeoutError("chat request to " + request.endpoint +
                       " exceeded its time budget");
  }
  throw TransportError(last_error + " after " +
                           std::to_string(attempts) + " attempts",
                       last_status);
}

namespace {

struct StubPhrases {
  const char* analysis;
  const char* severity;
  const char* cause;
  const char* maintenance;
};

// Indexed by class id. None of these sentences may mention another class.
constexpr std::array<StubPhrases, kNumFaultClasses> kStubPhrases = {{
    {"fracture lines run across the laminate near the marked region",
     "high, the structural integrity of the component is at risk",
     "cyclic fatigue loading with stress concentration",
     "apply a structural resin repair and monitor growth at each inspection"},
    {"the outer layer has separated from the structural shell",
     "moderate to high, the bond line is weakened",
     "adhesive degradation with moisture ingress",
     "re-bond the shell by adhesive injection and check neighbouring bond lines"},
    {"a shallow discoloration limited to the coating is visible",
     "low, the damage is cosmetic",
     "environmental weathering of the coating",
     "clean and recoat the affected area during routine service"},
    {"irregular depressions cover the marked area of the shell",
     "moderate, erosion will progress without treatment",
     "rain and airborne particle erosion at the leading edge",
     "fill and sand the area, then apply erosion protection tape"},
}};

std::string user_text(const ChatRequest& request) {
  std::string text;
  for (const auto& m : request.messages) {
    if (m.role != "user") continue;
    for (const auto& p : m.parts) {
      if (p.kind == ContentPart::Kind::kText) {
        text += p.text;
        text += '\n';
      }
    }
  }
  return text;
}

}  // namespace

std::string StubTransport::complete(const ChatRequest& request) {
  std::vector<ClassId> classes = mentioned_classes(user_text(request));
  std::erase_if(classes, [&](ClassId c) { return suppressed_.count(c) > 0; });

  if (request.purpose == ChatPurpose::kAnalysis) {
    std::string out = "Visual analysis:";
    if (classes.empty()) {
      out += " no fault category can be confirmed; the condition is unknown.";
      return out;
    }
    for (ClassId c : classes) {
      out += " The image shows " + fault_class(c).canonical_name +
             " damage; " + kStubPhrases[static_cast<std::size_t>(c)].analysis +
             ".";
    }
    return out;
  }

  auto section = [&](const char* header, auto field) {
    std::string s = std::string(header) + ":\n";
    if (classes.empty()) {
      s += "- unknown: ";
      s += field(StubPhrases{"", "undetermined, manual inspection needed",
                             "insufficient evidence",
                             "schedule a close visual inspection"});
      s += "\n";
    }
    for (ClassId c : classes) {
      s += "- " + fault_class(c).canonical_name + ": " +
           field(kStubPhrases[static_cast<std::size_t>(c)]) + "\n";
    }
    return s;
  };
  std::string names;
  for (ClassId c : classes) {
    if (!names.empty()) names += ", ";
    names += fault_class(c).canonical_name;
  }
  if (names.empty()) names = std::string(kUnknownFault);

  std::string out = "Fault type: " + names + "\n";
  out += section("Severity", [](const StubPhrases& p) { return std::string(p.severity); });
  out += section("Cause", [](const StubPhrases& p) { return std::string(p.cause); });
  out += section("Maintenance recommendation",
                 [](const StubPhrases& p) { return std::string(p.maintenance); });
  return out;
}

std::string invoke(const ChatRequest& request, ChatTransport& transport) {
  request.validate();
  return transport.complete(request);
}

}  // namespace wtdiag
