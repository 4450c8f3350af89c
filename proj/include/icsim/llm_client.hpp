#pragma once

// Live decision maker speaking an OpenAI-style chat-completions API.
// Configuration comes from ICSIM_LLM_BASE_URL, ICSIM_LLM_MODEL and
// ICSIM_LLM_API_KEY. One request at a time, temperature 0.

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include "icsim/decider.hpp"

#include <chrono>
#include <cstdlib>
#include <mutex>
#include <optional>
#include <string>

namespace icsim {

struct LlmClientConfig {
  std::string base_url;  // e.g. https://api.openai.com/v1
  std::string model;
  std::string api_key;
  double timeout = 60.0;  // s, wall clock

  static std::optional<LlmClientConfig> from_env() {
    auto get = [](const char* k) -> std::string {
      const char* v = std::getenv(k);
      return v ? v : "";
    };
    LlmClientConfig c;
    c.base_url = get("ICSIM_LLM_BASE_URL");
    c.model = get("ICSIM_LLM_MODEL");
    c.api_key = get("ICSIM_LLM_API_KEY");
    if (c.base_url.empty() || c.model.empty()) return std::nullopt;
    return c;
  }
};

/// Splits "scheme://host[:port][/prefix]" into the httplib origin and path prefix.
inline std::pair<std::string, std::string> split_base_url(const std::string& url) {
  auto scheme_end = url.find("://");
  std::size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  auto slash = url.find('/', host_start);
  std::string origin = slash == std::string::npos ? url : url.substr(0, slash);
  std::string prefix = slash == std::string::npos ? "" : url.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {origin, prefix};
}

inline json chat_request_body(const LlmClientConfig& cfg, const PromptDocument& prompt, const std::string& feedback) {
  std::string user = prompt.user;
  if (!feedback.empty())
    user += "\nYour previous answer was rejected by the validator: " + feedback +
            "\nReturn a corrected JSON object only.\n";
  return {{"model", cfg.model},
          {"temperature", 0},
          {"messages", json::array({{{"role", "system"}, {"content", prompt.narrative}},
                                    {{"role", "user"}, {"content", user}}})}};
}

class LlmDecider final : public DecisionMaker {
 public:
  explicit LlmDecider(LlmClientConfig cfg) : cfg_(std::move(cfg)) {}

  std::string name() const override { return "llm:" + cfg_.model; }
  double default_latency() const override { return kModelDecisionLatency; }

  RawReply consult(const Consultation& c) override {
    std::lock_guard lock(mu_);
    auto [origin, prefix] = split_base_url(cfg_.base_url);
    httplib::Client cli(origin);
    auto to = std::chrono::duration<double>(cfg_.timeout);
    cli.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(to));
    cli.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(to));
    cli.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(to));
    httplib::Headers headers;
    if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);

    const auto body = chat_request_body(cfg_, c.prompt, c.feedback).dump();
    const auto t0 = std::chrono::steady_clock::now();
    auto res = cli.Post(prefix + "/chat/completions", headers, body, "application/json");
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!res) {
      auto err = res.error();
      std::string kind = err == httplib::Error::Read || err == httplib::Error::Write ||
                                 err == httplib::Error::ConnectionTimeout
                             ? "timeout"
                             : "transport";
      throw DecisionError(kind, "chat request failed: " + httplib::to_string(err));
    }
    if (res->status != 200)
      throw DecisionError("transport", "chat endpoint returned HTTP " + std::to_string(res->status));

    auto j = json::parse(res->body, nullptr, false);
    if (j.is_discarded() || !j.contains("choices") || !j["choices"].is_array() || j["choices"].empty())
      throw DecisionError("transport", "malformed chat completion envelope");
    const auto& msg = j["choices"][0];
    if (!msg.contains("message") || !msg["message"].contains("content") || !msg["message"]["content"].is_string())
      throw DecisionError("transport", "chat completion without message content");

    RawReply r;
    r.body = msg["message"]["content"].get<std::string>();
    r.wall_latency = wall;
    const auto usage = j.value("usage", json::object());
    r.token_in = usage.value("prompt_tokens", c.prompt.token_estimate);
    r.token_out = usage.value("completion_tokens", estimate_tokens(r.body.size()));
    return r;
  }

  const LlmClientConfig& config() const { return cfg_; }

 private:
  LlmClientConfig cfg_;
  std::mutex mu_;
};

/// llm_decide: one consultation piped through the strict parser.
inline Decision llm_decide(LlmDecider& decider, const Snapshot& snap, const PromptDocument& prompt,
                           const SchemaLimits& lim = {}) {
  Consultation c{snap, prompt, snap.violation.index, 0, {}};
  return parse_decision(decider.consult(c).body, lim);
}

}  // namespace icsim
