#pragma once

#include "reportkg/config.hpp"
#include "reportkg/model.hpp"
#include "reportkg/units.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

namespace reportkg::llm {

inline constexpr std::string_view kMeasuredPlaceholder = "{measured_value}";
inline constexpr std::string_view kLimitsPlaceholder = "{acceptance_limits}";
inline constexpr std::string_view kDefaultTemplate =
    "Evaluate the following electrical measure observation statement. Answer with just one \"True\" or "
    "\"False\" statement at the beginning of the answer. Is {measured_value} {acceptance_limits} ?";

/// Zero-shot prompt with exactly one `{measured_value}` and one `{acceptance_limits}`.
class PromptTemplate {
public:
    /// Throws MissingPlaceholder unless each placeholder occurs exactly once.
    explicit PromptTemplate(std::string text = std::string(kDefaultTemplate));

    const std::string& text() const { return text_; }
    std::string render(std::string_view measured_raw, std::string_view limits_raw) const;

    /// Every (measured, limits) pair that renders to `prompt`, ordered by split
    /// position. Several exist when the text between the placeholders also occurs
    /// inside the raw values.
    std::vector<std::pair<std::string, std::string>> candidate_splits(std::string_view prompt) const;

private:
    std::string text_;
};

std::string build_prompt(std::string_view measured_raw, std::string_view limits_raw,
                         const PromptTemplate& prompt_template = PromptTemplate());

enum class JudgementVerdict { True, False, Unparseable };

std::string_view to_string(JudgementVerdict verdict);

/// First whole-word "true"/"false" (case-insensitive) wins; none gives Unparseable.
JudgementVerdict parse_verdict(std::string_view response);

struct LLMJudgement {
    std::string observation_id;
    JudgementVerdict verdict = JudgementVerdict::Unparseable;
    std::string raw_response;
    std::chrono::milliseconds latency{0};
    std::string backend_id;
    int attempts = 0;
};

/// Minimal chat-completion request: the model name plus one user message.
struct ChatRequest {
    std::string model;
    std::string prompt;

    /// `{"model": ..., "messages": [{"role": "user", "content": ...}]}`
    std::string to_json() const;
};

/// A chat backend. Implementations must be safe to call concurrently and signal
/// transient failures with Error(BackendUnavailable) or Error(RateLimited).
class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual std::string complete(const ChatRequest& request) = 0;
    virtual std::string id() const = 0;
};

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds backoff_base{250};
};

enum class BackendKind { Http, Replay, Mock };

struct BackendConfig {
    BackendKind kind = BackendKind::Mock;
    std::string endpoint;
    std::string model = "mock";
    std::string credential_env;
    int max_in_flight = 4;
    int rate_per_minute = 600;
    RetryPolicy retry;
    std::filesystem::path replay_path;
    std::uint64_t seed = 0;
    double flip_rate_in_range = 0.0;
    double flip_rate_out_of_range = 0.0;

    /// Reads `llm.<name>.*` keys (kind, endpoint, model, credential_env, max_in_flight,
    /// rate_per_minute, max_attempts, backoff_ms, replay_path, flip_in_range,
    /// flip_out_of_range, seed). Throws InvalidBackendConfig.
    static BackendConfig from_config(const KeyValueConfig& config, const std::string& name);
    void validate() const;
};

/// Blocks callers so at most `per_minute` acquisitions happen in any 60 s window.
class RateLimiter {
public:
    using Clock = std::function<std::chrono::steady_clock::time_point()>;
    using Sleeper = std::function<void(std::chrono::steady_clock::duration)>;

    RateLimiter(int per_minute, Clock clock, Sleeper sleeper);
    void acquire();

private:
    int per_minute_;
    Clock clock_;
    Sleeper sleeper_;
    std::mutex mutex_;
    std::deque<std::chrono::steady_clock::time_point> recent_;
};

struct DispatchOptions {
    std::string model = "mock";
    int max_in_flight = 4;
    int rate_per_minute = 600;
    RetryPolicy retry;
    RateLimiter::Clock clock = [] { return std::chrono::steady_clock::now(); };
    RateLimiter::Sleeper sleeper = [](std::chrono::steady_clock::duration d) {
        std::this_thread::sleep_for(d);
    };

    static DispatchOptions from(const BackendConfig& config);
};

struct BatchResult {
    std::vector<LLMJudgement> judgements;                    // ordered by observation id
    std::vector<std::pair<std::string, std::string>> failures;  // (observation id, error)

    bool partial() const { return !failures.empty(); }
};

/// Sends one prompt per row (only the two raw cells are disclosed), honoring the
/// retry policy, the per-minute cap and the in-flight cap.
class RowChecker {
public:
    RowChecker(ChatBackend& backend, PromptTemplate prompt_template = PromptTemplate(), DispatchOptions options = {});

    /// Throws BackendUnavailable once retries are exhausted.
    LLMJudgement check_row(const Observation& row);
    BatchResult check_rows(std::span<const Observation> rows);

private:
    ChatBackend& backend_;
    PromptTemplate template_;
    DispatchOptions options_;
    RateLimiter limiter_;
    std::mutex slots_mutex_;
    std::condition_variable slots_cv_;
    int in_flight_ = 0;
};

LLMJudgement check_row(const Observation& row, ChatBackend& backend,
                       const PromptTemplate& prompt_template = PromptTemplate(), const DispatchOptions& options = {});

// ---------------------------------------------------------------------------
// Backends

/// POSTs ChatRequest JSON to an OpenAI-compatible endpoint with a bearer credential
/// read from the named environment variable.
class HttpBackend final : public ChatBackend {
public:
    HttpBackend(std::string endpoint, std::string credential_env,
                std::chrono::seconds timeout = std::chrono::seconds(60));
    std::string complete(const ChatRequest& request) override;
    std::string id() const override;

    /// Pulls the generated text out of the common response shapes
    /// (choices[0].message.content, choices[0].text, message.content, response, content, text).
    static std::optional<std::string> extract_text(std::string_view body);

private:
    std::string scheme_host_port_;
    std::string path_;
    std::string credential_env_;
    std::chrono::seconds timeout_;
};

/// Lowercase hex SHA-256 of the exact prompt bytes (UTF-8); the replay fixture key.
std::string prompt_hash(std::string_view prompt);

/// Answers from a line-delimited JSON fixture of `{"prompt_hash", "response_text"}` records.
/// A prompt without a record raises BackendUnavailable.
class ReplayBackend final : public ChatBackend {
public:
    explicit ReplayBackend(const std::filesystem::path& fixture);
    ReplayBackend(std::string name, std::unordered_map<std::string, std::string> responses);

    std::string complete(const ChatRequest& request) override;
    std::string id() const override { return "replay:" + name_; }
    std::size_t size() const { return responses_.size(); }

private:
    std::string name_;
    std::unordered_map<std::string, std::string> responses_;
};

/// Appends replay records; one JSON object per line.
void write_replay_fixture(const std::filesystem::path& path,
                          std::span<const std::pair<std::string, std::string>> prompt_responses);

/// Deterministic stand-in: re-derives the oracle verdict from the prompt's raw strings
/// and flips it with a class-specific probability.
///
/// The flip draw for a prompt is `u = (splitmix64(seed ^ fnv1a64(prompt)) >> 11) * 2^-53`;
/// the verdict flips when `u < rate`. Draws depend only on (seed, prompt), so results
/// do not depend on call order or concurrency.
class MockBackend final : public ChatBackend {
public:
    MockBackend(std::uint64_t seed, double flip_rate_in_range, double flip_rate_out_of_range,
                PromptTemplate prompt_template = PromptTemplate(),
                const units::UnitRegistry& registry = units::UnitRegistry::defaults());

    std::string complete(const ChatRequest& request) override;
    std::string id() const override;

    static double flip_draw(std::uint64_t seed, std::string_view prompt);

private:
    std::uint64_t seed_;
    double flip_in_;
    double flip_out_;
    PromptTemplate template_;
    const units::UnitRegistry& registry_;
};

std::unique_ptr<ChatBackend> make_backend(const BackendConfig& config, const PromptTemplate& prompt_template,
                                          const units::UnitRegistry& registry = units::UnitRegistry::defaults());

}  // namespace reportkg::llm
