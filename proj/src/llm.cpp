#include "reportkg/llm.hpp"

#include "reportkg/error.hpp"

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cctype>

namespace reportkg::llm {

namespace {

std::size_t count_occurrences(std::string_view text, std::string_view needle) {
    std::size_t count = 0;
    for (auto pos = text.find(needle); pos != std::string_view::npos; pos = text.find(needle, pos + needle.size())) {
        ++count;
    }
    return count;
}

}  // namespace

PromptTemplate::PromptTemplate(std::string text) : text_(std::move(text)) {
    for (const auto placeholder : {kMeasuredPlaceholder, kLimitsPlaceholder}) {
        const std::size_t count = count_occurrences(text_, placeholder);
        if (count != 1) {
            throw Error(ErrorKind::MissingPlaceholder, "template must contain " + std::string(placeholder) +
                                                           " exactly once (found " + std::to_string(count) + ")");
        }
    }
}

std::string PromptTemplate::render(std::string_view measured_raw, std::string_view limits_raw) const {
    std::string out;
    out.reserve(text_.size() + measured_raw.size() + limits_raw.size());
    std::size_t pos = 0;
    while (pos < text_.size()) {
        if (text_.compare(pos, kMeasuredPlaceholder.size(), kMeasuredPlaceholder) == 0) {
            out.append(measured_raw);
            pos += kMeasuredPlaceholder.size();
        } else if (text_.compare(pos, kLimitsPlaceholder.size(), kLimitsPlaceholder) == 0) {
            out.append(limits_raw);
            pos += kLimitsPlaceholder.size();
        } else {
            out.push_back(text_[pos++]);
        }
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> PromptTemplate::candidate_splits(std::string_view prompt) const {
    const std::size_t measured_at = text_.find(kMeasuredPlaceholder);
    const std::size_t limits_at = text_.find(kLimitsPlaceholder);
    const bool measured_first = measured_at < limits_at;
    const std::size_t first_at = std::min(measured_at, limits_at);
    const std::size_t first_len = measured_first ? kMeasuredPlaceholder.size() : kLimitsPlaceholder.size();
    const std::size_t second_at = std::max(measured_at, limits_at);
    const std::size_t second_len = measured_first ? kLimitsPlaceholder.size() : kMeasuredPlaceholder.size();

    const std::string_view text(text_);
    const std::string_view prefix = text.substr(0, first_at);
    const std::string_view middle = text.substr(first_at + first_len, second_at - first_at - first_len);
    const std::string_view suffix = text.substr(second_at + second_len);

    std::vector<std::pair<std::string, std::string>> splits;
    if (prompt.size() < prefix.size() + middle.size() + suffix.size() || prompt.substr(0, prefix.size()) != prefix ||
        prompt.substr(prompt.size() - suffix.size()) != suffix) {
        return splits;
    }
    const std::string_view body = prompt.substr(prefix.size(), prompt.size() - prefix.size() - suffix.size());
    for (std::size_t pos = body.find(middle); pos != std::string_view::npos; pos = body.find(middle, pos + 1)) {
        std::string first(body.substr(0, pos));
        std::string second(body.substr(pos + middle.size()));
        if (measured_first) {
            splits.emplace_back(std::move(first), std::move(second));
        } else {
            splits.emplace_back(std::move(second), std::move(first));
        }
        if (pos == body.size()) {
            break;
        }
    }
    return splits;
}

std::string build_prompt(std::string_view measured_raw, std::string_view limits_raw,
                         const PromptTemplate& prompt_template) {
    return prompt_template.render(measured_raw, limits_raw);
}

std::string_view to_string(JudgementVerdict verdict) {
    switch (verdict) {
        case JudgementVerdict::True: return "True";
        case JudgementVerdict::False: return "False";
        case JudgementVerdict::Unparseable: return "Unparseable";
    }
    return "Unparseable";
}

JudgementVerdict parse_verdict(std::string_view response) {
    std::size_t pos = 0;
    while (pos < response.size()) {
        while (pos < response.size() && !std::isalnum(static_cast<unsigned char>(response[pos]))) {
            ++pos;
        }
        const std::size_t start = pos;
        while (pos < response.size() && std::isalnum(static_cast<unsigned char>(response[pos]))) {
            ++pos;
        }
        const std::string word = to_lower_ascii(response.substr(start, pos - start));
        if (word == "true") {
            return JudgementVerdict::True;
        }
        if (word == "false") {
            return JudgementVerdict::False;
        }
    }
    return JudgementVerdict::Unparseable;
}

std::string ChatRequest::to_json() const {
    const nlohmann::json body = {
        {"model", model},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
    };
    return body.dump();
}

BackendConfig BackendConfig::from_config(const KeyValueConfig& config, const std::string& name) {
    const std::string prefix = "llm." + name + ".";
    const auto key = [&](const char* suffix) { return prefix + suffix; };
    BackendConfig out;
    const std::string kind = config.get_or(key("kind"), name == "mock" ? "mock" : "");
    if (kind == "http") {
        out.kind = BackendKind::Http;
    } else if (kind == "replay") {
        out.kind = BackendKind::Replay;
    } else if (kind == "mock") {
        out.kind = BackendKind::Mock;
    } else {
        throw Error(ErrorKind::InvalidBackendConfig, "backend '" + name + "': unknown kind '" + kind + "'");
    }
    out.endpoint = config.get_or(key("endpoint"), "");
    out.model = config.get_or(key("model"), out.kind == BackendKind::Mock ? "mock" : "");
    out.credential_env = config.get_or(key("credential_env"), "");
    const auto integer = [&](const char* suffix, int fallback) {
        const auto value = config.get_number(key(suffix));
        return value ? static_cast<int>(*value) : fallback;
    };
    out.max_in_flight = integer("max_in_flight", out.max_in_flight);
    out.rate_per_minute = integer("rate_per_minute", out.rate_per_minute);
    out.retry.max_attempts = integer("max_attempts", out.retry.max_attempts);
    out.retry.backoff_base = std::chrono::milliseconds(integer("backoff_ms", static_cast<int>(out.retry.backoff_base.count())));
    if (config.contains(key("replay_path"))) {
        out.replay_path = config.resolve_path(key("replay_path"));
    }
    out.flip_rate_in_range = config.get_number(key("flip_in_range")).value_or(0.0);
    out.flip_rate_out_of_range = config.get_number(key("flip_out_of_range")).value_or(0.0);
    if (const auto seed = config.get(key("seed"))) {
        try {
            out.seed = std::stoull(*seed);
        } catch (const std::exception&) {
            throw Error(ErrorKind::InvalidBackendConfig, "backend '" + name + "': seed must be an unsigned integer");
        }
    }
    out.validate();
    return out;
}

void BackendConfig::validate() const {
    const auto fail = [](const std::string& message) { throw Error(ErrorKind::InvalidBackendConfig, message); };
    if (max_in_flight <= 0 || rate_per_minute <= 0 || retry.max_attempts <= 0 || retry.backoff_base.count() < 0) {
        fail("caps and retry attempts must be positive");
    }
    if (kind == BackendKind::Http && (endpoint.empty() || model.empty() || credential_env.empty())) {
        fail("http backend requires endpoint, model and credential_env");
    }
    if (kind == BackendKind::Replay && replay_path.empty()) {
        fail("replay backend requires replay_path");
    }
    for (double rate : {flip_rate_in_range, flip_rate_out_of_range}) {
        if (rate < 0.0 || rate > 1.0) {
            fail("mock flip rates must lie in [0, 1]");
        }
    }
}

DispatchOptions DispatchOptions::from(const BackendConfig& config) {
    DispatchOptions options;
    options.model = config.model;
    options.max_in_flight = config.max_in_flight;
    options.rate_per_minute = config.rate_per_minute;
    options.retry = config.retry;
    return options;
}

RateLimiter::RateLimiter(int per_minute, Clock clock, Sleeper sleeper)
    : per_minute_(per_minute), clock_(std::move(clock)), sleeper_(std::move(sleeper)) {}

void RateLimiter::acquire() {
    constexpr auto window = std::chrono::minutes(1);
    std::unique_lock lock(mutex_);
    while (true) {
        const auto now = clock_();
        while (!recent_.empty() && now - recent_.front() >= window) {
            recent_.pop_front();
        }
        if (static_cast<int>(recent_.size()) < per_minute_) {
            recent_.push_back(now);
            return;
        }
        const auto wait = recent_.front() + window - now;
        lock.unlock();
        sleeper_(wait);
        lock.lock();
    }
}

RowChecker::RowChecker(ChatBackend& backend, PromptTemplate prompt_template, DispatchOptions options)
    : backend_(backend),
      template_(std::move(prompt_template)),
      options_(std::move(options)),
      limiter_(options_.rate_per_minute, options_.clock, options_.sleeper) {}

LLMJudgement RowChecker::check_row(const Observation& row) {
    // In-flight slot held for the whole retry sequence.
    {
        std::unique_lock lock(slots_mutex_);
        slots_cv_.wait(lock, [&] { return in_flight_ < options_.max_in_flight; });
        ++in_flight_;
    }
    struct SlotRelease {
        RowChecker& self;
        ~SlotRelease() {
            {
                std::lock_guard lock(self.slots_mutex_);
                --self.in_flight_;
            }
            self.slots_cv_.notify_one();
        }
    } release{*this};

    const ChatRequest request{options_.model, template_.render(row.result_raw, row.limits_raw)};
    std::string last_error;
    for (int attempt = 1; attempt <= options_.retry.max_attempts; ++attempt) {
        limiter_.acquire();
        const auto start = std::chrono::steady_clock::now();
        try {
            std::string response = backend_.complete(request);
            const auto elapsed = std::chrono::steady_clock::now() - start;
            return LLMJudgement{row.id,
                                parse_verdict(response),
                                std::move(response),
                                std::chrono::duration_cast<std::chrono::milliseconds>(elapsed),
                                backend_.id(),
                                attempt};
        } catch (const Error& error) {
            if (error.kind() != ErrorKind::BackendUnavailable && error.kind() != ErrorKind::RateLimited) {
                throw;
            }
            last_error = error.what();
            if (error.kind() == ErrorKind::RateLimited) {
                spdlog::warn("{}: rate limited on row {} (attempt {})", backend_.id(), row.id, attempt);
            }
        }
        if (attempt < options_.retry.max_attempts) {
            options_.sleeper(options_.retry.backoff_base * (1 << (attempt - 1)));
        }
    }
    throw Error(ErrorKind::BackendUnavailable, backend_.id() + " failed on row " + row.id + " after " +
                                                   std::to_string(options_.retry.max_attempts) +
                                                   " attempts: " + last_error);
}

BatchResult RowChecker::check_rows(std::span<const Observation> rows) {
    std::vector<std::optional<LLMJudgement>> results(rows.size());
    std::vector<std::optional<std::string>> errors(rows.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < rows.size(); i = next++) {
            try {
                results[i] = check_row(rows[i]);
            } catch (const Error& error) {
                errors[i] = error.what();
            }
        }
    };
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(options_.max_in_flight), rows.size());
    {
        std::vector<std::jthread> threads;
        for (std::size_t i = 0; i < workers; ++i) {
            threads.emplace_back(worker);
        }
    }
    BatchResult batch;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (results[i]) {
            batch.judgements.push_back(std::move(*results[i]));
        } else {
            batch.failures.emplace_back(rows[i].id, errors[i].value_or("unknown failure"));
        }
    }
    std::sort(batch.judgements.begin(), batch.judgements.end(),
              [](const LLMJudgement& a, const LLMJudgement& b) { return a.observation_id < b.observation_id; });
    std::sort(batch.failures.begin(), batch.failures.end());
    return batch;
}

LLMJudgement check_row(const Observation& row, ChatBackend& backend, const PromptTemplate& prompt_template,
                       const DispatchOptions& options) {
    RowChecker checker(backend, prompt_template, options);
    return checker.check_row(row);
}

}  // namespace reportkg::llm
