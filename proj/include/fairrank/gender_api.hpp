// Copyright 2026 The fairrank Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <boost/algorithm/string/case_conv.hpp>

#include <chrono>
#include <cstdlib>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "fairrank/core.hpp"
#include "fairrank/dataset.hpp"

namespace fairrank {

/// Environment variable holding the gender-API base URL. Unset disables
/// live inference.
inline constexpr const char* kGenderApiEnv = "FAIRRANK_GENDER_API_URL";

struct GenderGuess {
  Gender gender = Gender::unknown;
  double probability = 0.0;

  friend bool operator==(const GenderGuess&, const GenderGuess&) = default;
};

/// Network-level failure; the caller may retry later.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The service refused the request because the quota is spent. Not retriable.
class QuotaExceededError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Source of first-name gender guesses. `lookup` returns nullopt when the
/// service has no answer for the name.
class GenderInferenceClient {
 public:
  virtual ~GenderInferenceClient() = default;
  virtual std::optional<GenderGuess> lookup(const std::string& first_name) = 0;
};

/// Decodes a `{name, gender|null, probability, count}` reply.
inline std::optional<GenderGuess> parse_gender_reply(const nlohmann::json& reply) {
  if (!reply.is_object()) throw std::runtime_error("gender API reply is not a JSON object");
  if (reply.contains("error")) {
    throw QuotaExceededError("gender API error: " + reply["error"].dump());
  }
  const auto it = reply.find("gender");
  if (it == reply.end() || it->is_null()) return std::nullopt;
  auto g = parse_gender(it->get<std::string>());
  if (!g || *g == Gender::unknown) return std::nullopt;
  return GenderGuess{*g, reply.value("probability", 0.0)};
}

/// HTTP GET `<base>?name=<first_name>` client.
class HttpGenderClient : public GenderInferenceClient {
 public:
  struct Options {
    int retries = 2;
    std::chrono::milliseconds retry_delay{200};
    std::chrono::seconds timeout{10};
  };

  explicit HttpGenderClient(std::string base_url) : HttpGenderClient(std::move(base_url), Options{}) {}

  HttpGenderClient(std::string base_url, Options options) : options_(options) {
    const auto scheme = base_url.find("://");
    const auto path_start = base_url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    origin_ = base_url.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : base_url.substr(path_start);
  }

  std::optional<GenderGuess> lookup(const std::string& first_name) override {
    httplib::Client client(origin_);
    client.set_connection_timeout(options_.timeout);
    client.set_read_timeout(options_.timeout);
    const httplib::Params params{{"name", first_name}};
    std::string last_error;
    for (int attempt = 0; attempt <= options_.retries; ++attempt) {
      if (attempt > 0) std::this_thread::sleep_for(options_.retry_delay);
      auto res = client.Get(path_, params, httplib::Headers{});
      if (!res) {
        last_error = httplib::to_string(res.error());
        continue;
      }
      if (res->status == 429) {
        std::string msg = "quota exceeded";
        try {
          msg = nlohmann::json::parse(res->body).value("error", msg);
        } catch (const nlohmann::json::exception&) {
        }
        throw QuotaExceededError("gender API: " + msg);
      }
      if (res->status >= 500) {
        last_error = "HTTP " + std::to_string(res->status);
        continue;
      }
      if (res->status != 200) {
        throw std::runtime_error("gender API: HTTP " + std::to_string(res->status));
      }
      try {
        return parse_gender_reply(nlohmann::json::parse(res->body));
      } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(std::string("gender API: malformed reply: ") + e.what());
      }
    }
    throw TransportError("gender API unreachable after " + std::to_string(options_.retries + 1) +
                         " attempt(s): " + last_error);
  }

 private:
  Options options_;
  std::string origin_;
  std::string path_;
};

/// Per-run memoizing front end over a client. Names are compared
/// case-insensitively; negative answers are cached too.
class GenderInference {
 public:
  explicit GenderInference(GenderInferenceClient& client) : client_(client) {}

  std::optional<GenderGuess> infer(const std::string& first_name) {
    if (boost::algorithm::trim_copy(first_name).empty()) {
      throw InputError("gender inference needs a non-blank first name");
    }
    const auto key = boost::algorithm::to_lower_copy(first_name);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    auto guess = client_.lookup(first_name);
    cache_.emplace(key, guess);
    return guess;
  }

  std::size_t cache_size() const { return cache_.size(); }

 private:
  GenderInferenceClient& client_;
  std::map<std::string, std::optional<GenderGuess>> cache_;
};

/// Client for the URL in the environment, or null when unset.
inline std::unique_ptr<GenderInferenceClient> gender_client_from_env() {
  const char* url = std::getenv(kGenderApiEnv);
  if (url == nullptr || *url == '\0') return nullptr;
  return std::make_unique<HttpGenderClient>(url);
}

/// Fills unresolved genders of reviewers whose names are real names, using
/// the first whitespace-separated token. Returns the number resolved.
inline std::size_t annotate_roster(std::vector<Reviewer>& roster, GenderInference& inference,
                                   const NicknamePolicy& policy = {}) {
  std::size_t resolved = 0;
  for (auto& r : roster) {
    if (r.gender != Gender::unknown || is_nickname(r.display_name, policy)) continue;
    const auto trimmed = boost::algorithm::trim_copy(r.display_name);
    const auto first = trimmed.substr(0, trimmed.find_first_of(" \t"));
    if (auto guess = inference.infer(first)) {
      r.gender = guess->gender;
      r.gender_source = GenderSource::inferred_api;
      ++resolved;
    }
  }
  return resolved;
}

}  // namespace fairrank
