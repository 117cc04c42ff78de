#include <httplib.h>

#include <chrono>
#include <json.hpp>
#include <map>
#include <thread>

#include "varcat/random.hpp"
#include "varcat/verification.hpp"

namespace varcat {
namespace {

class SimulatedClient final : public CompletionClient {
 public:
  SimulatedClient(SimulatorKind kind, double p_trigger, double p_control, std::uint64_t seed,
                  std::string echo_text)
      : kind_(kind),
        p_trigger_(p_trigger),
        p_control_(p_control),
        seed_(seed),
        echo_text_(std::move(echo_text)) {}

  std::string complete(const CompletionRequest& request) override {
    if (kind_ == SimulatorKind::kEcho) return echo_text_;
    double p = kind_ == SimulatorKind::kWatermarked && request.trigger_group ? p_trigger_ : p_control_;
    double u = unit_double(splitmix64(seed_ ^ splitmix64(request.query_index)));
    if (u < p) return request.expected_target + " = None\n";
    return "value = None\n";
  }

 private:
  SimulatorKind kind_;
  double p_trigger_;
  double p_control_;
  std::uint64_t seed_;
  std::string echo_text_;
};

class HttpCompletionClient final : public CompletionClient {
 public:
  HttpCompletionClient(std::string url, HttpClientOptions options)
      : options_(options) {
    // split "scheme://host[:port]" from the path
    std::size_t scheme_end = url.find("://");
    std::size_t path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    base_ = path_start == std::string::npos ? url : url.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
  }

  std::string complete(const CompletionRequest& request) override {
    nlohmann::json body = {{"prompt", request.prompt},
                           {"max_tokens", request.max_tokens},
                           {"temperature", request.temperature}};
    const std::string payload = body.dump();
    std::string last_error;
    for (int attempt = 0; attempt <= options_.retries; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(options_.backoff_ms << (attempt - 1)));
      }
      httplib::Client client(base_);
      client.set_connection_timeout(options_.timeout_s, 0);
      client.set_read_timeout(options_.timeout_s, 0);
      client.set_write_timeout(options_.timeout_s, 0);
      httplib::Result res = client.Post(path_, payload, "application/json");
      if (!res) {
        last_error = httplib::to_string(res.error());
        continue;
      }
      if (res->status == 429 || res->status >= 500) {
        last_error = "HTTP " + std::to_string(res->status);
        continue;
      }
      if (res->status != 200) {
        throw MalformedResponse("model endpoint answered HTTP " + std::to_string(res->status));
      }
      nlohmann::json reply = nlohmann::json::parse(res->body, nullptr, false);
      if (reply.is_discarded() || !reply.is_object() || !reply.contains("completion") ||
          !reply["completion"].is_string()) {
        throw MalformedResponse("model reply lacks a string \"completion\" field");
      }
      return reply["completion"].get<std::string>();
    }
    throw ModelUnreachable("model endpoint " + base_ + path_ + " unreachable after " +
                           std::to_string(options_.retries + 1) + " attempts: " + last_error);
  }

 private:
  HttpClientOptions options_;
  std::string base_;
  std::string path_;
};

std::map<std::string, std::string> query_params(std::string_view query) {
  std::map<std::string, std::string> out;
  while (!query.empty()) {
    std::size_t amp = query.find('&');
    std::string_view item = query.substr(0, amp);
    std::size_t eq = item.find('=');
    if (eq == std::string_view::npos) {
      out[std::string(item)] = "";
    } else {
      out[std::string(item.substr(0, eq))] = httplib::detail::decode_url(std::string(item.substr(eq + 1)), true);
    }
    if (amp == std::string_view::npos) break;
    query.remove_prefix(amp + 1);
  }
  return out;
}

double probability(const std::map<std::string, std::string>& params, const std::string& key,
                   double fallback) {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  double v = 0.0;
  try {
    std::size_t used = 0;
    v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(key);
  } catch (const std::exception&) {
    throw UsageError("simulator parameter " + key + " is not a number: '" + it->second + "'");
  }
  if (!(v >= 0.0 && v <= 1.0)) throw UsageError("simulator parameter " + key + " must lie in [0, 1]");
  return v;
}

}  // namespace

std::unique_ptr<CompletionClient> make_simulated_client(SimulatorKind kind, double p_trigger,
                                                        double p_control, std::uint64_t seed,
                                                        std::string echo_text) {
  return std::make_unique<SimulatedClient>(kind, p_trigger, p_control, seed, std::move(echo_text));
}

std::unique_ptr<CompletionClient> make_http_client(const std::string& url, HttpClientOptions options) {
  return std::make_unique<HttpCompletionClient>(url, options);
}

std::unique_ptr<CompletionClient> make_client(const std::string& uri) {
  if (uri.rfind("http://", 0) == 0 || uri.rfind("https://", 0) == 0) return make_http_client(uri);
  if (uri.rfind("sim:", 0) != 0) throw UsageError("unsupported model URI '" + uri + "'");
  std::string_view rest = std::string_view(uri).substr(4);
  std::size_t q = rest.find('?');
  std::string_view kind = rest.substr(0, q);
  auto params = query_params(q == std::string_view::npos ? std::string_view() : rest.substr(q + 1));
  std::uint64_t seed = 0;
  if (auto it = params.find("seed"); it != params.end()) {
    try {
      seed = std::stoull(it->second);
    } catch (const std::exception&) {
      throw UsageError("simulator seed is not an unsigned integer: '" + it->second + "'");
    }
  }
  if (kind == "watermarked") {
    return make_simulated_client(SimulatorKind::kWatermarked, probability(params, "pt", 0.5),
                                 probability(params, "pc", 0.01), seed);
  }
  if (kind == "clean") {
    double pc = probability(params, "pc", 0.01);
    return make_simulated_client(SimulatorKind::kClean, pc, pc, seed);
  }
  if (kind == "echo") {
    auto it = params.find("text");
    return make_simulated_client(SimulatorKind::kEcho, 0, 0, seed, it == params.end() ? "pass" : it->second);
  }
  throw UsageError("unknown simulator kind '" + std::string(kind) + "'");
}

}  // namespace varcat
