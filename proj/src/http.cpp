// Copyright 2026 The promptprobe Authors. All rights reserved.
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

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "promptprobe/http.hpp"

namespace promptprobe {

namespace {

class HttplibTransport : public HttpTransport {
 public:
  explicit HttplibTransport(double timeout_seconds) : timeout_(timeout_seconds) {}

  HttpResponse post_json(const std::string& url, const HttpHeaders& headers,
                         const std::string& body) override {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw Error("URL without scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    const std::string origin = url.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

    httplib::Client client(origin);
    const auto secs = static_cast<time_t>(timeout_);
    client.set_connection_timeout(secs, 0);
    client.set_read_timeout(secs, 0);
    client.set_write_timeout(secs, 0);
    httplib::Headers h;
    for (const auto& [k, v] : headers) h.emplace(k, v);
    auto res = client.Post(path, h, body, "application/json");
    if (!res) {
      throw TransportError("POST " + url + " failed: " + httplib::to_string(res.error()));
    }
    return {res->status, res->body};
  }

 private:
  double timeout_;
};

}  // namespace

std::unique_ptr<HttpTransport> make_http_transport(double timeout_seconds) {
  return std::make_unique<HttplibTransport>(timeout_seconds);
}

}  // namespace promptprobe
