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

#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "promptprobe/errors.hpp"

namespace promptprobe {

// Connection resets, timeouts, DNS failures. Retried by callers.
class TransportError : public Error {
 public:
  using Error::Error;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post_json(const std::string& url, const HttpHeaders& headers,
                                 const std::string& body) = 0;
};

/// HTTP(S) transport backed by cpp-httplib.
std::unique_ptr<HttpTransport> make_http_transport(double timeout_seconds = 120.0);

/// True for statuses worth retrying (429 and 5xx).
inline bool is_transient_status(int status) { return status == 429 || status >= 500; }

}  // namespace promptprobe
