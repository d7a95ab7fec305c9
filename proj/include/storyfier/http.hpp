// Copyright 2026 The Storyfier Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <chrono>
#include <string>

namespace storyfier::http {

struct Response {
  int status = 0;
  std::string body;
};

/// Split "http://host:port/base" into "http://host:port" and "/base".
struct Endpoint {
  std::string origin;
  std::string base_path;
};
Endpoint parse_url(const std::string& url);

/// Throws BackendError on transport failure (connect, timeout). Non-2xx
/// statuses are returned, not thrown.
Response post(const std::string& url, const std::string& path, const std::string& body,
              const std::string& content_type, std::chrono::milliseconds timeout);

Response get(const std::string& url, const std::string& path, std::chrono::milliseconds timeout);

/// application/x-www-form-urlencoded escaping.
std::string form_encode(const std::string& s);

}  // namespace storyfier::http
