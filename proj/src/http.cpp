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

#include "storyfier/http.hpp"

#include <httplib.h>

#include "storyfier/error.hpp"

namespace storyfier::http {

Endpoint parse_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw PreconditionError("URL without scheme: '" + url + "'");
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, ""};
  std::string base = url.substr(slash);
  while (!base.empty() && base.back() == '/') base.pop_back();
  return {url.substr(0, slash), base};
}

namespace {

httplib::Client make_client(const Endpoint& ep, std::chrono::milliseconds timeout) {
  httplib::Client cli(ep.origin);
  cli.set_connection_timeout(timeout);
  cli.set_read_timeout(timeout);
  cli.set_write_timeout(timeout);
  return cli;
}

Response unwrap(const httplib::Result& res, const std::string& target) {
  if (!res) throw BackendError("request to " + target + " failed: " + httplib::to_string(res.error()));
  return {res->status, res->body};
}

}  // namespace

Response post(const std::string& url, const std::string& path, const std::string& body,
              const std::string& content_type, std::chrono::milliseconds timeout) {
  const auto ep = parse_url(url);
  auto cli = make_client(ep, timeout);
  const auto target = ep.base_path + path;
  return unwrap(cli.Post(target, body, content_type), ep.origin + target);
}

Response get(const std::string& url, const std::string& path, std::chrono::milliseconds timeout) {
  const auto ep = parse_url(url);
  auto cli = make_client(ep, timeout);
  const auto target = ep.base_path + path;
  return unwrap(cli.Get(target), ep.origin + target);
}

std::string form_encode(const std::string& s) { return httplib::detail::encode_query_param(s); }

}  // namespace storyfier::http
