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

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "storyfier/genclient.hpp"
#include "storyfier/grammar.hpp"
#include "storyfier/lexicon.hpp"
#include "storyfier/session.hpp"
#include "storyfier/wordselect.hpp"

namespace storyfier::service {

// -- configuration -----------------------------------------------------------

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;                 // 0 binds any free port
  std::string generation_url;      // may be empty when use_template is set
  std::string grammar_url;         // empty: no grammar checking
  std::string embeddings_path;     // empty: hashing embedder
  std::string vocab_path;
  std::string data_dir = "storyfier-data";
  bool use_template = false;
  std::size_t snapshot_every = 200;  // events between snapshots; 0 disables
  std::uint64_t seed = 0;            // base for sessions created without one

  /// Throws PreconditionError on a missing vocabulary path, a missing
  /// generation URL without the template flag, or an unwritable data dir
  /// (which is created if absent).
  void validate() const;
};

/// Overlays keys from a JSON object: listen ("host:port"), generation_url,
/// grammar_url, embeddings, vocab, data_dir, template, snapshot_every, seed.
ServiceConfig config_from_json(const nlohmann::json& j, ServiceConfig base = {});
ServiceConfig load_config_file(const std::string& path, ServiceConfig base = {});

/// Overlays STORYFIER_<KEY> environment variables, keys as above in upper case.
ServiceConfig config_from_env(ServiceConfig base,
                              const std::function<const char*(const char*)>& getenv = [](const char* k) {
                                return std::getenv(k);
                              });

// -- event log ---------------------------------------------------------------

struct PersistedEvent {
  std::uint64_t seq = 0;
  session::Event event;

  bool operator==(const PersistedEvent&) const = default;
};

/// One NDJSON line: {"seq","ts","session_id","kind","payload"}.
nlohmann::ordered_json to_json(const PersistedEvent& e);

/// Parses a log. Sequence numbers must run 1, 2, 3, ... without gaps; a
/// gap, a repeat or an unparsable line raises ReplayError naming the
/// offending sequence number (the expected one for an unparsable line).
std::vector<PersistedEvent> read_log(std::istream& in);

/// Rebuilds every session by applying its events in log order. An event
/// that is illegal in its session's state raises ReplayError at its seq.
std::map<std::string, session::SessionState> replay(const std::vector<PersistedEvent>& log);
std::map<std::string, session::SessionState> replay(std::istream& log);

/// Append-only writer. Appends are serialized and flushed per batch.
class EventLog {
 public:
  /// Opens or creates `path`, validating any existing content.
  explicit EventLog(std::filesystem::path path);

  /// Events present when the log was opened.
  const std::vector<PersistedEvent>& existing() const noexcept { return existing_; }

  /// Writes the batch with consecutive sequence numbers; returns the last.
  std::uint64_t append(const std::vector<session::Event>& events);

  std::uint64_t last_seq() const;
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  std::vector<PersistedEvent> existing_;
  mutable std::mutex mu_;
  std::ofstream out_;
  std::uint64_t last_seq_ = 0;
};

/// Atomically writes {"last_seq", "sessions": {id: state}}.
void write_snapshot(const std::filesystem::path& path, std::uint64_t last_seq,
                    const std::map<std::string, session::SessionState>& sessions);

/// Restores from a snapshot plus the log suffix after its last_seq. The
/// snapshot is derived data: when it is missing, unreadable or ahead of
/// the log, every session is replayed from the log instead.
std::map<std::string, session::SessionState> restore(const std::vector<PersistedEvent>& log,
                                                     const std::filesystem::path& snapshot_path);

// -- session store -----------------------------------------------------------

using Clock = std::function<std::int64_t()>;

/// Milliseconds since the Unix epoch.
std::int64_t system_clock_ms();

/// Live sessions. Mutations of one session are serialized by a per-session
/// mutex and run copy-then-commit: an operation works on a copy, its
/// events are appended to the log, and only then does the copy replace
/// the stored state.
class SessionStore {
 public:
  using Operation = std::function<std::vector<session::Event>(session::SessionState&, std::int64_t now_ms)>;

  SessionStore(EventLog& log, Clock clock, std::map<std::string, session::SessionState> restored = {},
               std::filesystem::path snapshot_path = {}, std::size_t snapshot_every = 0);

  /// Next unused id of the form "s-000001".
  std::string next_id();

  /// Starts a session under `request.session_id` (assigned when empty).
  session::SessionState create(session::StartRequest request, const lexicon::VocabPool& pool,
                               genclient::Backend* backend, const genclient::ClientOptions& options = {});

  /// Runs `op` on session `id`. Throws NotFoundError for an unknown id.
  session::SessionState mutate(const std::string& id, const Operation& op);

  session::SessionState get(const std::string& id) const;
  std::map<std::string, session::SessionState> all() const;
  std::size_t size() const;

  /// Writes a snapshot now; a no-op without a snapshot path.
  void snapshot();

 private:
  struct Entry {
    std::mutex mu;
    session::SessionState state;
  };

  std::shared_ptr<Entry> entry(const std::string& id) const;
  void after_commit();

  EventLog& log_;
  Clock clock_;
  std::filesystem::path snapshot_path_;
  std::size_t snapshot_every_;
  std::uint64_t last_snapshot_seq_ = 0;
  std::uint64_t id_counter_ = 0;
  mutable std::shared_mutex map_mu_;     // guards sessions_ and id_counter_
  mutable std::shared_mutex commit_mu_;  // exclusive while snapshotting
  std::mutex snapshot_mu_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
};

// -- idempotency -------------------------------------------------------------

struct CachedResponse {
  int status = 200;
  std::string body;
};

/// Responses keyed by client request id, persisted as NDJSON so retries
/// after a restart still see the original answer. Concurrent requests
/// with the same key run once; the others wait and get the cached result.
class RequestCache {
 public:
  explicit RequestCache(std::filesystem::path path);

  /// Returns the cached response for `key`, or runs `handler` and caches
  /// its result unless the status is 5xx.
  CachedResponse run(const std::string& key, const std::function<CachedResponse()>& handler);

  std::size_t size() const;

 private:
  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::map<std::string, CachedResponse> done_;
  std::map<std::string, std::shared_ptr<std::mutex>> inflight_;
  std::ofstream out_;
};

// -- HTTP service ------------------------------------------------------------

struct Dependencies {
  std::shared_ptr<const lexicon::VocabPool> pool;
  std::shared_ptr<genclient::Backend> backend;
  std::shared_ptr<grammar::Checker> checker;
  std::shared_ptr<const wordselect::EmbeddingProvider> embeddings;
  Clock clock = system_clock_ms;
};

/// Loads the vocabulary and embeddings and builds the backends named by
/// `config`. Unreadable files raise IoError or ParseError.
Dependencies load_dependencies(const ServiceConfig& config);

class Service {
 public:
  /// Opens the data directory and restores every persisted session.
  Service(ServiceConfig config, Dependencies deps);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds the listen address and returns the bound port. Throws IoError.
  int bind();
  /// Serves until stop(); call after bind().
  void run();
  void stop();

  SessionStore& store();
  nlohmann::ordered_json health() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Loads dependencies, binds and blocks serving requests.
void serve(const ServiceConfig& config);

}  // namespace storyfier::service
