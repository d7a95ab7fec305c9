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

#include "storyfier/service.hpp"

#include <atomic>
#include <chrono>
#include <regex>
#include <set>
#include <sstream>

#include <httplib.h>

#include "storyfier/error.hpp"
#include "storyfier/study.hpp"
#include "storyfier/text.hpp"

namespace storyfier::service {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

// -- configuration -----------------------------------------------------------

void ServiceConfig::validate() const {
  if (vocab_path.empty()) throw PreconditionError("no vocabulary path configured");
  if (!use_template && generation_url.empty()) {
    throw PreconditionError("no generation backend URL configured and the template backend is off");
  }
  if (port < 0 || port > 65535) throw PreconditionError("port " + std::to_string(port) + " out of range");
  if (data_dir.empty()) throw PreconditionError("no data directory configured");
  std::error_code ec;
  fs::create_directories(data_dir, ec);
  const fs::path probe = fs::path(data_dir) / ".write-probe";
  {
    std::ofstream out(probe);
    if (!out) throw PreconditionError("data directory '" + data_dir + "' is not writable");
  }
  fs::remove(probe, ec);
}

namespace {

void apply_listen(ServiceConfig& c, const std::string& listen) {
  const auto colon = listen.rfind(':');
  if (colon == std::string::npos) throw PreconditionError("listen address '" + listen + "' is not host:port");
  c.host = listen.substr(0, colon);
  try {
    c.port = std::stoi(listen.substr(colon + 1));
  } catch (const std::exception&) {
    throw PreconditionError("listen address '" + listen + "' has no numeric port");
  }
}

bool parse_flag(const std::string& v) {
  const auto s = text::to_lower(text::trim(v));
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off" || s.empty()) return false;
  throw PreconditionError("'" + v + "' is not a boolean");
}

}  // namespace

ServiceConfig config_from_json(const json& j, ServiceConfig c) {
  if (!j.is_object()) throw PreconditionError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "listen") {
      apply_listen(c, value.get<std::string>());
    } else if (key == "generation_url") {
      c.generation_url = value.get<std::string>();
    } else if (key == "grammar_url") {
      c.grammar_url = value.get<std::string>();
    } else if (key == "embeddings") {
      c.embeddings_path = value.get<std::string>();
    } else if (key == "vocab") {
      c.vocab_path = value.get<std::string>();
    } else if (key == "data_dir") {
      c.data_dir = value.get<std::string>();
    } else if (key == "template") {
      c.use_template = value.get<bool>();
    } else if (key == "snapshot_every") {
      c.snapshot_every = value.get<std::size_t>();
    } else if (key == "seed") {
      c.seed = value.get<std::uint64_t>();
    } else {
      throw PreconditionError("unknown config key '" + key + "'");
    }
  }
  return c;
}

ServiceConfig load_config_file(const std::string& path, ServiceConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("config file '" + path + "': " + e.what(), 0);
  }
  return config_from_json(j, std::move(base));
}

ServiceConfig config_from_env(ServiceConfig c, const std::function<const char*(const char*)>& getenv) {
  auto var = [&](const char* name) -> std::optional<std::string> {
    const char* v = getenv(name);
    if (!v) return std::nullopt;
    return std::string(v);
  };
  if (auto v = var("STORYFIER_LISTEN")) apply_listen(c, *v);
  if (auto v = var("STORYFIER_GENERATION_URL")) c.generation_url = *v;
  if (auto v = var("STORYFIER_GRAMMAR_URL")) c.grammar_url = *v;
  if (auto v = var("STORYFIER_EMBEDDINGS")) c.embeddings_path = *v;
  if (auto v = var("STORYFIER_VOCAB")) c.vocab_path = *v;
  if (auto v = var("STORYFIER_DATA_DIR")) c.data_dir = *v;
  if (auto v = var("STORYFIER_TEMPLATE")) c.use_template = parse_flag(*v);
  try {
    if (auto v = var("STORYFIER_SNAPSHOT_EVERY")) c.snapshot_every = std::stoul(*v);
    if (auto v = var("STORYFIER_SEED")) c.seed = std::stoull(*v);
  } catch (const std::exception&) {
    throw PreconditionError("STORYFIER_SNAPSHOT_EVERY and STORYFIER_SEED must be non-negative integers");
  }
  return c;
}

// -- event log ---------------------------------------------------------------

ordered_json to_json(const PersistedEvent& e) {
  ordered_json j;
  j["seq"] = e.seq;
  j["ts"] = e.event.ts_ms;
  j["session_id"] = e.event.session_id;
  j["kind"] = e.event.kind;
  j["payload"] = e.event.payload;
  return j;
}

std::vector<PersistedEvent> read_log(std::istream& in) {
  std::vector<PersistedEvent> out;
  std::string line;
  std::uint64_t expected = 1;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    PersistedEvent pe;
    try {
      const auto j = json::parse(line);
      pe.seq = j.at("seq").get<std::uint64_t>();
      pe.event = session::event_from_json(j);
    } catch (const std::exception& e) {
      throw ReplayError(std::string("corrupt log record: ") + e.what(), expected);
    }
    if (pe.seq != expected) {
      throw ReplayError(pe.seq < expected ? "sequence number repeats or goes backwards"
                                          : "gap in sequence numbers (expected " + std::to_string(expected) + ")",
                        pe.seq);
    }
    ++expected;
    out.push_back(std::move(pe));
  }
  return out;
}

namespace {

void replay_into(std::map<std::string, session::SessionState>& states, const PersistedEvent& pe) {
  try {
    session::apply(states[pe.event.session_id], pe.event);
  } catch (const ReplayError&) {
    throw;
  } catch (const Error& e) {
    throw ReplayError(std::string("cannot apply ") + pe.event.kind + ": " + e.what(), pe.seq);
  } catch (const json::exception& e) {
    throw ReplayError(std::string("malformed ") + pe.event.kind + " payload: " + e.what(), pe.seq);
  }
}

}  // namespace

std::map<std::string, session::SessionState> replay(const std::vector<PersistedEvent>& log) {
  std::map<std::string, session::SessionState> states;
  std::uint64_t prev = 0;
  for (const auto& pe : log) {
    if (pe.seq <= prev) throw ReplayError("sequence numbers must strictly increase", pe.seq);
    prev = pe.seq;
    replay_into(states, pe);
  }
  return states;
}

std::map<std::string, session::SessionState> replay(std::istream& log) { return replay(read_log(log)); }

EventLog::EventLog(fs::path path) : path_(std::move(path)) {
  if (fs::exists(path_)) {
    std::ifstream in(path_);
    if (!in) throw IoError("cannot read event log '" + path_.string() + "'");
    existing_ = read_log(in);
    if (!existing_.empty()) last_seq_ = existing_.back().seq;
  }
  if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
  out_.open(path_, std::ios::app);
  if (!out_) throw IoError("cannot open event log '" + path_.string() + "' for appending");
}

std::uint64_t EventLog::append(const std::vector<session::Event>& events) {
  std::lock_guard lock(mu_);
  std::string batch;
  std::uint64_t seq = last_seq_;
  for (const auto& e : events) {
    batch += to_json(PersistedEvent{++seq, e}).dump();
    batch += '\n';
  }
  out_ << batch;
  out_.flush();
  if (!out_) throw IoError("write to event log '" + path_.string() + "' failed");
  last_seq_ = seq;
  return seq;
}

std::uint64_t EventLog::last_seq() const {
  std::lock_guard lock(mu_);
  return last_seq_;
}

void write_snapshot(const fs::path& path, std::uint64_t last_seq,
                    const std::map<std::string, session::SessionState>& sessions) {
  ordered_json j;
  j["last_seq"] = last_seq;
  ordered_json all = ordered_json::object();
  for (const auto& [id, s] : sessions) all[id] = session::to_json(s);
  j["sessions"] = std::move(all);
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << j.dump() << '\n';
    if (!out) throw IoError("cannot write snapshot '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

std::map<std::string, session::SessionState> restore(const std::vector<PersistedEvent>& log,
                                                     const fs::path& snapshot_path) {
  const std::uint64_t log_last = log.empty() ? 0 : log.back().seq;
  std::map<std::string, session::SessionState> states;
  std::uint64_t from = 0;
  if (!snapshot_path.empty() && fs::exists(snapshot_path)) {
    try {
      std::ifstream in(snapshot_path);
      const auto j = json::parse(in);
      const auto last = j.at("last_seq").get<std::uint64_t>();
      if (last <= log_last) {
        for (const auto& [id, sj] : j.at("sessions").items()) {
          std::vector<session::Event> events;
          for (const auto& ej : sj.at("event_log")) events.push_back(session::event_from_json(ej));
          states[id] = session::replay_session(events);
        }
        from = last;
      } else {
        states.clear();
      }
    } catch (const std::exception&) {
      states.clear();
      from = 0;
    }
  }
  for (const auto& pe : log) {
    if (pe.seq > from) replay_into(states, pe);
  }
  return states;
}

// -- session store -----------------------------------------------------------

std::int64_t system_clock_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

namespace {

std::optional<std::uint64_t> id_number(const std::string& id) {
  static const std::regex kId(R"(s-(\d+))");
  std::smatch m;
  if (!std::regex_match(id, m, kId)) return std::nullopt;
  return std::stoull(m[1].str());
}

}  // namespace

SessionStore::SessionStore(EventLog& log, Clock clock, std::map<std::string, session::SessionState> restored,
                           fs::path snapshot_path, std::size_t snapshot_every)
    : log_(log),
      clock_(std::move(clock)),
      snapshot_path_(std::move(snapshot_path)),
      snapshot_every_(snapshot_every),
      last_snapshot_seq_(log.last_seq()) {
  for (auto& [id, state] : restored) {
    if (auto n = id_number(id)) id_counter_ = std::max(id_counter_, *n);
    auto e = std::make_shared<Entry>();
    e->state = std::move(state);
    sessions_.emplace(id, std::move(e));
  }
}

std::string SessionStore::next_id() {
  std::unique_lock lock(map_mu_);
  char buf[32];
  std::snprintf(buf, sizeof buf, "s-%06llu", static_cast<unsigned long long>(++id_counter_));
  return buf;
}

session::SessionState SessionStore::create(session::StartRequest request, const lexicon::VocabPool& pool,
                                           genclient::Backend* backend, const genclient::ClientOptions& options) {
  if (request.session_id.empty()) request.session_id = next_id();
  {
    std::shared_lock lock(map_mu_);
    if (sessions_.count(request.session_id)) throw PreconditionError("session '" + request.session_id + "' exists");
  }
  auto e = std::make_shared<Entry>();
  std::lock_guard entry_lock(e->mu);
  const auto events = session::start_session(e->state, request, pool, backend, clock_(), options);
  {
    std::shared_lock commit(commit_mu_);
    std::unique_lock lock(map_mu_);
    if (!sessions_.emplace(request.session_id, e).second) {
      throw PreconditionError("session '" + request.session_id + "' exists");
    }
    log_.append(events);
  }
  auto result = e->state;
  after_commit();
  return result;
}

std::shared_ptr<SessionStore::Entry> SessionStore::entry(const std::string& id) const {
  std::shared_lock lock(map_mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFoundError("no session '" + id + "'");
  return it->second;
}

session::SessionState SessionStore::mutate(const std::string& id, const Operation& op) {
  auto e = entry(id);
  session::SessionState result;
  {
    std::lock_guard lock(e->mu);
    session::SessionState next = e->state;
    const auto events = op(next, clock_());
    if (!events.empty()) {
      std::shared_lock commit(commit_mu_);
      log_.append(events);
      e->state = std::move(next);
    }
    result = e->state;
  }
  after_commit();
  return result;
}

session::SessionState SessionStore::get(const std::string& id) const {
  auto e = entry(id);
  std::lock_guard lock(e->mu);
  return e->state;
}

std::map<std::string, session::SessionState> SessionStore::all() const {
  std::vector<std::pair<std::string, std::shared_ptr<Entry>>> entries;
  {
    std::shared_lock lock(map_mu_);
    entries.assign(sessions_.begin(), sessions_.end());
  }
  std::map<std::string, session::SessionState> out;
  for (const auto& [id, e] : entries) {
    std::lock_guard lock(e->mu);
    out.emplace(id, e->state);
  }
  return out;
}

std::size_t SessionStore::size() const {
  std::shared_lock lock(map_mu_);
  return sessions_.size();
}

void SessionStore::snapshot() {
  if (snapshot_path_.empty()) return;
  std::lock_guard guard(snapshot_mu_);
  std::map<std::string, session::SessionState> states;
  std::uint64_t seq = 0;
  {
    // No commit can land between reading the states and the sequence number.
    std::unique_lock commit(commit_mu_);
    std::shared_lock lock(map_mu_);
    for (const auto& [id, e] : sessions_) states.emplace(id, e->state);
    seq = log_.last_seq();
  }
  write_snapshot(snapshot_path_, seq, states);
  last_snapshot_seq_ = seq;
}

void SessionStore::after_commit() {
  if (snapshot_path_.empty() || snapshot_every_ == 0) return;
  std::uint64_t since = 0;
  {
    std::lock_guard guard(snapshot_mu_);
    since = log_.last_seq() - last_snapshot_seq_;
  }
  if (since >= snapshot_every_) snapshot();
}

// -- idempotency -------------------------------------------------------------

RequestCache::RequestCache(fs::path path) : path_(std::move(path)) {
  if (fs::exists(path_)) {
    std::ifstream in(path_);
    std::string line;
    while (std::getline(in, line)) {
      if (text::trim(line).empty()) continue;
      try {
        const auto j = json::parse(line);
        done_[j.at("key").get<std::string>()] = {j.at("status").get<int>(), j.at("body").get<std::string>()};
      } catch (const json::exception&) {
        // A torn trailing record only loses one cached reply.
      }
    }
  }
  out_.open(path_, std::ios::app);
  if (!out_) throw IoError("cannot open request cache '" + path_.string() + "'");
}

CachedResponse RequestCache::run(const std::string& key, const std::function<CachedResponse()>& handler) {
  std::shared_ptr<std::mutex> key_mu;
  {
    std::lock_guard lock(mu_);
    if (auto it = done_.find(key); it != done_.end()) return it->second;
    auto& slot = inflight_[key];
    if (!slot) slot = std::make_shared<std::mutex>();
    key_mu = slot;
  }
  std::lock_guard key_lock(*key_mu);
  {
    std::lock_guard lock(mu_);
    if (auto it = done_.find(key); it != done_.end()) return it->second;
  }
  auto response = handler();
  std::lock_guard lock(mu_);
  if (response.status < 500) {
    done_[key] = response;
    ordered_json j;
    j["key"] = key;
    j["status"] = response.status;
    j["body"] = response.body;
    out_ << j.dump() << '\n';
    out_.flush();
  }
  inflight_.erase(key);
  return response;
}

std::size_t RequestCache::size() const {
  std::lock_guard lock(mu_);
  return done_.size();
}

// -- dependencies ------------------------------------------------------------

Dependencies load_dependencies(const ServiceConfig& config) {
  Dependencies d;
  d.pool = std::make_shared<lexicon::VocabPool>(lexicon::load_vocab_file(config.vocab_path));
  if (config.use_template) {
    d.backend = std::make_shared<genclient::TemplateBackend>();
  } else {
    d.backend = std::make_shared<genclient::HttpBackend>(config.generation_url);
  }
  if (config.grammar_url.empty()) {
    d.checker = std::make_shared<grammar::NullChecker>();
  } else {
    d.checker = std::make_shared<grammar::LanguageToolClient>(config.grammar_url);
  }
  if (config.embeddings_path.empty()) {
    d.embeddings = std::make_shared<wordselect::HashingEmbedder>();
  } else {
    d.embeddings = std::make_shared<wordselect::FileEmbeddingStore>(
        wordselect::FileEmbeddingStore::from_file(config.embeddings_path));
  }
  return d;
}

// -- HTTP service ------------------------------------------------------------

namespace {

class HttpError : public Error {
 public:
  HttpError(int status, const std::string& what) : Error(what), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

json parse_body(const std::string& body) {
  if (text::trim(body).empty()) return json::object();
  try {
    auto j = json::parse(body);
    if (!j.is_object()) throw HttpError(400, "request body must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw HttpError(400, std::string("request body is not valid JSON: ") + e.what());
  }
}

ordered_json error_body(const std::string& kind, const std::string& message) {
  ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  return j;
}

/// Maps the library's error hierarchy onto HTTP statuses.
CachedResponse guarded(const std::function<ordered_json()>& fn) {
  try {
    return {200, fn().dump()};
  } catch (const HttpError& e) {
    return {e.status(), error_body("bad_request", e.what()).dump()};
  } catch (const NotFoundError& e) {
    return {404, error_body("not_found", e.what()).dump()};
  } catch (const ParseError& e) {
    return {400, error_body("bad_request", e.what()).dump()};
  } catch (const PreconditionError& e) {
    return {409, error_body("precondition", e.what()).dump()};
  } catch (const BackendError& e) {
    return {502, error_body("backend", e.what()).dump()};
  } catch (const json::exception& e) {
    return {400, error_body("bad_request", e.what()).dump()};
  } catch (const std::exception& e) {
    return {500, error_body("internal", e.what()).dump()};
  }
}

ordered_json entry_json(const lexicon::VocabEntry& e) {
  ordered_json j;
  j["headword"] = e.headword;
  j["definition"] = e.definition;
  j["pos"] = e.part_of_speech;
  j["phonetic"] = e.phonetic;
  j["example"] = e.usage_example;
  j["gloss_zh"] = e.gloss_zh;
  j["rank"] = e.frequency_rank;
  return j;
}

std::vector<std::string> split_csv_param(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string part;
  while (std::getline(ss, part, ',')) {
    auto w = text::to_lower(text::trim(part));
    if (!w.empty()) out.push_back(std::move(w));
  }
  return out;
}

std::size_t size_param(const httplib::Request& req, const std::string& name, std::size_t fallback) {
  if (!req.has_param(name)) return fallback;
  const auto v = req.get_param_value(name);
  try {
    std::size_t used = 0;
    const long long n = std::stoll(v, &used);
    if (used != v.size() || n < 0) throw std::invalid_argument(v);
    return static_cast<std::size_t>(n);
  } catch (const std::exception&) {
    throw HttpError(400, "query parameter '" + name + "' must be a non-negative integer");
  }
}

bool safe_file_id(const std::string& id) {
  static const std::regex kSafe(R"([A-Za-z0-9_-]{1,64})");
  return std::regex_match(id, kSafe);
}

}  // namespace

struct Service::Impl {
  ServiceConfig config;
  Dependencies deps;
  EventLog log;
  SessionStore store;
  RequestCache cache;
  httplib::Server server;
  std::mutex study_mu;
  std::atomic<int> bound_port{-1};

  Impl(ServiceConfig c, Dependencies d)
      : config(std::move(c)),
        deps(std::move(d)),
        log(fs::path(config.data_dir) / "events.ndjson"),
        store(log, deps.clock, restore(log.existing(), fs::path(config.data_dir) / "snapshot.json"),
              fs::path(config.data_dir) / "snapshot.json", config.snapshot_every),
        cache(fs::path(config.data_dir) / "requests.ndjson") {
    if (!deps.pool || !deps.backend || !deps.checker || !deps.embeddings || !deps.clock) {
      throw PreconditionError("service dependencies are incomplete");
    }
    routes();
  }

  /// Handles a request, replaying the cached response when the client
  /// repeats a request id on a write endpoint.
  void respond(const httplib::Request& req, httplib::Response& res, const std::function<ordered_json()>& fn,
               bool write) {
    std::string request_id = req.get_header_value("X-Request-Id");
    if (request_id.empty() && write) {
      try {
        const auto j = json::parse(req.body);
        if (j.is_object() && j.contains("request_id")) request_id = j.at("request_id").get<std::string>();
      } catch (const json::exception&) {
      }
    }
    CachedResponse out = (write && !request_id.empty())
                             ? cache.run(request_id + " " + req.method + " " + req.path, [&] { return guarded(fn); })
                             : guarded(fn);
    res.status = out.status;
    res.set_content(out.body, "application/json; charset=utf-8");
  }

  ordered_json state_json(const session::SessionState& s) { return session::to_json(s); }

  void routes() {
    auto get = [this](const std::string& pattern, std::function<ordered_json(const httplib::Request&)> fn) {
      server.Get(pattern, [this, fn](const httplib::Request& req, httplib::Response& res) {
        respond(req, res, [&] { return fn(req); }, false);
      });
    };
    auto post = [this](const std::string& pattern, std::function<ordered_json(const httplib::Request&)> fn) {
      server.Post(pattern, [this, fn](const httplib::Request& req, httplib::Response& res) {
        respond(req, res, [&] { return fn(req); }, true);
      });
    };

    get("/healthz", [this](const httplib::Request&) { return health(); });

    get(R"(/api/dictionary/([^/]+))", [this](const httplib::Request& req) {
      return entry_json(lexicon::lookup(*deps.pool, httplib::detail::decode_url(req.matches[1].str(), false)));
    });

    get("/api/wordsets/sample", [this](const httplib::Request& req) {
      const auto k = size_param(req, "k", 5);
      std::set<std::string> exclude;
      if (req.has_param("exclude")) {
        for (auto& w : split_csv_param(req.get_param_value("exclude"))) exclude.insert(std::move(w));
      }
      const std::uint64_t seed =
          req.has_param("seed") ? size_param(req, "seed", 0) : static_cast<std::uint64_t>(deps.clock());
      Rng rng(seed);
      ordered_json j;
      j["words"] = lexicon::sample_word_set(*deps.pool, k, rng, exclude).words;
      return j;
    });

    get("/api/wordsets/rank", [this](const httplib::Request& req) {
      if (!req.has_param("title")) throw HttpError(400, "query parameter 'title' is required");
      const auto r = wordselect::rank_by_title(req.get_param_value("title"), *deps.pool, size_param(req, "k", 5),
                                               *deps.embeddings);
      ordered_json j;
      j["words"] = r.words;
      j["scores"] = r.scores;
      j["warnings"] = r.warnings;
      return j;
    });

    post("/api/sessions", [this](const httplib::Request& req) {
      const auto body = parse_body(req.body);
      session::StartRequest start;
      start.mode = session::mode_from_string(body.value("mode", std::string("storyfier_ai")));
      if (body.contains("title") && !body.at("title").is_null()) {
        auto t = text::trim(body.at("title").get<std::string>());
        if (!t.empty()) start.title = std::move(t);
      }
      start.session_id = store.next_id();
      start.seed = body.contains("seed") ? body.at("seed").get<std::uint64_t>()
                                         : config.seed + std::hash<std::string>{}(start.session_id);
      if (body.contains("word_set") && !body.at("word_set").is_null()) {
        std::vector<std::string> words;
        for (const auto& w : body.at("word_set")) words.push_back(text::to_lower(text::trim(w.get<std::string>())));
        start.word_set = lexicon::make_word_set(*deps.pool, std::move(words));
      } else {
        Rng rng(start.seed);
        start.word_set = lexicon::sample_word_set(*deps.pool, 5, rng);
      }
      return state_json(store.create(std::move(start), *deps.pool, deps.backend.get()));
    });

    get(R"(/api/sessions/([^/]+))",
        [this](const httplib::Request& req) { return state_json(store.get(req.matches[1].str())); });

    post(R"(/api/sessions/([^/]+)/advance)", [this](const httplib::Request& req) {
      return state_json(store.mutate(req.matches[1].str(), [](auto& s, auto now) { return session::advance(s, now); }));
    });

    get(R"(/api/sessions/([^/]+)/cloze)", [this](const httplib::Request& req) {
      const auto s = store.get(req.matches[1].str());
      if (!s.cloze) throw PreconditionError("session mode " + std::string(session::to_string(s.mode)) + " has no cloze test");
      auto j = session::to_public_json(*s.cloze);
      j["attempts"] = s.cloze_attempts.size();
      return j;
    });

    post(R"(/api/sessions/([^/]+)/cloze)", [this](const httplib::Request& req) {
      const auto body = parse_body(req.body);
      std::map<std::size_t, std::string> answers;
      for (const auto& [key, value] : body.at("answers").items()) {
        std::size_t used = 0;
        std::size_t index = 0;
        try {
          index = std::stoul(key, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used == 0 || used != key.size()) throw HttpError(400, "answer key '" + key + "' is not a blank index");
        answers[index] = value.get<std::string>();
      }
      const auto s = store.mutate(req.matches[1].str(),
                                  [&](auto& st, auto now) { return session::submit_cloze(st, answers, now); });
      return session::to_json(s.cloze_attempts.back());
    });

    auto writing_view = [](const session::SessionState& s) {
      ordered_json j;
      j["writing"] = s.writing ? session::to_json(*s.writing) : ordered_json(nullptr);
      j["stats"] = s.writing ? session::to_json(session::writing_stats(*s.writing)) : ordered_json(nullptr);
      j["pending_suggestion"] = s.pending_suggestion ? session::to_json(*s.pending_suggestion) : ordered_json(nullptr);
      j["can_advance"] = session::can_advance(s);
      return j;
    };

    post(R"(/api/sessions/([^/]+)/write/turn)", [this, writing_view](const httplib::Request& req) {
      const auto text = parse_body(req.body).at("text").get<std::string>();
      return writing_view(store.mutate(req.matches[1].str(), [&](auto& s, auto now) {
        return session::write_turn(s, text, *deps.checker, now);
      }));
    });

    post(R"(/api/sessions/([^/]+)/write/machine-turn)", [this, writing_view](const httplib::Request& req) {
      return writing_view(store.mutate(req.matches[1].str(), [&](auto& s, auto now) {
        return session::write_machine_turn(s, *deps.backend, now);
      }));
    });

    post(R"(/api/sessions/([^/]+)/write/suggest)", [this](const httplib::Request& req) {
      const auto prefix = parse_body(req.body).value("prefix", std::string());
      const auto s = store.mutate(req.matches[1].str(), [&](auto& st, auto now) {
        return session::suggest(st, prefix, *deps.backend, now);
      });
      return session::to_json(*s.pending_suggestion);
    });

    post(R"(/api/sessions/([^/]+)/write/accept)", [this, writing_view](const httplib::Request& req) {
      return writing_view(store.mutate(req.matches[1].str(), [](auto& s, auto now) {
        return session::accept_pending_suggestion(s, now);
      }));
    });

    post(R"(/api/sessions/([^/]+)/write/reject)", [this, writing_view](const httplib::Request& req) {
      return writing_view(store.mutate(req.matches[1].str(), [](auto& s, auto now) {
        return session::reject_pending_suggestion(s, now);
      }));
    });

    post(R"(/api/sessions/([^/]+)/write/finish)", [this, writing_view](const httplib::Request& req) {
      return writing_view(
          store.mutate(req.matches[1].str(), [](auto& s, auto now) { return session::finish_early(s, now); }));
    });

    get(R"(/api/sessions/([^/]+)/stats)", [this](const httplib::Request& req) {
      const auto s = store.get(req.matches[1].str());
      const auto full = session::to_json(s);
      ordered_json j;
      j["session_id"] = s.session_id;
      j["step"] = session::to_string(s.step);
      j["writing_stats"] = full.at("writing_stats");
      j["timers"] = full.at("timers");
      j["wall_seconds"] = static_cast<double>(s.wall_ms()) / 1000.0;
      j["can_advance"] = session::can_advance(s);
      return j;
    });

    post("/api/study/plan", [this](const httplib::Request& req) {
      const auto body = parse_body(req.body);
      const auto pid = body.at("participant_id").get<std::string>();
      if (!safe_file_id(pid)) throw HttpError(400, "participant_id must be 1-64 of [A-Za-z0-9_-]");
      Rng rng(body.value("seed", std::uint64_t{0}));
      const auto plan = study::plan_study(pid, body.at("sequence_number").get<std::size_t>(),
                                          body.at("unknown_words").get<std::vector<std::string>>(), rng);
      const fs::path dir = fs::path(config.data_dir) / "plans";
      const fs::path file = dir / (pid + ".json");
      std::lock_guard lock(study_mu);
      if (fs::exists(file)) throw PreconditionError("participant '" + pid + "' already has a plan");
      fs::create_directories(dir);
      std::ofstream out(file);
      out << study::to_json(plan).dump(2) << '\n';
      if (!out) throw IoError("cannot write plan for '" + pid + "'");
      return study::to_json(plan);
    });

    post("/api/study/posttest", [this](const httplib::Request& req) {
      const auto body = parse_body(req.body);
      std::map<session::Mode, std::vector<study::PosttestRecord>> records;
      for (const auto& [mode, list] : body.at("records").items()) {
        auto& out = records[session::mode_from_string(mode)];
        for (const auto& r : list) {
          study::PosttestRecord rec;
          rec.word = r.at("word").get<std::string>();
          rec.choice_correct = r.at("choice_correct").get<bool>();
          if (r.contains("sentence") && !r.at("sentence").is_null()) rec.sentence = r.at("sentence").get<std::string>();
          if (r.contains("grammar_score") && !r.at("grammar_score").is_null()) rec.grammar_score = r.at("grammar_score").get<int>();
          if (r.contains("context_score") && !r.at("context_score").is_null()) rec.context_score = r.at("context_score").get<int>();
          out.push_back(std::move(rec));
        }
      }
      ordered_json outcomes = ordered_json::object();
      for (const auto& [mode, o] : study::score_posttest(records)) {
        ordered_json oj;
        oj["correct_choices"] = o.correct_choices;
        oj["correct_sentences"] = o.correct_sentences;
        oj["total_sentence_score"] = o.total_sentence_score;
        oj["sentences_written"] = o.sentences_written;
        outcomes[std::string(session::to_string(mode))] = std::move(oj);
      }
      ordered_json j;
      j["participant_id"] = body.value("participant_id", std::string());
      j["outcomes"] = std::move(outcomes);
      std::lock_guard lock(study_mu);
      std::ofstream out(fs::path(config.data_dir) / "posttest.ndjson", std::ios::app);
      out << j.dump() << '\n';
      return j;
    });
  }

  ordered_json health() const {
    bool reachable = true;
    if (auto* http = dynamic_cast<const genclient::HttpBackend*>(deps.backend.get())) reachable = http->reachable();
    ordered_json j;
    j["status"] = reachable ? "ok" : "degraded";
    ordered_json gen;
    gen["backend"] = deps.backend->describe();
    gen["reachable"] = reachable;
    j["generation"] = std::move(gen);
    j["grammar"] = deps.checker->describe();
    j["vocabulary"] = deps.pool->size();
    j["sessions"] = store.size();
    j["last_seq"] = log.last_seq();
    return j;
  }
};

Service::Service(ServiceConfig config, Dependencies deps)
    : impl_(std::make_unique<Impl>(std::move(config), std::move(deps))) {}

Service::~Service() { stop(); }

int Service::bind() {
  int port = impl_->config.port;
  if (port == 0) {
    port = impl_->server.bind_to_any_port(impl_->config.host);
  } else if (!impl_->server.bind_to_port(impl_->config.host, port)) {
    port = -1;
  }
  if (port < 0) {
    throw IoError("cannot bind " + impl_->config.host + ":" + std::to_string(impl_->config.port));
  }
  impl_->bound_port = port;
  return port;
}

void Service::run() {
  if (impl_->bound_port < 0) throw PreconditionError("bind() must be called before run()");
  impl_->server.listen_after_bind();
}

void Service::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

SessionStore& Service::store() { return impl_->store; }

ordered_json Service::health() const { return impl_->health(); }

void serve(const ServiceConfig& config) {
  config.validate();
  Service service(config, load_dependencies(config));
  service.bind();
  service.run();
}

}  // namespace storyfier::service
