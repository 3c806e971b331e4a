// Copyright 2026 The VernQA Authors
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

#include "vernqa/service.h"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>

#include "httplib.h"
#include "json.hpp"
#include "vernqa/text_util.h"

namespace vernqa {

using nlohmann::json;
namespace fs = std::filesystem;

std::int64_t system_clock_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

// ---------------------------------------------------------------------------
// Config

namespace {

std::string resolve(const std::string& base_dir, const std::string& p) {
  if (p.empty() || base_dir.empty() || fs::path(p).is_absolute()) return p;
  return (fs::path(base_dir) / p).lexically_normal().string();
}

}  // namespace

ServiceConfig ServiceConfig::parse(const std::string& json_text, const std::string& base_dir) {
  ServiceConfig c;
  try {
    const json j = json::parse(json_text);
    c.host = j.value("host", c.host);
    c.port = j.value("port", c.port);
    c.data_dir = resolve(base_dir, j.value("data_dir", c.data_dir));
    c.default_lang = normalize_lang(j.value("default_lang", c.default_lang));
    c.top_k_default = j.value("top_k_default", c.top_k_default);
    c.top_k_max = j.value("top_k_max", c.top_k_max);
    c.disclaimer_text = j.value("disclaimer_text", c.disclaimer_text);
    if (j.contains("artifacts")) {
      const json& a = j.at("artifacts");
      c.artifacts.vocab = resolve(base_dir, a.value("vocab", ""));
      c.artifacts.checkpoint = resolve(base_dir, a.value("checkpoint", ""));
      c.artifacts.index = resolve(base_dir, a.value("index", ""));
      for (const json& ad : a.value("adapters", json::array())) {
        c.artifacts.adapters.push_back({ad.at("src").get<std::string>(),
                                        ad.at("tgt").get<std::string>(),
                                        resolve(base_dir, ad.at("path").get<std::string>())});
      }
    }
    if (j.contains("composer")) {
      const json& m = j.at("composer");
      c.compose.mode = parse_composer_mode(m.value("mode", std::string("stitch")));
      c.compose.max_sentences = m.value("max_sentences", c.compose.max_sentences);
    }
    if (j.contains("summary")) {
      const json& s = j.at("summary");
      c.summary.k_rule = KRule::parse(s.value("k_rule", std::string("sqrt")));
      c.summary.max_sentences = s.value("max_sentences", c.summary.max_sentences);
      c.summary.kmeans_seed = s.value("seed", c.summary.kmeans_seed);
      c.summary.kmeans_max_iters = s.value("max_iters", c.summary.kmeans_max_iters);
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("service config: ") + e.what());
  }
  if (c.top_k_default < 1) throw FormatError("service config: top_k_default must be >= 1");
  return c;
}

ServiceConfig ServiceConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open service config: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), fs::path(path).parent_path().string());
}

void ServiceConfig::apply_env() {
  if (const char* h = std::getenv("VERNQA_HOST"); h && *h) host = h;
  if (const char* p = std::getenv("VERNQA_PORT"); p && *p) {
    try {
      port = std::stoi(p);
    } catch (const std::logic_error&) {
      throw InvalidArgument(std::string("VERNQA_PORT is not a number: ") + p);
    }
  }
}

// ---------------------------------------------------------------------------
// Stores

namespace {

void append_line(const std::string& path, const std::string& line) {
  std::ofstream out(path, std::ios::app | std::ios::binary);
  if (!out) throw IoError("cannot append to " + path);
  out << line << '\n';
  out.flush();
  if (!out) throw IoError("write failed: " + path);
}

template <typename Fn>
void replay_jsonl(const std::string& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      fn(json::parse(line));
    } catch (const json::exception& e) {
      throw FormatError(path + ": line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::string random_id() {
  static thread_local std::mt19937_64 gen{std::random_device{}()};
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(gen()),
                static_cast<unsigned long long>(gen()));
  return buf;
}

}  // namespace

SessionStore::SessionStore(std::string path) : path_(std::move(path)) {
  replay_jsonl(path_, [this](const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    const std::string id = j.at("session_id").get<std::string>();
    if (kind == "session") {
      insert(id, j.at("created_at").get<std::int64_t>(), false);
    } else if (kind == "turn") {
      Entry* e = find(id);
      if (e == nullptr) e = &insert(id, j.at("timestamp").get<std::int64_t>(), false);
      e->record.turns.push_back({j.at("timestamp").get<std::int64_t>(),
                                 j.at("role").get<std::string>(), j.at("text").get<std::string>(),
                                 j.at("lang").get<std::string>()});
    }
  });
}

SessionStore::Entry* SessionStore::find(const std::string& id) const {
  std::shared_lock lock(map_mu_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second.get();
}

SessionStore::Entry& SessionStore::insert(const std::string& id, std::int64_t now, bool persist) {
  std::unique_lock lock(map_mu_);
  auto [it, inserted] = sessions_.try_emplace(id);
  if (inserted) {
    it->second = std::make_unique<Entry>();
    it->second->record.session_id = id;
    it->second->record.created_at = now;
    if (persist) {
      write_line(json{{"kind", "session"}, {"session_id", id}, {"created_at", now}}.dump());
    }
  }
  return *it->second;
}

void SessionStore::write_line(const std::string& line) {
  std::lock_guard lock(file_mu_);
  append_line(path_, line);
}

std::string SessionStore::create(std::int64_t now) {
  for (;;) {
    std::string id = random_id();
    if (find(id) == nullptr) {
      insert(id, now, true);
      return id;
    }
  }
}

void SessionStore::ensure(const std::string& id, std::int64_t now) {
  if (find(id) == nullptr) insert(id, now, true);
}

void SessionStore::append(const std::string& id, std::vector<Turn> turns) {
  Entry* e = find(id);
  if (e == nullptr) throw InvalidArgument("unknown session '" + id + "'");
  std::lock_guard lock(e->mu);
  std::int64_t floor = e->record.turns.empty() ? e->record.created_at
                                               : e->record.turns.back().timestamp;
  for (Turn& t : turns) {
    t.timestamp = std::max(t.timestamp, floor);
    floor = t.timestamp;
    write_line(json{{"kind", "turn"},
                    {"session_id", id},
                    {"timestamp", t.timestamp},
                    {"role", t.role},
                    {"text", t.text},
                    {"lang", t.lang}}
                   .dump());
    e->record.turns.push_back(std::move(t));
  }
}

std::optional<SessionRecord> SessionStore::get(const std::string& id) const {
  Entry* e = find(id);
  if (e == nullptr) return std::nullopt;
  std::lock_guard lock(e->mu);
  return e->record;
}

EhrStore::EhrStore(std::string path) : path_(std::move(path)) {
  replay_jsonl(path_, [this](const json& j) {
    EhrDocument d{j.at("patient_id").get<std::string>(), j.at("doc_id").get<std::string>(),
                  j.at("text").get<std::string>(), j.at("created_at").get<std::int64_t>()};
    by_patient_[d.patient_id].push_back(std::move(d));
  });
}

EhrDocument EhrStore::add(const std::string& patient_id, const std::string& doc_id,
                          const std::string& text, std::int64_t now) {
  if (trim(text).empty()) throw InvalidArgument("document text is empty");
  std::lock_guard lock(mu_);
  std::vector<EhrDocument>& docs = by_patient_[patient_id];
  auto taken = [&docs](const std::string& id) {
    return std::any_of(docs.begin(), docs.end(), [&](const EhrDocument& d) { return d.doc_id == id; });
  };
  std::string id = doc_id;
  if (id.empty()) {
    for (std::size_t n = docs.size() + 1;; ++n) {
      id = "doc-" + std::to_string(n);
      if (!taken(id)) break;
    }
  } else if (taken(id)) {
    if (docs.empty()) by_patient_.erase(patient_id);
    throw DuplicateDocument("document '" + id + "' already exists for patient '" + patient_id + "'");
  }
  EhrDocument d{patient_id, id, text, now};
  append_line(path_, json{{"patient_id", d.patient_id},
                          {"doc_id", d.doc_id},
                          {"text", d.text},
                          {"created_at", d.created_at}}
                         .dump());
  docs.push_back(d);
  return d;
}

std::optional<std::vector<EhrDocument>> EhrStore::documents(const std::string& patient_id) const {
  std::lock_guard lock(mu_);
  auto it = by_patient_.find(patient_id);
  if (it == by_patient_.end() || it->second.empty()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------
// Service

struct Service::Http {
  httplib::Server server;
};

namespace {

HttpResponse json_response(int status, const json& body) { return {status, body.dump()}; }

HttpResponse error_response(int status, const std::string& code, const std::string& message) {
  return json_response(status, {{"error_code", code}, {"message", message}});
}

// Parses a JSON object body or produces the 400 response in `err`.
std::optional<json> parse_object(const std::string& body, HttpResponse& err) {
  try {
    json j = json::parse(body);
    if (j.is_object()) return j;
  } catch (const json::exception&) {
  }
  err = error_response(400, "bad_request", "request body must be a JSON object");
  return std::nullopt;
}

bool optional_string_field(const json& j, const char* key, std::string& out) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return true;
  if (!it->is_string()) return false;
  out = it->get<std::string>();
  return true;
}

std::string store_path(const std::string& dir, const char* file) {
  fs::create_directories(dir);
  return (fs::path(dir) / file).string();
}

json turn_json(const Turn& t) {
  return {{"timestamp", t.timestamp}, {"role", t.role}, {"text", t.text}, {"lang", t.lang}};
}

}  // namespace

Service::Service(ServiceConfig config, std::shared_ptr<const Pipeline> pipeline,
                 SentenceEmbedder embedder, Clock clock)
    : config_(std::move(config)),
      pipeline_(std::move(pipeline)),
      embedder_(std::move(embedder)),
      clock_(std::move(clock)),
      sessions_(store_path(config_.data_dir, "sessions.jsonl")),
      ehr_(store_path(config_.data_dir, "ehr.jsonl")),
      http_(std::make_unique<Http>()) {}

Service::~Service() = default;

std::unique_ptr<Service> Service::from_config(const ServiceConfig& config) {
  const PipelinePaths& a = config.artifacts;
  for (const auto& [what, p] : {std::pair{"vocab", a.vocab}, std::pair{"checkpoint", a.checkpoint},
                                std::pair{"index", a.index}}) {
    if (p.empty()) throw InvalidArgument(std::string("service config: artifacts.") + what + " is not set");
    if (!fs::exists(p)) throw IoError(std::string("missing ") + what + " artifact: " + p);
  }
  auto pipeline = Pipeline::load(config.artifacts, config.compose);
  return std::make_unique<Service>(config, std::move(pipeline));
}

void Service::swap_pipeline(std::shared_ptr<const Pipeline> pipeline) {
  std::lock_guard lock(pipeline_mu_);
  pipeline_ = std::move(pipeline);
}

std::shared_ptr<const Pipeline> Service::pipeline() const {
  std::lock_guard lock(pipeline_mu_);
  return pipeline_;
}

HttpResponse Service::handle(const HttpRequest& req) {
  static const std::regex kSession("^/v1/sessions/([^/]+)$");
  static const std::regex kEhr("^/v1/ehr/([^/]+)$");
  std::smatch m;
  try {
    if (req.path == "/health") {
      if (req.method == "GET") return handle_health();
    } else if (req.path == "/v1/ask") {
      if (req.method == "POST") return handle_ask(req.body);
    } else if (req.path == "/v1/summarize") {
      if (req.method == "POST") return handle_summarize(req.body);
    } else if (req.path == "/v1/sessions") {
      if (req.method == "POST") return handle_create_session();
    } else if (std::regex_match(req.path, m, kSession)) {
      if (req.method == "GET") return handle_get_session(m[1].str());
    } else if (std::regex_match(req.path, m, kEhr)) {
      if (req.method == "POST") return handle_store_ehr(m[1].str(), req.body);
      if (req.method == "GET") return handle_list_ehr(m[1].str());
    } else {
      return error_response(404, "not_found", "no route for " + req.path);
    }
    return error_response(405, "method_not_allowed", req.method + " not allowed on " + req.path);
  } catch (const std::exception& e) {
    return error_response(500, "internal", e.what());
  }
}

HttpResponse Service::handle_health() {
  const auto p = pipeline();
  return json_response(200, {{"status", "ok"},
                             {"version", kServiceVersion},
                             {"index_size", p ? index_size(p->index()) : 0}});
}

HttpResponse Service::handle_ask(const std::string& body) {
  HttpResponse err;
  const auto j = parse_object(body, err);
  if (!j) return err;
  auto q = j->find("question");
  if (q == j->end() || !q->is_string()) {
    return error_response(400, "bad_request", "field 'question' (string) is required");
  }
  const std::string question = q->get<std::string>();
  std::string lang = config_.default_lang;
  std::string session_id;
  if (!optional_string_field(*j, "lang", lang) ||
      !optional_string_field(*j, "session_id", session_id)) {
    return error_response(400, "bad_request", "'lang' and 'session_id' must be strings");
  }
  std::size_t top_k = config_.top_k_default;
  if (auto k = j->find("top_k"); k != j->end() && !k->is_null()) {
    if (!k->is_number_integer() || k->get<long long>() < 1 ||
        k->get<long long>() > static_cast<long long>(config_.top_k_max)) {
      return error_response(400, "bad_request",
                            "'top_k' must be an integer in [1, " +
                                std::to_string(config_.top_k_max) + "]");
    }
    top_k = k->get<std::size_t>();
  }
  if (j->contains("session_id") && session_id.empty()) {
    return error_response(400, "bad_request", "'session_id' must be nonempty");
  }

  const auto p = pipeline();
  if (!p) return error_response(503, "unavailable", "artifacts not loaded");

  AnswerBundle bundle;
  try {
    bundle = p->ask(question, lang, top_k);
  } catch (const EmptyQuestionError& e) {
    return error_response(422, "empty_question", e.what());
  } catch (const UnsupportedLanguagePair& e) {
    return error_response(422, "unsupported_language", e.what());
  } catch (const NoAnswerError& e) {
    return error_response(404, "no_answer", e.what());
  }

  if (!session_id.empty()) {
    const std::int64_t now = clock_();
    sessions_.ensure(session_id, now);
    sessions_.append(session_id, {{now, "user", question, bundle.query_lang},
                                  {now, "assistant", bundle.final_text, bundle.query_lang}});
  }

  json hits = json::array();
  for (const RetrievedAnswer& h : bundle.hits) {
    hits.push_back({{"answer_id", h.hit.answer_id}, {"score", h.hit.score}, {"text", h.text}});
  }
  json out = {{"answer", bundle.final_text},
              {"lang", bundle.query_lang},
              {"hits", hits},
              {"disclaimer", config_.disclaimer_text}};
  if (!session_id.empty()) out["session_id"] = session_id;
  return json_response(200, out);
}

HttpResponse Service::handle_summarize(const std::string& body) {
  HttpResponse err;
  const auto j = parse_object(body, err);
  if (!j) return err;
  std::string patient_id, text;
  if (!optional_string_field(*j, "patient_id", patient_id) ||
      !optional_string_field(*j, "text", text)) {
    return error_response(400, "bad_request", "'patient_id' and 'text' must be strings");
  }
  const bool by_patient = j->contains("patient_id") && !(*j)["patient_id"].is_null();
  const bool by_text = j->contains("text") && !(*j)["text"].is_null();
  if (by_patient == by_text) {
    return error_response(400, "bad_request", "provide exactly one of 'patient_id' or 'text'");
  }

  SentenceSet sentences;
  if (by_patient) {
    const auto docs = ehr_.documents(patient_id);
    if (!docs) return error_response(404, "not_found", "unknown patient '" + patient_id + "'");
    // Document boundaries are sentence boundaries.
    for (const EhrDocument& d : *docs) {
      for (Sentence& s : split_sentences(d.text).sentences) {
        s.position = sentences.sentences.size();
        sentences.sentences.push_back(std::move(s));
      }
    }
  } else {
    sentences = split_sentences(text);
  }
  if (sentences.empty()) return error_response(422, "empty_text", "nothing to summarize");

  SentenceEmbedder embed = embedder_;
  std::shared_ptr<const Pipeline> hold;
  if (!embed) {
    hold = pipeline();
    if (!hold) return error_response(503, "unavailable", "artifacts not loaded");
    embed = hold->sentence_embedder();
  }
  const Summary summary = summarize(sentences, embed, config_.summary);
  json out_sentences = json::array();
  for (const Sentence& s : summary.sentences) out_sentences.push_back(s.text);
  return json_response(200, {{"summary_sentences", out_sentences}, {"k_used", summary.k_used}});
}

HttpResponse Service::handle_store_ehr(const std::string& patient_id, const std::string& body) {
  HttpResponse err;
  const auto j = parse_object(body, err);
  if (!j) return err;
  auto t = j->find("text");
  std::string doc_id;
  if (t == j->end() || !t->is_string() || !optional_string_field(*j, "doc_id", doc_id)) {
    return error_response(400, "bad_request", "field 'text' (string) is required");
  }
  try {
    const EhrDocument d = ehr_.add(patient_id, doc_id, t->get<std::string>(), clock_());
    return json_response(201, {{"patient_id", d.patient_id},
                               {"doc_id", d.doc_id},
                               {"created_at", d.created_at}});
  } catch (const DuplicateDocument& e) {
    return error_response(409, "conflict", e.what());
  } catch (const InvalidArgument& e) {
    return error_response(422, "empty_text", e.what());
  }
}

HttpResponse Service::handle_list_ehr(const std::string& patient_id) {
  const auto docs = ehr_.documents(patient_id);
  if (!docs) return error_response(404, "not_found", "unknown patient '" + patient_id + "'");
  json arr = json::array();
  for (const EhrDocument& d : *docs) {
    arr.push_back({{"doc_id", d.doc_id}, {"text", d.text}, {"created_at", d.created_at}});
  }
  return json_response(200, {{"patient_id", patient_id}, {"documents", arr}});
}

HttpResponse Service::handle_create_session() {
  const std::string id = sessions_.create(clock_());
  return json_response(201, {{"session_id", id}});
}

HttpResponse Service::handle_get_session(const std::string& session_id) {
  const auto rec = sessions_.get(session_id);
  if (!rec) return error_response(404, "not_found", "unknown session '" + session_id + "'");
  json turns = json::array();
  for (const Turn& t : rec->turns) turns.push_back(turn_json(t));
  return json_response(200, {{"session_id", rec->session_id},
                             {"created_at", rec->created_at},
                             {"turns", turns}});
}

namespace {

void install_routes(httplib::Server& server, Service& service) {
  auto forward = [&service](const httplib::Request& req, httplib::Response& res) {
    const HttpResponse r = service.handle({req.method, req.path, req.body});
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  server.Get(".*", forward);
  server.Post(".*", forward);
  server.Put(".*", forward);
  server.Patch(".*", forward);
  server.Delete(".*", forward);
  server.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  // The browser chat client may be served from another origin.
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
}

}  // namespace

bool Service::listen() {
  install_routes(http_->server, *this);
  return http_->server.listen(config_.host, config_.port);
}

int Service::bind_ephemeral() {
  install_routes(http_->server, *this);
  return http_->server.bind_to_any_port(config_.host);
}

bool Service::listen_after_bind() { return http_->server.listen_after_bind(); }

void Service::stop() { http_->server.stop(); }

void Service::wait_until_ready() const { http_->server.wait_until_ready(); }

}  // namespace vernqa
