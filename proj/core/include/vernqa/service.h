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

#ifndef VERNQA_SERVICE_H_
#define VERNQA_SERVICE_H_

// HTTP JSON API over the ask pipeline, the summarizer, per-user sessions
// and stored consultation notes.
//
//   GET  /health                    {"status":"ok","version","index_size"}
//   POST /v1/ask                    {question, lang?, top_k?, session_id?}
//   POST /v1/summarize              {patient_id} | {text}
//   POST /v1/ehr/{patient_id}       {text, doc_id?}
//   GET  /v1/ehr/{patient_id}       stored documents in insertion order
//   POST /v1/sessions               -> {session_id}
//   GET  /v1/sessions/{session_id}  SessionRecord
//
// Errors are {"error_code", "message"}. Response schemas live in
// docs/schemas/.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "vernqa/pipeline.h"
#include "vernqa/summarizer.h"

namespace vernqa {

inline constexpr char kServiceVersion[] = "1.0.0";
inline constexpr char kDefaultDisclaimer[] =
    "This is preliminary information, not a medical diagnosis. "
    "Please consult a qualified health worker.";

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_dir = "vernqa-data";
  std::string default_lang = "en";
  std::size_t top_k_default = 5;
  std::size_t top_k_max = 50;
  std::string disclaimer_text = kDefaultDisclaimer;
  PipelinePaths artifacts;
  ComposeOptions compose;
  SummaryConfig summary;

  // JSON config file. Relative artifact paths resolve against the file's
  // directory. Throws IoError / FormatError.
  static ServiceConfig load(const std::string& path);
  static ServiceConfig parse(const std::string& json_text, const std::string& base_dir = "");

  // VERNQA_HOST and VERNQA_PORT override host/port when set.
  void apply_env();
};

using Clock = std::function<std::int64_t()>;  // milliseconds since epoch

std::int64_t system_clock_ms();

struct Turn {
  std::int64_t timestamp = 0;
  std::string role;  // "user" | "assistant"
  std::string text;
  std::string lang;

  friend bool operator==(const Turn&, const Turn&) = default;
};

struct SessionRecord {
  std::string session_id;
  std::int64_t created_at = 0;
  std::vector<Turn> turns;
};

// Append-only JSONL persistence; replayed on construction. Writes to one
// session are serialized; different sessions proceed independently.
class SessionStore {
 public:
  explicit SessionStore(std::string path);

  std::string create(std::int64_t now);
  // Creates the session under `id` if it does not exist yet.
  void ensure(const std::string& id, std::int64_t now);
  // Appends all turns as one unit. Timestamps are raised as needed to stay
  // non-decreasing. Throws InvalidArgument for an unknown session.
  void append(const std::string& id, std::vector<Turn> turns);
  std::optional<SessionRecord> get(const std::string& id) const;

 private:
  struct Entry {
    mutable std::mutex mu;
    SessionRecord record;
  };
  Entry* find(const std::string& id) const;
  Entry& insert(const std::string& id, std::int64_t now, bool persist);
  void write_line(const std::string& line);

  std::string path_;
  mutable std::shared_mutex map_mu_;
  std::map<std::string, std::unique_ptr<Entry>> sessions_;
  std::mutex file_mu_;
};

struct EhrDocument {
  std::string patient_id;
  std::string doc_id;
  std::string text;
  std::int64_t created_at = 0;

  friend bool operator==(const EhrDocument&, const EhrDocument&) = default;
};

class DuplicateDocument : public Error {
 public:
  using Error::Error;
};

class EhrStore {
 public:
  explicit EhrStore(std::string path);

  // Assigns "doc-<n>" when doc_id is empty. Throws DuplicateDocument when an
  // explicit doc_id already exists for the patient, InvalidArgument on
  // empty text.
  EhrDocument add(const std::string& patient_id, const std::string& doc_id,
                  const std::string& text, std::int64_t now);
  std::optional<std::vector<EhrDocument>> documents(const std::string& patient_id) const;

 private:
  std::string path_;
  mutable std::mutex mu_;
  std::map<std::string, std::vector<EhrDocument>> by_patient_;
};

struct HttpRequest {
  std::string method;
  std::string path;
  std::string body;
};

struct HttpResponse {
  int status = 200;
  std::string body;
};

class Service {
 public:
  // `pipeline` may be null, in which case ask answers 503. `embedder`
  // overrides the pipeline's answer-head sentence embedder.
  Service(ServiceConfig config, std::shared_ptr<const Pipeline> pipeline,
          SentenceEmbedder embedder = {}, Clock clock = system_clock_ms);
  ~Service();

  // Loads every artifact named in the config; throws if any is missing.
  static std::unique_ptr<Service> from_config(const ServiceConfig& config);

  HttpResponse handle(const HttpRequest& request);

  // Atomically replaces the pipeline snapshot for subsequent requests.
  void swap_pipeline(std::shared_ptr<const Pipeline> pipeline);
  std::shared_ptr<const Pipeline> pipeline() const;

  // Blocking. Returns false if the socket could not be bound.
  bool listen();
  // Binds an ephemeral port on config.host and returns it (or -1).
  int bind_ephemeral();
  // Blocking loop after bind_ephemeral().
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

  const ServiceConfig& config() const { return config_; }

 private:
  HttpResponse handle_health();
  HttpResponse handle_ask(const std::string& body);
  HttpResponse handle_summarize(const std::string& body);
  HttpResponse handle_store_ehr(const std::string& patient_id, const std::string& body);
  HttpResponse handle_list_ehr(const std::string& patient_id);
  HttpResponse handle_create_session();
  HttpResponse handle_get_session(const std::string& session_id);

  struct Http;

  ServiceConfig config_;
  mutable std::mutex pipeline_mu_;
  std::shared_ptr<const Pipeline> pipeline_;
  SentenceEmbedder embedder_;
  Clock clock_;
  SessionStore sessions_;
  EhrStore ehr_;
  std::unique_ptr<Http> http_;
};

}  // namespace vernqa

#endif  // VERNQA_SERVICE_H_
