// HTTP/JSON API for the annotation interface: the chord palette, the prompt
// set, next-chord suggestions from a loaded language model and validated,
// append-only storage of annotation records.

#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "chordvec/evaluation.h"
#include "chordvec/next_chord_lm.h"

namespace chordvec {

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

// Request handling independent of the transport. Annotation appends are
// serialized; model inference only reads shared state.
class AnnotationService {
 public:
  // Existing records in `annotation_path` are loaded so duplicates are
  // refused across restarts.
  AnnotationService(std::vector<Prompt> prompts, std::string annotation_path, std::optional<LMModel> model);

  HttpResponse palette() const;
  HttpResponse prompts() const;
  // `progression` is comma separated; `k` defaults to 4 when empty.
  HttpResponse suggest(const std::string& progression, const std::string& k) const;
  HttpResponse post_annotation(const std::string& body);
  HttpResponse health() const;

  std::size_t stored() const;

 private:
  std::vector<Prompt> prompts_;
  std::string annotation_path_;
  std::optional<LMModel> model_;
  mutable std::mutex write_mutex_;
  std::set<std::pair<std::string, std::string>> seen_;
};

// httplib server bound to an AnnotationService.
class ApiServer {
 public:
  explicit ApiServer(AnnotationService& service);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  // Port 0 picks a free port. Returns the bound port, or -1 on failure.
  int bind(const std::string& host, int port);
  // Serves until stop() is called.
  void listen();
  // Blocks until listen() is accepting connections.
  void wait_until_ready() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace chordvec
