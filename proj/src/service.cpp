#include "chordvec/service.h"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "chordvec/chord.h"

namespace chordvec {

namespace {

using Json = nlohmann::json;

HttpResponse json_response(int status, const Json& j) { return {status, j.dump(), "application/json"}; }

HttpResponse error_response(int status, const std::string& message) {
  return json_response(status, Json{{"error", message}});
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(' ');
    const auto e = item.find_last_not_of(' ');
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace

AnnotationService::AnnotationService(std::vector<Prompt> prompts, std::string annotation_path,
                                     std::optional<LMModel> model)
    : prompts_(std::move(prompts)), annotation_path_(std::move(annotation_path)), model_(std::move(model)) {
  if (std::filesystem::exists(annotation_path_)) {
    for (const auto& r : load_annotations(annotation_path_)) seen_.emplace(r.prompt_id, r.annotator_id);
  }
}

HttpResponse AnnotationService::palette() const {
  Json arr = Json::array();
  for (const auto& sym : annotation_palette()) {
    Json pcs = Json::array();
    for (const auto& p : pitch_classes(parse_chord(sym))) pcs.push_back(p.index());
    arr.push_back({{"chord", sym}, {"pitch_classes", pcs}});
  }
  return json_response(200, arr);
}

HttpResponse AnnotationService::prompts() const {
  Json arr = Json::array();
  for (const auto& p : prompts_) arr.push_back({{"id", p.id}, {"progression", p.progression}});
  return json_response(200, arr);
}

HttpResponse AnnotationService::suggest(const std::string& progression, const std::string& k_text) const {
  if (!model_) return error_response(503, "no language model loaded");
  const auto chords = split_commas(progression);
  if (chords.empty()) return error_response(400, "progression is empty");
  for (const auto& c : chords) {
    try {
      parse_chord(c);
    } catch (const ParseError& e) {
      return error_response(400, "malformed chord '" + c + "': " + e.what());
    }
  }
  int k = 4;
  if (!k_text.empty()) {
    const auto [ptr, ec] = std::from_chars(k_text.data(), k_text.data() + k_text.size(), k);
    if (ec != std::errc() || ptr != k_text.data() + k_text.size() || k < 1 || k > 100) {
      return error_response(400, "k must be an integer in 1..100");
    }
  }
  Json out;
  out["progression"] = chords;
  out["suggestions"] = Json::array();
  for (const auto& [chord, p] : predict_next(*model_, chords, static_cast<std::size_t>(k))) {
    out["suggestions"].push_back({{"chord", chord}, {"probability", p}});
  }
  return json_response(200, out);
}

HttpResponse AnnotationService::post_annotation(const std::string& body) {
  AnnotationRecord r;
  try {
    r = annotation_from_json(body, 0);
  } catch (const FormatError& e) {
    return error_response(400, e.what());
  }
  if (!prompts_.empty()) {
    const auto it = std::find_if(prompts_.begin(), prompts_.end(), [&](const Prompt& p) { return p.id == r.prompt_id; });
    if (it == prompts_.end()) return error_response(400, "unknown prompt_id " + r.prompt_id);
    if (it->progression != r.progression) return error_response(400, "progression differs from the served prompt");
  }
  std::lock_guard lock(write_mutex_);
  if (seen_.count({r.prompt_id, r.annotator_id})) {
    return error_response(409, "annotator " + r.annotator_id + " already answered " + r.prompt_id);
  }
  std::ofstream out(annotation_path_, std::ios::app | std::ios::binary);
  if (!out) return error_response(500, "cannot open annotation file");
  out << annotation_to_json(r) << '\n';
  out.flush();
  if (!out) return error_response(500, "cannot write annotation file");
  seen_.emplace(r.prompt_id, r.annotator_id);
  return json_response(201, Json{{"status", "stored"}});
}

HttpResponse AnnotationService::health() const {
  return json_response(200, Json{{"status", "ok"}, {"model_loaded", model_.has_value()}, {"prompts", prompts_.size()}});
}

std::size_t AnnotationService::stored() const {
  std::lock_guard lock(write_mutex_);
  return seen_.size();
}

struct ApiServer::Impl {
  httplib::Server server;
};

ApiServer::ApiServer(AnnotationService& service) : impl_(std::make_unique<Impl>()) {
  auto send = [](httplib::Response& res, const HttpResponse& r) {
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  auto& s = impl_->server;
  s.Get("/api/palette", [&service, send](const httplib::Request&, httplib::Response& res) { send(res, service.palette()); });
  s.Get("/api/prompts", [&service, send](const httplib::Request&, httplib::Response& res) { send(res, service.prompts()); });
  s.Get("/api/suggest", [&service, send](const httplib::Request& req, httplib::Response& res) {
    send(res, service.suggest(req.get_param_value("progression"), req.get_param_value("k")));
  });
  s.Post("/api/annotations", [&service, send](const httplib::Request& req, httplib::Response& res) {
    send(res, service.post_annotation(req.body));
  });
  s.Get("/healthz", [&service, send](const httplib::Request&, httplib::Response& res) { send(res, service.health()); });
  s.set_logger([](const httplib::Request& req, const httplib::Response& res) {
    spdlog::debug("{} {} -> {}", req.method, req.path, res.status);
  });
}

ApiServer::~ApiServer() = default;

int ApiServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

void ApiServer::listen() { impl_->server.listen_after_bind(); }

void ApiServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

void ApiServer::stop() { impl_->server.stop(); }

}  // namespace chordvec
