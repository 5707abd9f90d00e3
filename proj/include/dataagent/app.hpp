#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "dataagent/backend.hpp"
#include "dataagent/checker.hpp"
#include "dataagent/planner.hpp"
#include "dataagent/table.hpp"

namespace dataagent {

enum class BackendKind { Scripted, Http, Replay, Record };

struct AppConfig {
  BackendKind backend = BackendKind::Scripted;
  std::vector<std::filesystem::path> scripts;  ///< scripted backend rule files
  std::filesystem::path cassette;              ///< replay / record
  std::string base_url;                        ///< http; empty = DATAAGENT_BASE_URL or the provider default
  PlannerConfig planner;
  double margin = kDefaultMargin;
  int port = 8080;
};

/// Builds the configured backend. The API key comes from the environment only.
std::shared_ptr<const LLMBackend> make_backend(const AppConfig& config);

/// `dataagent <command> ...`; args excludes the program name.
/// Returns 0 on success, 1 on domain errors, 2 on usage errors.
int run_command(std::span<const std::string> args, std::ostream& out, std::ostream& err);

// ---------------------------------------------------------------------------
// HTTP service

struct FilePart {
  std::string filename;
  std::string content;
};

struct ServiceRequest {
  std::string method;
  std::string path;
  std::string body;
  std::map<std::string, FilePart> files;  ///< multipart uploads by field name
};

struct ServiceResponse {
  int status = 200;
  std::string body;  ///< JSON
};

class Service {
 public:
  /// `bench_backend` picks the backend for POST /bench/run given the manifest
  /// path; by default the service backend is used.
  Service(std::shared_ptr<const LLMBackend> backend, AppConfig config,
          std::function<std::shared_ptr<const LLMBackend>(const std::filesystem::path&)> bench_backend = nullptr);

  ServiceResponse handle(const ServiceRequest& request) const;

  std::size_t dataset_count() const;

 private:
  ServiceResponse upload(const ServiceRequest& request) const;
  ServiceResponse profile(const std::string& id) const;
  ServiceResponse query(const ServiceRequest& request) const;
  ServiceResponse check(const ServiceRequest& request) const;
  ServiceResponse bench(const ServiceRequest& request) const;
  std::shared_ptr<const Table> find(const std::string& id) const;

  std::shared_ptr<const LLMBackend> backend_;
  AppConfig config_;
  std::function<std::shared_ptr<const LLMBackend>(const std::filesystem::path&)> bench_backend_;
  mutable std::shared_mutex mutex_;
  mutable std::map<std::string, std::shared_ptr<const Table>, std::less<>> datasets_;
};

/// Blocks serving `service` on host:port until the process stops.
/// Returns false when the port cannot be bound.
bool serve(const Service& service, const std::string& host, int port);

}  // namespace dataagent
