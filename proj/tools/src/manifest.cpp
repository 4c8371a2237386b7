#include "nngs_cli/manifest.hpp"

#include <ctime>
#include <fstream>

#include "nngs/errors.hpp"

#ifndef NNGS_VERSION
#define NNGS_VERSION "0.1.0"
#endif

namespace nngs::cli {

namespace {

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

Manifest::Manifest(std::string command, std::vector<std::string> args)
    : start_(std::chrono::steady_clock::now()) {
  doc_["command"] = std::move(command);
  doc_["argv"] = std::move(args);
  doc_["tool"] = "nngs";
  doc_["version"] = NNGS_VERSION;
  doc_["started_utc"] = utc_now();
  doc_["config"] = nlohmann::json::object();
  doc_["seeds"] = nlohmann::json::object();
  doc_["inputs"] = nlohmann::json::array();
  doc_["outputs"] = nlohmann::json::array();
}

void Manifest::write(const std::string& path) {
  doc_["wall_clock_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  std::ofstream out(path);
  if (!out) {
    throw FormatError("cannot write manifest " + path);
  }
  out << doc_.dump(2) << '\n';
}

}  // namespace nngs::cli
