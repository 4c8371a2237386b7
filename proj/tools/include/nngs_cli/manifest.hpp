#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace nngs::cli {

// Record written next to every artifact a command produces.
class Manifest {
 public:
  Manifest(std::string command, std::vector<std::string> args);

  nlohmann::json& config() { return doc_["config"]; }
  void seed(const std::string& name, std::uint64_t value) { doc_["seeds"][name] = value; }
  void input(const std::string& path) { doc_["inputs"].push_back(path); }
  void output(const std::string& path) { doc_["outputs"].push_back(path); }
  nlohmann::json& results() { return doc_["results"]; }

  // Stamps the wall-clock duration and writes the JSON document.
  void write(const std::string& path);

 private:
  nlohmann::json doc_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace nngs::cli
