// Conformance stub for the external SUT protocol.
//
//   stub_sut uniform   every classify answer is ten 0.1 confidences
//   stub_sut nine      answers carry nine confidences (protocol error)
//   stub_sut reorder   answers carry the id of a later request
//   stub_sut garbage   answers with a line that is not JSON
//   stub_sut silent    reads requests, never answers (timeout)
//   stub_sut exit      exits on the first request
//
// drive requests get a centered, completed three-step trace in every mode
// that answers at all.

#include <iostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

using nlohmann::json;

namespace {

json answer(const json& req, const std::string& mode) {
  json r;
  if (req.contains("id")) r["id"] = req["id"];
  if (req.value("type", "") == "drive") {
    r["steering"] = {0.0, 0.0, 0.0};
    r["lateral"] = {0.0, 0.0, 0.0};
    r["dt"] = 0.1;
    r["completed"] = true;
    return r;
  }
  r["confidences"] = std::vector<double>(mode == "nine" ? 9 : 10, 0.1);
  return r;
}

} // namespace

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "uniform";
  std::string line;
  while (std::getline(std::cin, line)) {
    if (mode == "exit") return 0;
    if (mode == "silent") continue;
    if (mode == "garbage") {
      std::cout << "not json" << std::endl;
      continue;
    }
    json req;
    try {
      req = json::parse(line);
    } catch (const json::exception&) {
      std::cout << "{}" << std::endl;
      continue;
    }
    json r = answer(req, mode);
    if (mode == "reorder") r["id"] = req.value("id", 0) + 1;
    std::cout << r.dump() << std::endl;
  }
  return 0;
}
