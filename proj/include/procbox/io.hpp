#pragma once

#include <stdexcept>
#include <string>

#include "json.hpp"
#include "procbox/certify.hpp"
#include "procbox/extract.hpp"
#include "procbox/qcqc.hpp"
#include "procbox/transform.hpp"

namespace procbox {

using json = nlohmann::ordered_json;

// Thrown for unreadable or malformed input; the message starts with the JSON path.
class IoError : public std::runtime_error {
 public:
  IoError(const std::string& path, const std::string& what) : std::runtime_error(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

json load_json(const std::string& file);
void save_json(const std::string& file, const json& j);

// Complex scalars are [re, im]; matrices are flat row-major lists of them.
json mat_to_json(const Mat& m);
Mat mat_from_json(const json& j, int rows, int cols, const std::string& path);

json spacetime_to_json(const Spacetime& st);
Spacetime spacetime_from_json(const json& j, const std::string& path = "$");

// {"tag", "in_wires": [{"name", "dim"}], "out_wires": [...], "n_max", "kraus": [[[re, im], ...], ...]}
json channel_to_json(const Channel& c);
Channel channel_from_json(const json& j, const std::string& path = "$");

// Agent ops are either {"setting", "net": [channels]} or {"setting", "kraus": [...]} on the one-message
// space (state preparations for agents without input, measurements for agents without output).
json protocol_to_json(const Protocol& p);
Protocol protocol_from_json(const json& j, const std::string& path = "$");

json qcqc_to_json(const QcQc& q);
QcQc qcqc_from_json(const json& j, const std::string& path = "$");
json qcqc_protocol_to_json(const QcqcProtocol& qp);
QcqcProtocol qcqc_protocol_from_json(const json& j, const std::string& path = "$");

json report_json(const Report& r);
json equivalence_json(const EquivalenceReport& r);
json distribution_json(const Distribution& d);
json certification_json(const CertificationReport& r);
json certificate_json(const TransformCertificate& c);
json qcqc_report_json(const QcqcReport& r);
json extract_report_json(const ExtractResult& r);

}  // namespace procbox
