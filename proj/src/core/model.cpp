#include "ordermatch/model.hpp"

#include "json.hpp"
#include "ordermatch/error.hpp"
#include "ordermatch/util.hpp"

namespace om {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "ordermatch-model";
constexpr int kVersion = 1;

template <typename T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) throw ParseError(std::string("model: missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ParseError(std::string("model: field '") + key + "' has the wrong type");
  }
}

}  // namespace

void Model::validate() const {
  encoder.validate();
  margin.validate();
  params.check(encoder);
  if (radius < 1) throw ConfigError("model radius must be >= 1");
  if (!(decision_cutoff >= 0.0 && decision_cutoff <= 1.0)) throw ConfigError("decision cutoff must lie in [0, 1]");
}

std::uint64_t Model::fingerprint() const {
  Fingerprint fp;
  fp.update_string(model_to_json(*this));
  return fp.digest();
}

std::uint64_t Model::embedding_fingerprint() const {
  Model bare;
  bare.encoder = encoder;
  bare.params = params;
  bare.radius = radius;
  return bare.fingerprint();
}

Model init_model(const EncoderConfig& encoder, const MarginConfig& margin, int radius, std::uint64_t seed) {
  Model m;
  m.encoder = encoder;
  m.margin = margin;
  m.radius = radius;
  Rng rng = make_rng(derive_seed(seed, 0x1417));
  m.params = EncoderParams::init(encoder, rng);
  m.validate();
  return m;
}

std::string model_to_json(const Model& m) {
  const auto manifest = parameter_manifest(m.encoder);
  json params = json::array();
  for (std::size_t i = 0; i < manifest.size() && i < m.params.tensors.size(); ++i) {
    const Tensor& t = m.params.tensors[i];
    params.push_back({{"name", manifest[i].name},
                      {"shape", {t.rows(), t.cols()}},
                      {"values", std::vector<double>(t.values().begin(), t.values().end())}});
  }
  const auto& e = m.encoder;
  json j = {
      {"format", kFormat},
      {"version", kVersion},
      {"encoder",
       {{"layers", e.layers},
        {"hidden_dim", e.hidden_dim},
        {"output_dim", e.output_dim},
        {"leaky_slope", e.leaky_slope},
        {"aggregation_scale", e.aggregation_scale},
        {"use_structural_features", e.use_structural_features},
        {"label_alphabet_size", e.label_alphabet_size},
        {"nonneg_output", e.nonneg_output},
        {"edge_label_messages", e.edge_label_messages},
        {"edge_label_alphabet_size", e.edge_label_alphabet_size}}},
      {"margin", m.margin.margin},
      {"threshold", m.margin.threshold},
      {"decision_cutoff", m.decision_cutoff},
      {"radius", m.radius},
      {"parameters", params},
  };
  return j.dump();
}

Model model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& err) {
    throw ParseError(std::string("model: ") + err.what());
  }
  if (!j.is_object() || field<std::string>(j, "format") != kFormat) throw ParseError("model: not a model file");
  if (field<int>(j, "version") != kVersion) {
    throw ParseError("model: unsupported version " + std::to_string(field<int>(j, "version")));
  }
  Model m;
  const json enc = field<json>(j, "encoder");
  m.encoder.layers = field<std::size_t>(enc, "layers");
  m.encoder.hidden_dim = field<std::size_t>(enc, "hidden_dim");
  m.encoder.output_dim = field<std::size_t>(enc, "output_dim");
  m.encoder.leaky_slope = field<double>(enc, "leaky_slope");
  m.encoder.aggregation_scale = field<double>(enc, "aggregation_scale");
  m.encoder.use_structural_features = field<bool>(enc, "use_structural_features");
  m.encoder.label_alphabet_size = field<std::size_t>(enc, "label_alphabet_size");
  m.encoder.nonneg_output = field<bool>(enc, "nonneg_output");
  m.encoder.edge_label_messages = field<bool>(enc, "edge_label_messages");
  m.encoder.edge_label_alphabet_size = field<std::size_t>(enc, "edge_label_alphabet_size");
  m.margin.margin = field<double>(j, "margin");
  m.margin.threshold = field<double>(j, "threshold");
  m.decision_cutoff = field<double>(j, "decision_cutoff");
  m.radius = field<int>(j, "radius");

  const auto manifest = parameter_manifest(m.encoder);
  const json params = field<json>(j, "parameters");
  if (!params.is_array() || params.size() != manifest.size()) {
    throw ParseError("model: expected " + std::to_string(manifest.size()) + " parameter tensors");
  }
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    const json& p = params[i];
    const auto name = field<std::string>(p, "name");
    const auto shape = field<std::vector<std::size_t>>(p, "shape");
    auto values = field<std::vector<double>>(p, "values");
    if (name != manifest[i].name) throw ParseError("model: parameter " + std::to_string(i) + " is '" + name + "', expected '" + manifest[i].name + "'");
    if (shape.size() != 2 || shape[0] != manifest[i].rows || shape[1] != manifest[i].cols) {
      throw ParseError("model: parameter '" + name + "' has the wrong shape");
    }
    if (values.size() != shape[0] * shape[1]) throw ParseError("model: parameter '" + name + "' has the wrong value count");
    m.params.tensors.emplace_back(shape[0], shape[1], std::move(values));
  }
  try {
    m.validate();
  } catch (const Error& err) {
    throw ParseError(std::string("model: ") + err.what());
  }
  return m;
}

void save_model(const Model& m, const std::string& path) {
  m.validate();
  write_file_atomic(path, model_to_json(m));
}

Model load_model(const std::string& path) { return model_from_json(read_file(path)); }

}  // namespace om
