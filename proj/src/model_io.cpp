#include "dmcca/model_io.hpp"

#include <json.hpp>

#include <stdexcept>

#include "dmcca/text.hpp"

namespace dmcca {

using nlohmann::json;

namespace {

json matrix_row_major(const Matrix& m) {
  json data = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const json& j) {
  const Eigen::Index rows = j.at("rows").get<Eigen::Index>();
  const Eigen::Index cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows * cols)
    throw std::runtime_error("model JSON: block data length does not match its shape");
  Matrix m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = data[k++].get<double>();
  return m;
}

}  // namespace

std::string model_to_json(const ProjectionModel& model) {
  json doc;
  doc["method"] = to_string(model.method.kind);
  doc["fusion"] = to_string(model.method.fusion);
  doc["d"] = model.d;
  doc["d_max"] = model.d_max;
  json eigenvalues = json::array();
  for (Eigen::Index j = 0; j < model.eigenvalues.size(); ++j)
    eigenvalues.push_back(model.eigenvalues[j]);
  doc["eigenvalues"] = std::move(eigenvalues);
  json means = json::array();
  for (const auto& mean : model.centering.means) {
    json one = json::array();
    for (Eigen::Index i = 0; i < mean.size(); ++i) one.push_back(mean[i]);
    means.push_back(std::move(one));
  }
  doc["means"] = std::move(means);
  json blocks = json::array();
  for (const auto& block : model.blocks) blocks.push_back(matrix_row_major(block));
  doc["blocks"] = std::move(blocks);
  return doc.dump(2) + "\n";
}

ProjectionModel model_from_json(const std::string& text) {
  const json doc = json::parse(text);
  ProjectionModel model;
  model.method.kind = method_from_string(doc.at("method").get<std::string>());
  model.method.fusion = fusion_from_string(doc.at("fusion").get<std::string>());
  model.d = doc.at("d").get<int>();
  model.d_max = doc.at("d_max").get<int>();
  const auto& eigenvalues = doc.at("eigenvalues");
  model.eigenvalues.resize(static_cast<Eigen::Index>(eigenvalues.size()));
  for (Eigen::Index j = 0; j < model.eigenvalues.size(); ++j)
    model.eigenvalues[j] = eigenvalues[static_cast<std::size_t>(j)].get<double>();
  for (const auto& one : doc.at("means")) {
    Vector mean(static_cast<Eigen::Index>(one.size()));
    for (Eigen::Index i = 0; i < mean.size(); ++i)
      mean[i] = one[static_cast<std::size_t>(i)].get<double>();
    model.centering.means.push_back(std::move(mean));
  }
  for (const auto& block : doc.at("blocks")) model.blocks.push_back(matrix_from_json(block));
  if (model.blocks.size() != model.centering.means.size())
    throw std::runtime_error("model JSON: blocks and means disagree on set count");
  model.unit_norm_fallback.assign(static_cast<std::size_t>(model.d), 0);
  return model;
}

void save_model(const std::string& path, const ProjectionModel& model) {
  write_file_atomic(path, model_to_json(model));
}

ProjectionModel load_model(const std::string& path) { return model_from_json(read_file(path)); }

}  // namespace dmcca
