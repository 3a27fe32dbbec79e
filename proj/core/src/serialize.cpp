#include "pnss/serialize.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace pnss {

using nlohmann::json;

namespace {

json matrix_json(const Matrix& m) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  return json{{"shape", {m.rows(), m.cols()}}, {"data", data}};
}

Matrix matrix_from(const json& j, const char* what) {
  const auto shape = j.at("shape").get<std::vector<Eigen::Index>>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (shape.size() != 2 || shape[0] < 0 || shape[1] < 0 ||
      static_cast<std::size_t>(shape[0] * shape[1]) != data.size())
    throw IngestError(std::string("model JSON: bad matrix shape for ") + what);
  Matrix m(shape[0], shape[1]);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j2 = 0; j2 < m.cols(); ++j2) m(i, j2) = data[static_cast<std::size_t>(i * m.cols() + j2)];
  return m;
}

json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

std::string model_to_json(const PNSSModel& model) {
  const Matrix& mean = model.pca.mean.matrix();
  json gpa = {{"landmarks", mean.rows() + 1},
              {"dims", mean.cols()},
              {"mean", matrix_json(mean)},
              {"iterations", model.gpa.iterations},
              {"objective", model.gpa.objective},
              {"observations", model.gpa.fits.size()},
              {"non_unique_fits", model.gpa.non_unique_fits}};

  json eig = json::array();
  for (const auto& v : model.pca.eigenvectors) eig.push_back(matrix_json(v));
  json pca = {{"components", model.pca.components()},
              {"eigenvalues", model.pca.eigenvalues},
              {"eigenvectors", eig},
              {"tangent_mean", matrix_json(model.pca.tangent_mean)},
              {"total_variance", model.pca.total_variance}};

  json levels = json::array();
  for (const auto& l : model.pns.levels)
    levels.push_back({{"sphere_dim", l.axis.dim()},
                      {"axis", vector_json(l.axis.coords())},
                      {"radius", l.radius},
                      {"rotation_to_pole", matrix_json(l.rotation_to_pole)},
                      {"scale_in", l.scale_in}});
  json pns = {{"sphere_dim", model.pns.sphere_dim()},
              {"levels", levels},
              {"final_mean_angle", model.pns.final_mean_angle},
              {"final_scale", model.pns.final_scale}};

  std::vector<double> sds;
  if (model.pns.coordinates.cols() > 1)
    for (Eigen::Index j = 1; j <= model.pns.sphere_dim(); ++j) sds.push_back(component_sd(model, j));
  json pnss = {{"p", model.p},
               {"cut_point", model.cut_point()},
               {"component_sd", sds},
               {"variance_percent", model.pns.coordinates.cols() > 0 ? variance_by_component(model.pns)
                                                                     : std::vector<double>{}}};

  json root = {{"format_version", kModelFormatVersion}, {"gpa", gpa}, {"pca", pca}, {"pns", pns}, {"pnss", pnss}};
  return root.dump(1) + "\n";
}

PNSSModel model_from_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw IngestError(std::string("model JSON does not parse: ") + e.what());
  }
  try {
    const int version = root.at("format_version").get<int>();
    if (version != kModelFormatVersion)
      throw IngestError("model JSON format_version " + std::to_string(version) + " is not supported");

    const json& g = root.at("gpa");
    PreShape mean(matrix_from(g.at("mean"), "gpa.mean"));
    GPAResult gpa{mean, {}, g.at("iterations").get<int>(), g.at("objective").get<double>(), {}, 0};

    const json& pj = root.at("pca");
    std::vector<Matrix> eig;
    for (const auto& e : pj.at("eigenvectors")) eig.push_back(matrix_from(e, "pca.eigenvectors"));
    ShapePCAModel pca{mean,
                      std::move(eig),
                      pj.at("eigenvalues").get<std::vector<double>>(),
                      Matrix(),
                      Matrix(),
                      matrix_from(pj.at("tangent_mean"), "pca.tangent_mean"),
                      {},
                      {},
                      pj.at("total_variance").get<double>()};
    if (pca.eigenvectors.size() != pca.eigenvalues.size())
      throw IngestError("model JSON: eigenvector and eigenvalue counts differ");

    const json& nj = root.at("pns");
    PNSModel pns;
    for (const auto& l : nj.at("levels")) {
      const auto axis = l.at("axis").get<std::vector<double>>();
      pns.levels.push_back(PNSLevel{SpherePoint(Eigen::Map<const Vector>(axis.data(), static_cast<Eigen::Index>(axis.size()))),
                                    l.at("radius").get<double>(), matrix_from(l.at("rotation_to_pole"), "pns rotation"),
                                    l.at("scale_in").get<double>(), {}});
    }
    pns.final_mean_angle = nj.at("final_mean_angle").get<double>();
    pns.final_scale = nj.at("final_scale").get<double>();
    pns.coordinates = Matrix(nj.at("sphere_dim").get<Eigen::Index>(), 0);

    const Eigen::Index p = root.at("pnss").at("p").get<Eigen::Index>();
    if (p < 1 || static_cast<std::size_t>(p) > pca.eigenvectors.size() || pns.sphere_dim() != p)
      throw IngestError("model JSON: inconsistent component count p");
    return PNSSModel{std::move(gpa), std::move(pca), p, Matrix(p + 1, 0), std::move(pns)};
  } catch (const json::exception& e) {
    throw IngestError(std::string("model JSON is missing fields: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Validation && dynamic_cast<const IngestError*>(&e)) throw;
    throw IngestError(std::string("model JSON holds invalid values: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const PNSSModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << model_to_json(model);
  if (!out) throw IoError("write failed: " + path.string());
}

PNSSModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace pnss
