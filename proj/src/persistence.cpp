#include "idemc/persistence.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

#include "idemc/errors.hpp"

namespace idemc {

using nlohmann::json;

namespace {

json cutoff_to_json(double b) { return b == kUnbounded ? json(nullptr) : json(b); }
double cutoff_from_json(const json& j) { return j.is_null() ? kUnbounded : j.get<double>(); }

json vector_to_json(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}
Eigen::VectorXd vector_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vector_to_json(m.row(r).transpose()));
  return rows;
}
Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto n = static_cast<Eigen::Index>(j.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index r = 0; r < n; ++r) m.row(r) = vector_from_json(j.at(r)).transpose();
  return m;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

json tally_to_json(const MoveTally& t) {
  return {{"proposed", t.proposed}, {"accepted", t.accepted}, {"rate", t.rate()}};
}

}  // namespace

std::string csv_header(std::size_t dimension, std::size_t waves) {
  std::string out;
  for (std::size_t k = 1; k <= dimension; ++k) out += (k > 1 ? ",x" : "x") + std::to_string(k);
  if (waves == 1) return out + ",I";
  for (std::size_t k = 1; k <= waves; ++k) out += ",I" + std::to_string(k);
  return out;
}

void write_csv_row(std::ostream& out, const Eigen::VectorXd& x, const ImplausibilityVector& v) {
  out << std::setprecision(17);
  for (Eigen::Index k = 0; k < x.size(); ++k) out << (k ? "," : "") << x(k);
  for (double value : v) out << ',' << value;
  out << '\n';
}

void write_samples_csv(const std::string& path, const SampleSet& samples, std::size_t dimension,
                       std::size_t waves) {
  auto out = open_output(path);
  out << csv_header(dimension, waves) << '\n';
  for (std::size_t k = 0; k < samples.size(); ++k) {
    write_csv_row(out, samples.points[k], samples.values[k]);
  }
}

json ladder_to_json(const BurnInResult& burn_in, const std::string& problem) {
  const Ladder& ladder = burn_in.ladder;
  json rows = json::array();
  for (const auto& row : ladder.rows) {
    json r = json::array();
    for (double b : row) r.push_back(cutoff_to_json(b));
    rows.push_back(std::move(r));
  }
  json models = json::array();
  for (const auto& m : burn_in.models) {
    json means = json::array();
    json covs = json::array();
    for (std::size_t j = 0; j < m->clusters(); ++j) {
      means.push_back(vector_to_json(m->means[j]));
      covs.push_back(matrix_to_json(m->covariances[j].covariance()));
    }
    models.push_back({{"level", m->level},
                      {"omega", m->omega},
                      {"means", std::move(means)},
                      {"covariances", std::move(covs)},
                      {"whole", matrix_to_json(m->whole.covariance())},
                      {"warnings", m->warnings}});
  }
  json chromosomes = json::array();
  for (std::size_t i = 0; i < burn_in.population.size(); ++i) {
    chromosomes.push_back({{"x", vector_to_json(burn_in.population[i].x)},
                           {"values", burn_in.population[i].values}});
  }
  return {{"format", "idemc-ladder"},
          {"version", 1},
          {"problem", problem},
          {"p", ladder.p},
          {"s", ladder.s},
          {"s_n", ladder.s_n},
          {"rows", std::move(rows)},
          {"realized_ratios", ladder.realized_ratios},
          {"models", std::move(models)},
          {"chromosomes", std::move(chromosomes)}};
}

BurnInResult ladder_from_json(const json& doc, const Membership& membership,
                              const LadderConfig& config) {
  try {
    if (doc.at("format") != "idemc-ladder" || doc.at("version") != 1) {
      throw ContractError("not a version 1 ladder file");
    }
    Ladder ladder;
    ladder.p = doc.at("p").get<double>();
    ladder.s = doc.at("s").get<std::size_t>();
    ladder.s_n = doc.at("s_n").get<std::size_t>();
    for (const auto& r : doc.at("rows")) {
      ImplausibilityVector row;
      for (const auto& b : r) row.push_back(cutoff_from_json(b));
      if (row.size() != membership.waves()) throw ContractError("ladder wave count differs");
      ladder.rows.push_back(std::move(row));
    }
    ladder.realized_ratios = doc.at("realized_ratios").get<std::vector<double>>();
    if (ladder.rows.size() < 2 || ladder.rows.back() != membership.cutoffs()) {
      throw ContractError("ladder does not end at the problem's target cutoffs");
    }

    std::vector<std::shared_ptr<const ClusterModel>> models;
    for (const auto& m : doc.at("models")) {
      std::vector<Eigen::VectorXd> means;
      std::vector<CovarianceFactor> covs;
      for (const auto& mu : m.at("means")) means.push_back(vector_from_json(mu));
      for (const auto& c : m.at("covariances")) covs.emplace_back(matrix_from_json(c));
      for (const auto& mu : means) {
        if (static_cast<std::size_t>(mu.size()) != membership.dimension()) {
          throw ContractError("ladder dimension differs from the problem");
        }
      }
      models.push_back(std::make_shared<ClusterModel>(ClusterModel{
          m.at("level").get<std::size_t>(), std::move(means), std::move(covs),
          CovarianceFactor(matrix_from_json(m.at("whole"))), m.at("omega").get<double>(),
          m.at("warnings").get<std::vector<std::string>>()}));
    }
    if (models.size() + 1 != ladder.rows.size()) {
      throw ContractError("ladder needs one cluster model per constrained level");
    }

    std::vector<Chromosome> chromosomes;
    for (const auto& c : doc.at("chromosomes")) {
      chromosomes.push_back(
          Chromosome{vector_from_json(c.at("x")), c.at("values").get<ImplausibilityVector>()});
    }
    Population population(std::move(chromosomes), ladder.rows);
    population.check_invariant();
    std::vector<ProposalKernel> kernels = make_kernels(models, membership, config);
    return BurnInResult{std::move(ladder), std::move(population), std::move(models),
                        std::move(kernels), PhaseStats{}};
  } catch (const json::exception& e) {
    throw ContractError(std::string("malformed ladder file: ") + e.what());
  }
}

void save_ladder(const std::string& path, const BurnInResult& burn_in, const std::string& problem) {
  write_json(path, ladder_to_json(burn_in, problem));
}

BurnInResult load_ladder(const std::string& path, const Membership& membership,
                         const LadderConfig& config) {
  std::ifstream in(path);
  if (!in) throw ContractError("cannot read ladder file '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ContractError("malformed ladder file '" + path + "': " + e.what());
  }
  return ladder_from_json(doc, membership, config);
}

json phase_to_json(const PhaseStats& stats) {
  json levels = json::array();
  for (std::size_t i = 0; i < stats.levels.size(); ++i) {
    levels.push_back({{"level", i},
                      {"mutation", tally_to_json(stats.levels[i].mutation)},
                      {"crossover", tally_to_json(stats.levels[i].crossover)}});
  }
  json exchanges = json::array();
  for (std::size_t i = 0; i < stats.exchanges.size(); ++i) {
    exchanges.push_back({{"pair", {i, i + 1}}, {"exchange", tally_to_json(stats.exchanges[i])}});
  }
  return {{"iterations", stats.iterations},
          {"evaluations", stats.evaluations},
          {"levels", std::move(levels)},
          {"exchanges", std::move(exchanges)}};
}

json ladder_summary(const Ladder& ladder) {
  json rows = json::array();
  for (const auto& row : ladder.rows) {
    json r = json::array();
    for (double b : row) r.push_back(cutoff_to_json(b));
    rows.push_back(std::move(r));
  }
  const VolumeEstimate volume = estimate_volume(ladder);
  return {{"chromosomes", ladder.chromosomes()},
          {"rows", std::move(rows)},
          {"realized_ratios", ladder.realized_ratios},
          {"volume_realized", volume.realized},
          {"volume_nominal", volume.nominal}};
}

json config_echo(const RunConfig& config) {
  json out = json::object();
  for (const auto& [key, value] : describe(config)) out[key] = value;
  return out;
}

void write_json(const std::string& path, const json& doc) {
  auto out = open_output(path);
  out << std::setw(2) << doc << '\n';
}

}  // namespace idemc
