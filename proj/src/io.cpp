#include "qstiefel/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace qstiefel {

namespace {

// Non-finite numbers have no JSON literal; encode them as strings.
Json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double number_from(const Json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw InvalidArgument(where + ": expected a number");
}

template <typename Fn>
void for_rows(const Json& j, const std::string& where, Eigen::Index& rows, Eigen::Index& cols, Fn fn) {
  if (!j.is_array() || j.empty()) throw InvalidArgument(where + ": expected a non-empty array of rows");
  rows = static_cast<Eigen::Index>(j.size());
  cols = -1;
  for (std::size_t r = 0; r < j.size(); ++r) {
    const auto& row = j[r];
    const std::string rw = where + "[" + std::to_string(r) + "]";
    if (!row.is_array()) throw InvalidArgument(rw + ": expected an array");
    if (cols < 0) cols = static_cast<Eigen::Index>(row.size());
    if (static_cast<Eigen::Index>(row.size()) != cols || cols == 0)
      throw InvalidArgument(rw + ": ragged or empty row");
    for (std::size_t c = 0; c < row.size(); ++c)
      fn(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c), row[c],
         rw + "[" + std::to_string(c) + "]");
  }
}

const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object()) throw InvalidArgument(where + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw InvalidArgument(where + ": missing field \"" + key + "\"");
  return *it;
}

}  // namespace

Json to_json(const MatrixXcd& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      row.push_back(Json::array({number(m(r, c).real()), number(m(r, c).imag())}));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json to_json(const MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(number(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

MatrixXcd complex_matrix_from_json(const Json& j, const std::string& where) {
  std::vector<std::tuple<Eigen::Index, Eigen::Index, Complex>> entries;
  Eigen::Index rows = 0, cols = 0;
  for_rows(j, where, rows, cols, [&](Eigen::Index r, Eigen::Index c, const Json& e, const std::string& w) {
    // Plain numbers are accepted as real entries.
    if (e.is_array()) {
      if (e.size() != 2) throw InvalidArgument(w + ": expected [re, im]");
      entries.emplace_back(r, c, Complex(number_from(e[0], w + "[0]"), number_from(e[1], w + "[1]")));
    } else {
      entries.emplace_back(r, c, Complex(number_from(e, w), 0.0));
    }
  });
  MatrixXcd m(rows, cols);
  for (const auto& [r, c, v] : entries) m(r, c) = v;
  return m;
}

MatrixXd real_matrix_from_json(const Json& j, const std::string& where) {
  std::vector<std::tuple<Eigen::Index, Eigen::Index, double>> entries;
  Eigen::Index rows = 0, cols = 0;
  for_rows(j, where, rows, cols, [&](Eigen::Index r, Eigen::Index c, const Json& e, const std::string& w) {
    entries.emplace_back(r, c, number_from(e, w));
  });
  MatrixXd m(rows, cols);
  for (const auto& [r, c, v] : entries) m(r, c) = v;
  return m;
}

Json channel_to_json(const AnyChannel& chan) {
  Json j;
  j["repr"] = to_string(kind_of(chan));
  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        j["dim"] = c.dim();
        if constexpr (std::is_same_v<T, KrausSet>) {
          Json ops = Json::array();
          for (const auto& a : c.ops()) ops.push_back(to_json(a));
          j["data"] = std::move(ops);
        } else {
          j["data"] = to_json(c.mat());
        }
      },
      chan);
  return j;
}

AnyChannel channel_from_json(const Json& j) {
  const std::string repr_name = field(j, "repr", "channel").is_string()
                                    ? j["repr"].get<std::string>()
                                    : throw InvalidArgument("channel.repr: expected a string");
  ReprKind kind;
  try {
    kind = repr_kind_from_string(repr_name);
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(std::string("channel.repr: ") + e.what());
  }
  const Json& data = field(j, "data", "channel");
  const auto dim_field = j.find("dim");
  int dim = 0;
  if (dim_field != j.end()) {
    if (!dim_field->is_number_integer()) throw InvalidArgument("channel.dim: expected an integer");
    dim = dim_field->get<int>();
  }
  auto need_dim = [&] {
    if (dim < 1) throw InvalidArgument("channel: field \"dim\" is required for this representation");
    return dim;
  };
  switch (kind) {
    case ReprKind::kraus: {
      if (!data.is_array() || data.empty())
        throw InvalidArgument("channel.data: expected a non-empty list of Kraus operators");
      std::vector<MatrixXcd> ops;
      for (std::size_t i = 0; i < data.size(); ++i)
        ops.push_back(complex_matrix_from_json(data[i], "channel.data[" + std::to_string(i) + "]"));
      return KrausSet(std::move(ops));
    }
    case ReprKind::choi: return ChoiMatrix(complex_matrix_from_json(data, "channel.data"));
    case ReprKind::liouville: return Liouvillian(complex_matrix_from_json(data, "channel.data"));
    case ReprKind::ptm: return PauliTransferMatrix(real_matrix_from_json(data, "channel.data"));
    case ReprKind::stiefel: return StiefelForm(complex_matrix_from_json(data, "channel.data"), need_dim());
    case ReprKind::frame: return FrameForm(complex_matrix_from_json(data, "channel.data"), need_dim());
  }
  throw InvalidArgument("channel.repr: unsupported representation");
}

Json state_to_json(const DensityOperator& rho) {
  Json j;
  j["repr"] = "density";
  j["dim"] = rho.dim();
  j["data"] = to_json(rho.mat());
  return j;
}

DensityOperator state_from_json(const Json& j) {
  const Json& repr = field(j, "repr", "state");
  if (!repr.is_string()) throw InvalidArgument("state.repr: expected a string");
  const auto name = repr.get<std::string>();
  if (name == "density") return DensityOperator(complex_matrix_from_json(field(j, "data", "state"), "state.data"));
  if (name == "bloch") {
    MatrixXd v = real_matrix_from_json(field(j, "data", "state"), "state.data");
    return bloch_to_state(BlochVector(v.reshaped()));
  }
  throw InvalidArgument("state.repr: expected \"density\" or \"bloch\"");
}

Json to_json(const EstimateDiagnostics& d) {
  Json j;
  j["family"] = d.family;
  j["iterations"] = d.iterations;
  j["converged"] = d.converged;
  j["residual"] = number(d.residual);
  j["standard_error"] = number(d.standard_error);
  j["samples"] = d.samples;
  j["scale"] = number(d.scale);
  Json hist = Json::array();
  for (double h : d.history) hist.push_back(number(h));
  j["history"] = std::move(hist);
  return j;
}

Json to_json(const SamplerDiagnostics& d) {
  Json j;
  j["method"] = d.method;
  j["draws"] = d.draws;
  j["proposals"] = d.proposals;
  j["accepted"] = d.accepted;
  j["acceptance_rate"] = number(d.acceptance_rate());
  j["sweeps"] = d.sweeps;
  j["mh_steps"] = d.mh_steps;
  j["mh_accepted"] = d.mh_accepted;
  j["burn_in"] = d.burn_in;
  j["thinning"] = d.thinning;
  j["max_orthonormality_defect"] = number(d.max_orthonormality_defect);
  return j;
}

Json to_json(const RepresentabilityVerdict& v) {
  Json j;
  j["verdict"] = to_string(v.verdict);
  j["reason"] = to_string(v.reason);
  j["kraus_rank"] = v.kraus_rank;
  j["unital"] = v.unital;
  if (v.verdict == Extremality::unknown)
    j["representable_as_average"] = "unknown";
  else
    j["representable_as_average"] = v.verdict == Extremality::not_extreme;
  Json parts = Json::array();
  for (const auto& p : v.decomposition) {
    Json q;
    q["weight"] = p.weight;
    q["channel"] = channel_to_json(p.choi);
    parts.push_back(std::move(q));
  }
  j["decomposition"] = std::move(parts);
  return j;
}

Json to_json(const DistributionRecord& r) {
  Json j;
  j["kind"] = to_string(r.kind);
  j["exact"] = is_exact(r.kind);
  j["dim"] = r.dim;
  Json params = Json::object();
  for (const auto& [name, m] : r.params) params[name] = to_json(m);
  j["params"] = std::move(params);
  j["target"] = {{"repr", r.target_repr}, {"data", to_json(r.target)}};
  if (r.fit) j["fit_diagnostics"] = to_json(*r.fit);
  if (r.verdict) j["verdict"] = to_json(*r.verdict);
  if (r.approximation) {
    j["approximation"] = {{"achieved_mean_choi", to_json(r.approximation->achieved_mean_choi)},
                          {"proxy_distance", number(r.approximation->proxy_distance)},
                          {"draws", r.approximation->draws}};
  }
  return j;
}

Json parse_json(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // Translate the byte offset into a line and column.
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw InvalidArgument(source + ":" + std::to_string(line) + ":" + std::to_string(col) +
                          ": invalid JSON");
  }
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json(ss.str(), path);
}

}  // namespace qstiefel
