// qstiefel command-line driver: sampling, conversion, estimation,
// classification and the experiment runners. Exit status is 0 on success,
// 2 for configuration or input errors and 3 when a numerical procedure does
// not converge.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>

#include "qstiefel/io.hpp"

using namespace qstiefel;
namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNonConvergence = 3;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// --- configuration file ----------------------------------------------------

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Reads `key = value` lines and appends `--key value` for every key not
// already given on the command line, so flags win over the file.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config file " + path);
  std::string line;
  int lineno = 0;
  std::vector<std::string> extra;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidArgument(path + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || key == "config")
      throw InvalidArgument(path + ":" + std::to_string(lineno) + ": invalid key '" + key + "'");
    const std::string flag = "--" + key;
    bool given = false;
    for (const auto& a : args)
      if (a == flag || a.rfind(flag + "=", 0) == 0) given = true;
    if (!given) {
      extra.push_back(flag);
      extra.push_back(value);
    }
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

// --- shared settings -------------------------------------------------------

struct Common {
  std::uint64_t seed = 1;
  int samples = 10000;
  std::string out_dir = ".";
  std::string config;
  int fit_batch = 2000;
  int fit_final_batch = 20000;
  int fit_max_iter = 200;
  int burn_in = 100;
  int thinning = 10;

  SaConfig sa() const {
    SaConfig c;
    c.batch = fit_batch;
    c.final_batch = fit_final_batch;
    c.max_iter = fit_max_iter;
    c.validate();
    return c;
  }
  ChainConfig chain() const {
    ChainConfig c;
    c.burn_in = burn_in;
    c.thinning = thinning;
    c.validate();
    return c;
  }
  FrameBinghamConfig frame_chain() const {
    FrameBinghamConfig c;
    c.chain = chain();
    return c;
  }
  // Independent streams for fitting and for sampling.
  RngStream fit_rng() const { return RngStream(seed, 0); }
  RngStream sample_rng() const { return RngStream(seed, 1); }
};

void add_common(CLI::App& app, Common& c) {
  app.add_option("--seed", c.seed, "Random seed")->capture_default_str();
  app.add_option("--samples", c.samples, "Number of draws")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--out-dir", c.out_dir, "Directory for output files")->capture_default_str();
  app.add_option("--config", c.config, "Flat key = value file; command-line flags take precedence");
  app.add_option("--fit-batch", c.fit_batch, "Draws per moment-matching iteration")->capture_default_str();
  app.add_option("--fit-final-batch", c.fit_final_batch, "Draws for the final fit polish")->capture_default_str();
  app.add_option("--fit-max-iter", c.fit_max_iter, "Iteration limit for moment matching")->capture_default_str();
  app.add_option("--burn-in", c.burn_in, "Markov chain burn-in sweeps")->capture_default_str();
  app.add_option("--thinning", c.thinning, "Markov chain sweeps per draw")->capture_default_str();
}

// Every option of the active command chain with its effective value.
Json collect_parameters(const std::vector<CLI::App*>& chain) {
  Json params = Json::object();
  for (const CLI::App* a : chain)
    for (const CLI::Option* o : a->get_options()) {
      const std::string name = o->get_lnames().empty() ? "" : o->get_lnames().front();
      if (name.empty() || name == "help" || name == "version" || name == "config" || name == "out-dir" || name == "out")
        continue;
      std::string value;
      if (o->count() > 0) {
        for (const auto& r : o->results()) value += (value.empty() ? "" : ",") + r;
      } else {
        value = o->get_default_str();
      }
      params[name] = value;
    }
  return params;
}

Json make_manifest(const std::string& command, const Common& c, const Json& params,
                   const std::vector<std::string>& outputs, const Json& tolerances = Json::object()) {
  Json m;
  m["tool"] = "qstiefel";
  m["version"] = kVersion;
  m["command"] = command;
  m["seed"] = c.seed;
  m["samples"] = c.samples;
  m["parameters"] = params;
  m["outputs"] = outputs;
  m["tolerances"] = tolerances;
  return m;
}

class Outputs {
 public:
  Outputs(const Common& c, Json manifest) : dir_(c.out_dir), manifest_(std::move(manifest)) {
    fs::create_directories(dir_);
  }

  void csv(const std::string& name, const std::vector<std::string>& header,
           const std::vector<std::vector<double>>& rows) const {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write " + (dir_ / name).string());
    out << "# manifest: " << manifest_.dump() << "\n";
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << "\n";
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << num(row[i]);
      out << "\n";
    }
  }

  void json(const std::string& name, Json body) const {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write " + (dir_ / name).string());
    Json doc;
    doc["manifest"] = manifest_;
    for (auto& [k, v] : body.items()) doc[k] = v;
    out << doc.dump(2) << "\n";
  }

 private:
  fs::path dir_;
  Json manifest_;
};

std::vector<std::vector<double>> histogram(const std::vector<double>& xs, double lo, double hi, int bins) {
  std::vector<std::vector<double>> rows;
  std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
  for (double x : xs) {
    int b = static_cast<int>(std::floor((x - lo) / (hi - lo) * bins));
    b = std::clamp(b, 0, bins - 1);
    counts[static_cast<std::size_t>(b)] += 1.0;
  }
  for (int b = 0; b < bins; ++b)
    rows.push_back({lo + (hi - lo) * b / bins, lo + (hi - lo) * (b + 1) / bins, counts[static_cast<std::size_t>(b)]});
  return rows;
}

struct MeanSe {
  double mean;
  double se;
};
MeanSe mean_se(const std::vector<double>& xs) {
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  double v = 0.0;
  for (double x : xs) v += (x - m) * (x - m);
  v /= std::max<double>(1.0, static_cast<double>(xs.size()) - 1.0);
  return {m, std::sqrt(v / static_cast<double>(xs.size()))};
}

VectorXd bloch_image(const ChoiMatrix& c, const VectorXd& in) {
  return state_to_bloch(apply_channel(c, bloch_to_state(BlochVector(in)))).vec();
}

VectorXd to_vector(const std::vector<double>& v, std::size_t expected, const std::string& what) {
  if (v.size() != expected)
    throw InvalidArgument(what + ": expected " + std::to_string(expected) + " comma-separated values");
  return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void print_json(const Json& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + out_path);
  out << j.dump(2) << "\n";
}

std::vector<double> split_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(trim(item), &used));
      if (used != trim(item).size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InvalidArgument(what + ": cannot parse '" + item + "' as a number");
    }
  }
  return out;
}

// --- experiments -----------------------------------------------------------

struct DephasingOpts {
  double mean_re = 0.9;
  double mean_im = 0.0;
  int bins = 36;
};

void run_dephasing(const Common& c, const DephasingOpts& o, const Json& params) {
  require(o.bins >= 1, "bins must be positive");
  DephasingVonMises dist(Complex(o.mean_re, o.mean_im));
  RngStream rng = c.sample_rng();
  std::vector<std::vector<double>> rows;
  std::vector<double> angles, cosines, sines;
  const VectorXd in = Eigen::Vector3d(0.0, 1.0, 0.0);
  for (int i = 0; i < c.samples; ++i) {
    const double th = dist.sample_angle(rng);
    const MatrixXd a = dephasing_ptm(std::polar(1.0, th)).mat().bottomRightCorner(3, 3);
    const VectorXd out = a * in;
    rows.push_back({static_cast<double>(i), th, out(0), out(1), out(2)});
    angles.push_back(th);
    cosines.push_back(std::cos(th));
    sines.push_back(std::sin(th));
  }
  const std::vector<std::string> files = {"dephasing_samples.csv", "dephasing_histogram.csv",
                                          "dephasing_summary.json"};
  Outputs out(c, make_manifest("experiment dephasing", c, params, files));
  out.csv(files[0], {"index", "theta", "x", "y", "z"}, rows);
  auto hist = histogram(angles, -std::numbers::pi, std::numbers::pi, o.bins);
  out.csv(files[1], {"bin_lo", "bin_hi", "count"}, hist);
  const auto mc = mean_se(cosines), ms = mean_se(sines);
  double total = 0.0;
  for (const auto& r : hist) total += r[2];
  Json s;
  s["distribution"] = to_json(dist.record());
  s["kappa"] = dist.kappa();
  s["empirical_mean_cos"] = {{"mean", mc.mean}, {"standard_error", mc.se}};
  s["empirical_mean_sin"] = {{"mean", ms.mean}, {"standard_error", ms.se}};
  s["target"] = {o.mean_re, o.mean_im};
  s["histogram_total"] = total;
  out.json(files[2], s);
}

struct DepolarizingOpts {
  std::string mode = "unitary-fisher";
  double px = 0.001, py = 0.01, pz = 0.1;
  std::vector<double> input = {std::numbers::sqrt2 / 2, std::numbers::sqrt2 / 2, 0.0};
  int bins = 50;
};

void run_depolarizing(const Common& c, const DepolarizingOpts& o, const Json& params) {
  const VectorXd in = to_vector(o.input, 3, "input");
  const std::string prefix = "depolarizing_" + o.mode;
  const std::vector<std::string> files = {prefix + "_samples.csv", prefix + "_norm_histogram.csv",
                                          prefix + "_summary.json"};
  RngStream fit_rng = c.fit_rng();
  RngStream rng = c.sample_rng();
  std::vector<std::vector<double>> rows;
  std::vector<double> norms;
  Json s;
  if (o.mode == "unitary-fisher") {
    const MatrixXd target = depolarizing_affine(o.px, o.py, o.pz);
    auto dist = UnitaryFisher::fit(fit_rng, target, c.sa(), c.chain());
    MatrixXd mean = MatrixXd::Zero(3, 3);
    for (int i = 0; i < c.samples; ++i) {
      const MatrixXd r = dist.sample_rotation(rng);
      mean += r;
      const VectorXd v = r * in;
      rows.push_back({static_cast<double>(i), v(0), v(1), v(2), v.norm()});
      norms.push_back(v.norm());
    }
    mean /= c.samples;
    s["distribution"] = to_json(dist.record());
    s["empirical_mean_rotation"] = to_json(mean);
    s["target_affine"] = to_json(target);
    s["frobenius_residual"] = (mean - target).norm();
  } else if (o.mode == "frame-bingham") {
    const ChoiMatrix target = depolarizing_choi(o.px, o.py, o.pz);
    auto dist = CptpFrameBingham::fit(fit_rng, target, std::numeric_limits<double>::infinity(), c.sa(),
                                      c.frame_chain());
    MatrixXcd mean = MatrixXcd::Zero(4, 4);
    for (int i = 0; i < c.samples; ++i) {
      const ChoiMatrix ch = dist(rng);
      mean += ch.mat();
      const VectorXd v = bloch_image(ch, in);
      rows.push_back({static_cast<double>(i), v(0), v(1), v(2), v.norm()});
      norms.push_back(v.norm());
    }
    mean /= c.samples;
    s["distribution"] = to_json(dist.record());
    s["sampler"] = to_json(dist.sampler_diagnostics());
    s["empirical_mean_choi"] = to_json(mean);
    s["frobenius_residual"] = (mean - target.mat()).norm();
    s["channel_distance"] = channel_distance(ChoiMatrix(hermitian_part(mean)), target);
  } else {
    throw InvalidArgument("mode must be unitary-fisher or frame-bingham");
  }
  std::size_t inside = 0;
  for (double n : norms) inside += n < 1.0 - 1e-6 ? 1 : 0;
  s["fraction_norm_below_one"] = static_cast<double>(inside) / static_cast<double>(norms.size());
  s["input_bloch"] = o.input;
  Outputs out(c, make_manifest("experiment depolarizing", c, params, files));
  out.csv(files[0], {"index", "x", "y", "z", "norm"}, rows);
  out.csv(files[1], {"bin_lo", "bin_hi", "count"}, histogram(norms, 0.0, 1.0 + 1e-9, o.bins));
  out.json(files[2], s);
}

struct AmpdampOpts {
  double gamma = 0.01;
  std::string epsilons = "0.1,0.01,0.001";
  double restricted_concentration = 1000.0;
};

void run_ampdamp(const Common& c, const AmpdampOpts& o, const Json& params) {
  const std::vector<double> eps = split_list(o.epsilons, "epsilons");
  require(!eps.empty(), "epsilons must not be empty");
  const KrausSet ad = amplitude_damping(o.gamma);
  const ChoiMatrix target = kraus_to_choi(ad);
  const StiefelForm stiefel = kraus_to_stiefel(ad);
  const VectorXd in = Eigen::Vector3d(0.0, 0.0, 1.0);
  const std::vector<std::string> files = {"ampdamp_fisher_samples.csv", "ampdamp_sweep.csv",
                                          "ampdamp_restricted_samples.csv", "ampdamp_summary.json"};
  Json s;
  const auto verdict = classify_extreme_qubit(target);
  s["verdict"] = to_json(verdict);
  // The frame-Bingham route refuses this target outright.
  try {
    RngStream r = c.fit_rng();
    CptpFrameBingham::fit(r, target);
    s["frame_bingham"] = "accepted";
  } catch (const ExtremePointTarget& e) {
    s["frame_bingham"] = std::string("refused: ") + e.what();
  }

  std::vector<std::vector<double>> sample_rows, sweep_rows;
  Json sweep = Json::array();
  for (std::size_t j = 0; j < eps.size(); ++j) {
    RngStream fit_rng(c.seed, 10 + 2 * j);
    RngStream rng(c.seed, 11 + 2 * j);
    auto dist = CptpFisherApprox::fit(fit_rng, stiefel, eps[j], c.sa(), c.chain());
    MatrixXcd mean = MatrixXcd::Zero(4, 4);
    for (int i = 0; i < c.samples; ++i) {
      const ChoiMatrix ch = dist(rng);
      mean += ch.mat();
      const VectorXd v = bloch_image(ch, in);
      sample_rows.push_back({eps[j], static_cast<double>(i), v(0), v(1), v(2)});
    }
    mean /= c.samples;
    const double d = channel_distance(ChoiMatrix(hermitian_part(mean)), target);
    sweep_rows.push_back({eps[j], dist.kappa(), d});
    sweep.push_back({{"epsilon", eps[j]},
                     {"kappa", dist.kappa()},
                     {"proxy_distance", d},
                     {"distribution", to_json(dist.record())}});
  }
  bool decreasing = true;
  for (std::size_t j = 1; j < sweep_rows.size(); ++j)
    if (!(sweep_rows[j][2] < sweep_rows[j - 1][2])) decreasing = false;
  s["sweep"] = sweep;
  s["proxy_distance_strictly_decreasing"] = decreasing;
  s["reference"] = {{"diamond_norm_error_at_epsilon_0.001", 0.05},
                    {"note", "reference diamond-norm figure; the proxy here is half the trace norm of the "
                             "Choi difference divided by N, a lower bound on the diamond distance"}};

  AdGamma restricted(o.gamma, o.restricted_concentration);
  RngStream rng(c.seed, 3);
  std::vector<std::vector<double>> restricted_rows;
  double max_off_axis = 0.0;
  for (int i = 0; i < c.samples; ++i) {
    const double g = restricted.sample_gamma(rng);
    const VectorXd v = bloch_image(kraus_to_choi(amplitude_damping(g)), in);
    restricted_rows.push_back({static_cast<double>(i), g, v(0), v(1), v(2)});
    max_off_axis = std::max({max_off_axis, std::abs(v(0)), std::abs(v(1))});
  }
  s["restricted"] = to_json(restricted.record());
  s["restricted_max_off_axis"] = max_off_axis;

  Outputs out(c, make_manifest("experiment ampdamp", c, params, files));
  out.csv(files[0], {"epsilon", "index", "x", "y", "z"}, sample_rows);
  out.csv(files[1], {"epsilon", "kappa", "proxy_distance"}, sweep_rows);
  out.csv(files[2], {"index", "gamma", "x", "y", "z"}, restricted_rows);
  out.json(files[3], s);
}

struct NonunitalOpts {
  double gamma = 0.01;
  double px = 0.001, py = 0.01, pz = 0.1;
  std::vector<double> input = {std::numbers::sqrt2 / 2, std::numbers::sqrt2 / 2, 0.0};
  int bins = 50;
};

void run_nonunital(const Common& c, const NonunitalOpts& o, const Json& params) {
  const VectorXd in = to_vector(o.input, 3, "input");
  const PauliTransferMatrix target_ptm = composite_nonunital(o.gamma, o.px, o.py, o.pz);
  const ChoiMatrix target = liouville_to_choi(ptm_to_liouville(target_ptm));
  RngStream fit_rng = c.fit_rng();
  RngStream rng = c.sample_rng();
  auto dist = CptpFrameBingham::fit(fit_rng, target, std::numeric_limits<double>::infinity(), c.sa(),
                                    c.frame_chain());
  std::vector<std::vector<double>> rows;
  std::vector<double> norms;
  MatrixXd mean_ptm = MatrixXd::Zero(4, 4);
  for (int i = 0; i < c.samples; ++i) {
    const ChoiMatrix ch = dist(rng);
    mean_ptm += liouville_to_ptm(choi_to_liouville(ch)).mat();
    const VectorXd v = bloch_image(ch, in);
    rows.push_back({static_cast<double>(i), v(0), v(1), v(2), v.norm()});
    norms.push_back(v.norm());
  }
  mean_ptm /= c.samples;
  const std::vector<std::string> files = {"nonunital_samples.csv", "nonunital_norm_histogram.csv",
                                          "nonunital_summary.json"};
  Json s;
  s["distribution"] = to_json(dist.record());
  s["sampler"] = to_json(dist.sampler_diagnostics());
  s["empirical_mean_ptm"] = to_json(mean_ptm);
  s["target_ptm"] = to_json(target_ptm.mat());
  s["max_entry_residual"] = (mean_ptm - target_ptm.mat()).cwiseAbs().maxCoeff();
  s["non_unital_entry"] = {{"empirical", mean_ptm(3, 0)}, {"target", target_ptm.mat()(3, 0)}};
  Outputs out(c, make_manifest("experiment nonunital", c, params, files));
  out.csv(files[0], {"index", "x", "y", "z", "norm"}, rows);
  out.csv(files[1], {"bin_lo", "bin_hi", "count"}, histogram(norms, 0.0, 1.0 + 1e-9, o.bins));
  out.json(files[2], s);
}

// --- generic subcommands ---------------------------------------------------

Json load_target_channel(const std::string& path) {
  if (path.empty()) throw InvalidArgument("--in is required");
  return read_json_file(path);
}

int run(int argc, char** argv) {
  CLI::App app{"Random quantum states and channels from exponential families on Stiefel manifolds"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  add_common(app, common);

  // sample-state
  auto* st = app.add_subcommand("sample-state", "Sample pure or mixed states with a target mean");
  std::string st_kind = "pure", st_target, st_in;
  int st_rank = 1;
  st->add_option("--kind", st_kind, "pure (vMF on the Bloch sphere) or mixed (complex Bingham)")
      ->capture_default_str()
      ->check(CLI::IsMember({"pure", "mixed"}));
  st->add_option("--target", st_target, "Target Bloch vector x,y,z (pure) or diagonal of rho (mixed)");
  st->add_option("--in", st_in, "Target state JSON (mixed)");
  st->add_option("--rank", st_rank, "Rank k of mixed draws")->capture_default_str();

  // sample-channel
  auto* sc = app.add_subcommand("sample-channel", "Sample channels with a target average");
  std::string sc_kind = "cptp", sc_in, sc_repr = "choi";
  double sc_conc = std::numeric_limits<double>::infinity(), sc_eps = 0.01, sc_gamma = 0.01,
         sc_re = 0.9, sc_im = 0.0;
  sc->add_option("--kind", sc_kind, "dephasing, unitary, cptp, fisher-approx or ad-gamma")
      ->capture_default_str()
      ->check(CLI::IsMember({"dephasing", "unitary", "cptp", "fisher-approx", "ad-gamma"}));
  sc->add_option("--in", sc_in, "Target channel JSON (unitary, cptp, fisher-approx)");
  sc->add_option("--repr", sc_repr, "Representation of the emitted draws")->capture_default_str();
  sc->add_option("--concentration", sc_conc, "Concentration cap (cptp) or Beta concentration (ad-gamma)")
      ->capture_default_str();
  sc->add_option("--epsilon", sc_eps, "Shrinkage of the Stiefel mean (fisher-approx)")->capture_default_str();
  sc->add_option("--gamma", sc_gamma, "Mean damping (ad-gamma)")->capture_default_str();
  sc->add_option("--mean-re", sc_re, "Re E[alpha^2] (dephasing)")->capture_default_str();
  sc->add_option("--mean-im", sc_im, "Im E[alpha^2] (dephasing)")->capture_default_str();

  // convert
  auto* cv = app.add_subcommand("convert", "Convert a channel between representations");
  std::string cv_in, cv_to, cv_out;
  cv->add_option("--in", cv_in, "Channel JSON")->required();
  cv->add_option("--to", cv_to, "kraus, choi, liouville, ptm, stiefel or frame")->required();
  cv->add_option("--out", cv_out, "Output path (default: standard output)");

  // estimate
  auto* es = app.add_subcommand("estimate", "Fit natural parameters to a target expectation");
  std::string es_family = "vmf", es_in, es_mean, es_out;
  int es_rank = 1;
  es->add_option("--family", es_family, "vmf, bingham, fisher-so3 or frame-bingham")
      ->capture_default_str()
      ->check(CLI::IsMember({"vmf", "bingham", "fisher-so3", "frame-bingham"}));
  es->add_option("--mean", es_mean, "Target mean vector (vmf), comma separated");
  es->add_option("--in", es_in, "Target file: {\"mean\": [...]} (vmf), a state (bingham) or a channel");
  es->add_option("--rank", es_rank, "Frame size k (bingham)")->capture_default_str();
  es->add_option("--out", es_out, "Output path (default: standard output)");

  // classify
  auto* cl = app.add_subcommand("classify", "Decide whether a qubit channel is an extreme point");
  std::string cl_in, cl_out;
  cl->add_option("--in", cl_in, "Channel JSON")->required();
  cl->add_option("--out", cl_out, "Output path (default: standard output)");

  // experiments
  auto* ex = app.add_subcommand("experiment", "Run a named experiment");
  ex->require_subcommand(1);
  auto* ex_deph = ex->add_subcommand("dephasing", "Von Mises dephasing");
  DephasingOpts deph;
  ex_deph->add_option("--mean-re", deph.mean_re, "Re E[alpha^2]")->capture_default_str();
  ex_deph->add_option("--mean-im", deph.mean_im, "Im E[alpha^2]")->capture_default_str();
  ex_deph->add_option("--bins", deph.bins, "Histogram bins")->capture_default_str();
  auto* ex_dep = ex->add_subcommand("depolarizing", "Depolarizing channel as an average");
  DepolarizingOpts dep;
  ex_dep->add_option("--mode", dep.mode, "unitary-fisher or frame-bingham")
      ->capture_default_str()
      ->check(CLI::IsMember({"unitary-fisher", "frame-bingham"}));
  ex_dep->add_option("--px", dep.px)->capture_default_str();
  ex_dep->add_option("--py", dep.py)->capture_default_str();
  ex_dep->add_option("--pz", dep.pz)->capture_default_str();
  ex_dep->add_option("--input", dep.input, "Input Bloch vector")->delimiter(',')->capture_default_str();
  ex_dep->add_option("--bins", dep.bins, "Histogram bins")->capture_default_str();
  auto* ex_ad = ex->add_subcommand("ampdamp", "Approximations of amplitude damping");
  AmpdampOpts amp;
  ex_ad->add_option("--gamma", amp.gamma)->capture_default_str();
  ex_ad->add_option("--epsilons", amp.epsilons, "Comma-separated epsilon values")->capture_default_str();
  ex_ad->add_option("--restricted-concentration", amp.restricted_concentration,
                    "Beta concentration of the restricted family")
      ->capture_default_str();
  auto* ex_nu = ex->add_subcommand("nonunital", "Amplitude damping followed by depolarizing noise");
  NonunitalOpts nu;
  ex_nu->add_option("--gamma", nu.gamma)->capture_default_str();
  ex_nu->add_option("--px", nu.px)->capture_default_str();
  ex_nu->add_option("--py", nu.py)->capture_default_str();
  ex_nu->add_option("--pz", nu.pz)->capture_default_str();
  ex_nu->add_option("--input", nu.input, "Input Bloch vector")->delimiter(',')->capture_default_str();
  ex_nu->add_option("--bins", nu.bins, "Histogram bins")->capture_default_str();

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = merge_config(args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  auto params_of = [&](std::vector<CLI::App*> chain) {
    chain.insert(chain.begin(), &app);
    return collect_parameters(chain);
  };

  if (ex->parsed()) {
    if (ex_deph->parsed()) run_dephasing(common, deph, params_of({ex, ex_deph}));
    if (ex_dep->parsed()) run_depolarizing(common, dep, params_of({ex, ex_dep}));
    if (ex_ad->parsed()) run_ampdamp(common, amp, params_of({ex, ex_ad}));
    if (ex_nu->parsed()) run_nonunital(common, nu, params_of({ex, ex_nu}));
    return 0;
  }

  if (cv->parsed()) {
    AnyChannel chan = channel_from_json(read_json_file(cv_in));
    Json j = channel_to_json(convert(chan, repr_kind_from_string(cv_to)));
    j["manifest"] = make_manifest("convert", common, params_of({cv}), {});
    print_json(j, cv_out);
    return 0;
  }

  if (cl->parsed()) {
    ChoiMatrix c = to_choi(channel_from_json(read_json_file(cl_in)));
    Json j = to_json(classify_extreme_qubit(c));
    j["manifest"] = make_manifest("classify", common, params_of({cl}), {});
    print_json(j, cl_out);
    return 0;
  }

  if (es->parsed()) {
    RngStream rng = common.fit_rng();
    Json j;
    j["family"] = es_family;
    if (es_family == "vmf") {
      VectorXd mean;
      if (!es_mean.empty()) {
        auto v = split_list(es_mean, "mean");
        mean = to_vector(v, v.size(), "mean");
      } else {
        const Json f = load_target_channel(es_in);
        if (!f.contains("mean") || !f["mean"].is_array()) throw InvalidArgument(es_in + ": missing array field \"mean\"");
        std::vector<double> v;
        for (std::size_t i = 0; i < f["mean"].size(); ++i) {
          if (!f["mean"][i].is_number())
            throw InvalidArgument(es_in + ": mean[" + std::to_string(i) + "]: expected a number");
          v.push_back(f["mean"][i].get<double>());
        }
        mean = to_vector(v, v.size(), "mean");
      }
      VmfParams p = vmf_estimate(mean);
      j["params"] = {{"mu", to_json(MatrixXd(p.mu()))}, {"kappa", p.kappa()}};
      j["method"] = "bessel-ratio inversion";
    } else if (es_family == "bingham") {
      DensityOperator rho = state_from_json(load_target_channel(es_in));
      auto e = estimate_bingham_params<Complex>(rng, MatrixXcd(es_rank * rho.mat()), es_rank, common.sa());
      j["params"] = {{"A", to_json(e.params.a())}, {"k", es_rank}};
      j["diagnostics"] = to_json(e.diag);
    } else if (es_family == "fisher-so3") {
      AnyChannel chan = channel_from_json(load_target_channel(es_in));
      MatrixXd a = liouville_to_ptm(to_choi(chan).dim() == 2 ? choi_to_liouville(to_choi(chan))
                                                               : throw InvalidArgument("fisher-so3 needs a qubit channel"))
                       .mat()
                       .bottomRightCorner(3, 3);
      auto e = estimate_rotation_fisher_params(rng, a, common.sa());
      j["params"] = {{"F", to_json(e.params.f())}};
      j["diagnostics"] = to_json(e.diag);
    } else {
      ChoiMatrix c = to_choi(channel_from_json(load_target_channel(es_in)));
      auto e = estimate_frame_bingham_params(rng, c, common.sa(), common.frame_chain());
      j["params"] = {{"Theta", to_json(e.params.theta())}};
      j["diagnostics"] = to_json(e.diag);
    }
    j["manifest"] = make_manifest("estimate", common, params_of({es}), {});
    print_json(j, es_out);
    return 0;
  }

  const ReprKind out_repr = repr_kind_from_string(sc->parsed() ? sc_repr : "choi");
  RngStream fit_rng = common.fit_rng();
  RngStream rng = common.sample_rng();

  if (st->parsed()) {
    Json draws = Json::array();
    Json record;
    std::vector<std::vector<double>> rows;
    auto emit = [&](const DensityOperator& rho, int i) {
      draws.push_back(state_to_json(rho));
      if (rho.dim() == 2) {
        VectorXd b = state_to_bloch(rho).vec();
        rows.push_back({static_cast<double>(i), b(0), b(1), b(2), purity(rho)});
      }
    };
    if (st_kind == "pure") {
      auto v = split_list(st_target.empty() ? "0,0,0" : st_target, "target");
      PureStateVmf d(to_vector(v, 3, "target"));
      record = to_json(d.record());
      for (int i = 0; i < common.samples; ++i) emit(d(rng), i);
    } else {
      DensityOperator target = st_in.empty() ? [&] {
        auto v = split_list(st_target, "target");
        VectorXd diag = to_vector(v, v.size(), "target");
        return DensityOperator(MatrixXcd(diag.cast<Complex>().asDiagonal()));
      }()
                                             : state_from_json(read_json_file(st_in));
      auto d = MixedStateBingham::fit(fit_rng, target, st_rank, common.sa());
      record = to_json(d.record());
      for (int i = 0; i < common.samples; ++i) emit(d(rng), i);
    }
    const std::vector<std::string> files = {"states.json", "states.csv"};
    Outputs out(common, make_manifest("sample-state", common, params_of({st}), files));
    out.json(files[0], {{"distribution", record}, {"samples", draws}});
    out.csv(files[1], {"index", "x", "y", "z", "purity"}, rows);
    return 0;
  }

  if (sc->parsed()) {
    Json draws = Json::array();
    Json record;
    auto emit = [&](const AnyChannel& ch) { draws.push_back(channel_to_json(convert(ch, out_repr))); };
    if (sc_kind == "dephasing") {
      DephasingVonMises d(Complex(sc_re, sc_im));
      record = to_json(d.record());
      for (int i = 0; i < common.samples; ++i) emit(d(rng));
    } else if (sc_kind == "ad-gamma") {
      AdGamma d(sc_gamma, sc_conc);
      record = to_json(d.record());
      for (int i = 0; i < common.samples; ++i) emit(d(rng));
    } else {
      AnyChannel target = channel_from_json(load_target_channel(sc_in));
      if (sc_kind == "unitary") {
        ChoiMatrix c = to_choi(target);
        require(c.dim() == 2, "unitary sampling needs a qubit channel");
        MatrixXd a = liouville_to_ptm(choi_to_liouville(c)).mat().bottomRightCorner(3, 3);
        auto d = UnitaryFisher::fit(fit_rng, a, common.sa(), common.chain());
        record = to_json(d.record());
        for (int i = 0; i < common.samples; ++i) emit(d(rng));
      } else if (sc_kind == "cptp") {
        auto d = CptpFrameBingham::fit(fit_rng, to_choi(target), sc_conc, common.sa(), common.frame_chain());
        record = to_json(d.record());
        for (int i = 0; i < common.samples; ++i) emit(d(rng));
      } else {
        const KrausSet k = to_kraus(target);
        auto d = CptpFisherApprox::fit(fit_rng, kraus_to_stiefel(k), sc_eps, common.sa(), common.chain());
        record = to_json(d.record());
        for (int i = 0; i < common.samples; ++i) emit(d(rng));
      }
    }
    const std::vector<std::string> files = {"channels.json"};
    Outputs out(common, make_manifest("sample-channel", common, params_of({sc}), files));
    out.json(files[0], {{"distribution", record}, {"samples", draws}});
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const NonConvergence& e) {
    std::cerr << "error: " << e.what() << " (residual " << e.residual() << ")\n";
    return kExitNonConvergence;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
