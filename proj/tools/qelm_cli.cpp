// Copyright 2026 The QELM Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// qelm_cli: config-driven experiment runner.
//
//   qelm_cli <command> [--config FILE] [--seed N] [--out DIR] [--set key=value]...
//
// Each command starts from built-in defaults (a desk-scale preset), overlays the
// JSON config file, then the --set overrides (dotted keys reach into nested
// objects), then --seed. Unknown keys are rejected. Results go to
// DIR/<command>.csv together with DIR/manifest.json.
//
// Exit codes: 0 ok, 1 runtime failure, 2 config error, 3 budget refusal.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qelm/concentration.hpp"
#include "qelm/fourier.hpp"
#include "qelm/io.hpp"
#include "qelm/model.hpp"

namespace {

using qelm::json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dense unitaries and density matrices beyond this are refused up front.
constexpr std::size_t kMaxDenseQubits = 10;

// ---------------------------------------------------------------------------
// Typed field access with field-level messages

class Fields {
 public:
  explicit Fields(const json& j, std::string prefix = {}) : j_(j), prefix_(std::move(prefix)) {}

  const json& raw(const std::string& key) const {
    if (!j_.contains(key)) throw ConfigError("missing field '" + name(key) + "'");
    return j_.at(key);
  }

  std::uint64_t u64(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0))
      throw type_error(key, "a non-negative integer", v);
    return v.get<std::uint64_t>();
  }
  std::size_t count(const std::string& key) const { return static_cast<std::size_t>(u64(key)); }
  std::size_t positive(const std::string& key) const {
    const std::size_t v = count(key);
    if (v == 0) throw ConfigError("field '" + name(key) + "': must be >= 1");
    return v;
  }

  double real(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_number()) throw type_error(key, "a number", v);
    return v.get<double>();
  }

  bool boolean(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_boolean()) throw type_error(key, "true or false", v);
    return v.get<bool>();
  }

  std::string text(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_string()) throw type_error(key, "a string", v);
    return v.get<std::string>();
  }

  std::string choice(const std::string& key, const std::vector<std::string>& options) const {
    const std::string s = text(key);
    if (std::find(options.begin(), options.end(), s) == options.end()) {
      std::string all;
      for (const auto& o : options) all += (all.empty() ? "" : ", ") + o;
      throw ConfigError("field '" + name(key) + "': '" + s + "' is not one of {" + all + "}");
    }
    return s;
  }

  std::vector<std::size_t> counts(const std::string& key, bool allow_zero = false) const {
    const json& v = raw(key);
    if (!v.is_array() || v.empty()) throw type_error(key, "a nonempty list of integers", v);
    std::vector<std::size_t> out;
    for (const auto& e : v) {
      if (!e.is_number_integer() || e.get<std::int64_t>() < (allow_zero ? 0 : 1))
        throw type_error(key, allow_zero ? "a list of non-negative integers" : "a list of positive integers", v);
      out.push_back(e.get<std::size_t>());
    }
    return out;
  }

  std::vector<double> reals(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_array() || v.empty()) throw type_error(key, "a nonempty list of numbers", v);
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw type_error(key, "a list of numbers", v);
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::vector<std::string> texts(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_array()) throw type_error(key, "a list of strings", v);
    std::vector<std::string> out;
    for (const auto& e : v) {
      if (!e.is_string()) throw type_error(key, "a list of strings", v);
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  Fields nested(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_object()) throw type_error(key, "an object", v);
    return Fields(v, name(key) + ".");
  }

  void only(const std::set<std::string>& allowed) const {
    for (const auto& [k, v] : j_.items())
      if (!allowed.count(k)) throw ConfigError("unknown field '" + name(k) + "'");
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  std::string name(const std::string& key) const { return prefix_ + key; }

 private:
  ConfigError type_error(const std::string& key, const std::string& want, const json& got) const {
    return ConfigError("field '" + name(key) + "': expected " + want + ", got " + got.dump());
  }

  const json& j_;
  std::string prefix_;
};

void require_budget(std::size_t qubits, std::size_t limit, const std::string& what) {
  if (qubits > limit)
    throw BudgetError(what + " = " + std::to_string(qubits) + " qubits exceeds the limit of " + std::to_string(limit));
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

qelm::EncodingSpec parse_encoding(const Fields& f, std::size_t n_a) {
  const std::string scheme = f.choice("scheme", {"pauli", "exponential", "layered", "product", "diagonal"});
  if (scheme == "pauli") {
    f.only({"scheme"});
    return qelm::EncodingSpec::pauli(n_a);
  }
  if (scheme == "exponential") {
    f.only({"scheme"});
    return qelm::EncodingSpec::exponential(n_a);
  }
  if (scheme == "layered") {
    f.only({"scheme", "layers", "seed", "entangle"});
    return qelm::EncodingSpec::layered(n_a, f.positive("layers"), f.u64("seed"), f.has("entangle") ? f.boolean("entangle") : true);
  }
  f.only({"scheme", "eigs"});
  if (scheme == "diagonal") {
    const auto mu = f.reals("eigs");
    require(mu.size() == (std::size_t{1} << n_a), "field '" + f.name("eigs") + "': needs 2^n_accessible entries");
    return qelm::EncodingSpec::diagonal(mu);
  }
  const json& e = f.raw("eigs");
  require(e.is_array() && e.size() == n_a, "field '" + f.name("eigs") + "': needs one [lo, hi] pair per accessible qubit");
  std::vector<qelm::EncodingSpec::EigPair> pairs;
  for (const auto& p : e) {
    require(p.is_array() && p.size() == 2 && p[0].is_number() && p[1].is_number(),
            "field '" + f.name("eigs") + "': each entry must be [lo, hi]");
    pairs.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return qelm::EncodingSpec::product(pairs);
}

qelm::ReservoirSpec parse_reservoir(const Fields& f) {
  const std::string kind = f.choice("kind", {"identity", "ising", "ising_integrable", "ising_chaotic", "haar", "layered"});
  if (kind == "identity") {
    f.only({"kind"});
    return qelm::ReservoirSpec::identity();
  }
  if (kind == "ising") {
    f.only({"kind", "J", "Bx", "Bz", "t"});
    return qelm::ReservoirSpec::ising(f.real("J"), f.real("Bx"), f.real("Bz"), f.has("t") ? f.real("t") : 10.0);
  }
  if (kind == "ising_integrable" || kind == "ising_chaotic") {
    f.only({"kind", "t"});
    const double t = f.has("t") ? f.real("t") : 10.0;
    return kind == "ising_integrable" ? qelm::ReservoirSpec::ising_integrable(t) : qelm::ReservoirSpec::ising_chaotic(t);
  }
  if (kind == "haar") {
    f.only({"kind", "seed"});
    return qelm::ReservoirSpec::haar(f.u64("seed"));
  }
  f.only({"kind", "depth", "seed"});
  return qelm::ReservoirSpec::layered_random(f.positive("depth"), f.u64("seed"));
}

qelm::Matrix parse_rho0(const Fields& f, std::size_t n_a) {
  const std::string s = f.choice("rho0", {"plus", "zero", "mixed"});
  if (s == "plus") return qelm::DensityMatrix::plus_state(n_a).matrix();
  if (s == "zero") return qelm::DensityMatrix::basis(n_a, 0).matrix();
  return qelm::DensityMatrix::maximally_mixed(n_a).matrix();
}

qelm::PauliString parse_pauli(const Fields& f, const std::string& key, const std::string& s, std::size_t n) {
  if (s.size() != n) throw ConfigError("field '" + f.name(key) + "': Pauli string '" + s + "' must have " + std::to_string(n) + " letters");
  try {
    return qelm::PauliString::parse(s);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("field '" + f.name(key) + "': " + e.what());
  }
}

// Observable given as a prefix on the first qubits, padded with identities.
qelm::PauliString parse_prefix(const Fields& f, const std::string& key, std::size_t n) {
  const std::string s = f.text(key);
  require(!s.empty() && s.size() <= n, "field '" + f.name(key) + "': Pauli prefix must have 1.." + std::to_string(n) + " letters");
  return parse_pauli(f, key, s + std::string(n - s.size(), 'I'), n);
}

qelm::EncodingScheme parse_scheme(const Fields& f, const std::string& key) {
  const std::string s = f.choice(key, {"pauli", "exponential", "layered"});
  if (s == "pauli") return qelm::EncodingScheme::PauliReupload;
  if (s == "exponential") return qelm::EncodingScheme::Exponential;
  return qelm::EncodingScheme::Layered;
}

// ---------------------------------------------------------------------------
// Defaults (desk-scale presets)

json defaults_for(const std::string& command, const std::string& kind) {
  const double pi = std::numbers::pi;
  if (command == "spectrum")
    return {{"seed", 1},         {"n_accessible", 2},  {"n_hidden", 2},
            {"encoding", {{"scheme", "exponential"}}}, {"reservoir", {{"kind", "haar"}, {"seed", 7}}},
            {"rho0", "plus"},    {"observables", {"ZIII"}}, {"random_observables", 0}};
  if (command == "richness")
    return {{"seed", 1},
            {"n_accessible", {2, 3}},
            {"n_hidden", 2},
            {"encoding", "exponential"},
            {"reservoirs", json::array({{{"kind", "identity"}}, {{"kind", "ising_integrable"}}, {{"kind", "ising_chaotic"}},
                                        {{"kind", "haar"}, {"seed", 1}}})},
            {"rho0", "plus"},
            {"tol", 1e-10}};
  if (command == "train")
    return {{"seed", 1},          {"n_accessible", 3},   {"n_hidden", 1},
            {"encoding", {{"scheme", "exponential"}}},   {"reservoir", {{"kind", "haar"}, {"seed", 3}}},
            {"rho0", "plus"},     {"n_observables", 30}, {"observables", json::array()},
            {"target_cutoff", 5}, {"dataset", ""},       {"n_train", 100},
            {"n_test", 200},      {"x_lo", 0.0},         {"x_hi", 2 * pi},
            {"lambda", 1e-10},    {"shots", 0}};
  if (command == "expressivity")
    return {{"seed", 1},
            {"n_accessible", 2},
            {"n_hidden", 1},
            {"encoding", {{"scheme", "exponential"}}},
            {"reservoir", {{"kind", "haar"}, {"seed", 1}}},
            {"rho0", "plus"},
            {"observable_counts", {1, 2, 4, 8, 9, 12}},
            {"trials", 10}};
  if (command == "haarstats")
    return {{"seed", 1}, {"n_accessible", 2}, {"n_hidden", 2}, {"observable", "ZIXI"}, {"n_samples", 2000}};
  if (command == "hypothesis")
    return {{"seed", 1},
            {"p_true", 0.6},
            {"sample_counts", {1, 4, 16}},
            {"n_trials", 10000},
            {"concentrated_qubits", {4, 6, 8, 10}}};
  if (command == "surrogate")
    return {{"seed", 1},
            {"n_accessible", 3},
            {"n_hidden", 1},
            {"encoding", {{"scheme", "exponential"}}},
            {"reservoir", {{"kind", "haar"}, {"seed", 2}}},
            {"rho0", "plus"},
            {"n_observables", 20},
            {"n_train", 0},
            {"n_test", 1000},
            {"rff_k", {0}},
            {"rff_seeds", 20},
            {"lambda", 1e-10}};
  if (command == "concentration") {
    if (kind == "encoding")
      return {{"kind", kind},       {"seed", 1},          {"n_accessible", {2, 3, 4}},
              {"n_hidden", 0},      {"depths", {1, 10}},  {"encoding", "layered"},
              {"reservoir", {{"kind", "identity"}}},      {"observable", "ZZ"},
              {"n_samples", 200},   {"x_lo", -pi},        {"x_hi", pi},
              {"bootstrap", 200},   {"bound_max_qubits", 3}};
    if (kind == "reservoir")
      return {{"kind", kind},          {"seed", 1},         {"n_accessible", {2, 3, 4, 5, 6}},
              {"n_hidden", 0},         {"depth", 1},        {"encoding", "pauli"},
              {"reservoir", {{"kind", "haar"}, {"seed", 0}}}, {"observable", "Z"},
              {"n_samples", 500},      {"x_fixed", 0.7},    {"bootstrap", 200}};
    if (kind == "entanglement")
      return {{"kind", kind}, {"seed", 1}, {"n_qubits", {4, 6, 8}}, {"observable", "ZX"}, {"n_samples", 20}};
    if (kind == "global")
      return {{"kind", kind},       {"seed", 1},        {"n_accessible", {1, 2, 3, 4, 5, 6}},
              {"n_hidden", 1},      {"depths", {1, 8}}, {"encoding", "layered"},
              {"n_samples", 1000},  {"identity_hidden", true}};
    if (kind == "noise")
      return {{"kind", kind},
              {"seed", 1},
              {"n_accessible", 7},
              {"n_hidden", 1},
              {"max_layers", 20},
              {"noise_p", {0.05, 0.1, 0.2}},
              {"n_inputs", 20},
              {"observable", "Z"},
              {"reservoir", {{"kind", "haar"}, {"seed", 5}}}};
    throw ConfigError("field 'kind': '" + kind + "' is not one of {encoding, reservoir, entanglement, global, noise}");
  }
  throw ConfigError("unknown command '" + command + "'");
}

// Dotted-key assignment; the top-level key must already exist.
void assign(json& cfg, const std::string& dotted, const json& value) {
  json* node = &cfg;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = dotted.find('.', start);
    const std::string key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError("malformed key '" + dotted + "'");
    if (node == &cfg && !cfg.contains(key)) throw ConfigError("unknown field '" + key + "'");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    if (!node->contains(key) || !(*node)[key].is_object())
      throw ConfigError("field '" + dotted.substr(0, dot) + "' is not an object");
    node = &(*node)[key];
    start = dot + 1;
  }
}

json parse_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    return text;  // bare strings need no quotes
  }
}

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "qelm_out";
  std::vector<std::string> sets;
  std::string kind;
};

json resolve_config(const std::string& command, const Options& opt) {
  json overrides = json::object();
  if (!opt.config_path.empty()) {
    std::ifstream in(opt.config_path);
    if (!in) throw ConfigError("cannot read config file '" + opt.config_path + "'");
    try {
      overrides = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("config file '" + opt.config_path + "' is not valid JSON: " + e.what());
    }
    if (!overrides.is_object()) throw ConfigError("config file must hold a JSON object");
    // A manifest from an earlier run carries the resolved config.
    if (overrides.contains("config") && overrides.contains("versions")) overrides = overrides.at("config");
  }
  std::vector<std::pair<std::string, json>> sets;
  for (const auto& s : opt.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + s + "'");
    sets.emplace_back(s.substr(0, eq), parse_value(s.substr(eq + 1)));
  }
  std::string kind;
  if (command == "concentration") {
    kind = "encoding";
    if (overrides.contains("kind")) {
      if (!overrides["kind"].is_string()) throw ConfigError("field 'kind': expected a string");
      kind = overrides["kind"].get<std::string>();
    }
    for (const auto& [k, v] : sets)
      if (k == "kind") kind = v.is_string() ? v.get<std::string>() : v.dump();
    if (!opt.kind.empty()) kind = opt.kind;
  }
  json cfg = defaults_for(command, kind);
  for (const auto& [k, v] : overrides.items()) {
    if (!cfg.contains(k)) throw ConfigError("unknown field '" + k + "'");
    cfg[k] = v;
  }
  for (const auto& [k, v] : sets) assign(cfg, k, v);
  if (command == "concentration") cfg["kind"] = kind;
  if (opt.seed) cfg["seed"] = *opt.seed;
  return cfg;
}

// ---------------------------------------------------------------------------
// Commands. Each validates and budget-checks before any heavy allocation,
// then returns the CSV table plus optional extra manifest entries.

struct Output {
  qelm::CsvWriter csv{{}};
  json extra = json::object();
  std::vector<std::pair<std::string, std::string>> files;  // additional (name, contents)
};

Output run_spectrum(const json& cfg) {
  const Fields f(cfg);
  f.only({"seed", "n_accessible", "n_hidden", "encoding", "reservoir", "rho0", "observables", "random_observables"});
  const std::size_t n_a = f.positive("n_accessible"), n_h = f.count("n_hidden");
  require_budget(n_a + n_h, kMaxDenseQubits, "n_accessible + n_hidden");
  const std::size_t n = n_a + n_h;
  const auto enc = parse_encoding(f.nested("encoding"), n_a);
  const auto res = parse_reservoir(f.nested("reservoir"));
  const qelm::Matrix rho0 = parse_rho0(f, n_a);
  std::vector<qelm::PauliString> obs;
  for (const auto& s : f.texts("observables")) obs.push_back(parse_pauli(f, "observables", s, n));
  const std::size_t extra = f.count("random_observables");
  if (extra) {
    require(extra < (std::uint64_t{1} << (2 * n)), "field 'random_observables': more than the 4^n - 1 Pauli strings");
    qelm::Rng rng(f.u64("seed"));
    for (auto& p : qelm::random_paulis(n, extra, rng)) obs.push_back(p);
  }
  require(!obs.empty(), "field 'observables': at least one observable is required");
  const qelm::Matrix u_r = qelm::realize(res, n);
  std::vector<qelm::FourierSpectrum> spectra;
  for (const auto& o : obs) spectra.push_back(qelm::spectrum_direct(rho0, enc, u_r, o));
  Output out;
  out.csv = qelm::spectrum_csv(spectra);
  out.extra["omega_size"] = spectra.front().size();
  return out;
}

Output run_richness(const json& cfg) {
  const Fields f(cfg);
  f.only({"seed", "n_accessible", "n_hidden", "encoding", "reservoirs", "rho0", "tol"});
  const auto n_as = f.counts("n_accessible");
  const std::size_t n_h = f.count("n_hidden");
  for (auto n_a : n_as) {
    require_budget(n_a, 6, "n_accessible (richness enumerates 4^n_A observables)");
    require_budget(n_a + n_h, kMaxDenseQubits, "n_accessible + n_hidden");
  }
  const auto scheme = parse_scheme(f, "encoding");
  require(scheme != qelm::EncodingScheme::Layered, "field 'encoding': richness needs a diagonal encoding (pauli or exponential)");
  const double tol = f.real("tol");
  require(tol > 0, "field 'tol': must be positive");
  const json& list = f.raw("reservoirs");
  require(list.is_array() && !list.empty(), "field 'reservoirs': expected a nonempty list of reservoir objects");
  std::vector<std::pair<std::string, qelm::ReservoirSpec>> reservoirs;
  for (std::size_t i = 0; i < list.size(); ++i) {
    require(list[i].is_object(), "field 'reservoirs[" + std::to_string(i) + "]': expected an object");
    const Fields rf(list[i], "reservoirs[" + std::to_string(i) + "].");
    std::string label = rf.text("kind");
    reservoirs.emplace_back(label, parse_reservoir(rf));
  }
  qelm::CsvWriter csv = qelm::richness_csv();
  for (auto n_a : n_as) {
    const auto enc = qelm::make_encoding(scheme, n_a, 1, 0);
    const qelm::Matrix rho0 = parse_rho0(f, n_a);
    for (const auto& [label, spec] : reservoirs) {
      const auto r = qelm::richness(enc, qelm::realize(spec, n_a + n_h), rho0, tol);
      csv.cell(n_a).cell(n_h).cell(label).cell(tol).cell(r.raw).cell(r.normalized).end_row();
    }
  }
  Output out;
  out.csv = std::move(csv);
  return out;
}

// Shared QELM construction for train / surrogate / expressivity.
struct Pipeline {
  std::size_t n_a = 0, n_h = 0;
  qelm::EncodingSpec enc = qelm::EncodingSpec::pauli(1);
  qelm::ReservoirSpec res;
  qelm::Matrix rho0;
};

Pipeline parse_pipeline(const Fields& f) {
  Pipeline p;
  p.n_a = f.positive("n_accessible");
  p.n_h = f.count("n_hidden");
  require_budget(p.n_a + p.n_h, kMaxDenseQubits, "n_accessible + n_hidden");
  p.enc = parse_encoding(f.nested("encoding"), p.n_a);
  p.res = parse_reservoir(f.nested("reservoir"));
  p.rho0 = parse_rho0(f, p.n_a);
  return p;
}

Output run_train(const json& cfg) {
  const Fields f(cfg);
  f.only({"seed", "n_accessible", "n_hidden", "encoding", "reservoir", "rho0", "n_observables", "observables", "target_cutoff",
          "dataset", "n_train", "n_test", "x_lo", "x_hi", "lambda", "shots"});
  const Pipeline p = parse_pipeline(f);
  const std::size_t n = p.n_a + p.n_h;
  const qelm::Rng master(f.u64("seed"));
  std::vector<qelm::PauliString> obs;
  for (const auto& s : f.texts("observables")) obs.push_back(parse_pauli(f, "observables", s, n));
  if (obs.empty()) {
    const std::size_t m = f.positive("n_observables");
    require(m < (std::uint64_t{1} << (2 * n)), "field 'n_observables': more than the 4^n - 1 Pauli strings");
    qelm::Rng rng = master.derive(1);
    obs = qelm::random_paulis(n, m, rng);
  }
  const double lambda = f.real("lambda"), lo = f.real("x_lo"), hi = f.real("x_hi");
  require(lambda >= 0, "field 'lambda': must be >= 0");
  require(lo < hi, "fields 'x_lo', 'x_hi': need x_lo < x_hi");
  const std::uint64_t shots = f.u64("shots");

  qelm::Dataset train_set, test_set;
  const std::string path = f.text("dataset");
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError("field 'dataset': cannot read '" + path + "'");
    try {
      train_set = qelm::read_dataset_csv(in);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("field 'dataset': ") + e.what());
    }
    require(train_set.size() >= 2, "field 'dataset': need at least two rows");
  } else {
    const std::size_t k = f.positive("target_cutoff");
    qelm::Rng trng = master.derive(0), xrng = master.derive(2);
    const auto target = qelm::random_fourier_target(static_cast<int>(k), trng);
    std::vector<double> xtr, xte;
    for (std::size_t i = 0, m = f.positive("n_train"); i < m; ++i) xtr.push_back(xrng.uniform(lo, hi));
    for (std::size_t i = 0, m = f.count("n_test"); i < m; ++i) xte.push_back(xrng.uniform(lo, hi));
    train_set = qelm::tabulate(target, xtr);
    test_set = qelm::tabulate(target, xte);
  }

  qelm::QelmModel model(p.enc, p.res, p.n_h, p.rho0, obs, shots ? std::optional<std::uint64_t>(shots) : std::nullopt);
  qelm::Rng shot_rng = master.derive(3);
  const auto fit = qelm::train(model, train_set, lambda, shots ? &shot_rng : nullptr);

  Output out;
  out.csv = qelm::CsvWriter({"split", "x", "y", "prediction"});
  auto emit = [&](const char* split, const qelm::Dataset& d) {
    std::vector<double> pred;
    for (std::size_t i = 0; i < d.size(); ++i) {
      pred.push_back(model.predict(d.x[i]));
      out.csv.cell(split).cell(d.x[i]).cell(d.y[i]).cell(pred.back()).end_row();
    }
    return pred;
  };
  const auto ptr = emit("train", train_set);
  json metrics;
  metrics["train_rmse"] = qelm::rmse(ptr, train_set.y);
  try {
    metrics["train_r2"] = qelm::r2_score(ptr, train_set.y);
  } catch (const std::domain_error&) {
    metrics["train_r2"] = nullptr;
  }
  if (test_set.size() >= 2) {
    const auto pte = emit("test", test_set);
    metrics["test_rmse"] = qelm::rmse(pte, test_set.y);
    try {
      metrics["test_r2"] = qelm::r2_score(pte, test_set.y);
    } catch (const std::domain_error&) {
      metrics["test_r2"] = nullptr;
    }
  }
  out.extra["metrics"] = metrics;
  out.files.emplace_back("model.json", qelm::model_to_json(model).dump(2) + "\n");
  (void)fit;
  return out;
}

Output run_expressivity(const json& cfg) {
  const Fields f(cfg);
  f.only({"seed", "n_accessible", "n_hidden", "encoding", "reservoir", "rho0", "observable_counts", "trials"});
  const Pipeline p = parse_pipeline(f);
  const std::size_t n = p.n_a + p.n_h;
  const auto counts = f.counts("observable_counts");
  for (auto m : counts)
    require(m < (std::uint64_t{1} << (2 * n)), "field 'observable_counts': " + std::to_string(m) + " exceeds 4^n - 1");
  const std::size_t trials = f.positive("trials");
  const qelm::Rng master(f.u64("seed"));
  const bool random_res = p.res.kind == qelm::ReservoirKind::Haar || p.res.kind == qelm::ReservoirKind::LayeredRandom;
  Output out;
  out.csv = qelm::CsvWriter({"trial", "M", "omega_size", "locality_bound", "bound", "rank", "saturated"});
  std::uint64_t task = 0;
  for (auto m : counts)
    for (std::size_t t = 0; t < trials; ++t) {
      qelm::Rng rng = master.derive(task++);
      const qelm::Matrix u_r = random_res ? qelm::realize(p.res, n, rng) : qelm::realize(p.res, n);
      const auto obs = qelm::random_paulis(n, m, rng);
      std::vector<qelm::FourierSpectrum> spectra;
      for (const auto& o : obs) spectra.push_back(qelm::spectrum_direct(p.rho0, p.enc, u_r, o));
      const auto r = qelm::expressivity_report(spectra, n);
      out.csv.cell(t).cell(m).cell(r.omega_size).cell(r.locality_bound).cell(r.bound).cell(r.rank).cell(r.saturated).end_row();
    }
  return out;
}

Output run_haarstats(const json& cfg) {
  const Fields f(cfg);
  f.only({"seed", "n_accessible", "n_hidden", "observable", "n_samples"});
  const std::size_t n_a = f.positive("n_accessible"), n_h = f.count("n_hidden");
  require_budget(n_a, 4, "n_accessible (distinct-index covariance scales as 16^n_A)");
  require_budget(n_a + n_h, 8, "n_accessible + n_hidden");
  const auto obs = parse_pauli(f, "observable", f.text("observable"), n_a + n_h);
  const std::size_t ns = f.count("n_samples");
  require(ns >= 2, "field 'n_samples': must be >= 2");
  qelm::Rng rng(f.u64("seed"));
  const auto s = qelm::haar_coefficient_stats(n_a, n_h, obs, ns, rng);
  Output out;
  out.csv = qelm::CsvWriter({"statistic", "value", "stderr", "expected"});
  double worst_z = 0.0;
  for (std::size_t k = 0; k < s.mean_re.size(); ++k) {
    worst_z = std::max(worst_z, std::abs(s.mean_re[k]) / std::max(s.mean_re_se[k], 1e-300));
    worst_z = std::max(worst_z, std::abs(s.mean_im[k]) / std::max(s.mean_im_se[k], 1e-300));
  }
  out.csv.cell("max_abs_mean_z").cell(worst_z).cell(0.0).cell(0.0).end_row();
  out.csv.cell("var_offdiag").cell(s.var_offdiag).cell(s.var_offdiag_se).cell(s.var_offdiag_expected).end_row();
  out.csv.cell("var_diag").cell(s.var_diag).cell(s.var_diag_se).cell(s.var_diag_expected).end_row();
  out.csv.cell("cov_diag").cell(s.cov_diag).cell(s.cov_diag_se).cell(s.cov_diag_expected).end_row();
  if (s.has_distinct) {
    out.csv.cell("cov_distinct_re").cell(s.cov_distinct_re).cell(s.cov_distinct_se_re).cell(0.0).end_row();
    out.csv.cell("cov_distinct_im").cell(s.cov_distinct_im).cell(s.cov_distinct_se_im).cell(0.0).end_row();
  }
  return out;
}

Output run_hypothesis(const json& cfg) {
  const Fields f(cfg);
  f.only({"seed", "p_true", "sample_counts", "n_trials", "concentrated_qubits"});
  const double p = f.real("p_true");
  require(p >= 0 && p <= 1, "field 'p_true': must lie in [0, 1]");
  const auto ns = f.counts("sample_counts");
  const std::size_t trials = f.positive("n_trials");
  const json& cq = f.raw("concentrated_qubits");
  std::vector<std::size_t> qubits;
  if (!(cq.is_array() && cq.empty())) qubits = f.counts("concentrated_qubits");
  for (auto q : qubits) require_budget(q, 30, "concentrated_qubits entry");
  const qelm::Rng master(f.u64("seed"));
  Output out;
  out.csv = qelm::CsvWriter({"case", "n_qubits", "p", "n_samples", "n_trials", "empirical", "exact"});
  std::uint64_t task = 0;
  for (auto n : ns) {
    qelm::Rng rng = master.derive(task++);
    out.csv.cell("fixed_p").cell(0).cell(p).cell(n).cell(trials).cell(qelm::hypothesis_test_sim(p, n, trials, rng))
        .cell(qelm::hypothesis_success_exact(p, n)).end_row();
  }
  for (auto q : qubits) {
    qelm::Rng rng = master.derive(task++);
    const double pq = 0.5 + std::ldexp(1.0, -static_cast<int>(q));
    const std::size_t n = q * q;
    out.csv.cell("concentrated").cell(q).cell(pq).cell(n).cell(trials).cell(qelm::hypothesis_test_sim(pq, n, trials, rng))
        .cell(qelm::hypothesis_success_exact(pq, n)).end_row();
  }
  return out;
}

Output run_surrogate(const json& cfg) {
  const Fields f(cfg);
  f.only({"seed", "n_accessible", "n_hidden", "encoding", "reservoir", "rho0", "n_observables", "n_train", "n_test", "rff_k",
          "rff_seeds", "lambda"});
  const Pipeline p = parse_pipeline(f);
  require(p.enc.scheme() != qelm::EncodingScheme::Layered, "field 'encoding.scheme': surrogates need a diagonal encoding");
  const std::size_t n = p.n_a + p.n_h;
  const std::size_t m = f.positive("n_observables");
  require(m < (std::uint64_t{1} << (2 * n)), "field 'n_observables': more than the 4^n - 1 Pauli strings");
  const double lambda = f.real("lambda");
  require(lambda >= 0, "field 'lambda': must be >= 0");
  const auto omega = qelm::frequency_set(p.enc);
  std::size_t n_train = f.count("n_train");
  if (n_train == 0) n_train = 2 * omega.size();
  const std::size_t n_test = f.positive("n_test");
  const std::size_t seeds = f.positive("rff_seeds");
  std::vector<std::size_t> ks = f.counts("rff_k", true);
  for (auto& k : ks)
    if (k == 0) k = std::max<std::size_t>(1, omega.size() / 5);

  const qelm::Rng master(f.u64("seed"));
  qelm::Rng orng = master.derive(0), wrng = master.derive(1), xrng = master.derive(2);
  qelm::QelmModel model(p.enc, p.res, p.n_h, p.rho0, qelm::random_paulis(n, m, orng));
  qelm::RealVector eta(static_cast<Eigen::Index>(m));
  for (std::size_t k = 0; k < m; ++k) eta(static_cast<Eigen::Index>(k)) = wrng.normal();
  model.set_weights(eta, 0.0);
  const double span = 2 * std::numbers::pi;
  std::vector<double> xtr, xte;
  for (std::size_t i = 0; i < n_train; ++i) xtr.push_back(span * static_cast<double>(i) / static_cast<double>(n_train));
  for (std::size_t i = 0; i < n_test; ++i) xte.push_back(xrng.uniform(-span, span));
  auto qelm_fn = [&](double x) { return model.predict(x); };
  const auto train_set = qelm::tabulate(qelm_fn, xtr);
  const auto test_set = qelm::tabulate(qelm_fn, xte);

  Output out;
  out.csv = qelm::CsvWriter({"method", "k", "seed", "test_rmse", "sup_error"});
  auto score = [&](const qelm::FourierSurrogate& s, const char* method, std::size_t k, std::uint64_t seed) {
    const auto pred = s.predict(test_set.x);
    double sup = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) sup = std::max(sup, std::abs(pred[i] - test_set.y[i]));
    out.csv.cell(method).cell(k).cell(seed).cell(qelm::rmse(pred, test_set.y)).cell(sup).end_row();
  };
  score(qelm::full_fourier_surrogate(omega, train_set, lambda), "full", omega.size(), 0);
  const auto weights = qelm::spectrum_weights(model.prediction_spectrum());
  for (auto k : ks)
    for (std::size_t s = 0; s < seeds; ++s) {
      qelm::Rng r = master.derive(100 + s);
      score(qelm::rff_surrogate(weights, k, train_set, r, lambda).surrogate, "rff", k, s);
    }
  out.extra["omega_size"] = omega.size();
  return out;
}

qelm::ConcentrationRow base_row(const std::string& experiment, std::uint64_t seed) {
  qelm::ConcentrationRow r;
  r.experiment = experiment;
  r.seed = seed;
  return r;
}

Output run_concentration(const json& cfg) {
  const Fields f(cfg);
  const std::string kind = f.text("kind");
  const std::uint64_t seed = f.u64("seed");
  std::vector<qelm::ConcentrationRow> rows;
  Output out;

  if (kind == "encoding" || kind == "reservoir") {
    qelm::SweepConfig sc;
    if (kind == "encoding") {
      f.only({"kind", "seed", "n_accessible", "n_hidden", "depths", "encoding", "reservoir", "observable", "n_samples", "x_lo",
              "x_hi", "bootstrap", "bound_max_qubits"});
      sc.quantity = qelm::SweepQuantity::VarOverInputs;
      sc.depths = f.counts("depths");
      sc.x_lo = f.real("x_lo");
      sc.x_hi = f.real("x_hi");
    } else {
      f.only({"kind", "seed", "n_accessible", "n_hidden", "depth", "encoding", "reservoir", "observable", "n_samples", "x_fixed",
              "bootstrap"});
      sc.quantity = qelm::SweepQuantity::VarOverReservoirs;
      sc.depths = {f.positive("depth")};
      sc.x_fixed = f.real("x_fixed");
    }
    sc.n_accessible = f.counts("n_accessible");
    sc.n_hidden = f.count("n_hidden");
    for (auto n_a : sc.n_accessible) require_budget(n_a + sc.n_hidden, kMaxDenseQubits, "n_accessible + n_hidden");
    sc.encoding = parse_scheme(f, "encoding");
    sc.reservoir = parse_reservoir(f.nested("reservoir"));
    sc.observable = f.text("observable");
    for (auto n_a : sc.n_accessible) parse_prefix(f, "observable", n_a + sc.n_hidden);
    sc.n_samples = f.count("n_samples");
    sc.seed = seed;
    sc.bootstrap = f.count("bootstrap");
    try {
      sc.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    rows = kind == "encoding" ? qelm::var_over_inputs(sc) : qelm::var_over_reservoirs(sc);
    if (kind == "encoding") {
      // Second-moment bound on the same empirical ensemble for small registers.
      const std::size_t bmax = f.count("bound_max_qubits");
      require_budget(bmax, 4, "bound_max_qubits");
      const qelm::Rng master(seed);
      std::uint64_t task = 1000;
      for (auto n_a : sc.n_accessible)
        for (auto depth : sc.depths) {
          if (n_a > bmax) continue;
          qelm::Rng rng = master.derive(task++);
          const std::size_t n = n_a + sc.n_hidden;
          const auto enc = qelm::make_encoding(sc.encoding, n_a, depth, rng.engine()());
          const qelm::Matrix u_r = qelm::realize(sc.reservoir, n, rng);
          std::vector<double> xs;
          for (std::size_t i = 0; i < sc.n_samples; ++i) xs.push_back(rng.uniform(sc.x_lo, sc.x_hi));
          const auto rep = qelm::encoding_bound(enc, u_r, qelm::padded_pauli(sc.observable, n).matrix(),
                                                qelm::DensityMatrix::basis(n_a, 0).matrix(), xs);
          auto r = base_row("encoding_bound", seed);
          r.n_accessible = static_cast<int>(n_a);
          r.n_hidden = static_cast<int>(sc.n_hidden);
          r.depth = static_cast<int>(depth);
          r.n_samples = sc.n_samples;
          r.statistic = "var_x_population";
          r.value = rep.lhs;
          r.bound = rep.rhs;
          r.satisfied = rep.satisfied;
          rows.push_back(r);
        }
    }
  } else if (kind == "entanglement") {
    f.only({"kind", "seed", "n_qubits", "observable", "n_samples"});
    const auto ns = f.counts("n_qubits");
    for (auto n : ns) require_budget(n, kMaxDenseQubits, "n_qubits");
    const std::size_t samples = f.count("n_samples");
    require(samples >= 2, "field 'n_samples': must be >= 2");
    const qelm::Rng master(seed);
    std::uint64_t task = 0;
    for (auto n : ns) {
      const auto obs = parse_prefix(f, "observable", n);
      qelm::Rng rng = master.derive(task++);
      std::vector<double> lhs;
      double rhs = 0.0;
      bool ok = true;
      for (std::size_t s = 0; s < samples; ++s) {
        const qelm::Vector psi = qelm::haar_state(std::size_t{1} << n, rng);
        const auto rep = qelm::entanglement_bound_check(psi * psi.adjoint(), obs);
        lhs.push_back(rep.lhs);
        rhs += rep.rhs / static_cast<double>(samples);
        ok = ok && rep.satisfied;
      }
      auto r = base_row("entanglement", seed);
      r.n_accessible = static_cast<int>(n);
      r.n_samples = samples;
      r.statistic = "abs_deviation";
      r.value = qelm::mean_of(lhs);
      r.stderr_ = qelm::standard_error(lhs);
      r.bound = rhs;
      r.satisfied = ok;
      rows.push_back(r);
    }
  } else if (kind == "global") {
    f.only({"kind", "seed", "n_accessible", "n_hidden", "depths", "encoding", "n_samples", "identity_hidden"});
    const auto n_as = f.counts("n_accessible");
    const std::size_t n_h = f.count("n_hidden");
    for (auto n_a : n_as) require_budget(n_a + n_h, 30, "n_accessible + n_hidden");
    const auto depths = f.counts("depths");
    const bool haar = f.choice("encoding", {"layered", "haar"}) == "haar";
    const std::size_t samples = f.count("n_samples");
    require(samples >= 2, "field 'n_samples': must be >= 2");
    const bool id_hidden = f.boolean("identity_hidden");
    const qelm::Rng master(seed);
    std::uint64_t task = 0;
    for (auto depth : haar ? std::vector<std::size_t>{0} : depths)
      for (auto n_a : n_as) {
        qelm::Rng rng = master.derive(task++);
        const auto g = qelm::global_measurement_experiment(
            n_a, n_h, depth, haar ? qelm::GlobalEncoding::Haar : qelm::GlobalEncoding::Layered, samples, rng, id_hidden);
        auto r = base_row(haar ? "global_haar" : "global_layered", seed);
        r.n_accessible = static_cast<int>(n_a);
        r.n_hidden = static_cast<int>(n_h);
        r.depth = static_cast<int>(depth);
        r.n_samples = samples;
        r.statistic = "var_x";
        r.value = g.variance;
        r.stderr_ = g.variance_stderr;
        r.bound = g.bound.rhs;
        r.satisfied = g.bound.satisfied;
        rows.push_back(r);
        r.statistic = "second_moment";
        r.value = g.second_moment;
        r.stderr_ = g.second_moment_stderr;
        r.bound = haar ? g.predicted_haar : g.exact_second_moment;
        r.satisfied = std::abs(g.second_moment - r.bound) <= 5 * g.second_moment_stderr + 1e-12;
        rows.push_back(r);
      }
  } else if (kind == "noise") {
    f.only({"kind", "seed", "n_accessible", "n_hidden", "max_layers", "noise_p", "n_inputs", "observable", "reservoir"});
    qelm::NoiseConfig nc;
    nc.n_accessible = f.positive("n_accessible");
    nc.n_hidden = f.count("n_hidden");
    require_budget(nc.n_accessible + nc.n_hidden, kMaxDenseQubits, "n_accessible + n_hidden");
    nc.max_layers = f.positive("max_layers");
    nc.noise_p = f.reals("noise_p");
    for (double p : nc.noise_p) require(p >= 0 && p <= 1, "field 'noise_p': entries must lie in [0, 1]");
    nc.n_inputs = f.count("n_inputs");
    require(nc.n_inputs >= 2, "field 'n_inputs': must be >= 2");
    nc.observable = f.text("observable");
    parse_prefix(f, "observable", nc.n_accessible + nc.n_hidden);
    nc.reservoir = parse_reservoir(f.nested("reservoir"));
    nc.seed = seed;
    const auto res = qelm::noise_concentration_experiment(nc);
    for (const auto& pt : res.points) {
      auto r = base_row("noise", seed);
      r.n_accessible = static_cast<int>(nc.n_accessible);
      r.n_hidden = static_cast<int>(nc.n_hidden);
      r.depth = static_cast<int>(pt.layers);
      r.noise_p = pt.p;
      r.n_samples = nc.n_inputs;
      r.statistic = "mean_distance";
      r.value = pt.mean_distance;
      r.stderr_ = pt.stderr_;
      r.bound = pt.bound.rhs;
      r.satisfied = pt.bound.satisfied;
      rows.push_back(r);
    }
    for (std::size_t i = 0; i < nc.noise_p.size(); ++i) {
      auto r = base_row("noise", seed);
      r.n_accessible = static_cast<int>(nc.n_accessible);
      r.n_hidden = static_cast<int>(nc.n_hidden);
      r.noise_p = nc.noise_p[i];
      r.n_samples = nc.n_inputs;
      r.statistic = "log_slope";
      r.value = res.slopes[i];
      rows.push_back(r);
    }
  } else {
    throw ConfigError("field 'kind': '" + kind + "' is not one of {encoding, reservoir, entanglement, global, noise}");
  }
  out.csv = qelm::concentration_csv(rows);
  return out;
}

Output dispatch(const std::string& command, const json& cfg) {
  if (command == "spectrum") return run_spectrum(cfg);
  if (command == "richness") return run_richness(cfg);
  if (command == "train") return run_train(cfg);
  if (command == "expressivity") return run_expressivity(cfg);
  if (command == "concentration") return run_concentration(cfg);
  if (command == "haarstats") return run_haarstats(cfg);
  if (command == "hypothesis") return run_hypothesis(cfg);
  if (command == "surrogate") return run_surrogate(cfg);
  throw ConfigError("unknown command '" + command + "'");
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << contents;
}

int run(const std::string& command, const Options& opt) {
  try {
    const json cfg = resolve_config(command, opt);
    const auto t0 = std::chrono::steady_clock::now();
    Output out;
    try {
      out = dispatch(command, cfg);
    } catch (const json::exception& e) {
      throw ConfigError(e.what());
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const std::filesystem::path dir(opt.out_dir);
    std::filesystem::create_directories(dir);
    out.csv.save((dir / (command + ".csv")).string());
    for (const auto& [name, text] : out.files) write_file(dir / name, text);
    json manifest;
    manifest["command"] = command;
    manifest["config"] = cfg;
    manifest["versions"] = {{"qelm", QELM_VERSION},
                            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                          std::to_string(EIGEN_MINOR_VERSION)},
                            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                            {"cli11", CLI11_VERSION}};
    manifest["seed"] = cfg.at("seed");
    manifest["wall_time_s"] = wall;
    manifest["outputs"] = json::array({command + ".csv"});
    for (const auto& [name, text] : out.files) manifest["outputs"].push_back(name);
    for (const auto& [k, v] : out.extra.items()) manifest[k] = v;
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
    std::cout << "wrote " << (dir / (command + ".csv")).string() << " (" << wall << " s)\n";
    return 0;
  } catch (const BudgetError& e) {
    std::cerr << "qelm_cli " << command << ": refused: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "qelm_cli " << command << ": config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "qelm_cli " << command << ": config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "qelm_cli " << command << ": error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"QELM expressivity and concentration experiments"};
  app.require_subcommand(1);
  Options opt;
  std::uint64_t seed = 0;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"spectrum", "Fourier coefficients of observables"},
      {"richness", "Spectral richness per reservoir"},
      {"train", "Train a QELM by ridge regression on a Fourier target"},
      {"expressivity", "Rank of the coefficient matrix against its bound"},
      {"concentration", "Concentration sweeps (kind = encoding|reservoir|entanglement|global|noise)"},
      {"haarstats", "Fourier-coefficient statistics under Haar reservoirs"},
      {"hypothesis", "Hypothesis-testing success rates"},
      {"surrogate", "Full-Fourier and random-Fourier-feature surrogates"}};
  std::vector<CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config_path, "JSON config file (or a previous manifest.json)");
    sub->add_option("--seed", seed, "Master seed (overrides the config)");
    sub->add_option("--out", opt.out_dir, "Output directory")->capture_default_str();
    sub->add_option("--set", opt.sets, "Override key=value (dotted keys allowed; repeatable)");
    if (name == "concentration") sub->add_option("--kind", opt.kind, "encoding|reservoir|entanglement|global|noise");
    subs.push_back(sub);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  for (std::size_t i = 0; i < subs.size(); ++i)
    if (subs[i]->parsed()) {
      if (subs[i]->count("--seed")) opt.seed = seed;
      return run(commands[i].first, opt);
    }
  return 2;
}
