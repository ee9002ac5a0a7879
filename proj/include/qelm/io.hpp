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

/**
 * @file
 * Byte-stable CSV output and JSON (de)serialization of models.
 *
 * Numbers are written with 17 significant digits through the classic locale so
 * that identical runs produce identical files.
 */

#pragma once

#include <cmath>
#include <fstream>
#include <locale>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "qelm/concentration.hpp"
#include "qelm/fourier.hpp"
#include "qelm/model.hpp"

namespace qelm {

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(17);
  os << v;
  return os.str();
}

/// Minimal CSV table: header row then data rows; fields are never quoted, so
/// callers must keep commas out of text cells.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : columns_(header.size()) { row_strings(header); }

  CsvWriter& cell(const std::string& s) {
    if (s.find_first_of(",\n\"") != std::string::npos) throw std::invalid_argument("CsvWriter: text cell contains a separator");
    pending_.push_back(s);
    return *this;
  }
  CsvWriter& cell(const char* s) { return cell(std::string(s)); }
  CsvWriter& cell(double v) { return cell(format_double(v)); }
  CsvWriter& cell(bool b) { return cell(std::string(b ? "true" : "false")); }
  template <class I>
    requires std::is_integral_v<I>
  CsvWriter& cell(I v) {
    return cell(std::to_string(v));
  }

  void end_row() {
    if (pending_.size() != columns_) throw std::logic_error("CsvWriter: row has the wrong number of cells");
    row_strings(pending_);
    pending_.clear();
  }

  const std::string& str() const { return out_; }

  void save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << out_;
  }

 private:
  void row_strings(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ += ',';
      out_ += cells[i];
    }
    out_ += '\n';
  }

  std::size_t columns_;
  std::vector<std::string> pending_;
  std::string out_;
};

inline void append_spectrum(CsvWriter& csv, const FourierSpectrum& s) {
  for (std::size_t k = 0; k < s.size(); ++k)
    csv.cell(s.observable_id).cell(s.frequencies[k]).cell(s.coeffs[k].real()).cell(s.coeffs[k].imag()).end_row();
}

inline CsvWriter spectrum_csv(const std::vector<FourierSpectrum>& spectra) {
  CsvWriter csv({"observable", "omega", "re", "im"});
  for (const auto& s : spectra) append_spectrum(csv, s);
  return csv;
}

inline CsvWriter richness_csv() { return CsvWriter({"n_A", "n_H", "reservoir", "tol", "raw", "normalized"}); }

inline CsvWriter concentration_csv(const std::vector<ConcentrationRow>& rows) {
  CsvWriter csv({"experiment", "n_A", "n_H", "depth", "noise_p", "seed", "n_samples", "statistic", "value", "stderr",
                 "bound", "satisfied"});
  for (const auto& r : rows)
    csv.cell(r.experiment)
        .cell(r.n_accessible)
        .cell(r.n_hidden)
        .cell(r.depth)
        .cell(r.noise_p)
        .cell(r.seed)
        .cell(r.n_samples)
        .cell(r.statistic)
        .cell(r.value)
        .cell(r.stderr_)
        .cell(r.bound)
        .cell(r.satisfied)
        .end_row();
  return csv;
}

inline CsvWriter dataset_csv(const Dataset& d) {
  CsvWriter csv({"x", "y"});
  for (std::size_t i = 0; i < d.size(); ++i) csv.cell(d.x[i]).cell(d.y[i]).end_row();
  return csv;
}

/// Parse a two-column x,y CSV with a header line.
inline Dataset read_dataset_csv(std::istream& in) {
  Dataset d;
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("dataset CSV: empty input");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("dataset CSV: missing comma on line " + std::to_string(lineno));
    std::istringstream xs(line.substr(0, comma)), ys(line.substr(comma + 1));
    xs.imbue(std::locale::classic());
    ys.imbue(std::locale::classic());
    double x, y;
    if (!(xs >> x) || !(ys >> y)) throw std::invalid_argument("dataset CSV: bad number on line " + std::to_string(lineno));
    d.x.push_back(x);
    d.y.push_back(y);
  }
  return d;
}

// ---------------------------------------------------------------------------
// JSON

using json = nlohmann::ordered_json;

inline json to_json(const EncodingSpec& e) {
  json j;
  j["scheme"] = to_string(e.scheme());
  j["n_accessible"] = e.num_qubits();
  switch (e.scheme()) {
    case EncodingScheme::Product: {
      json eigs = json::array();
      for (const auto& [a, b] : e.per_qubit_eigs()) eigs.push_back({a, b});
      j["eigs"] = eigs;
      break;
    }
    case EncodingScheme::Diagonal: {
      const RealVector mu = e.generator_eigenvalues();
      j["eigs"] = std::vector<double>(mu.data(), mu.data() + mu.size());
      break;
    }
    case EncodingScheme::Layered:
      j["layers"] = e.layers();
      j["seed"] = e.seed();
      j["entangle"] = e.entangling();
      break;
    default: break;
  }
  return j;
}

inline EncodingSpec encoding_from_json(const json& j) {
  const std::string scheme = j.at("scheme").get<std::string>();
  const std::size_t n = j.value("n_accessible", std::size_t{0});
  if (scheme == "pauli") return EncodingSpec::pauli(n);
  if (scheme == "exponential") return EncodingSpec::exponential(n);
  if (scheme == "layered")
    return EncodingSpec::layered(n, j.at("layers").get<std::size_t>(), j.at("seed").get<std::uint64_t>(),
                                 j.value("entangle", true));
  if (scheme == "product") {
    std::vector<EncodingSpec::EigPair> eigs;
    for (const auto& p : j.at("eigs")) eigs.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    return EncodingSpec::product(eigs);
  }
  if (scheme == "diagonal") return EncodingSpec::diagonal(j.at("eigs").get<std::vector<double>>());
  throw std::invalid_argument("unknown encoding scheme '" + scheme + "'");
}

inline json to_json(const ReservoirSpec& r) {
  json j;
  j["kind"] = to_string(r.kind);
  switch (r.kind) {
    case ReservoirKind::Ising:
      j["J"] = r.J;
      j["Bx"] = r.Bx;
      j["Bz"] = r.Bz;
      j["t"] = r.t;
      break;
    case ReservoirKind::Haar: j["seed"] = r.seed; break;
    case ReservoirKind::LayeredRandom:
      j["depth"] = r.depth;
      j["seed"] = r.seed;
      break;
    default: break;
  }
  return j;
}

inline ReservoirSpec reservoir_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "identity") return ReservoirSpec::identity();
  if (kind == "ising")
    return ReservoirSpec::ising(j.value("J", -1.0), j.value("Bx", 0.0), j.value("Bz", 1.0), j.value("t", 10.0));
  if (kind == "ising_integrable") return ReservoirSpec::ising_integrable(j.value("t", 10.0));
  if (kind == "ising_chaotic") return ReservoirSpec::ising_chaotic(j.value("t", 10.0));
  if (kind == "haar") return ReservoirSpec::haar(j.value("seed", std::uint64_t{0}));
  if (kind == "layered") return ReservoirSpec::layered_random(j.value("depth", std::size_t{10}), j.value("seed", std::uint64_t{0}));
  throw std::invalid_argument("unknown reservoir kind '" + kind + "'");
}

inline json matrix_to_json(const Matrix& m) {
  json re = json::array(), im = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array(), c = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      r.push_back(m(i, k).real());
      c.push_back(m(i, k).imag());
    }
    re.push_back(r);
    im.push_back(c);
  }
  return json{{"re", re}, {"im", im}};
}

inline Matrix matrix_from_json(const json& j) {
  const auto& re = j.at("re");
  const auto& im = j.at("im");
  const std::size_t rows = re.size(), cols = rows ? re.at(0).size() : 0;
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t k = 0; k < cols; ++k) m(i, k) = cplx(re.at(i).at(k).get<double>(), im.at(i).at(k).get<double>());
  return m;
}

/// {encoding, reservoir, n_hidden, observables, eta, eta0, seed, shots, rho0}.
inline json model_to_json(const QelmModel& m) {
  json j;
  j["encoding"] = to_json(m.encoding());
  j["reservoir"] = to_json(m.reservoir());
  j["n_hidden"] = m.n_hidden();
  json obs = json::array();
  for (const auto& o : m.observables()) obs.push_back(o.str());
  j["observables"] = obs;
  j["eta"] = std::vector<double>(m.eta().data(), m.eta().data() + m.eta().size());
  j["eta0"] = m.eta0();
  j["seed"] = m.reservoir().seed;
  if (m.shots()) j["shots"] = *m.shots();
  j["rho0"] = matrix_to_json(m.rho0());
  return j;
}

inline QelmModel model_from_json(const json& j) {
  std::vector<PauliString> obs;
  for (const auto& s : j.at("observables")) obs.push_back(PauliString::parse(s.get<std::string>()));
  std::optional<std::uint64_t> shots;
  if (j.contains("shots")) shots = j.at("shots").get<std::uint64_t>();
  QelmModel m(encoding_from_json(j.at("encoding")), reservoir_from_json(j.at("reservoir")),
              j.at("n_hidden").get<std::size_t>(), matrix_from_json(j.at("rho0")), std::move(obs), shots);
  const auto eta = j.at("eta").get<std::vector<double>>();
  m.set_weights(Eigen::Map<const RealVector>(eta.data(), static_cast<Eigen::Index>(eta.size())), j.at("eta0").get<double>());
  return m;
}

}  // namespace qelm
